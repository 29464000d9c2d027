#include "esplab/sweep.hpp"

#include "test_helpers.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

using namespace esplab;
using namespace esplab::testing;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

SweepConfig small_config()
{
    SweepConfig c;
    c.rho_values = {0.5, 1.5};
    c.scale_values = {1.0, 5.0};
    c.n_seeds = 2;
    c.n_r = 8;
    c.esp.p_trials = 3;
    c.esp.transient = 50;
    c.esp.horizon = 100;
    c.train_len = 150;
    c.test_len = 40;
    c.washout = 20;
    c.lambda_grid = {1e-6, 1e-3, 1.0};
    c.schur.max_iters = 50;
    return c;
}

Signal small_signal()
{
    RowMatrix m(200, 1);
    const Signal noise = noise_signal(200, 1, 11, 0.05);
    for (Eigen::Index t = 0; t < 200; ++t)
        m(t, 0) = 0.5 + 0.4 * std::sin(0.3 * static_cast<double>(t)) + noise.at(static_cast<std::size_t>(t))(0);
    return Signal{m};
}

struct Fixture {
    SweepConfig cfg = small_config();
    Signal signal = small_signal();
    NextStepTask task = make_next_step_task(signal, cfg.train_len, cfg.test_len, cfg.washout);
};

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in{p, std::ios::binary};
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::filesystem::path& p, const std::string& text)
{
    std::ofstream out{p, std::ios::binary | std::ios::trunc};
    out << text;
}

void expect_identical(const std::vector<SweepRecord>& a, const std::vector<SweepRecord>& b)
{
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        EXPECT_TRUE(identical(a[i], b[i])) << format_record(a[i]) << "\nvs\n" << format_record(b[i]);
}

SweepRecord record(double rho, double scale, std::size_t k, double esp, bool nec, bool cert, bool input,
                   double test_mse)
{
    SweepRecord r;
    r.rho = rho;
    r.input_scale = scale;
    r.seed_index = k;
    r.esp_index = esp;
    r.necessary_holds = nec;
    r.schur_status = cert ? SchurStatus::certified : SchurStatus::unknown;
    r.input_condition_holds = input;
    r.lambda_used = 1e-3;
    r.train_mse = test_mse / 2;
    r.test_mse = test_mse;
    return r;
}

} // namespace

TEST(ParseValueList, ListsAndRanges)
{
    EXPECT_EQ(parse_value_list("1,2.5, 4"), (std::vector<double>{1.0, 2.5, 4.0}));
    EXPECT_EQ(parse_value_list("0.1:0.3:0.1"), (std::vector<double>{0.1, 0.2, 0.3}));
    EXPECT_EQ(parse_value_list("1:30:1").size(), 30u);
    const auto rho = parse_value_list("0.1:4.0:0.1");
    ASSERT_EQ(rho.size(), 40u);
    EXPECT_EQ(rho[29], 3.0);
    EXPECT_THROW(parse_value_list("1:2"), std::invalid_argument);
    EXPECT_THROW(parse_value_list("1,x"), std::invalid_argument);
}

TEST(SweepConfig, DefaultsDescribeTheFullGrid)
{
    const SweepConfig c;
    EXPECT_EQ(c.rho_values.size(), 40u);
    EXPECT_EQ(c.scale_values.size(), 30u);
    EXPECT_DOUBLE_EQ(c.rho_values.front(), 0.1);
    EXPECT_DOUBLE_EQ(c.rho_values.back(), 4.0);
    EXPECT_EQ(c.n_seeds, 20u);
    EXPECT_EQ(c.n_r, 100u);
    EXPECT_EQ(c.esp.p_trials, 50u);
    EXPECT_EQ(c.esp.transient, 500u);
    EXPECT_EQ(c.esp.horizon, 1000u);
    EXPECT_NO_THROW(c.validate());
}

TEST(SweepConfig, KeyValueRoundTrip)
{
    SweepConfig c = small_config();
    c.base_seed = 123;
    c.condition_horizon = 77;
    const SweepConfig back = SweepConfig::from_key_values(c.to_key_values());
    EXPECT_EQ(back, c);
    EXPECT_EQ(back.rho_values, c.rho_values);
    EXPECT_EQ(back.lambda_grid, c.lambda_grid);
    EXPECT_EQ(back.effective_condition_horizon(), 77u);
}

TEST(SweepConfig, RejectsUnknownKeysAndBadValues)
{
    EXPECT_THROW(SweepConfig::from_key_values({{"rho_valuez", "1"}}), std::invalid_argument);
    EXPECT_THROW(SweepConfig::from_key_values({{"n_seeds", "two"}}), std::invalid_argument);
    SweepConfig c = small_config();
    c.washout = c.train_len;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = small_config();
    c.rho_values = {1.0, 1.0};
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(SweepConfig, ReadsKeyValueFiles)
{
    TempDir dir{"kv"};
    spit(dir / "c.conf", "# comment\nn_seeds = 3\n\nrho_values=0.5,1.5  # trailing\n");
    const auto kv = read_key_value_file(dir / "c.conf");
    const SweepConfig c = SweepConfig::from_key_values(kv, small_config());
    EXPECT_EQ(c.n_seeds, 3u);
    EXPECT_EQ(c.rho_values, (std::vector<double>{0.5, 1.5}));
    spit(dir / "bad.conf", "novalue\n");
    EXPECT_THROW(read_key_value_file(dir / "bad.conf"), std::invalid_argument);
}

TEST(NormalizeIndexGrid, Cases)
{
    EXPECT_EQ(normalize_index_grid({0.0, 2.0, 4.0}), (std::vector<double>{0.0, 0.5, 1.0}));
    EXPECT_EQ(normalize_index_grid({0.0, 0.0}), (std::vector<double>{0.0, 0.0}));
    const auto with_nan = normalize_index_grid({kNaN, 3.0, 1.5});
    EXPECT_TRUE(std::isnan(with_nan[0]));
    EXPECT_EQ(with_nan[1], 1.0);
    EXPECT_EQ(with_nan[2], 0.5);
    EXPECT_THROW(normalize_index_grid({}), std::invalid_argument);
}

TEST(CellSeed, DistinctAcrossCells)
{
    std::set<std::uint64_t> seen;
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j)
            for (std::size_t k = 0; k < 5; ++k)
                seen.insert(cell_seed(1, i, j, k));
    EXPECT_EQ(seen.size(), 125u);
    EXPECT_NE(cell_seed(1, 0, 0, 0), cell_seed(2, 0, 0, 0));
}

TEST(EvaluateCell, RebuildableFromSeeds)
{
    Fixture f;
    const SweepRecord r = evaluate_cell(f.cfg, f.signal, f.task, 1, 0, 1);
    ASSERT_FALSE(r.failed()) << r.error;
    EXPECT_EQ(r.rho, 1.5);
    EXPECT_EQ(r.input_scale, 1.0);
    EXPECT_EQ(r.seed_index, 1u);

    const std::uint64_t cell = cell_seed(f.cfg.base_seed, 1, 0, 1);
    const ReservoirParams p = init_reservoir(f.cfg.n_r, 1, 1.5, 1.0, derive_seed(cell, {0}));
    EspIndexConfig esp = f.cfg.esp;
    esp.seed = derive_seed(cell, {1});
    EXPECT_EQ(r.esp_index, esp_index(p, f.signal, esp).index);
    EXPECT_EQ(r.necessary_holds, necessary_condition(p.w()));
    EXPECT_FALSE(r.necessary_holds);
    EXPECT_EQ(r.schur_status, SchurStatus::unknown);
    const TrainEvalResult te = train_and_evaluate(p, f.task, {f.cfg.lambda_grid, f.cfg.val_fraction});
    EXPECT_EQ(r.test_mse, te.test_mse);
    EXPECT_EQ(r.lambda_used, te.weights.lambda);
}

TEST(EvaluateCell, FailureBecomesSentinelRecord)
{
    Fixture f;
    const NextStepTask no_test = make_next_step_task(f.signal, f.cfg.train_len, 0, f.cfg.washout);
    const SweepRecord r = evaluate_cell(f.cfg, f.signal, no_test, 0, 0, 0);
    EXPECT_TRUE(r.failed());
    EXPECT_TRUE(std::isnan(r.test_mse));
    EXPECT_TRUE(std::isnan(r.esp_index));
    EXPECT_EQ(r.error.find(','), std::string::npos);
    EXPECT_EQ(r.error.find('\n'), std::string::npos);
}

TEST(RunSweep, CoversTheGridInSortedOrder)
{
    Fixture f;
    const SweepResults res = run_sweep(f.cfg, f.signal, f.task);
    ASSERT_EQ(res.records.size(), 8u);
    EXPECT_TRUE(std::is_sorted(res.records.begin(), res.records.end(),
                               [](const auto& a, const auto& b) { return a.key() < b.key(); }));
    for (const auto& r : res.records)
        EXPECT_FALSE(r.failed()) << r.error;
    EXPECT_EQ(res.config, f.cfg);
}

TEST(RunSweep, ThreadCountDoesNotChangeResults)
{
    Fixture f;
    const SweepResults one = run_sweep(f.cfg, f.signal, f.task, {.threads = 1});
    const SweepResults many = run_sweep(f.cfg, f.signal, f.task, {.threads = 4});
    expect_identical(one.records, many.records);
}

TEST(RunSweep, AddingRealizationsKeepsExistingOnes)
{
    Fixture f;
    const SweepResults two = run_sweep(f.cfg, f.signal, f.task);
    SweepConfig more = f.cfg;
    more.n_seeds = 3;
    const SweepResults three = run_sweep(more, f.signal, f.task);
    std::vector<SweepRecord> first_two;
    for (const auto& r : three.records)
        if (r.seed_index < 2)
            first_two.push_back(r);
    expect_identical(first_two, two.records);
}

TEST(RunSweep, SkipsCompletedAndReportsNewRecords)
{
    Fixture f;
    SweepRunOptions opts;
    opts.completed = {{0.5, 1.0, 0}, {1.5, 5.0, 1}};
    std::size_t callbacks = 0;
    opts.on_record = [&](const SweepRecord&) { ++callbacks; };
    const SweepResults res = run_sweep(f.cfg, f.signal, f.task, opts);
    EXPECT_EQ(res.records.size(), 6u);
    EXPECT_EQ(callbacks, 6u);
    for (const auto& r : res.records)
        EXPECT_FALSE(opts.completed.contains(r.key()));
}

TEST(ResultsFile, RoundTripIsBitExact)
{
    Fixture f;
    TempDir dir{"results"};
    SweepResults res = run_sweep(f.cfg, f.signal, f.task);
    res.records.push_back(evaluate_cell(f.cfg, f.signal,
                                        make_next_step_task(f.signal, f.cfg.train_len, 0, f.cfg.washout), 1, 1, 2));
    sort_records(res.records);
    write_results(res, dir / "r.csv");
    const SweepResults back = read_results(dir / "r.csv");
    EXPECT_EQ(back.config, res.config);
    expect_identical(back.records, res.records);

    write_results(back, dir / "r2.csv");
    EXPECT_EQ(slurp(dir / "r.csv"), slurp(dir / "r2.csv"));
    const std::string text = slurp(dir / "r.csv");
    EXPECT_EQ(text.rfind("# esplab sweep results v1\n", 0), 0u);
    EXPECT_NE(text.find(std::string{kResultsColumns} + "\n"), std::string::npos);
}

TEST(ResultsFile, SchemaErrors)
{
    Fixture f;
    TempDir dir{"schema"};
    write_results(run_sweep(f.cfg, f.signal, f.task), dir / "r.csv");
    const std::string text = slurp(dir / "r.csv");

    std::string renamed = text;
    renamed.replace(renamed.find("test_mse"), 8, "tst_mse_");
    spit(dir / "col.csv", renamed);
    try {
        read_results(dir / "col.csv");
        ADD_FAILURE() << "expected SchemaError";
    } catch (const SchemaError& e) {
        EXPECT_NE(std::string{e.what()}.find("tst_mse_"), std::string::npos);
    }

    std::string version = text;
    version.replace(version.find("v1"), 2, "v9");
    spit(dir / "ver.csv", version);
    EXPECT_THROW(read_results(dir / "ver.csv"), SchemaError);

    spit(dir / "bad.csv", text + "0.5,1,9,notanumber,1,unknown,0,1,1,1,\n");
    EXPECT_THROW(read_results(dir / "bad.csv"), SchemaError);

    spit(dir / "garbage.csv", "hello\n");
    EXPECT_THROW(read_results(dir / "garbage.csv"), SchemaError);
}

TEST(ResultsFile, TruncatedTail)
{
    Fixture f;
    TempDir dir{"trunc"};
    const SweepResults res = run_sweep(f.cfg, f.signal, f.task);
    write_results(res, dir / "r.csv");
    const std::string text = slurp(dir / "r.csv");
    spit(dir / "t.csv", text.substr(0, text.size() - 10));
    EXPECT_THROW(read_results(dir / "t.csv"), SchemaError);
    const SweepResults partial = read_results(dir / "t.csv", true);
    EXPECT_EQ(partial.records.size(), res.records.size() - 1);
}

TEST(ResultsAppender, ResumeAfterInterruptionMatchesFullRun)
{
    Fixture f;
    TempDir dir{"resume"};
    const auto path = dir / "r.csv";
    const SweepResults full = run_sweep(f.cfg, f.signal, f.task);

    {
        ResultsAppender app{path, f.cfg};
        EXPECT_TRUE(app.existing().empty());
        for (std::size_t i = 0; i < 3; ++i)
            app.append(full.records[i]);
    }
    // Simulate a kill in the middle of the fourth row.
    {
        std::ofstream out{path, std::ios::binary | std::ios::app};
        out << format_record(full.records[3]).substr(0, 12);
    }

    ResultsAppender app{path, f.cfg};
    ASSERT_EQ(app.existing().size(), 3u);
    SweepRunOptions opts;
    for (const auto& r : app.existing())
        opts.completed.insert(r.key());
    opts.on_record = [&](const SweepRecord& r) { app.append(r); };
    const SweepResults rest = run_sweep(f.cfg, f.signal, f.task, opts);
    EXPECT_EQ(rest.records.size(), 5u);

    SweepResults merged = read_results(path);
    sort_records(merged.records);
    expect_identical(merged.records, full.records);
}

TEST(ResultsAppender, RejectsDifferentConfig)
{
    Fixture f;
    TempDir dir{"cfg"};
    { ResultsAppender app{dir / "r.csv", f.cfg}; }
    SweepConfig other = f.cfg;
    other.n_seeds = 5;
    EXPECT_THROW((ResultsAppender{dir / "r.csv", other}), SchemaError);
}

TEST(Aggregate, HandBuiltRecords)
{
    SweepResults res;
    res.config = small_config();
    res.records = {
      record(0.5, 1.0, 0, 0.0, true, true, false, 1e-4),
      record(0.5, 1.0, 1, 0.2, true, false, true, 1e-2),
      record(1.5, 1.0, 0, 3.0, false, false, false, 0.1),
      record(1.5, 5.0, 0, 1.0, false, false, true, 1e-3),
    };
    SweepRecord failed = record(1.5, 5.0, 1, kNaN, false, false, false, kNaN);
    failed.error = "boom";
    res.records.push_back(failed);

    const CellGrid g = res.aggregate();
    const CellSummary& a = g.at(0, 0);
    EXPECT_EQ(a.n_ok, 2u);
    EXPECT_DOUBLE_EQ(a.mean_esp_index, 0.1);
    EXPECT_DOUBLE_EQ(a.mean_log10_test_mse, -3.0);
    EXPECT_DOUBLE_EQ(a.mean_test_mse, (1e-4 + 1e-2) / 2);
    EXPECT_TRUE(a.necessary_all);
    EXPECT_TRUE(a.sufficient_all);

    const CellSummary& b = g.at(1, 1);
    EXPECT_EQ(b.n_ok, 1u);
    EXPECT_EQ(b.n_failed, 1u);
    EXPECT_DOUBLE_EQ(b.mean_esp_index, 1.0);
    EXPECT_FALSE(b.necessary_all);
    EXPECT_TRUE(b.sufficient_all);

    EXPECT_FALSE(g.at(1, 0).sufficient_all);
    const CellSummary& empty = g.at(0, 1);
    EXPECT_EQ(empty.n_ok, 0u);
    EXPECT_TRUE(std::isnan(empty.mean_esp_index));
    EXPECT_FALSE(empty.necessary_all);

    res.records.push_back(record(9.0, 1.0, 0, 0.0, true, true, true, 1.0));
    EXPECT_THROW(res.aggregate(), SchemaError);
}
