// esplab: command-line front end.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error (bad flags,
// missing input files, malformed configuration).

#include "esplab/conditions.hpp"
#include "esplab/data.hpp"
#include "esplab/esp_index.hpp"
#include "esplab/heatmap.hpp"
#include "esplab/rng.hpp"
#include "esplab/sweep.hpp"
#include "esplab/task_eval.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace esplab;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct DataOptions {
    std::string path;
    std::string format = "laser";
    std::string silso_from = "1749-01";
    std::string silso_to = "2018-09";

    void add_to(CLI::App& cmd, bool required = true)
    {
        auto* opt = cmd.add_option("--data", path, "Input series (Laser text or SILSO monthly file)");
        if (required)
            opt->required();
        cmd.add_option("--format", format, "Data format")->check(CLI::IsMember({"laser", "silso"}))->capture_default_str();
        cmd.add_option("--silso-from", silso_from, "First month (YYYY-MM) for SILSO data")->capture_default_str();
        cmd.add_option("--silso-to", silso_to, "Last month (YYYY-MM) for SILSO data")->capture_default_str();
    }

    Signal load() const
    {
        if (path.empty())
            throw UsageError("no data file given (--data)");
        if (!fs::exists(path))
            throw UsageError("data file not found: " + path);
        if (format == "silso") {
            YearMonth from, to;
            try {
                from = YearMonth::parse(silso_from);
                to = YearMonth::parse(silso_to);
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            return load_sunspot_silso(path, from, to);
        }
        if (format != "laser")
            throw UsageError("unknown data format '" + format + "'");
        return load_laser(path);
    }

    std::size_t default_train_len() const { return format == "silso" ? 3000 : 5000; }
};

struct ReservoirOptions {
    double rho = 1.5;
    double scale = 1.0;
    std::size_t n_r = 100;
    std::uint64_t seed = 1;

    void add_to(CLI::App& cmd)
    {
        cmd.add_option("--rho", rho, "Spectral radius of W")->capture_default_str();
        cmd.add_option("--scale", scale, "Input scaling (W_in entries uniform in [-scale, scale])")->capture_default_str();
        cmd.add_option("--n-r", n_r, "Reservoir size")->capture_default_str();
        cmd.add_option("--seed", seed, "Reservoir seed")->capture_default_str();
    }

    ReservoirParams build(std::size_t n_u) const { return init_reservoir(n_r, n_u, rho, scale, seed); }
};

std::size_t resolve_test_len(const std::string& text, const Signal& s, std::size_t train_len)
{
    if (text == "auto") {
        if (s.length() < train_len + 2)
            throw std::invalid_argument(fmt::format("series of {} samples leaves no test data after {} training steps",
                                                    s.length(), train_len));
        return s.length() - 1 - train_len;
    }
    std::size_t n = 0;
    try {
        std::size_t pos = 0;
        n = std::stoul(text, &pos);
        if (pos != text.size())
            throw std::invalid_argument(text);
    } catch (const std::exception&) {
        throw UsageError("--test-len expects a number or 'auto', got '" + text + "'");
    }
    return n;
}

std::string g17(double v)
{
    return fmt::format("{:.17g}", v);
}

// esp-index ---------------------------------------------------------------

struct EspIndexCmd {
    DataOptions data;
    ReservoirOptions res;
    std::size_t horizon = 1000, transient = 500, trials = 50;
    unsigned threads = 1;
    double tol = kDefaultEspTolerance;
    bool per_trial = false;

    void setup(CLI::App& app)
    {
        auto* cmd = app.add_subcommand("esp-index", "Compute the ESP index of one reservoir on a signal");
        data.add_to(*cmd);
        res.add_to(*cmd);
        cmd->add_option("--L", horizon, "Signal steps driven")->capture_default_str();
        cmd->add_option("--T", transient, "Transient steps discarded")->capture_default_str();
        cmd->add_option("--P", trials, "Random initial states")->capture_default_str();
        cmd->add_option("--threads", threads, "Worker threads for the trials")->capture_default_str();
        cmd->add_option("--tol", tol, "Index at or below which the ESP counts as satisfied")->capture_default_str();
        cmd->add_flag("--per-trial", per_trial, "Print every trial's mean deviation");
        cmd->callback([this] { run(); });
    }

    void run() const
    {
        const Signal s = data.load();
        const ReservoirParams p = res.build(s.dim());
        EspIndexConfig cfg;
        cfg.p_trials = trials;
        cfg.transient = transient;
        cfg.horizon = horizon;
        cfg.seed = derive_seed(res.seed, {1});
        const EspIndexResult r = esp_index(p, s, cfg, threads);

        const auto [lo, hi] = std::minmax_element(r.per_trial.begin(), r.per_trial.end());
        fmt::print("esp_index={}\n", g17(r.index));
        fmt::print("empirical_esp={}\n", is_esp_empirical(r, tol) ? 1 : 0);
        fmt::print("trials={} min_trial={} max_trial={}\n", r.per_trial.size(), g17(*lo), g17(*hi));
        if (per_trial)
            for (std::size_t i = 0; i < r.per_trial.size(); ++i)
                fmt::print("trial[{}]={}\n", i, g17(r.per_trial[i]));
    }
};

// conditions --------------------------------------------------------------

struct ConditionsCmd {
    DataOptions data;
    ReservoirOptions res;
    std::size_t horizon = 1000;
    SchurSearchOptions schur;

    void setup(CLI::App& app)
    {
        auto* cmd = app.add_subcommand("conditions", "Evaluate the necessary and sufficient ESP conditions");
        data.add_to(*cmd);
        res.add_to(*cmd);
        cmd->add_option("--horizon", horizon, "Steps averaged by the input-driven condition")->capture_default_str();
        cmd->add_option("--schur-max-iters", schur.max_iters, "Certificate search iterations")->capture_default_str();
        cmd->add_option("--schur-eps", schur.eps, "Certificate margin below 1")->capture_default_str();
        cmd->callback([this] { run(); });
    }

    void run() const
    {
        const Signal s = data.load();
        const ReservoirParams p = res.build(s.dim());
        const ConditionReport r = evaluate_conditions(p, s, horizon, schur);
        fmt::print("spectral_radius={}\n", g17(spectral_radius(p.w())));
        fmt::print("spectral_norm={}\n", g17(spectral_norm(p.w())));
        fmt::print("necessary={}\n", r.necessary_holds ? 1 : 0);
        fmt::print("schur={} best_norm={}\n", to_string(r.schur.status), g17(r.schur.best_norm));
        fmt::print("input_condition={} lhs={} rhs={}\n", r.input.holds ? 1 : 0, g17(r.input.lhs), g17(r.input.rhs));
        fmt::print("sufficient={}\n", r.sufficient_holds() ? 1 : 0);
    }
};

// train-eval --------------------------------------------------------------

struct TrainEvalCmd {
    DataOptions data;
    ReservoirOptions res;
    std::optional<std::size_t> train_len;
    std::string test_len = "auto";
    std::size_t washout = 1000;
    double val_fraction = 0.2;
    std::string lambda_grid;

    void setup(CLI::App& app)
    {
        auto* cmd = app.add_subcommand("train-eval", "Train a ridge readout and report next-step prediction error");
        data.add_to(*cmd);
        res.add_to(*cmd);
        cmd->add_option("--train-len", train_len, "Training steps (default 5000 laser, 3000 silso)");
        cmd->add_option("--test-len", test_len, "Test steps or 'auto' for the remainder")->capture_default_str();
        cmd->add_option("--washout", washout, "Initial training states discarded")->capture_default_str();
        cmd->add_option("--val-fraction", val_fraction, "Hold-out fraction for ridge selection")->capture_default_str();
        cmd->add_option("--lambda-grid", lambda_grid, "Ridge grid: a,b,c or start:stop:step (default 1e-8..1e2)");
        cmd->callback([this] { run(); });
    }

    void run() const
    {
        const Signal s = data.load();
        const std::size_t train = train_len.value_or(data.default_train_len());
        const std::size_t test = resolve_test_len(test_len, s, train);
        const NextStepTask task = make_next_step_task(s, train, test, washout);
        TrainEvalOptions opts;
        opts.val_fraction = val_fraction;
        if (!lambda_grid.empty())
            opts.lambda_grid = parse_value_list(lambda_grid);
        const ReservoirParams p = res.build(s.dim());
        const TrainEvalResult r = train_and_evaluate(p, task, opts);
        fmt::print("train_len={} test_len={} washout={}\n", train, test, washout);
        fmt::print("lambda={}\n", g17(r.weights.lambda));
        fmt::print("train_mse={}\n", g17(r.train_mse));
        fmt::print("test_mse={}\n", g17(r.test_mse));
        fmt::print("log10_test_mse={}\n", g17(std::log10(r.test_mse)));
    }
};

// sweep -------------------------------------------------------------------

struct SweepCmd {
    DataOptions data;
    std::string config_path;
    std::string out;
    std::string cells_out;
    unsigned threads = 1;
    bool fresh = false;
    bool quiet = false;

    void setup(CLI::App& app)
    {
        auto* cmd = app.add_subcommand("sweep", "Run the spectral radius x input scaling grid");
        data.add_to(*cmd, false);
        cmd->add_option("--config", config_path, "key=value configuration file");
        cmd->add_option("--out", out, "Results CSV (resumed if it exists)")->required();
        cmd->add_option("--cells-out", cells_out, "Per-cell summary CSV (default: <out> with .cells.csv)");
        cmd->add_option("--threads", threads, "Worker threads")->capture_default_str();
        cmd->add_flag("--fresh", fresh, "Overwrite an existing results file instead of resuming");
        cmd->add_flag("--quiet", quiet, "No progress output");
        cmd->callback([this] { run(); });
    }

    void run()
    {
        std::vector<std::pair<std::string, std::string>> sweep_kv;
        bool train_len_set = false;
        if (!config_path.empty()) {
            if (!fs::exists(config_path))
                throw UsageError("config file not found: " + config_path);
            std::vector<std::pair<std::string, std::string>> kv;
            try {
                kv = read_key_value_file(config_path);
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            for (auto& [k, v] : kv) {
                if (k == "data") {
                    if (data.path.empty())
                        data.path = (fs::path{config_path}.parent_path() / v).string();
                } else if (k == "format") {
                    data.format = v;
                } else if (k == "silso_from") {
                    data.silso_from = v;
                } else if (k == "silso_to") {
                    data.silso_to = v;
                } else {
                    train_len_set = train_len_set || k == "train_len";
                    sweep_kv.emplace_back(k, v);
                }
            }
        }

        SweepConfig cfg;
        try {
            if (!train_len_set)
                cfg.train_len = data.default_train_len();
            cfg = SweepConfig::from_key_values(sweep_kv, cfg);
            cfg.validate();
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }

        const Signal s = data.load();
        const std::size_t test_len = cfg.test_len ? cfg.test_len : resolve_test_len("auto", s, cfg.train_len);
        const NextStepTask task = make_next_step_task(s, cfg.train_len, test_len, cfg.washout);

        if (fresh)
            fs::remove(out);
        ResultsAppender appender{out, cfg};
        SweepRunOptions run_opts;
        run_opts.threads = threads;
        for (const auto& r : appender.existing())
            run_opts.completed.insert(r.key());

        const std::size_t total = cfg.rho_values.size() * cfg.scale_values.size() * cfg.n_seeds;
        std::size_t done = run_opts.completed.size();
        if (!quiet && done)
            fmt::print(stderr, "resuming: {} of {} records already present\n", done, total);
        run_opts.on_record = [&](const SweepRecord& r) {
            appender.append(r);
            ++done;
            if (!quiet && (done % 50 == 0 || done == total))
                fmt::print(stderr, "{}/{} records\n", done, total);
        };

        SweepResults fresh_results = run_sweep(cfg, s, task, run_opts);
        SweepResults merged{cfg, appender.existing()};
        merged.records.insert(merged.records.end(), fresh_results.records.begin(), fresh_results.records.end());
        sort_records(merged.records);
        write_results(merged, out);

        const CellGrid grid = merged.aggregate();
        const auto normalized = normalize_index_grid(grid.mean_esp());
        std::size_t failures = 0;
        for (const auto& c : grid.cells)
            failures += c.n_failed;

        if (cells_out.empty())
            cells_out = fs::path{out}.replace_extension(".cells.csv").string();
        {
            std::ofstream f{cells_out, std::ios::binary | std::ios::trunc};
            f << "rho,input_scale,n_ok,n_failed,mean_esp_index,normalized_esp_index,mean_train_mse,mean_test_mse,"
                 "mean_log10_test_mse,necessary_all,sufficient_all\n";
            for (std::size_t k = 0; k < grid.cells.size(); ++k) {
                const CellSummary& c = grid.cells[k];
                f << fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", g17(c.rho), g17(c.input_scale), c.n_ok,
                                 c.n_failed, g17(c.mean_esp_index), g17(normalized[k]), g17(c.mean_train_mse),
                                 g17(c.mean_test_mse), g17(c.mean_log10_test_mse), c.necessary_all ? 1 : 0,
                                 c.sufficient_all ? 1 : 0);
            }
            if (!f)
                throw std::runtime_error("cannot write " + cells_out);
        }
        fmt::print("records={} failed={} out={} cells={}\n", merged.records.size(), failures, out, cells_out);
    }
};

// plot --------------------------------------------------------------------

struct PlotCmd {
    std::string results;
    std::string quantity = "esp_index_normalized";
    std::string out;
    HeatmapOptions opts;

    void setup(CLI::App& app)
    {
        auto* cmd = app.add_subcommand("plot", "Render a results file as an SVG heatmap");
        cmd->add_option("--results", results, "Results CSV from 'sweep'")->required();
        cmd->add_option("--quantity", quantity, "esp_index_normalized or log10_test_mse")
          ->check(CLI::IsMember({"esp_index_normalized", "log10_test_mse"}))
          ->capture_default_str();
        cmd->add_option("--out", out, "Output SVG")->required();
        cmd->add_option("--mse-min", opts.log10_mse_min, "Darkest log10(MSE)")->capture_default_str();
        cmd->add_option("--mse-max", opts.log10_mse_max, "Lightest log10(MSE)")->capture_default_str();
        cmd->callback([this] { run(); });
    }

    void run() const
    {
        if (!fs::exists(results))
            throw UsageError("results file not found: " + results);
        const SweepResults r = read_results(results);
        write_heatmap(r, parse_heatmap_quantity(quantity), out, opts);
        fmt::print("wrote {}\n", out);
    }
};

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"esplab: echo state property index and reservoir stability sweeps"};
    app.require_subcommand(1);

    EspIndexCmd esp_cmd;
    ConditionsCmd cond_cmd;
    TrainEvalCmd train_cmd;
    SweepCmd sweep_cmd;
    PlotCmd plot_cmd;
    esp_cmd.setup(app);
    cond_cmd.setup(app);
    train_cmd.setup(app);
    sweep_cmd.setup(app);
    plot_cmd.setup(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "esplab: usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const UsageError& e) {
        std::cerr << "esplab: usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "esplab: error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
