#include "esplab/sweep.hpp"

#include "esplab/parallel.hpp"
#include "esplab/rng.hpp"
#include "text.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>

namespace esplab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr const char* kResultsMagic = "# esplab sweep results v";

std::vector<double> arange(double start, double stop, double step)
{
    std::vector<double> out;
    const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (long i = 0; i < n; ++i)
        out.push_back(std::round((start + static_cast<double>(i) * step) * 1e12) / 1e12);
    return out;
}

std::string join(const std::vector<double>& values)
{
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i)
        out += (i ? "," : "") + fmt::format("{}", values[i]);
    return out;
}

template <typename Int>
Int parse_integer(const std::string& key, const std::string& value)
{
    Int out{};
    if (!detail::parse_int(detail::trim(value), out))
        throw std::invalid_argument("config key '" + key + "': expected an integer, got '" + value + "'");
    return out;
}

std::size_t parse_size_or_auto(const std::string& key, const std::string& value)
{
    return detail::trim(value) == "auto" ? 0 : parse_integer<std::size_t>(key, value);
}

double parse_real(const std::string& key, const std::string& value)
{
    double out = 0.0;
    if (!detail::parse_double(detail::trim(value), out))
        throw std::invalid_argument("config key '" + key + "': expected a real number, got '" + value + "'");
    return out;
}

void check_grid(const char* name, const std::vector<double>& values)
{
    if (values.empty())
        throw std::invalid_argument(std::string{name} + " must not be empty");
    for (double v : values)
        if (!std::isfinite(v) || v < 0.0)
            throw std::invalid_argument(std::string{name} + " must hold finite nonnegative values");
    auto sorted = values;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw std::invalid_argument(std::string{name} + " contains duplicate values");
}

std::string sanitize(std::string s)
{
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r')
            c = c == ',' ? ';' : ' ';
    return s.empty() ? std::string{"error"} : s;
}

bool same_bits(double a, double b)
{
    return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

std::string real17(double v)
{
    if (std::isnan(v))
        return "nan";
    return fmt::format("{:.17g}", v);
}

} // namespace

SweepConfig::SweepConfig() : rho_values(arange(0.1, 4.0, 0.1)), scale_values(arange(1.0, 30.0, 1.0)) {}

std::vector<double> parse_value_list(const std::string& text)
{
    const auto body = detail::trim(text);
    if (body.find(':') != std::string_view::npos) {
        const auto parts = detail::split(body, ':');
        double start = 0, stop = 0, step = 0;
        if (parts.size() != 3 || !detail::parse_double(detail::trim(parts[0]), start) ||
            !detail::parse_double(detail::trim(parts[1]), stop) ||
            !detail::parse_double(detail::trim(parts[2]), step) || !(step > 0.0) || stop < start)
            throw std::invalid_argument("expected start:stop:step, got '" + text + "'");
        return arange(start, stop, step);
    }
    std::vector<double> out;
    for (auto part : detail::split(body, ',')) {
        double v = 0.0;
        if (!detail::parse_double(detail::trim(part), v))
            throw std::invalid_argument("cannot parse '" + std::string{part} + "' in list '" + text + "'");
        out.push_back(v);
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> read_key_value_file(const std::filesystem::path& path)
{
    std::ifstream in{path};
    if (!in)
        throw std::invalid_argument("cannot open config file " + path.string());
    std::vector<std::pair<std::string, std::string>> kv;
    std::string line;
    for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
        auto body = std::string_view{line};
        if (const auto hash = body.find('#'); hash != std::string_view::npos)
            body = body.substr(0, hash);
        body = detail::trim(body);
        if (body.empty())
            continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos)
            throw std::invalid_argument(fmt::format("{}:{}: expected key=value", path.string(), line_no));
        kv.emplace_back(std::string{detail::trim(body.substr(0, eq))}, std::string{detail::trim(body.substr(eq + 1))});
    }
    return kv;
}

void SweepConfig::validate() const
{
    check_grid("rho_values", rho_values);
    check_grid("scale_values", scale_values);
    if (n_seeds == 0)
        throw std::invalid_argument("n_seeds must be positive");
    if (n_r == 0)
        throw std::invalid_argument("n_r must be positive");
    esp.validate();
    if (train_len == 0)
        throw std::invalid_argument("train_len must be positive");
    if (washout >= train_len)
        throw std::invalid_argument("washout must be shorter than train_len");
    check_grid("lambda_grid", lambda_grid);
    if (!(val_fraction > 0.0 && val_fraction < 1.0))
        throw std::invalid_argument("val_fraction must lie in (0, 1)");
    if (schur.max_iters < 0)
        throw std::invalid_argument("schur_max_iters must be nonnegative");
    if (!(schur.eps > 0.0 && schur.eps < 1.0))
        throw std::invalid_argument("schur_eps must lie in (0, 1)");
}

std::vector<std::pair<std::string, std::string>> SweepConfig::to_key_values() const
{
    auto or_auto = [](std::size_t v) { return v ? std::to_string(v) : std::string{"auto"}; };
    return {
      {"rho_values", join(rho_values)},
      {"scale_values", join(scale_values)},
      {"n_seeds", std::to_string(n_seeds)},
      {"n_r", std::to_string(n_r)},
      {"esp_p", std::to_string(esp.p_trials)},
      {"esp_transient", std::to_string(esp.transient)},
      {"esp_horizon", std::to_string(esp.horizon)},
      {"base_seed", std::to_string(base_seed)},
      {"train_len", std::to_string(train_len)},
      {"test_len", or_auto(test_len)},
      {"washout", std::to_string(washout)},
      {"lambda_grid", join(lambda_grid)},
      {"val_fraction", fmt::format("{}", val_fraction)},
      {"schur_max_iters", std::to_string(schur.max_iters)},
      {"schur_eps", fmt::format("{}", schur.eps)},
      {"condition_horizon", or_auto(condition_horizon)},
    };
}

SweepConfig SweepConfig::from_key_values(const std::vector<std::pair<std::string, std::string>>& kv,
                                         SweepConfig cfg)
{
    for (const auto& [key, value] : kv) {
        try {
            if (key == "rho_values")
                cfg.rho_values = parse_value_list(value);
            else if (key == "scale_values")
                cfg.scale_values = parse_value_list(value);
            else if (key == "n_seeds")
                cfg.n_seeds = parse_integer<std::size_t>(key, value);
            else if (key == "n_r")
                cfg.n_r = parse_integer<std::size_t>(key, value);
            else if (key == "esp_p")
                cfg.esp.p_trials = parse_integer<std::size_t>(key, value);
            else if (key == "esp_transient")
                cfg.esp.transient = parse_integer<std::size_t>(key, value);
            else if (key == "esp_horizon")
                cfg.esp.horizon = parse_integer<std::size_t>(key, value);
            else if (key == "base_seed")
                cfg.base_seed = parse_integer<std::uint64_t>(key, value);
            else if (key == "train_len")
                cfg.train_len = parse_integer<std::size_t>(key, value);
            else if (key == "test_len")
                cfg.test_len = parse_size_or_auto(key, value);
            else if (key == "washout")
                cfg.washout = parse_integer<std::size_t>(key, value);
            else if (key == "lambda_grid")
                cfg.lambda_grid = parse_value_list(value);
            else if (key == "val_fraction")
                cfg.val_fraction = parse_real(key, value);
            else if (key == "schur_max_iters")
                cfg.schur.max_iters = parse_integer<int>(key, value);
            else if (key == "schur_eps")
                cfg.schur.eps = parse_real(key, value);
            else if (key == "condition_horizon")
                cfg.condition_horizon = parse_size_or_auto(key, value);
            else
                throw std::invalid_argument("unknown config key '" + key + "'");
        } catch (const std::invalid_argument& e) {
            const std::string what = e.what();
            if (what.find(key) != std::string::npos)
                throw;
            throw std::invalid_argument("config key '" + key + "': " + what);
        }
    }
    return cfg;
}

bool identical(const SweepRecord& a, const SweepRecord& b)
{
    return same_bits(a.rho, b.rho) && same_bits(a.input_scale, b.input_scale) && a.seed_index == b.seed_index &&
           same_bits(a.esp_index, b.esp_index) && a.necessary_holds == b.necessary_holds &&
           a.schur_status == b.schur_status && a.input_condition_holds == b.input_condition_holds &&
           same_bits(a.lambda_used, b.lambda_used) && same_bits(a.train_mse, b.train_mse) &&
           same_bits(a.test_mse, b.test_mse) && a.error == b.error;
}

std::uint64_t cell_seed(std::uint64_t base_seed, std::size_t rho_index, std::size_t scale_index,
                        std::size_t seed_index) noexcept
{
    return derive_seed(base_seed, {rho_index, scale_index, seed_index});
}

SweepRecord evaluate_cell(const SweepConfig& cfg, const Signal& signal, const NextStepTask& task,
                          std::size_t rho_index, std::size_t scale_index, std::size_t seed_index)
{
    SweepRecord r;
    r.rho = cfg.rho_values.at(rho_index);
    r.input_scale = cfg.scale_values.at(scale_index);
    r.seed_index = seed_index;
    r.esp_index = r.lambda_used = r.train_mse = r.test_mse = kNaN;

    const std::uint64_t seed = cell_seed(cfg.base_seed, rho_index, scale_index, seed_index);
    try {
        const ReservoirParams params =
          init_reservoir(cfg.n_r, signal.dim(), r.rho, r.input_scale, derive_seed(seed, {0}));

        EspIndexConfig esp_cfg = cfg.esp;
        esp_cfg.seed = derive_seed(seed, {1});
        esp_cfg.keep_per_step = false;
        r.esp_index = esp_index(params, signal, esp_cfg).index;

        const ConditionReport cond = evaluate_conditions(params, signal, cfg.effective_condition_horizon(), cfg.schur);
        r.necessary_holds = cond.necessary_holds;
        r.schur_status = cond.schur.status;
        r.input_condition_holds = cond.input.holds;

        const TrainEvalResult te = train_and_evaluate(params, task, {cfg.lambda_grid, cfg.val_fraction});
        r.lambda_used = te.weights.lambda;
        r.train_mse = te.train_mse;
        r.test_mse = te.test_mse;
    } catch (const std::exception& e) {
        r.esp_index = r.lambda_used = r.train_mse = r.test_mse = kNaN;
        r.necessary_holds = r.input_condition_holds = false;
        r.schur_status = SchurStatus::unknown;
        r.error = sanitize(e.what());
    }
    return r;
}

std::vector<double> CellGrid::mean_esp() const
{
    std::vector<double> out;
    out.reserve(cells.size());
    for (const auto& c : cells)
        out.push_back(c.mean_esp_index);
    return out;
}

CellGrid SweepResults::aggregate() const
{
    CellGrid grid;
    grid.rho_values = config.rho_values;
    grid.scale_values = config.scale_values;
    const std::size_t cols = grid.scale_values.size();
    grid.cells.resize(grid.rho_values.size() * cols);

    std::map<double, std::size_t> rho_pos, scale_pos;
    for (std::size_t i = 0; i < grid.rho_values.size(); ++i)
        rho_pos[grid.rho_values[i]] = i;
    for (std::size_t j = 0; j < cols; ++j)
        scale_pos[grid.scale_values[j]] = j;

    struct Acc {
        double esp = 0, train = 0, test = 0, log_test = 0;
        bool necessary = true, sufficient = true;
    };
    std::vector<Acc> acc(grid.cells.size());

    for (const auto& r : records) {
        const auto ri = rho_pos.find(r.rho);
        const auto si = scale_pos.find(r.input_scale);
        if (ri == rho_pos.end() || si == scale_pos.end())
            throw SchemaError(fmt::format("record (rho={}, scale={}) is outside the configured grid", r.rho,
                                          r.input_scale));
        const std::size_t k = ri->second * cols + si->second;
        CellSummary& c = grid.cells[k];
        if (r.failed()) {
            ++c.n_failed;
            continue;
        }
        ++c.n_ok;
        acc[k].esp += r.esp_index;
        acc[k].train += r.train_mse;
        acc[k].test += r.test_mse;
        acc[k].log_test += std::log10(r.test_mse);
        acc[k].necessary = acc[k].necessary && r.necessary_holds;
        acc[k].sufficient =
          acc[k].sufficient && (r.schur_status == SchurStatus::certified || r.input_condition_holds);
    }

    for (std::size_t i = 0; i < grid.rho_values.size(); ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            const std::size_t k = i * cols + j;
            CellSummary& c = grid.cells[k];
            c.rho = grid.rho_values[i];
            c.input_scale = grid.scale_values[j];
            if (c.n_ok == 0) {
                c.mean_esp_index = c.mean_train_mse = c.mean_test_mse = c.mean_log10_test_mse = kNaN;
                continue;
            }
            const auto n = static_cast<double>(c.n_ok);
            c.mean_esp_index = acc[k].esp / n;
            c.mean_train_mse = acc[k].train / n;
            c.mean_test_mse = acc[k].test / n;
            c.mean_log10_test_mse = acc[k].log_test / n;
            c.necessary_all = acc[k].necessary;
            c.sufficient_all = acc[k].sufficient;
        }
    }
    return grid;
}

std::vector<double> normalize_index_grid(const std::vector<double>& means)
{
    if (means.empty())
        throw std::invalid_argument("normalize_index_grid: empty grid");
    double top = 0.0;
    for (double v : means)
        if (!std::isnan(v))
            top = std::max(top, v);
    std::vector<double> out(means);
    if (top > 0.0)
        for (double& v : out)
            v /= top;
    return out;
}

void sort_records(std::vector<SweepRecord>& records)
{
    std::sort(records.begin(), records.end(),
              [](const SweepRecord& a, const SweepRecord& b) { return a.key() < b.key(); });
}

SweepResults run_sweep(const SweepConfig& cfg, const Signal& signal, const NextStepTask& task,
                       const SweepRunOptions& opts)
{
    cfg.validate();
    if (signal.length() < cfg.esp.horizon || signal.length() < cfg.effective_condition_horizon())
        throw std::invalid_argument(fmt::format("signal has {} steps, the sweep needs {}", signal.length(),
                                                std::max(cfg.esp.horizon, cfg.effective_condition_horizon())));
    if (task.train_inputs.dim() != signal.dim())
        throw std::invalid_argument("task and signal dimensions differ");

    struct Item {
        std::size_t i, j, k;
    };
    std::vector<Item> items;
    for (std::size_t i = 0; i < cfg.rho_values.size(); ++i)
        for (std::size_t j = 0; j < cfg.scale_values.size(); ++j)
            for (std::size_t k = 0; k < cfg.n_seeds; ++k)
                if (!opts.completed.contains({cfg.rho_values[i], cfg.scale_values[j], k}))
                    items.push_back({i, j, k});

    SweepResults out;
    out.config = cfg;
    out.records.resize(items.size());
    std::mutex callback_mutex;
    parallel_for(items.size(), opts.threads, [&](std::size_t n) {
        const auto [i, j, k] = items[n];
        out.records[n] = evaluate_cell(cfg, signal, task, i, j, k);
        if (opts.on_record) {
            std::lock_guard lock{callback_mutex};
            opts.on_record(out.records[n]);
        }
    });
    sort_records(out.records);
    return out;
}

// Results files ----------------------------------------------------------

std::string format_record(const SweepRecord& r)
{
    return fmt::format("{},{},{},{},{},{},{},{},{},{},{}", real17(r.rho), real17(r.input_scale), r.seed_index,
                       real17(r.esp_index), r.necessary_holds ? 1 : 0, to_string(r.schur_status),
                       r.input_condition_holds ? 1 : 0, real17(r.lambda_used), real17(r.train_mse),
                       real17(r.test_mse), r.failed() ? sanitize(r.error) : std::string{});
}

namespace {

std::string preamble(const SweepConfig& cfg)
{
    std::string out = fmt::format("{}{}\n", kResultsMagic, kResultsVersion);
    for (const auto& [k, v] : cfg.to_key_values())
        out += "# " + k + "=" + v + "\n";
    out += kResultsColumns;
    out += '\n';
    return out;
}

SweepRecord parse_record(std::string_view line, std::size_t line_no)
{
    const auto f = detail::split(line, ',');
    auto fail = [&](const std::string& why) {
        return SchemaError(fmt::format("results line {}: {}", line_no, why));
    };
    if (f.size() != 11)
        throw fail(fmt::format("expected 11 fields, found {}", f.size()));

    auto real = [&](std::string_view s, const char* name) {
        double v = 0.0;
        if (!detail::parse_double(s, v))
            throw fail(fmt::format("bad {} '{}'", name, s));
        return v;
    };
    auto flag = [&](std::string_view s, const char* name) {
        if (s == "0")
            return false;
        if (s == "1")
            return true;
        throw fail(fmt::format("bad {} '{}' (expected 0 or 1)", name, s));
    };

    SweepRecord r;
    r.rho = real(f[0], "rho");
    r.input_scale = real(f[1], "input_scale");
    if (!detail::parse_int(f[2], r.seed_index))
        throw fail(fmt::format("bad seed_index '{}'", f[2]));
    r.esp_index = real(f[3], "esp_index");
    r.necessary_holds = flag(f[4], "necessary_holds");
    try {
        r.schur_status = parse_schur_status(f[5]);
    } catch (const std::invalid_argument& e) {
        throw fail(e.what());
    }
    r.input_condition_holds = flag(f[6], "input_condition_holds");
    r.lambda_used = real(f[7], "lambda_used");
    r.train_mse = real(f[8], "train_mse");
    r.test_mse = real(f[9], "test_mse");
    r.error = std::string{f[10]};
    return r;
}

} // namespace

void write_results(const SweepResults& results, const std::filesystem::path& path)
{
    std::ostringstream body;
    body << preamble(results.config);
    for (const auto& r : results.records)
        body << format_record(r) << '\n';

    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out{tmp, std::ios::binary | std::ios::trunc};
        if (!out)
            throw std::runtime_error("cannot write " + tmp.string());
        out << body.str();
        if (!out.flush())
            throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

SweepResults read_results(const std::filesystem::path& path, bool tolerate_truncated_tail)
{
    std::ifstream in{path, std::ios::binary};
    if (!in)
        throw std::runtime_error("cannot open results file " + path.string());
    std::string text{std::istreambuf_iterator<char>{in}, std::istreambuf_iterator<char>{}};
    if (!text.empty() && text.back() != '\n') {
        if (!tolerate_truncated_tail)
            throw SchemaError(path.string() + ": last line is not terminated (interrupted write?)");
        text.erase(text.rfind('\n') == std::string::npos ? 0 : text.rfind('\n') + 1);
    }

    std::vector<std::string_view> lines;
    for (auto line : detail::split(text, '\n'))
        lines.push_back(line);
    if (!lines.empty() && lines.back().empty())
        lines.pop_back();

    std::size_t n = 0;
    const std::string_view magic{kResultsMagic};
    if (lines.empty() || !lines[0].starts_with(magic))
        throw SchemaError(path.string() + ": not an esplab results file");
    int version = 0;
    if (!detail::parse_int(lines[0].substr(magic.size()), version) || version != kResultsVersion)
        throw SchemaError(fmt::format("{}: results version '{}' is not supported (expected {})", path.string(),
                                      lines[0].substr(magic.size()), kResultsVersion));
    ++n;

    std::vector<std::pair<std::string, std::string>> kv;
    for (; n < lines.size() && lines[n].starts_with("# "); ++n) {
        const auto body = lines[n].substr(2);
        const auto eq = body.find('=');
        if (eq == std::string_view::npos)
            throw SchemaError(fmt::format("{}: malformed config line {}", path.string(), n + 1));
        kv.emplace_back(std::string{body.substr(0, eq)}, std::string{body.substr(eq + 1)});
    }

    SweepResults results;
    try {
        results.config = SweepConfig::from_key_values(kv);
    } catch (const std::invalid_argument& e) {
        throw SchemaError(path.string() + ": " + e.what());
    }

    if (n >= lines.size())
        throw SchemaError(path.string() + ": missing header row");
    if (lines[n] != kResultsColumns) {
        const auto expected = detail::split(kResultsColumns, ',');
        for (auto col : detail::split(lines[n], ','))
            if (std::find(expected.begin(), expected.end(), col) == expected.end())
                throw SchemaError(fmt::format("{}: unknown column '{}' (results schema v{})", path.string(), col,
                                              kResultsVersion));
        throw SchemaError(fmt::format("{}: header does not match results schema v{}", path.string(),
                                      kResultsVersion));
    }
    ++n;

    for (; n < lines.size(); ++n)
        results.records.push_back(parse_record(lines[n], n + 1));
    return results;
}

ResultsAppender::ResultsAppender(const std::filesystem::path& path, const SweepConfig& cfg) : path_{path}
{
    std::error_code ec;
    const bool exists = std::filesystem::exists(path, ec) && std::filesystem::file_size(path, ec) > 0;
    if (exists) {
        SweepResults prior = read_results(path, /*tolerate_truncated_tail=*/true);
        if (!(prior.config == cfg))
            throw SchemaError(path.string() + ": existing results were produced with a different configuration");
        // Drop a partial last line so appends start on a fresh row.
        std::ifstream in{path, std::ios::binary};
        std::string text{std::istreambuf_iterator<char>{in}, std::istreambuf_iterator<char>{}};
        in.close();
        if (!text.empty() && text.back() != '\n') {
            const auto keep = text.rfind('\n');
            std::filesystem::resize_file(path, keep == std::string::npos ? 0 : keep + 1);
        }
        existing_ = std::move(prior.records);
    } else {
        std::ofstream out{path, std::ios::binary | std::ios::trunc};
        if (!out)
            throw std::runtime_error("cannot create " + path.string());
        out << preamble(cfg);
    }
}

void ResultsAppender::append(const SweepRecord& r)
{
    std::ofstream out{path_, std::ios::binary | std::ios::app};
    out << format_record(r) << '\n';
    out.flush();
    if (!out)
        throw std::runtime_error("append failed for " + path_.string());
}

} // namespace esplab
