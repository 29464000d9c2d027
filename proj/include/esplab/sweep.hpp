#pragma once

#include "esplab/conditions.hpp"
#include "esplab/data.hpp"
#include "esplab/esp_index.hpp"
#include "esplab/task_eval.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace esplab {

/// Grid of spectral radius x input scaling, realizations per cell, and every
/// per-cell evaluation setting. Defaults reproduce the full experiment.
struct SweepConfig {
    std::vector<double> rho_values;   ///< 0.1, 0.2, ..., 4.0
    std::vector<double> scale_values; ///< 1, 2, ..., 30
    std::size_t n_seeds = 20;
    std::size_t n_r = 100;
    EspIndexConfig esp{};         ///< esp.seed is ignored; each record derives its own
    std::uint64_t base_seed = 1;
    std::size_t train_len = 5000;
    std::size_t test_len = 0;     ///< 0: every remaining sample
    std::size_t washout = 1000;
    std::vector<double> lambda_grid = default_lambda_grid();
    double val_fraction = 0.2;
    SchurSearchOptions schur{};
    std::size_t condition_horizon = 0; ///< 0: same as esp.horizon

    SweepConfig();

    void validate() const;
    std::size_t effective_condition_horizon() const noexcept
    {
        return condition_horizon ? condition_horizon : esp.horizon;
    }

    /// Flat key=value representation, keys in a fixed order.
    std::vector<std::pair<std::string, std::string>> to_key_values() const;

    /// Apply key=value settings on top of `base`. Unknown keys and malformed
    /// values throw std::invalid_argument naming the key.
    static SweepConfig from_key_values(const std::vector<std::pair<std::string, std::string>>& kv,
                                       SweepConfig base = {});

    bool operator==(const SweepConfig& other) const { return to_key_values() == other.to_key_values(); }
};

/// Parses "a,b,c" or "start:stop:step" (inclusive; values rounded to 12 decimals).
std::vector<double> parse_value_list(const std::string& text);

/// Parses a flat key=value file; '#' starts a comment.
std::vector<std::pair<std::string, std::string>> read_key_value_file(const std::filesystem::path& path);

struct SweepRecord {
    double rho = 0.0;
    double input_scale = 0.0;
    std::size_t seed_index = 0;
    double esp_index = 0.0;
    bool necessary_holds = false;
    SchurStatus schur_status = SchurStatus::unknown;
    bool input_condition_holds = false;
    double lambda_used = 0.0;
    double train_mse = 0.0;
    double test_mse = 0.0;
    std::string error; ///< non-empty marks a failed cell; numeric fields are then NaN

    bool failed() const noexcept { return !error.empty(); }
    auto key() const { return std::tuple{rho, input_scale, seed_index}; }
};

/// Bitwise equality (NaN == NaN when the bit patterns match).
bool identical(const SweepRecord& a, const SweepRecord& b);

/// Seeds for realization k of cell (i, j):
/// cell = derive_seed(base, {i, j, k}); reservoir = derive_seed(cell, {0});
/// trial states = derive_seed(cell, {1}).
std::uint64_t cell_seed(std::uint64_t base_seed, std::size_t rho_index, std::size_t scale_index,
                        std::size_t seed_index) noexcept;

/// Evaluate one (rho, scale, realization). Never throws for numerical
/// failures; they are returned as sentinel records.
SweepRecord evaluate_cell(const SweepConfig& cfg, const Signal& signal, const NextStepTask& task,
                          std::size_t rho_index, std::size_t scale_index, std::size_t seed_index);

struct CellSummary {
    double rho = 0.0;
    double input_scale = 0.0;
    std::size_t n_ok = 0;
    std::size_t n_failed = 0;
    double mean_esp_index = 0.0;
    double mean_train_mse = 0.0;
    double mean_test_mse = 0.0;
    double mean_log10_test_mse = 0.0;
    bool necessary_all = false;  ///< every realization satisfies the necessary condition
    bool sufficient_all = false; ///< every realization has a Schur certificate or satisfies the input condition
};

/// Per-cell means over realizations, row-major with rows = rho values and
/// columns = input scales in config order. Cells without successful records
/// carry NaN means and false flags.
struct CellGrid {
    std::vector<double> rho_values;
    std::vector<double> scale_values;
    std::vector<CellSummary> cells;

    const CellSummary& at(std::size_t rho_index, std::size_t scale_index) const
    {
        return cells[rho_index * scale_values.size() + scale_index];
    }
    std::vector<double> mean_esp() const;
};

struct SweepResults {
    SweepConfig config;
    std::vector<SweepRecord> records; ///< sorted by (rho, input_scale, seed_index)

    CellGrid aggregate() const;
};

/// Divide by the grid maximum; an all-zero grid stays zero. NaN entries are
/// ignored for the maximum and stay NaN. Throws on an empty grid.
std::vector<double> normalize_index_grid(const std::vector<double>& means);

struct SweepRunOptions {
    unsigned threads = 1;
    /// (rho, scale, seed_index) already present; these are not recomputed.
    std::set<std::tuple<double, double, std::size_t>> completed;
    /// Called once per new record, serialised by the harness.
    std::function<void(const SweepRecord&)> on_record;
};

/// Evaluate every (rho, scale, realization) not listed in opts.completed.
/// The returned records are only the new ones, sorted; the set of records is
/// identical for any thread count.
SweepResults run_sweep(const SweepConfig& cfg, const Signal& signal, const NextStepTask& task,
                       const SweepRunOptions& opts = {});

void sort_records(std::vector<SweepRecord>& records);

// Results files ----------------------------------------------------------

class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kResultsVersion = 1;
inline constexpr const char* kResultsColumns =
  "rho,input_scale,seed_index,esp_index,necessary_holds,schur_status,input_condition_holds,lambda_used,"
  "train_mse,test_mse,error";

std::string format_record(const SweepRecord& r);

/// Preamble (version line and config echo as '# key=value'), header, then
/// one row per record.
void write_results(const SweepResults& results, const std::filesystem::path& path);

/// Throws SchemaError on a version or column mismatch. With
/// `tolerate_truncated_tail`, an unterminated last line (an interrupted
/// append) is dropped instead of rejected.
SweepResults read_results(const std::filesystem::path& path, bool tolerate_truncated_tail = false);

/// Append-mode writer for resumable sweeps. Opening an existing file checks
/// the config echo, drops an unterminated last line and reports the records
/// already present.
class ResultsAppender {
public:
    ResultsAppender(const std::filesystem::path& path, const SweepConfig& cfg);

    const std::vector<SweepRecord>& existing() const noexcept { return existing_; }
    void append(const SweepRecord& r);

private:
    std::filesystem::path path_;
    std::vector<SweepRecord> existing_;
};

} // namespace esplab
