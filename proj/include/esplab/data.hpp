#pragma once

#include "esplab/reservoir.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>

namespace esplab {

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct YearMonth {
    int year = 0;
    int month = 0; ///< 1..12

    /// Parses "YYYY-MM".
    static YearMonth parse(const std::string& text);
    int ordinal() const noexcept { return year * 12 + (month - 1); }
    std::string str() const;

    auto operator<=>(const YearMonth&) const = default;
};

/// One real per line (blank lines ignored). Values are returned as stored.
/// Errors name the offending line number.
Signal load_laser(const std::filesystem::path& path);

/// SILSO monthly mean total sunspot number. Rows are
///   year; month; decimal date; mean; std; observations; provisional
/// separated by ';' (the .csv release) or by whitespace (the .txt release).
/// Returns the means for [from, to] inclusive divided by 1000. A missing
/// month or a -1 mean inside the range is an error naming the month.
Signal load_sunspot_silso(const std::filesystem::path& path, YearMonth from, YearMonth to);

/// Canonical series format: one value per line with 17 significant digits.
void write_series(const Signal& s, const std::filesystem::path& path);

struct NextStepTask {
    Signal train_inputs;
    Signal train_targets;
    Signal test_inputs;
    Signal test_targets;
    std::size_t washout = 0;
};

/// Inputs u(t) and targets u(t + 1). Train covers the first train_len
/// inputs, test the next test_len. Requires train_len + test_len <= length - 1
/// and washout < train_len.
NextStepTask make_next_step_task(const Signal& s, std::size_t train_len, std::size_t test_len,
                                 std::size_t washout);

} // namespace esplab
