#include "esplab/data.hpp"

#include "text.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <vector>

namespace esplab {

YearMonth YearMonth::parse(const std::string& text)
{
    const auto dash = text.find('-');
    YearMonth ym;
    if (dash == std::string::npos || !detail::parse_int(std::string_view{text}.substr(0, dash), ym.year) ||
        !detail::parse_int(std::string_view{text}.substr(dash + 1), ym.month) || ym.month < 1 || ym.month > 12)
        throw std::invalid_argument("expected YYYY-MM, got '" + text + "'");
    return ym;
}

std::string YearMonth::str() const
{
    return fmt::format("{:04d}-{:02d}", year, month);
}

namespace {

std::ifstream open_input(const std::filesystem::path& path)
{
    std::ifstream in{path};
    if (!in)
        throw DataError("cannot open " + path.string());
    return in;
}

YearMonth from_ordinal(int ordinal)
{
    return {ordinal / 12, ordinal % 12 + 1};
}

} // namespace

Signal load_laser(const std::filesystem::path& path)
{
    auto in = open_input(path);
    std::vector<double> values;
    std::string line;
    for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
        const auto field = detail::trim(line);
        if (field.empty())
            continue;
        double v = 0.0;
        if (!detail::parse_double(field, v) || !std::isfinite(v))
            throw DataError(fmt::format("{}: line {}: cannot parse '{}' as a real number", path.string(), line_no,
                                        field));
        values.push_back(v);
    }
    if (values.empty())
        throw DataError(path.string() + ": file contains no values");
    return Signal::univariate(values);
}

Signal load_sunspot_silso(const std::filesystem::path& path, YearMonth from, YearMonth to)
{
    if (to < from)
        throw std::invalid_argument("sunspot range ends (" + to.str() + ") before it starts (" + from.str() + ")");

    auto in = open_input(path);
    std::vector<double> values;
    int expected = from.ordinal();
    std::string line;
    for (std::size_t row = 1; std::getline(in, line); ++row) {
        if (detail::trim(line).empty())
            continue;
        const auto fields = line.find(';') != std::string::npos ? detail::split(line, ';')
                                                                 : detail::split_whitespace(line);
        YearMonth ym;
        double mean = 0.0;
        if (fields.size() < 4 || !detail::parse_int(detail::trim(fields[0]), ym.year) ||
            !detail::parse_int(detail::trim(fields[1]), ym.month) || ym.month < 1 || ym.month > 12 ||
            !detail::parse_double(detail::trim(fields[3]), mean) || !std::isfinite(mean))
            throw DataError(fmt::format("{}: row {}: malformed SILSO record", path.string(), row));

        const int ord = ym.ordinal();
        if (ord < from.ordinal() || ord > to.ordinal())
            continue;
        if (ord > expected)
            throw DataError(fmt::format("{}: month {} is missing", path.string(), from_ordinal(expected).str()));
        if (ord < expected)
            throw DataError(fmt::format("{}: row {}: month {} is duplicated or out of order", path.string(), row,
                                        ym.str()));
        if (mean == -1.0)
            throw DataError(fmt::format("{}: month {} has the missing-value marker -1", path.string(), ym.str()));
        values.push_back(mean / 1000.0);
        ++expected;
    }
    if (expected <= to.ordinal())
        throw DataError(fmt::format("{}: month {} is missing", path.string(), from_ordinal(expected).str()));
    return Signal::univariate(values);
}

void write_series(const Signal& s, const std::filesystem::path& path)
{
    std::ofstream out{path};
    if (!out)
        throw DataError("cannot write " + path.string());
    for (std::size_t t = 0; t < s.length(); ++t) {
        const auto row = s.at(t);
        for (Eigen::Index j = 0; j < row.size(); ++j)
            out << (j ? " " : "") << fmt::format("{:.17g}", row[j]);
        out << '\n';
    }
    if (!out)
        throw DataError("write failed for " + path.string());
}

NextStepTask make_next_step_task(const Signal& s, std::size_t train_len, std::size_t test_len, std::size_t washout)
{
    if (train_len == 0)
        throw std::invalid_argument("training length must be positive");
    if (washout >= train_len)
        throw std::invalid_argument(fmt::format("washout {} must be shorter than the training length {}", washout,
                                                train_len));
    const std::size_t required = train_len + test_len + 1;
    if (s.length() < required)
        throw std::invalid_argument(fmt::format(
          "series too short for a {}/{} next-step split: requires {} samples, {} available", train_len, test_len,
          required, s.length()));

    NextStepTask task;
    task.train_inputs = s.slice(0, train_len);
    task.train_targets = s.slice(1, train_len);
    task.test_inputs = s.slice(train_len, test_len);
    task.test_targets = s.slice(train_len + 1, test_len);
    task.washout = washout;
    return task;
}

} // namespace esplab
