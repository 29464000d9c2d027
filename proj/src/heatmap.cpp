#include "esplab/heatmap.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace esplab {

HeatmapQuantity parse_heatmap_quantity(std::string_view s)
{
    if (s == "esp_index_normalized")
        return HeatmapQuantity::esp_index_normalized;
    if (s == "log10_test_mse")
        return HeatmapQuantity::log10_test_mse;
    throw std::invalid_argument("unknown heatmap quantity '" + std::string{s} +
                                "' (expected esp_index_normalized or log10_test_mse)");
}

namespace {

std::vector<std::size_t> ascending_order(const std::vector<double>& values)
{
    std::vector<std::size_t> idx(values.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    return idx;
}

std::string grey(double fraction)
{
    const int level = static_cast<int>(std::lround(255.0 * std::clamp(fraction, 0.0, 1.0)));
    return fmt::format("#{0:02x}{0:02x}{0:02x}", level);
}

std::size_t tick_stride(std::size_t n)
{
    return n <= 10 ? 1 : (n + 9) / 10;
}

} // namespace

std::vector<std::size_t> boundary_heights(const CellGrid& grid, bool use_sufficient)
{
    const auto rows = ascending_order(grid.rho_values);
    const auto cols = ascending_order(grid.scale_values);
    std::vector<std::size_t> heights;
    for (std::size_t c : cols) {
        std::size_t h = 0;
        for (std::size_t r : rows) {
            const CellSummary& cell = grid.at(r, c);
            const bool ok = cell.n_ok > 0 && (use_sufficient ? cell.sufficient_all : cell.necessary_all);
            if (!ok)
                break;
            ++h;
        }
        heights.push_back(h);
    }
    return heights;
}

std::string render_heatmap(const SweepResults& results, HeatmapQuantity quantity, const HeatmapOptions& opts)
{
    if (results.records.empty())
        throw std::invalid_argument("cannot render a heatmap from empty results");
    if (!(opts.log10_mse_max > opts.log10_mse_min))
        throw std::invalid_argument("heatmap log10 MSE range is empty");

    const CellGrid grid = results.aggregate();
    const auto rows = ascending_order(grid.rho_values);
    const auto cols = ascending_order(grid.scale_values);
    const std::size_t n_rows = rows.size();
    const std::size_t n_cols = cols.size();

    std::vector<double> fraction(grid.cells.size());
    std::string title;
    std::string low_label, high_label;
    if (quantity == HeatmapQuantity::esp_index_normalized) {
        fraction = normalize_index_grid(grid.mean_esp());
        title = "ESP index (normalized to max 1)";
        low_label = "0";
        high_label = "1";
    } else {
        for (std::size_t k = 0; k < grid.cells.size(); ++k) {
            const double v = grid.cells[k].mean_log10_test_mse;
            fraction[k] = std::isfinite(v) ? (v - opts.log10_mse_min) / (opts.log10_mse_max - opts.log10_mse_min)
                                           : std::numeric_limits<double>::quiet_NaN();
        }
        title = "log10(test MSE)";
        low_label = fmt::format("{:g}", opts.log10_mse_min);
        high_label = fmt::format("{:g}", opts.log10_mse_max);
    }

    const int cell = opts.cell_px;
    const int left = 70, top = 40, bottom = 60, legend_w = 120;
    const int plot_w = cell * static_cast<int>(n_cols);
    const int plot_h = cell * static_cast<int>(n_rows);
    const int width = left + plot_w + legend_w;
    const int height = top + plot_h + bottom;
    auto x_of = [&](std::size_t col) { return left + cell * static_cast<int>(col); };
    auto y_of = [&](std::size_t row_from_bottom) { return top + plot_h - cell * static_cast<int>(row_from_bottom); };

    std::string svg;
    svg += fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
                       "viewBox=\"0 0 {} {}\" font-family=\"sans-serif\" font-size=\"10\">\n",
                       width, height, width, height);
    svg += fmt::format("<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>\n", width, height);
    svg += fmt::format("<text x=\"{}\" y=\"20\" font-size=\"12\">{}</text>\n", left, title);

    svg += "<g id=\"cells\" shape-rendering=\"crispEdges\">\n";
    for (std::size_t ri = 0; ri < n_rows; ++ri) {
        for (std::size_t ci = 0; ci < n_cols; ++ci) {
            const std::size_t k = rows[ri] * grid.scale_values.size() + cols[ci];
            const double f = fraction[k];
            const std::string fill = std::isnan(f) ? std::string{kHeatmapMissingColor} : grey(f);
            svg += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n", x_of(ci),
                               y_of(ri + 1), cell, cell, fill);
        }
    }
    svg += "</g>\n";

    auto boundary = [&](bool sufficient, const char* id, const char* colour, const char* dash) {
        const auto heights = boundary_heights(grid, sufficient);
        std::string points;
        for (std::size_t ci = 0; ci < n_cols; ++ci) {
            const int y = y_of(heights[ci]);
            points += fmt::format("{}{},{} {},{}", ci ? " " : "", x_of(ci), y, x_of(ci + 1), y);
        }
        svg += fmt::format("<polyline id=\"{}\" points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"{}/>\n",
                           id, points, colour, dash);
    };
    boundary(false, "necessary-boundary", "#1f77b4", "");
    boundary(true, "sufficient-boundary", "#ff7f0e", " stroke-dasharray=\"4,2\"");

    svg += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#000000\"/>\n",
                       left, top, plot_w, plot_h);

    for (std::size_t ci = 0; ci < n_cols; ci += tick_stride(n_cols))
        svg += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{:g}</text>\n", x_of(ci) + cell / 2,
                           top + plot_h + 14, grid.scale_values[cols[ci]]);
    for (std::size_t ri = 0; ri < n_rows; ri += tick_stride(n_rows))
        svg += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:g}</text>\n", left - 4,
                           y_of(ri + 1) + cell / 2 + 3, grid.rho_values[rows[ri]]);
    svg += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">input scaling</text>\n", left + plot_w / 2,
                       top + plot_h + 32);
    svg += fmt::format("<text x=\"14\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 14 {})\">"
                       "spectral radius</text>\n",
                       top + plot_h / 2, top + plot_h / 2);

    // Legend: grey ramp, boundary keys and the missing-value colour.
    const int lx = left + plot_w + 20;
    const int steps = 10;
    const int ramp_h = 100;
    for (int s = 0; s < steps; ++s) {
        const double f = 1.0 - (static_cast<double>(s) + 0.5) / steps;
        svg += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"14\" height=\"{}\" fill=\"{}\"/>\n", lx,
                           top + s * ramp_h / steps, ramp_h / steps, grey(f));
    }
    svg += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", lx + 18, top + 8, high_label);
    svg += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", lx + 18, top + ramp_h, low_label);
    const int ky = top + ramp_h + 20;
    svg += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"#1f77b4\" stroke-width=\"2\"/>\n",
                       lx, ky, lx + 14);
    svg += fmt::format("<text x=\"{}\" y=\"{}\">necessary</text>\n", lx + 18, ky + 3);
    svg += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"#ff7f0e\" stroke-width=\"2\" "
                       "stroke-dasharray=\"4,2\"/>\n",
                       lx, ky + 14, lx + 14);
    svg += fmt::format("<text x=\"{}\" y=\"{}\">sufficient</text>\n", lx + 18, ky + 17);
    svg += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"14\" height=\"8\" fill=\"{}\"/>\n", lx, ky + 24,
                       kHeatmapMissingColor);
    svg += fmt::format("<text x=\"{}\" y=\"{}\">no data</text>\n", lx + 18, ky + 31);
    svg += "</svg>\n";
    return svg;
}

void write_heatmap(const SweepResults& results, HeatmapQuantity quantity, const std::filesystem::path& out,
                   const HeatmapOptions& opts)
{
    const std::string svg = render_heatmap(results, quantity, opts);
    std::ofstream file{out, std::ios::binary | std::ios::trunc};
    if (!file)
        throw std::runtime_error("cannot write " + out.string());
    file << svg;
    if (!file.flush())
        throw std::runtime_error("write failed for " + out.string());
}

} // namespace esplab
