#pragma once

#include "esplab/sweep.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace esplab {

enum class HeatmapQuantity { esp_index_normalized, log10_test_mse };

/// Accepts "esp_index_normalized" and "log10_test_mse".
HeatmapQuantity parse_heatmap_quantity(std::string_view s);

struct HeatmapOptions {
    /// Grey ramp limits for log10(MSE); values outside are clipped.
    double log10_mse_min = -5.0;
    double log10_mse_max = 0.0;
    int cell_px = 14;
};

/// Colour used for cells without a finite value.
inline constexpr const char* kHeatmapMissingColor = "#d62728";

/// SVG heatmap with rows = spectral radius (increasing upwards) and columns
/// = input scaling (increasing to the right). Grey level is linear in the
/// plotted value, black for the smallest. Two step lines mark, per column,
/// the top of the contiguous run of cells (from the smallest radius) where
/// every realization meets (a) the necessary condition and (b) one of the
/// sufficient conditions. Output depends only on `results` and `opts`.
std::string render_heatmap(const SweepResults& results, HeatmapQuantity quantity, const HeatmapOptions& opts = {});

/// Throws std::invalid_argument when the results contain no records.
void write_heatmap(const SweepResults& results, HeatmapQuantity quantity, const std::filesystem::path& out,
                   const HeatmapOptions& opts = {});

/// Per-column count of cells below the boundary, in ascending-radius order.
std::vector<std::size_t> boundary_heights(const CellGrid& grid, bool use_sufficient);

} // namespace esplab
