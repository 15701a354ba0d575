// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pathnav/slide/geometry.hpp"
#include "pathnav/slide/pyramid.hpp"

#include <cstdint>
#include <vector>

namespace pathnav::slide
{

/// Level used for overviews: 3 when its long edge is at most 2048 px, else 4.
[[nodiscard]] int thumbnail_level(const PyramidSlide& slide);

/// Foreground occupancy on a grid of square cells over the thumbnail level.
struct TissueMask
{
    int thumbnail_level = 0;
    int thumb_width = 0;
    int thumb_height = 0;
    int cell_size = 16;
    int cols = 0;
    int rows = 0;
    std::vector<std::uint8_t> cells;
    double foreground_fraction = 0.0;

    [[nodiscard]] bool cell(int col, int row) const noexcept
    {
        return cells[static_cast<std::size_t>(row) * cols + col] != 0;
    }
    /// Whether the cell containing p is foreground.
    [[nodiscard]] bool contains(NormPoint p) const noexcept;
    /// Normalized rectangle [x0,x1) x [y0,y1) of a cell.
    void cell_bounds(int col, int row, double& x0, double& y0, double& x1, double& y1) const noexcept;
    [[nodiscard]] std::size_t foreground_cells() const noexcept;
};

struct TissueMaskOptions
{
    double saturation_threshold = 0.08;
    double min_fraction = 0.01;
    int cell_size = 16;
};

/// Cell is foreground iff its mean HSV saturation exceeds the threshold.
/// Throws DegenerateSlide when the foreground fraction is below min_fraction.
[[nodiscard]] TissueMask compute_tissue_mask(const PyramidSlide& slide, const TissueMaskOptions& options = {});
[[nodiscard]] TissueMask compute_tissue_mask(const Image& thumbnail, int thumbnail_level, const TissueMaskOptions& options);

/// Outline drawn for one overlay, in output-thumbnail pixels (inclusive, clipped).
struct OverlayBox
{
    int label = 0;
    std::int64_t center_x = 0;
    std::int64_t center_y = 0;
    std::int64_t x0 = 0;
    std::int64_t y0 = 0;
    std::int64_t x1 = 0;
    std::int64_t y1 = 0;
    bool visible = true;
};

/// Geometry of the boxes render_thumbnail draws onto an out_w x out_h view.
[[nodiscard]] std::vector<OverlayBox> overlay_boxes(const PyramidSlide& slide, int out_w, int out_h,
                                                    const std::vector<RegionSpec>& overlays);

inline constexpr Rgb kOverlayColor = {0, 200, 0};

/// Thumbnail level image resized to fit max_edge, with one outlined box per
/// overlay labeled by its 1-based visit order.
[[nodiscard]] Image render_thumbnail(const PyramidSlide& slide, int max_edge, const std::vector<RegionSpec>& overlays);
/// Same, starting from an already-resized base view.
[[nodiscard]] Image draw_overlays(const PyramidSlide& slide, Image base, const std::vector<RegionSpec>& overlays);

} // namespace pathnav::slide
