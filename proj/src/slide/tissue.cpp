// SPDX-License-Identifier: Apache-2.0
#include "pathnav/slide/tissue.hpp"

#include "pathnav/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace pathnav::slide
{

int thumbnail_level(const PyramidSlide& slide)
{
    const auto long3 = std::max(slide.width(3), slide.height(3));
    return long3 <= 2048 ? 3 : 4;
}

bool TissueMask::contains(NormPoint p) const noexcept
{
    if (!is_valid(p) || cols == 0 || rows == 0)
        return false;
    const int col = std::min(cols - 1, static_cast<int>(p.x * thumb_width / cell_size));
    const int row = std::min(rows - 1, static_cast<int>(p.y * thumb_height / cell_size));
    return cell(col, row);
}

void TissueMask::cell_bounds(int col, int row, double& x0, double& y0, double& x1, double& y1) const noexcept
{
    x0 = static_cast<double>(col * cell_size) / thumb_width;
    y0 = static_cast<double>(row * cell_size) / thumb_height;
    x1 = static_cast<double>(std::min((col + 1) * cell_size, thumb_width)) / thumb_width;
    y1 = static_cast<double>(std::min((row + 1) * cell_size, thumb_height)) / thumb_height;
}

std::size_t TissueMask::foreground_cells() const noexcept
{
    return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), std::uint8_t{1}));
}

TissueMask compute_tissue_mask(const Image& thumbnail, int level, const TissueMaskOptions& options)
{
    if (options.cell_size <= 0)
        throw Error(ErrorCode::Precondition, "cell size must be positive");
    TissueMask mask;
    mask.thumbnail_level = level;
    mask.thumb_width = thumbnail.width;
    mask.thumb_height = thumbnail.height;
    mask.cell_size = options.cell_size;
    mask.cols = (thumbnail.width + options.cell_size - 1) / options.cell_size;
    mask.rows = (thumbnail.height + options.cell_size - 1) / options.cell_size;
    mask.cells.assign(static_cast<std::size_t>(mask.cols) * mask.rows, 0);

    std::vector<double> sat_sum(mask.cells.size(), 0.0);
    std::vector<int> count(mask.cells.size(), 0);
    for (int y = 0; y < thumbnail.height; ++y)
    {
        const int row = y / options.cell_size;
        for (int x = 0; x < thumbnail.width; ++x)
        {
            const auto* p = thumbnail.at(x, y);
            const int mx = std::max({p[0], p[1], p[2]});
            const int mn = std::min({p[0], p[1], p[2]});
            const std::size_t idx = static_cast<std::size_t>(row) * mask.cols + x / options.cell_size;
            sat_sum[idx] += mx == 0 ? 0.0 : static_cast<double>(mx - mn) / mx;
            ++count[idx];
        }
    }
    std::size_t fg = 0;
    for (std::size_t i = 0; i < mask.cells.size(); ++i)
        if (count[i] > 0 && sat_sum[i] / count[i] > options.saturation_threshold)
        {
            mask.cells[i] = 1;
            ++fg;
        }
    mask.foreground_fraction = mask.cells.empty() ? 0.0 : static_cast<double>(fg) / static_cast<double>(mask.cells.size());
    if (mask.foreground_fraction < options.min_fraction || fg == 0)
        throw Error(ErrorCode::DegenerateSlide,
                    fmt::format("foreground fraction {:.4f} below {:.4f}", mask.foreground_fraction, options.min_fraction));
    return mask;
}

TissueMask compute_tissue_mask(const PyramidSlide& slide, const TissueMaskOptions& options)
{
    const int level = thumbnail_level(slide);
    return compute_tissue_mask(slide.read_level(level), level, options);
}

std::vector<OverlayBox> overlay_boxes(const PyramidSlide& slide, int out_w, int out_h, const std::vector<RegionSpec>& overlays)
{
    std::vector<OverlayBox> boxes;
    const double scale_x = static_cast<double>(out_w) / static_cast<double>(slide.width(0));
    const double scale_y = static_cast<double>(out_h) / static_cast<double>(slide.height(0));
    int label = 0;
    for (const auto& r: overlays)
    {
        OverlayBox b;
        b.label = ++label;
        b.center_x = std::clamp<std::int64_t>(std::llround(r.center.x * out_w), 0, out_w - 1);
        b.center_y = std::clamp<std::int64_t>(std::llround(r.center.y * out_h), 0, out_h - 1);
        const double extent = static_cast<double>(r.size) * static_cast<double>(std::int64_t{1} << r.level);
        const auto half_w = std::max<std::int64_t>(1, std::llround(extent * scale_x / 2));
        const auto half_h = std::max<std::int64_t>(1, std::llround(extent * scale_y / 2));
        const auto x0 = b.center_x - half_w;
        const auto y0 = b.center_y - half_h;
        const auto x1 = b.center_x + half_w;
        const auto y1 = b.center_y + half_h;
        b.visible = x1 >= 0 && y1 >= 0 && x0 < out_w && y0 < out_h;
        b.x0 = std::clamp<std::int64_t>(x0, 0, out_w - 1);
        b.y0 = std::clamp<std::int64_t>(y0, 0, out_h - 1);
        b.x1 = std::clamp<std::int64_t>(x1, 0, out_w - 1);
        b.y1 = std::clamp<std::int64_t>(y1, 0, out_h - 1);
        boxes.push_back(b);
    }
    return boxes;
}

namespace
{

// 3x5 digit glyphs, one row per 3-bit mask.
constexpr std::array<std::array<std::uint8_t, 5>, 10> kDigits = {{
    {7, 5, 5, 5, 7},
    {2, 6, 2, 2, 7},
    {7, 1, 7, 4, 7},
    {7, 1, 7, 1, 7},
    {5, 5, 7, 1, 1},
    {7, 4, 7, 1, 7},
    {7, 4, 7, 5, 7},
    {7, 1, 1, 1, 1},
    {7, 5, 7, 5, 7},
    {7, 5, 7, 1, 7},
}};

void draw_label(Image& img, std::int64_t x, std::int64_t y, int value)
{
    constexpr int scale = 2;
    const auto text = std::to_string(value);
    for (std::size_t i = 0; i < text.size(); ++i)
    {
        const auto& glyph = kDigits[static_cast<std::size_t>(text[i] - '0')];
        const auto gx = x + static_cast<std::int64_t>(i) * 4 * scale;
        for (int row = 0; row < 5; ++row)
            for (int col = 0; col < 3; ++col)
            {
                if (!((glyph[static_cast<std::size_t>(row)] >> (2 - col)) & 1))
                    continue;
                for (int sy = 0; sy < scale; ++sy)
                    for (int sx = 0; sx < scale; ++sx)
                    {
                        const auto px = gx + col * scale + sx;
                        const auto py = y + row * scale + sy;
                        if (px >= 0 && py >= 0 && px < img.width && py < img.height)
                            img.set(static_cast<int>(px), static_cast<int>(py), kOverlayColor);
                    }
            }
    }
}

} // namespace

Image draw_overlays(const PyramidSlide& slide, Image base, const std::vector<RegionSpec>& overlays)
{
    for (const auto& b: overlay_boxes(slide, base.width, base.height, overlays))
    {
        if (!b.visible)
            continue;
        for (auto x = b.x0; x <= b.x1; ++x)
        {
            base.set(static_cast<int>(x), static_cast<int>(b.y0), kOverlayColor);
            base.set(static_cast<int>(x), static_cast<int>(b.y1), kOverlayColor);
        }
        for (auto y = b.y0; y <= b.y1; ++y)
        {
            base.set(static_cast<int>(b.x0), static_cast<int>(y), kOverlayColor);
            base.set(static_cast<int>(b.x1), static_cast<int>(y), kOverlayColor);
        }
        draw_label(base, b.x0 + 3, b.y0 + 3, b.label);
    }
    return base;
}

Image render_thumbnail(const PyramidSlide& slide, int max_edge, const std::vector<RegionSpec>& overlays)
{
    if (max_edge <= 0)
        throw Error(ErrorCode::Precondition, "max_edge must be positive");
    auto base = resize_to_fit(slide.read_level(thumbnail_level(slide)), max_edge);
    return draw_overlays(slide, std::move(base), overlays);
}

} // namespace pathnav::slide
