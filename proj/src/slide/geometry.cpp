// SPDX-License-Identifier: Apache-2.0
#include "pathnav/slide/geometry.hpp"

#include "pathnav/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace pathnav::slide
{

bool is_valid(NormPoint p) noexcept
{
    return std::isfinite(p.x) && std::isfinite(p.y) && p.x >= 0.0 && p.x <= 1.0 && p.y >= 0.0 && p.y <= 1.0;
}

double distance(NormPoint a, NormPoint b) noexcept
{
    return std::hypot(a.x - b.x, a.y - b.y);
}

std::int64_t intersection_area(const PixelWindow& a, const PixelWindow& b) noexcept
{
    const auto w = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
    const auto h = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
    return (w > 0 && h > 0) ? w * h : 0;
}

PixelPoint norm_to_pixel(const PyramidSlide& slide, NormPoint p, int level)
{
    const auto w = slide.width(level);
    const auto h = slide.height(level);
    const auto px = static_cast<std::int64_t>(std::llround(p.x * static_cast<double>(w)));
    const auto py = static_cast<std::int64_t>(std::llround(p.y * static_cast<double>(h)));
    return {std::clamp<std::int64_t>(px, 0, w - 1), std::clamp<std::int64_t>(py, 0, h - 1)};
}

PixelWindow region_window(const PyramidSlide& slide, const RegionSpec& region, Anchor anchor)
{
    slide.check_level(region.level);
    if (region.size <= 0)
        throw Error(ErrorCode::Range, "region size must be positive");
    if (!is_valid(region.center))
        throw Error(ErrorCode::Range, fmt::format("region center ({}, {}) outside [0,1]^2", region.center.x, region.center.y));
    const auto w = slide.width(region.level);
    const auto h = slide.height(region.level);
    if (region.size > w || region.size > h)
        throw Error(ErrorCode::Range,
                    fmt::format("{}px window does not fit level {} ({}x{})", region.size, region.level, w, h));

    const auto anchor_px = norm_to_pixel(slide, region.center, region.level);
    const std::int64_t half = anchor == Anchor::Center ? region.size / 2 : 0;
    const auto x0 = std::clamp<std::int64_t>(anchor_px.x - half, 0, w - region.size);
    const auto y0 = std::clamp<std::int64_t>(anchor_px.y - half, 0, h - region.size);
    return {region.level, x0, y0, x0 + region.size, y0 + region.size};
}

PixelWindow level0_footprint(const PyramidSlide& slide, const PixelWindow& window)
{
    const auto f = slide.downsample(window.level);
    return {0, window.x0 * f, window.y0 * f, std::min(window.x1 * f, slide.width(0)), std::min(window.y1 * f, slide.height(0))};
}

Image extract_region(const PyramidSlide& slide, const RegionSpec& region, Anchor anchor)
{
    const auto win = region_window(slide, region, anchor);
    return slide.read_region(win.level, win.x0, win.y0, static_cast<int>(win.width()), static_cast<int>(win.height()));
}

} // namespace pathnav::slide
