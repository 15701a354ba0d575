// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pathnav/slide/pyramid.hpp"

#include <cstdint>
#include <vector>

namespace pathnav::slide
{

/// Slide-relative coordinate; (0,0) is the top-left corner, (1,1) the bottom-right.
struct NormPoint
{
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const NormPoint&, const NormPoint&) = default;
};

[[nodiscard]] bool is_valid(NormPoint p) noexcept;
[[nodiscard]] double distance(NormPoint a, NormPoint b) noexcept;

struct PixelPoint
{
    std::int64_t x = 0;
    std::int64_t y = 0;

    friend bool operator==(const PixelPoint&, const PixelPoint&) = default;
};

/// Half-open pixel window [x0, x1) x [y0, y1) at a given level.
struct PixelWindow
{
    int level = 0;
    std::int64_t x0 = 0;
    std::int64_t y0 = 0;
    std::int64_t x1 = 0;
    std::int64_t y1 = 0;

    [[nodiscard]] std::int64_t width() const noexcept { return x1 - x0; }
    [[nodiscard]] std::int64_t height() const noexcept { return y1 - y0; }
    [[nodiscard]] std::int64_t area() const noexcept { return width() * height(); }

    friend bool operator==(const PixelWindow&, const PixelWindow&) = default;
};

[[nodiscard]] std::int64_t intersection_area(const PixelWindow& a, const PixelWindow& b) noexcept;

/// ROI request: a square window of `size` pixels at `level`, centered on `center`.
struct RegionSpec
{
    NormPoint center;
    int level = 0;
    int size = 1024;

    friend bool operator==(const RegionSpec&, const RegionSpec&) = default;
};

enum class Anchor
{
    Center,
    TopLeft,
};

/// (round(x * width), round(y * height)), clamped to the level.
[[nodiscard]] PixelPoint norm_to_pixel(const PyramidSlide& slide, NormPoint p, int level);

/// The window extract_region reads: centered on the anchor pixel, then shifted
/// (never shrunk) to stay inside the level. With Anchor::TopLeft the point is
/// the window's top-left corner instead.
[[nodiscard]] PixelWindow region_window(const PyramidSlide& slide, const RegionSpec& region,
                                        Anchor anchor = Anchor::Center);

/// The same window expressed in level-0 pixels, clipped to the slide.
[[nodiscard]] PixelWindow level0_footprint(const PyramidSlide& slide, const PixelWindow& window);

[[nodiscard]] Image extract_region(const PyramidSlide& slide, const RegionSpec& region,
                                   Anchor anchor = Anchor::Center);

} // namespace pathnav::slide
