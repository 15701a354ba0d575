// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace pathnav
{

using Rgb = std::array<std::uint8_t, 3>;

/// Interleaved 8-bit RGB raster, row-major.
struct Image
{
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    Image() = default;
    Image(int w, int h, Rgb fill = {0, 0, 0});

    [[nodiscard]] bool empty() const noexcept { return width == 0 || height == 0; }

    [[nodiscard]] std::uint8_t* at(int x, int y) noexcept
    {
        return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
    }
    [[nodiscard]] const std::uint8_t* at(int x, int y) const noexcept
    {
        return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
    }

    void set(int x, int y, Rgb c) noexcept
    {
        auto* p = at(x, y);
        p[0] = c[0];
        p[1] = c[1];
        p[2] = c[2];
    }

    friend bool operator==(const Image&, const Image&) = default;
};

using ImagePtr = std::shared_ptr<const Image>;

/// Planar float raster with values nominally in [0, 1]; channel-major.
struct FloatImage
{
    int width = 0;
    int height = 0;
    int channels = 3;
    std::vector<float> values;

    FloatImage() = default;
    FloatImage(int w, int h, int c = 3);

    [[nodiscard]] float& at(int c, int x, int y) noexcept
    {
        return values[(static_cast<std::size_t>(c) * height + y) * width + x];
    }
    [[nodiscard]] float at(int c, int x, int y) const noexcept
    {
        return values[(static_cast<std::size_t>(c) * height + y) * width + x];
    }
};

FloatImage to_float(const Image& img);

/// Box-filter downscale so the long edge is at most max_edge; returns a copy when already small enough.
Image resize_to_fit(const Image& img, int max_edge);

Image crop(const Image& img, int x, int y, int w, int h);

// PNG codec (lossless, deterministic output for identical input).
std::vector<std::uint8_t> encode_png(const Image& img);
Image decode_png(std::span<const std::uint8_t> bytes);
void write_png(const std::filesystem::path& path, const Image& img);
Image read_png(const std::filesystem::path& path);

} // namespace pathnav
