// SPDX-License-Identifier: Apache-2.0
#include "pathnav/heads/preprocess.hpp"

#include "pathnav/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <vector>

namespace pathnav::heads
{

double cubic_kernel(double x) noexcept
{
    constexpr double a = -0.5;
    x = std::fabs(x);
    if (x < 1)
        return ((a + 2) * x - (a + 3)) * x * x + 1;
    if (x < 2)
        return ((a * x - 5 * a) * x + 8 * a) * x - 4 * a;
    return 0;
}

namespace
{

struct Taps
{
    int first = 0;
    std::vector<double> weights;
};

/// Per-output-index source taps; indices beyond the edges are clamped at use.
std::vector<Taps> make_taps(int in, int out)
{
    const double scale = static_cast<double>(in) / out;
    const double stretch = std::max(scale, 1.0);
    const double support = 2.0 * stretch;
    std::vector<Taps> taps(static_cast<std::size_t>(out));
    for (int i = 0; i < out; ++i)
    {
        const double center = (i + 0.5) * scale;
        const int lo = static_cast<int>(std::floor(center - support));
        const int hi = static_cast<int>(std::ceil(center + support));
        auto& t = taps[static_cast<std::size_t>(i)];
        t.first = lo;
        double sum = 0;
        for (int j = lo; j <= hi; ++j)
        {
            const double w = cubic_kernel((j + 0.5 - center) / stretch);
            t.weights.push_back(w);
            sum += w;
        }
        for (auto& w: t.weights)
            w /= sum;
    }
    return taps;
}

} // namespace

FloatImage resize_bicubic(const FloatImage& in, int width, int height)
{
    if (width < 1 || height < 1 || in.width < 1 || in.height < 1)
        throw Error(ErrorCode::Precondition, "resize needs non-empty input and output");
    const auto tx = make_taps(in.width, width);
    const auto ty = make_taps(in.height, height);

    // horizontal pass into doubles, then vertical
    std::vector<double> mid(static_cast<std::size_t>(in.channels) * in.height * width);
    for (int c = 0; c < in.channels; ++c)
        for (int y = 0; y < in.height; ++y)
            for (int x = 0; x < width; ++x)
            {
                const auto& t = tx[static_cast<std::size_t>(x)];
                double acc = 0;
                for (std::size_t k = 0; k < t.weights.size(); ++k)
                {
                    const int sx = std::clamp(t.first + static_cast<int>(k), 0, in.width - 1);
                    acc += t.weights[k] * in.at(c, sx, y);
                }
                mid[(static_cast<std::size_t>(c) * in.height + y) * width + x] = acc;
            }

    FloatImage out(width, height, in.channels);
    for (int c = 0; c < in.channels; ++c)
        for (int y = 0; y < height; ++y)
        {
            const auto& t = ty[static_cast<std::size_t>(y)];
            for (int x = 0; x < width; ++x)
            {
                double acc = 0;
                for (std::size_t k = 0; k < t.weights.size(); ++k)
                {
                    const int sy = std::clamp(t.first + static_cast<int>(k), 0, in.height - 1);
                    acc += t.weights[k] * mid[(static_cast<std::size_t>(c) * in.height + sy) * width + x];
                }
                out.at(c, x, y) = static_cast<float>(acc);
            }
        }
    return out;
}

std::array<int, 2> resized_dims(int width, int height) noexcept
{
    if (width <= height)
        return {kResizeShort, static_cast<int>(std::floor(static_cast<double>(height) * kResizeShort / width + 0.5))};
    return {static_cast<int>(std::floor(static_cast<double>(width) * kResizeShort / height + 0.5)), kResizeShort};
}

FloatImage preprocess(const Image& patch)
{
    if (patch.width < kCropSize || patch.height < kCropSize)
        throw Error(ErrorCode::Precondition,
                    fmt::format("patch {}x{} is smaller than {} px", patch.width, patch.height, kCropSize));
    return preprocess(to_float(patch));
}

FloatImage preprocess(const FloatImage& patch)
{
    if (patch.channels != 3)
        throw Error(ErrorCode::Precondition, fmt::format("expected 3 channels, got {}", patch.channels));
    if (patch.width < kCropSize || patch.height < kCropSize)
        throw Error(ErrorCode::Precondition,
                    fmt::format("patch {}x{} is smaller than {} px", patch.width, patch.height, kCropSize));
    const auto [w, h] = resized_dims(patch.width, patch.height);
    const auto resized = resize_bicubic(patch, w, h);
    const int x0 = (w - kCropSize) / 2;
    const int y0 = (h - kCropSize) / 2;
    FloatImage out(kCropSize, kCropSize, 3);
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < kCropSize; ++y)
            for (int x = 0; x < kCropSize; ++x)
                out.at(c, x, y) = static_cast<float>((resized.at(c, x0 + x, y0 + y) - kMean[static_cast<std::size_t>(c)]) /
                                                     kStd[static_cast<std::size_t>(c)]);
    return out;
}

} // namespace pathnav::heads
