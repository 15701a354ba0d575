// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pathnav/image.hpp"

#include <array>

namespace pathnav::heads
{

inline constexpr int kResizeShort = 256;
inline constexpr int kCropSize = 224;
inline constexpr std::array<double, 3> kMean = {0.485, 0.456, 0.406};
inline constexpr std::array<double, 3> kStd = {0.229, 0.224, 0.225};

/// Catmull-Rom (a = -0.5) cubic kernel.
[[nodiscard]] double cubic_kernel(double x) noexcept;

/// Separable bicubic resampling with clamped edges. When shrinking, the kernel
/// is stretched by the scale factor so it also acts as the low-pass filter.
[[nodiscard]] FloatImage resize_bicubic(const FloatImage& in, int width, int height);

/// Output size of the short-side resize: short side -> 256, long side
/// floor(long * 256 / short + 0.5).
[[nodiscard]] std::array<int, 2> resized_dims(int width, int height) noexcept;

/// Short side to 256, centered 224 crop, per-channel (x - mean) / std.
/// Returns a 3 x 224 x 224 channel-major grid. Precondition error when either
/// side of the patch is below 224.
[[nodiscard]] FloatImage preprocess(const Image& patch);
/// Same pipeline on a 3-channel grid already scaled to [0, 1].
[[nodiscard]] FloatImage preprocess(const FloatImage& patch);

} // namespace pathnav::heads
