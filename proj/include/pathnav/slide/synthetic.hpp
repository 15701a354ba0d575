// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pathnav/slide/geometry.hpp"
#include "pathnav/slide/pyramid.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace pathnav::slide
{

/// Axis-aligned ellipse in normalized slide coordinates.
struct Ellipse
{
    double cx = 0.5;
    double cy = 0.5;
    double rx = 0.25;
    double ry = 0.25;
};

/// Half-open normalized rectangle [x0, x1) x [y0, y1).
struct NormRect
{
    double x0 = 0.0;
    double y0 = 0.0;
    double x1 = 0.0;
    double y1 = 0.0;

    [[nodiscard]] NormPoint center() const noexcept { return {(x0 + x1) / 2, (y0 + y1) / 2}; }
    [[nodiscard]] double area() const noexcept { return (x1 - x0) * (y1 - y0); }
};

struct Lesion
{
    NormRect rect;
    std::string label;
    int texture_id = 1;
};

// Texture ids. Lesion textures are 1..kLesionTextureCount; all textures are
// periodic with a period dividing the tile size.
inline constexpr int kBackgroundTexture = -1;
inline constexpr int kTissueTexture = 0;
inline constexpr int kLesionTextureCount = 4;

/// Minimum gap between the mean intensity of any lesion texture and of plain
/// tissue, in 8-bit units. Checked after generation by the unit tests.
inline constexpr double kLesionContrastMargin = 25.0;

Rgb texture_color(int texture_id, std::int64_t x, std::int64_t y) noexcept;

struct SyntheticSlideSpec
{
    std::uint64_t seed = 0;
    std::uint32_t width = 16384;
    std::uint32_t height = 12288;
    int level_count = 6;
    std::vector<Ellipse> blobs;
    std::vector<Lesion> lesions;
    std::vector<std::string> label_set;
};

/// Throws InvalidSpec when a lesion leaves every blob, uses an undeclared
/// label, or has an unknown texture.
void validate(const SyntheticSlideSpec& spec);

/// One tissue blob and one lesion of `label` whose area is `lesion_fraction`
/// of the blob's area; placement drawn from the seed.
SyntheticSlideSpec random_spec(std::uint64_t seed, std::uint32_t width, std::uint32_t height,
                               const std::vector<std::string>& label_set, const std::string& label,
                               double lesion_fraction = 0.02, double tissue_fraction = 0.30);

/// Procedural source: renders tiles on demand. Level L+1 is the rounded 2x2
/// mean of level L, so the pyramid is self-consistent at every level.
std::shared_ptr<const PyramidSource> make_synthetic_source(const SyntheticSlideSpec& spec);

PyramidSlide synthetic_slide(const SyntheticSlideSpec& spec, std::string id = "synthetic");

/// Planted lesions of a slide (the ground-truth sidecar).
struct GroundTruth
{
    std::vector<Lesion> lesions;
};

GroundTruth ground_truth(const SyntheticSlideSpec& spec);

/// One record per lesion: label, x0, y0, x1, y1, texture id (tab separated).
void write_ground_truth(const std::filesystem::path& path, const GroundTruth& truth);
GroundTruth read_ground_truth(const std::filesystem::path& path);

/// Sidecar path convention: slide.pyr -> slide.truth.tsv
std::filesystem::path truth_path_for(const std::filesystem::path& slide_path);

struct GeneratedSlide
{
    PyramidSlide slide;
    GroundTruth truth;
};

/// Writes the PYR1 container and its sidecar; returns the re-opened file.
GeneratedSlide generate_synthetic_slide(const SyntheticSlideSpec& spec, const std::filesystem::path& out);

/// Level-0 pixel rectangle covered by a lesion (pixel centers inside the rect).
PixelWindow lesion_window(const PyramidSlide& slide, const Lesion& lesion);

/// Fraction of the ROI window's level-0 area covered by the lesion.
double lesion_overlap_fraction(const PyramidSlide& slide, const RegionSpec& region, const Lesion& lesion,
                               Anchor anchor = Anchor::Center);

} // namespace pathnav::slide
