// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pathnav/image.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace pathnav::slide
{

inline constexpr int kTileSize = 256;
inline constexpr std::size_t kTileBytes = static_cast<std::size_t>(kTileSize) * kTileSize * 3;
inline constexpr int kMinLevels = 5;

struct LevelDims
{
    std::uint32_t width = 0;
    std::uint32_t height = 0;

    friend bool operator==(const LevelDims&, const LevelDims&) = default;
};

/// A full 256x256 RGB tile. Pixels past the level's edge are padding.
using TileData = std::vector<std::uint8_t>;
using TilePtr = std::shared_ptr<const TileData>;

/// Backing storage for a pyramid: the tiled file reader and the procedural
/// synthetic renderer both implement this. Implementations are immutable
/// from the caller's point of view and safe to read concurrently.
class PyramidSource
{
public:
    virtual ~PyramidSource() = default;

    [[nodiscard]] virtual std::vector<LevelDims> levels() const = 0;
    [[nodiscard]] virtual TilePtr tile(int level, int tx, int ty) const = 0;
};

inline std::uint32_t tiles_across(std::uint32_t pixels) noexcept
{
    return (pixels + kTileSize - 1) / kTileSize;
}

/// Dimensions implied by a level-0 size: width(L) = ceil(width(0) / 2^L).
std::vector<LevelDims> pyramid_dims(std::uint32_t width0, std::uint32_t height0, int level_count);

class PyramidSlide
{
public:
    /// Validates the pyramid invariants; throws Unsupported for fewer than
    /// kMinLevels levels and CorruptHeader for inconsistent dimensions.
    PyramidSlide(std::string id, std::shared_ptr<const PyramidSource> source);

    [[nodiscard]] const std::string& id() const noexcept { return _id; }
    [[nodiscard]] int level_count() const noexcept { return static_cast<int>(_levels.size()); }
    [[nodiscard]] std::int64_t width(int level) const;
    [[nodiscard]] std::int64_t height(int level) const;
    [[nodiscard]] std::int64_t downsample(int level) const;
    [[nodiscard]] const PyramidSource& source() const noexcept { return *_source; }
    [[nodiscard]] std::shared_ptr<const PyramidSource> source_ptr() const noexcept { return _source; }

    /// Pixels [x, x+w) x [y, y+h) of a level; the window must lie inside it.
    [[nodiscard]] Image read_region(int level, std::int64_t x, std::int64_t y, int w, int h) const;
    [[nodiscard]] Image read_level(int level) const;

    void check_level(int level) const;

private:
    std::string _id;
    std::shared_ptr<const PyramidSource> _source;
    std::vector<LevelDims> _levels;
};

/// Opens a PYR1 container. Tiles are read lazily with positional reads.
PyramidSlide open_slide(const std::filesystem::path& path);

/// Serializes any pyramid as PYR1. Identical tiles share one payload.
/// Writes to a temporary file and renames, so a failed write leaves no partial file.
void write_pyramid(const std::filesystem::path& path, const PyramidSlide& slide);

} // namespace pathnav::slide
