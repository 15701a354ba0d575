// SPDX-License-Identifier: Apache-2.0
#include "pathnav/slide/synthetic.hpp"

#include "pathnav/error.hpp"
#include "pathnav/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <sstream>
#include <unordered_map>

namespace pathnav::slide
{

namespace
{

std::uint32_t hash2(std::uint32_t x, std::uint32_t y, std::uint32_t salt) noexcept
{
    std::uint32_t h = x * 0x8da6b343u ^ y * 0xd8163841u ^ salt * 0xcb1ab31fu;
    h ^= h >> 15;
    h *= 0x2c1b3c6du;
    h ^= h >> 12;
    return h;
}

std::uint8_t clamp8(int v) noexcept
{
    return static_cast<std::uint8_t>(std::clamp(v, 0, 255));
}

Rgb shade(Rgb base, int delta) noexcept
{
    return {clamp8(base[0] + delta), clamp8(base[1] + delta), clamp8(base[2] + delta)};
}

} // namespace

Rgb texture_color(int texture_id, std::int64_t x, std::int64_t y) noexcept
{
    const auto xi = static_cast<std::uint32_t>(x & 0xff);
    const auto yi = static_cast<std::uint32_t>(y & 0xff);
    // Period-64 speckle, identical in every tile.
    const int noise = static_cast<int>(hash2(xi & 63, yi & 63, static_cast<std::uint32_t>(texture_id + 7)) % 13) - 6;

    switch (texture_id)
    {
        case kBackgroundTexture: return {242, 242, 242};
        case kTissueTexture: return shade({228, 164, 196}, noise);
        case 1: // horizontal bands
            return shade((yi & 15) < 8 ? Rgb{112, 48, 142} : Rgb{186, 118, 188}, noise / 2);
        case 2: // vertical bands
            return shade((xi & 15) < 8 ? Rgb{64, 72, 158} : Rgb{150, 146, 212}, noise / 2);
        case 3: // checkerboard
            return shade((((xi >> 3) + (yi >> 3)) & 1) ? Rgb{148, 36, 86} : Rgb{206, 112, 152}, noise / 2);
        case 4: // dots
        {
            const int dx = static_cast<int>(xi & 15) - 8;
            const int dy = static_cast<int>(yi & 15) - 8;
            return shade(dx * dx + dy * dy < 20 ? Rgb{40, 20, 80} : Rgb{176, 104, 150}, noise / 2);
        }
        default: return {0, 0, 0};
    }
}

void validate(const SyntheticSlideSpec& spec)
{
    if (spec.width == 0 || spec.height == 0)
        throw Error(ErrorCode::InvalidSpec, "slide dimensions must be positive");
    if (spec.level_count < kMinLevels || spec.level_count > 20)
        throw Error(ErrorCode::InvalidSpec, fmt::format("level_count {} outside [{}, 20]", spec.level_count, kMinLevels));
    if ((spec.width >> (spec.level_count - 1)) == 0 || (spec.height >> (spec.level_count - 1)) == 0)
        throw Error(ErrorCode::InvalidSpec, "slide too small for the requested level count");
    for (const auto& b: spec.blobs)
        if (!(b.rx > 0 && b.ry > 0))
            throw Error(ErrorCode::InvalidSpec, "blob radii must be positive");
    for (const auto& les: spec.lesions)
    {
        const auto& r = les.rect;
        if (!(r.x0 >= 0 && r.y0 >= 0 && r.x1 <= 1 && r.y1 <= 1 && r.x0 < r.x1 && r.y0 < r.y1))
            throw Error(ErrorCode::InvalidSpec, "lesion rectangle must be a non-empty subset of [0,1]^2");
        if (std::find(spec.label_set.begin(), spec.label_set.end(), les.label) == spec.label_set.end())
            throw Error(ErrorCode::InvalidSpec, "lesion label '" + les.label + "' not in the declared label set");
        if (les.texture_id < 1 || les.texture_id > kLesionTextureCount)
            throw Error(ErrorCode::InvalidSpec, fmt::format("unknown lesion texture {}", les.texture_id));
        const auto inside = [&](const Ellipse& e) {
            for (double x: {r.x0, r.x1})
                for (double y: {r.y0, r.y1})
                {
                    const double u = (x - e.cx) / e.rx;
                    const double v = (y - e.cy) / e.ry;
                    if (u * u + v * v > 1.0)
                        return false;
                }
            return true;
        };
        if (std::none_of(spec.blobs.begin(), spec.blobs.end(), inside))
            throw Error(ErrorCode::InvalidSpec, "lesion '" + les.label + "' does not lie inside any tissue blob");
    }
}

SyntheticSlideSpec random_spec(std::uint64_t seed, std::uint32_t width, std::uint32_t height,
                               const std::vector<std::string>& label_set, const std::string& label,
                               double lesion_fraction, double tissue_fraction)
{
    auto rng = make_rng(seed, "synthetic-layout");
    SyntheticSlideSpec spec;
    spec.seed = seed;
    spec.width = width;
    spec.height = height;
    spec.label_set = label_set;

    // Choose enough levels that the coarsest one is a small overview.
    int levels = kMinLevels;
    while (levels < 12 && std::max(width, height) >> (levels - 1) > 1024)
        ++levels;
    spec.level_count = levels;

    const double aspect = uniform(rng, 0.8, 1.25);
    const double rx = std::sqrt(tissue_fraction / std::numbers::pi / aspect);
    const double ry = rx * aspect;
    if (rx >= 0.48 || ry >= 0.48)
        throw Error(ErrorCode::InvalidSpec, "tissue fraction too large for a single blob");
    Ellipse blob{uniform(rng, rx + 0.01, 0.99 - rx), uniform(rng, ry + 0.01, 0.99 - ry), rx, ry};
    spec.blobs.push_back(blob);

    const auto it = std::find(label_set.begin(), label_set.end(), label);
    if (it == label_set.end())
        throw Error(ErrorCode::InvalidSpec, "label '" + label + "' not in label set");
    const int texture = static_cast<int>(it - label_set.begin()) % kLesionTextureCount + 1;

    // Square in pixels, lesion_fraction of the blob's area.
    const double blob_area_px = std::numbers::pi * rx * ry * width * height;
    const double side_px = std::sqrt(lesion_fraction * blob_area_px);
    const double hw = side_px / width / 2;
    const double hh = side_px / height / 2;
    for (int attempt = 0; attempt < 10000; ++attempt)
    {
        const double r = std::sqrt(uniform01(rng));
        const double a = uniform(rng, 0.0, 2 * std::numbers::pi);
        const NormPoint c{blob.cx + r * blob.rx * std::cos(a), blob.cy + r * blob.ry * std::sin(a)};
        const NormRect rect{c.x - hw, c.y - hh, c.x + hw, c.y + hh};
        bool fits = rect.x0 >= 0 && rect.y0 >= 0 && rect.x1 <= 1 && rect.y1 <= 1;
        for (double x: {rect.x0, rect.x1})
            for (double y: {rect.y0, rect.y1})
            {
                const double u = (x - blob.cx) / blob.rx;
                const double v = (y - blob.cy) / blob.ry;
                fits = fits && u * u + v * v <= 1.0;
            }
        if (fits)
        {
            spec.lesions.push_back({rect, label, texture});
            validate(spec);
            return spec;
        }
    }
    throw Error(ErrorCode::InvalidSpec, "lesion does not fit inside the tissue blob");
}

namespace
{

enum class Coverage
{
    None,
    Partial,
    Full,
};

struct IntRect
{
    std::int64_t x0, y0, x1, y1;
};

/// Renders the slide from its spec. Tiles whose footprint is a single texture
/// are shared canonical tiles; everything else is composed recursively and memoized.
class SyntheticSource final: public PyramidSource
{
public:
    explicit SyntheticSource(SyntheticSlideSpec spec): _spec(std::move(spec))
    {
        validate(_spec);
        _levels = pyramid_dims(_spec.width, _spec.height, _spec.level_count);
        for (const auto& les: _spec.lesions)
        {
            const auto lo = [](double v, std::uint32_t n) {
                return static_cast<std::int64_t>(std::ceil(v * n - 0.5));
            };
            _lesion_px.push_back({lo(les.rect.x0, _spec.width), lo(les.rect.y0, _spec.height), lo(les.rect.x1, _spec.width),
                                  lo(les.rect.y1, _spec.height)});
        }
    }

    std::vector<LevelDims> levels() const override { return _levels; }

    TilePtr tile(int level, int tx, int ty) const override
    {
        if (level < 0 || level >= static_cast<int>(_levels.size()))
            throw Error(ErrorCode::Range, fmt::format("level {} outside synthetic pyramid", level));
        const auto& d = _levels[static_cast<std::size_t>(level)];
        if (tx < 0 || ty < 0 || static_cast<std::uint32_t>(tx) >= tiles_across(d.width) ||
            static_cast<std::uint32_t>(ty) >= tiles_across(d.height))
            throw Error(ErrorCode::Range, fmt::format("tile ({}, {}) outside level {}", tx, ty, level));

        const std::int64_t span = std::int64_t{kTileSize} << level;
        const std::int64_t x0 = tx * span;
        const std::int64_t y0 = ty * span;
        const bool in_bounds = x0 + span <= _spec.width && y0 + span <= _spec.height;
        if (in_bounds)
        {
            if (const auto t = uniform_texture(x0, y0, x0 + span, y0 + span))
                return canonical(*t, level);
        }

        const std::uint64_t key = (static_cast<std::uint64_t>(level) << 58) | (static_cast<std::uint64_t>(ty) << 29) |
                                  static_cast<std::uint64_t>(tx);
        {
            std::lock_guard lock(_mutex);
            if (auto it = _memo.find(key); it != _memo.end())
                return it->second;
        }
        auto made = level == 0 ? render(tx, ty) : compose(level, tx, ty);
        std::lock_guard lock(_mutex);
        if (_memo.size() >= kMemoCap)
            _memo.clear();
        _memo.emplace(key, made);
        return made;
    }

private:
    static constexpr std::size_t kMemoCap = 1024;

    int texture_at(std::int64_t x, std::int64_t y) const noexcept
    {
        for (std::size_t i = _lesion_px.size(); i-- > 0;)
        {
            const auto& r = _lesion_px[i];
            if (x >= r.x0 && x < r.x1 && y >= r.y0 && y < r.y1)
                return _spec.lesions[i].texture_id;
        }
        const double nx = (static_cast<double>(x) + 0.5) / _spec.width;
        const double ny = (static_cast<double>(y) + 0.5) / _spec.height;
        for (const auto& e: _spec.blobs)
        {
            const double u = (nx - e.cx) / e.rx;
            const double v = (ny - e.cy) / e.ry;
            if (u * u + v * v <= 1.0)
                return kTissueTexture;
        }
        return kBackgroundTexture;
    }

    /// Coverage of the pixel centers of [x0,x1) x [y0,y1) by an ellipse.
    Coverage ellipse_coverage(const Ellipse& e, std::int64_t x0, std::int64_t y0, std::int64_t x1, std::int64_t y1) const
    {
        const double u0 = ((static_cast<double>(x0) + 0.5) / _spec.width - e.cx) / e.rx;
        const double u1 = ((static_cast<double>(x1) - 0.5) / _spec.width - e.cx) / e.rx;
        const double v0 = ((static_cast<double>(y0) + 0.5) / _spec.height - e.cy) / e.ry;
        const double v1 = ((static_cast<double>(y1) - 0.5) / _spec.height - e.cy) / e.ry;
        bool all_in = true;
        for (double u: {u0, u1})
            for (double v: {v0, v1})
                all_in = all_in && (u * u + v * v <= 1.0);
        if (all_in)
            return Coverage::Full;
        const double nu = std::clamp(0.0, u0, u1);
        const double nv = std::clamp(0.0, v0, v1);
        return nu * nu + nv * nv > 1.0 ? Coverage::None : Coverage::Partial;
    }

    std::optional<int> uniform_texture(std::int64_t x0, std::int64_t y0, std::int64_t x1, std::int64_t y1) const
    {
        std::optional<int> lesion;
        for (std::size_t i = 0; i < _lesion_px.size(); ++i)
        {
            const auto& r = _lesion_px[i];
            const bool disjoint = r.x1 <= x0 || r.x0 >= x1 || r.y1 <= y0 || r.y0 >= y1;
            if (disjoint)
                continue;
            const bool covers = r.x0 <= x0 && r.x1 >= x1 && r.y0 <= y0 && r.y1 >= y1;
            if (!covers)
                return std::nullopt;
            lesion = _spec.lesions[i].texture_id;
        }
        if (lesion)
            return lesion;
        bool any_partial = false;
        for (const auto& e: _spec.blobs)
        {
            const auto c = ellipse_coverage(e, x0, y0, x1, y1);
            if (c == Coverage::Full)
                return kTissueTexture;
            any_partial = any_partial || c == Coverage::Partial;
        }
        if (any_partial)
            return std::nullopt;
        return kBackgroundTexture;
    }

    TilePtr canonical(int texture, int level) const
    {
        {
            std::lock_guard lock(_mutex);
            if (auto it = _canonical.find({texture, level}); it != _canonical.end())
                return it->second;
        }
        TilePtr made;
        if (level == 0)
        {
            auto t = std::make_shared<TileData>(kTileBytes);
            for (int y = 0; y < kTileSize; ++y)
                for (int x = 0; x < kTileSize; ++x)
                {
                    const auto c = texture_color(texture, x, y);
                    std::copy(c.begin(), c.end(), t->begin() + (static_cast<std::ptrdiff_t>(y) * kTileSize + x) * 3);
                }
            made = std::move(t);
        }
        else
        {
            const auto child = canonical(texture, level - 1);
            made = downsample({child, child, child, child}, kTileSize * 2, kTileSize * 2);
        }
        std::lock_guard lock(_mutex);
        return _canonical.emplace(std::pair{texture, level}, made).first->second;
    }

    TilePtr render(int tx, int ty) const
    {
        auto t = std::make_shared<TileData>(kTileBytes, 0);
        const std::int64_t ox = std::int64_t{tx} * kTileSize;
        const std::int64_t oy = std::int64_t{ty} * kTileSize;
        const auto xe = std::min<std::int64_t>(kTileSize, _spec.width - ox);
        const auto ye = std::min<std::int64_t>(kTileSize, _spec.height - oy);
        for (std::int64_t y = 0; y < ye; ++y)
            for (std::int64_t x = 0; x < xe; ++x)
            {
                const auto c = texture_color(texture_at(ox + x, oy + y), ox + x, oy + y);
                std::copy(c.begin(), c.end(), t->begin() + (y * kTileSize + x) * 3);
            }
        return t;
    }

    TilePtr compose(int level, int tx, int ty) const
    {
        const auto& child_dims = _levels[static_cast<std::size_t>(level - 1)];
        const auto across = tiles_across(child_dims.width);
        const auto down = tiles_across(child_dims.height);
        std::array<TilePtr, 4> children;
        for (int j = 0; j < 2; ++j)
            for (int i = 0; i < 2; ++i)
            {
                const auto cx = static_cast<std::uint32_t>(2 * tx + i);
                const auto cy = static_cast<std::uint32_t>(2 * ty + j);
                if (cx < across && cy < down)
                    children[static_cast<std::size_t>(2 * j + i)] = tile(level - 1, static_cast<int>(cx), static_cast<int>(cy));
            }
        const auto valid_w = std::min<std::int64_t>(2 * kTileSize, std::int64_t{child_dims.width} - std::int64_t{2 * tx} * kTileSize);
        const auto valid_h = std::min<std::int64_t>(2 * kTileSize, std::int64_t{child_dims.height} - std::int64_t{2 * ty} * kTileSize);
        return downsample(children, static_cast<int>(valid_w), static_cast<int>(valid_h));
    }

    /// Rounded mean of each 2x2 block of the 512x512 mosaic formed by the
    /// children (row-major: top-left, top-right, bottom-left, bottom-right),
    /// using only pixels inside [0, valid_w) x [0, valid_h).
    static TilePtr downsample(const std::array<TilePtr, 4>& children, int valid_w, int valid_h)
    {
        auto t = std::make_shared<TileData>(kTileBytes, 0);
        const auto out_w = (valid_w + 1) / 2;
        const auto out_h = (valid_h + 1) / 2;
        for (int y = 0; y < out_h; ++y)
            for (int x = 0; x < out_w; ++x)
            {
                std::array<unsigned, 3> sum{};
                unsigned n = 0;
                for (int dy = 0; dy < 2; ++dy)
                    for (int dx = 0; dx < 2; ++dx)
                    {
                        const int mx = 2 * x + dx;
                        const int my = 2 * y + dy;
                        if (mx >= valid_w || my >= valid_h)
                            continue;
                        const auto& child = children[static_cast<std::size_t>((my / kTileSize) * 2 + mx / kTileSize)];
                        const auto* p = child->data() + ((my % kTileSize) * kTileSize + (mx % kTileSize)) * 3;
                        sum[0] += p[0];
                        sum[1] += p[1];
                        sum[2] += p[2];
                        ++n;
                    }
                auto* q = t->data() + (static_cast<std::size_t>(y) * kTileSize + x) * 3;
                for (int c = 0; c < 3; ++c)
                    q[c] = static_cast<std::uint8_t>((sum[static_cast<std::size_t>(c)] + n / 2) / n);
            }
        return t;
    }

    SyntheticSlideSpec _spec;
    std::vector<LevelDims> _levels;
    std::vector<IntRect> _lesion_px;
    mutable std::mutex _mutex;
    mutable std::map<std::pair<int, int>, TilePtr> _canonical;
    mutable std::unordered_map<std::uint64_t, TilePtr> _memo;
};

} // namespace

std::shared_ptr<const PyramidSource> make_synthetic_source(const SyntheticSlideSpec& spec)
{
    return std::make_shared<SyntheticSource>(spec);
}

PyramidSlide synthetic_slide(const SyntheticSlideSpec& spec, std::string id)
{
    return PyramidSlide(std::move(id), make_synthetic_source(spec));
}

GroundTruth ground_truth(const SyntheticSlideSpec& spec)
{
    return {spec.lesions};
}

void write_ground_truth(const std::filesystem::path& path, const GroundTruth& truth)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << "# label\tx0\ty0\tx1\ty1\ttexture\n";
    for (const auto& les: truth.lesions)
        out << fmt::format("{}\t{:.17g}\t{:.17g}\t{:.17g}\t{:.17g}\t{}\n", les.label, les.rect.x0, les.rect.y0, les.rect.x1,
                           les.rect.y1, les.texture_id);
    if (!out)
        throw Error(ErrorCode::Io, "write failed for " + path.string());
}

GroundTruth read_ground_truth(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open ground truth " + path.string());
    GroundTruth truth;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line))
    {
        ++line_no;
        if (line.empty() || line[0] == '#')
            continue;
        std::istringstream fields(line);
        Lesion les;
        if (!std::getline(fields, les.label, '\t') ||
            !(fields >> les.rect.x0 >> les.rect.y0 >> les.rect.x1 >> les.rect.y1 >> les.texture_id))
            throw Error(ErrorCode::Parse, fmt::format("{}:{}: malformed lesion record", path.string(), line_no));
        truth.lesions.push_back(std::move(les));
    }
    return truth;
}

std::filesystem::path truth_path_for(const std::filesystem::path& slide_path)
{
    auto p = slide_path;
    p.replace_extension(".truth.tsv");
    return p;
}

GeneratedSlide generate_synthetic_slide(const SyntheticSlideSpec& spec, const std::filesystem::path& out)
{
    validate(spec);
    const auto parent = out.parent_path();
    if (!parent.empty() && !std::filesystem::is_directory(parent))
        throw Error(ErrorCode::Io, "output directory does not exist: " + parent.string());
    const auto source = synthetic_slide(spec, out.stem().string());
    write_pyramid(out, source);
    const auto truth = ground_truth(spec);
    write_ground_truth(truth_path_for(out), truth);
    return {open_slide(out), truth};
}

PixelWindow lesion_window(const PyramidSlide& slide, const Lesion& lesion)
{
    const auto w = static_cast<double>(slide.width(0));
    const auto h = static_cast<double>(slide.height(0));
    const auto lo = [](double v, double n) { return static_cast<std::int64_t>(std::ceil(v * n - 0.5)); };
    return {0, lo(lesion.rect.x0, w), lo(lesion.rect.y0, h), lo(lesion.rect.x1, w), lo(lesion.rect.y1, h)};
}

double lesion_overlap_fraction(const PyramidSlide& slide, const RegionSpec& region, const Lesion& lesion, Anchor anchor)
{
    const auto roi = level0_footprint(slide, region_window(slide, region, anchor));
    if (roi.area() == 0)
        return 0.0;
    return static_cast<double>(intersection_area(roi, lesion_window(slide, lesion))) / static_cast<double>(roi.area());
}

} // namespace pathnav::slide
