// SPDX-License-Identifier: Apache-2.0
#include "pathnav/heads/embedding.hpp"

#include "pathnav/error.hpp"
#include "pathnav/fileio.hpp"
#include "pathnav/heads/preprocess.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

namespace pathnav::heads
{

void validate(const Embedding& e)
{
    if (e.values.size() != kEmbeddingDim)
        throw Error(ErrorCode::Precondition,
                    fmt::format("embedding '{}' has {} components, expected {}", e.case_id, e.values.size(), kEmbeddingDim));
    if (!std::all_of(e.values.begin(), e.values.end(), [](float v) { return std::isfinite(v); }))
        throw Error(ErrorCode::Precondition, fmt::format("embedding '{}' has non-finite components", e.case_id));
}

namespace
{

constexpr std::string_view kMagic = "EMB1";

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v)
{
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader
{
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : _bytes(bytes) {}

    std::uint32_t u32()
    {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(_bytes[_pos + static_cast<std::size_t>(i)]) << (8 * i);
        _pos += 4;
        return v;
    }

    std::string text(std::size_t n)
    {
        need(n);
        std::string s(reinterpret_cast<const char*>(_bytes.data() + _pos), n);
        _pos += n;
        return s;
    }

    [[nodiscard]] bool done() const noexcept { return _pos == _bytes.size(); }

private:
    void need(std::size_t n) const
    {
        if (_bytes.size() - _pos < n)
            throw Error(ErrorCode::CorruptHeader, fmt::format("EMB1 truncated at byte {}", _pos));
    }

    std::span<const std::uint8_t> _bytes;
    std::size_t _pos = 0;
};

} // namespace

std::vector<std::uint8_t> encode_emb1(std::span<const Embedding> records)
{
    std::vector<std::uint8_t> out(kMagic.begin(), kMagic.end());
    put_u32(out, static_cast<std::uint32_t>(records.size()));
    put_u32(out, static_cast<std::uint32_t>(kEmbeddingDim));
    for (const auto& r: records)
    {
        validate(r);
        put_u32(out, static_cast<std::uint32_t>(r.case_id.size()));
        out.insert(out.end(), r.case_id.begin(), r.case_id.end());
        for (float v: r.values)
            put_u32(out, std::bit_cast<std::uint32_t>(v));
    }
    return out;
}

std::vector<Embedding> decode_emb1(std::span<const std::uint8_t> bytes)
{
    Reader in(bytes);
    if (in.text(4) != kMagic)
        throw Error(ErrorCode::CorruptHeader, "not an EMB1 file");
    const auto count = in.u32();
    const auto dim = in.u32();
    if (dim != kEmbeddingDim)
        throw Error(ErrorCode::CorruptHeader, fmt::format("EMB1 dimension {} != {}", dim, kEmbeddingDim));
    std::vector<Embedding> out;
    // count comes from the file; do not trust it for reserve
    for (std::uint32_t i = 0; i < count; ++i)
    {
        Embedding e;
        e.case_id = in.text(in.u32());
        e.values.resize(kEmbeddingDim);
        for (auto& v: e.values)
            v = std::bit_cast<float>(in.u32());
        out.push_back(std::move(e));
    }
    if (!in.done())
        throw Error(ErrorCode::CorruptHeader, "EMB1 has trailing bytes after the last record");
    return out;
}

void write_embeddings(const std::filesystem::path& path, std::span<const Embedding> records)
{
    const auto bytes = encode_emb1(records);
    write_file_atomic(path, std::span<const std::uint8_t>(bytes));
}

std::vector<Embedding> read_embeddings(const std::filesystem::path& path)
{
    const auto raw = read_file(path);
    return decode_emb1({reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size()});
}

namespace
{

constexpr int kGrid = 4;
constexpr int kIntensityBins = 8;
constexpr int kOrientationBins = 8;
constexpr int kCellFeatures = 3 * kIntensityBins + kOrientationBins;

/// 2x2 average pooling.
FloatImage halve(const FloatImage& in)
{
    FloatImage out(in.width / 2, in.height / 2, in.channels);
    for (int c = 0; c < in.channels; ++c)
        for (int y = 0; y < out.height; ++y)
            for (int x = 0; x < out.width; ++x)
                out.at(c, x, y) = 0.25f * (in.at(c, 2 * x, 2 * y) + in.at(c, 2 * x + 1, 2 * y) +
                                           in.at(c, 2 * x, 2 * y + 1) + in.at(c, 2 * x + 1, 2 * y + 1));
    return out;
}

void encode_scale(const FloatImage& img, float* dst)
{
    const int cw = img.width / kGrid;
    const int ch = img.height / kGrid;
    const auto luma = [&](int x, int y) {
        x = std::clamp(x, 0, img.width - 1);
        y = std::clamp(y, 0, img.height - 1);
        return (img.at(0, x, y) + img.at(1, x, y) + img.at(2, x, y)) / 3.0;
    };
    for (int gy = 0; gy < kGrid; ++gy)
        for (int gx = 0; gx < kGrid; ++gx)
        {
            float* cell = dst + (gy * kGrid + gx) * kCellFeatures;
            const double inv = 1.0 / (cw * ch);
            for (int y = gy * ch; y < (gy + 1) * ch; ++y)
                for (int x = gx * cw; x < (gx + 1) * cw; ++x)
                {
                    for (int c = 0; c < 3; ++c)
                    {
                        const int bin = std::clamp(static_cast<int>(img.at(c, x, y) * kIntensityBins), 0, kIntensityBins - 1);
                        cell[c * kIntensityBins + bin] += static_cast<float>(inv);
                    }
                    const double gxv = luma(x + 1, y) - luma(x - 1, y);
                    const double gyv = luma(x, y + 1) - luma(x, y - 1);
                    const double mag = std::hypot(gxv, gyv);
                    if (mag > 0)
                    {
                        double theta = std::atan2(gyv, gxv);
                        if (theta < 0)
                            theta += std::numbers::pi;
                        const int bin = std::min(static_cast<int>(theta / std::numbers::pi * kOrientationBins),
                                                 kOrientationBins - 1);
                        cell[3 * kIntensityBins + bin] += static_cast<float>(mag * inv);
                    }
                }
        }
}

} // namespace

Embedding toy_encode(const Image& patch, std::string case_id)
{
    auto grid = preprocess(patch);
    // back to [0, 1] so intensity bins cover a fixed range
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < grid.height; ++y)
            for (int x = 0; x < grid.width; ++x)
            {
                auto& v = grid.at(c, x, y);
                v = static_cast<float>(v * kStd[static_cast<std::size_t>(c)] + kMean[static_cast<std::size_t>(c)]);
            }

    Embedding e{std::move(case_id), std::vector<float>(kEmbeddingDim, 0.0f), EmbeddingSource::Toy};
    constexpr int per_scale = kGrid * kGrid * kCellFeatures;
    static_assert(3 * per_scale == kEmbeddingDim);
    for (int s = 0; s < 3; ++s)
    {
        encode_scale(grid, e.values.data() + s * per_scale);
        if (s < 2)
            grid = halve(grid);
    }
    double norm = 0;
    for (float v: e.values)
        norm += static_cast<double>(v) * v;
    norm = std::sqrt(norm);
    // every cell has a full intensity histogram, so norm > 0
    for (auto& v: e.values)
        v = static_cast<float>(v / norm);
    return e;
}

} // namespace pathnav::heads
