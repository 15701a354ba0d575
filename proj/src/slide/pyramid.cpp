// SPDX-License-Identifier: Apache-2.0
#include "pathnav/slide/pyramid.hpp"

#include "pathnav/crypto.hpp"
#include "pathnav/error.hpp"

#include <fmt/format.h>

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cstring>
#include <fstream>
#include <unordered_map>

namespace pathnav::slide
{

namespace
{

constexpr std::array<char, 4> kMagic = {'P', 'Y', 'R', '1'};

std::uint32_t read_u32(const std::uint8_t* p) noexcept
{
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint64_t read_u64(const std::uint8_t* p) noexcept
{
    return static_cast<std::uint64_t>(read_u32(p)) | (static_cast<std::uint64_t>(read_u32(p + 4)) << 32);
}

void put_u32(std::string& out, std::uint32_t v)
{
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v)
{
    for (int i = 0; i < 8; ++i)
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class FileDescriptor
{
public:
    explicit FileDescriptor(int fd) noexcept: _fd(fd) {}
    ~FileDescriptor()
    {
        if (_fd >= 0)
            ::close(_fd);
    }
    FileDescriptor(const FileDescriptor&) = delete;
    FileDescriptor& operator=(const FileDescriptor&) = delete;

    [[nodiscard]] int get() const noexcept { return _fd; }

private:
    int _fd;
};

void pread_exact(int fd, void* buf, std::size_t n, std::uint64_t offset, const std::string& what)
{
    auto* dst = static_cast<std::uint8_t*>(buf);
    std::size_t done = 0;
    while (done < n)
    {
        const auto r = ::pread(fd, dst + done, n - done, static_cast<off_t>(offset + done));
        if (r <= 0)
            throw Error(ErrorCode::CorruptHeader, fmt::format("{}: short read", what));
        done += static_cast<std::size_t>(r);
    }
}

class TiledFileSource final: public PyramidSource
{
public:
    explicit TiledFileSource(const std::filesystem::path& path):
        _path(path.string()), _fd(::open(_path.c_str(), O_RDONLY | O_CLOEXEC))
    {
        if (_fd.get() < 0)
            throw Error(ErrorCode::Io, "cannot open slide " + _path);
        struct stat st{};
        if (::fstat(_fd.get(), &st) != 0)
            throw Error(ErrorCode::Io, "cannot stat " + _path);
        const auto file_size = static_cast<std::uint64_t>(st.st_size);

        std::array<std::uint8_t, 8> head{};
        if (file_size < head.size())
            throw Error(ErrorCode::CorruptHeader, _path + ": truncated header");
        pread_exact(_fd.get(), head.data(), head.size(), 0, _path);
        if (std::memcmp(head.data(), kMagic.data(), kMagic.size()) != 0)
            throw Error(ErrorCode::CorruptHeader, _path + ": bad magic");
        const std::uint32_t level_count = read_u32(head.data() + 4);
        if (level_count == 0 || level_count > 32)
            throw Error(ErrorCode::CorruptHeader, fmt::format("{}: implausible level count {}", _path, level_count));

        const std::uint64_t dims_bytes = 8ULL * level_count;
        if (file_size < 8 + dims_bytes)
            throw Error(ErrorCode::CorruptHeader, _path + ": truncated level table");
        std::vector<std::uint8_t> dims(dims_bytes);
        pread_exact(_fd.get(), dims.data(), dims.size(), 8, _path);
        for (std::uint32_t l = 0; l < level_count; ++l)
            _levels.push_back({read_u32(dims.data() + 8 * l), read_u32(dims.data() + 8 * l + 4)});

        if (level_count < static_cast<std::uint32_t>(kMinLevels))
            throw Error(ErrorCode::Unsupported,
                        fmt::format("{}: {} levels, at least {} required", _path, level_count, kMinLevels));

        std::uint64_t cursor = 8 + dims_bytes;
        for (const auto& d: _levels)
        {
            const std::uint64_t n = static_cast<std::uint64_t>(tiles_across(d.width)) * tiles_across(d.height);
            if (cursor + 8 * n > file_size)
                throw Error(ErrorCode::CorruptHeader, _path + ": truncated tile directory");
            std::vector<std::uint8_t> raw(8 * n);
            pread_exact(_fd.get(), raw.data(), raw.size(), cursor, _path);
            std::vector<std::uint64_t> offsets(n);
            for (std::uint64_t i = 0; i < n; ++i)
            {
                offsets[i] = read_u64(raw.data() + 8 * i);
                if (offsets[i] + kTileBytes > file_size)
                    throw Error(ErrorCode::CorruptHeader, _path + ": tile offset past end of file");
            }
            _directory.push_back(std::move(offsets));
            cursor += 8 * n;
        }
    }

    std::vector<LevelDims> levels() const override { return _levels; }

    TilePtr tile(int level, int tx, int ty) const override
    {
        const auto& d = _levels.at(static_cast<std::size_t>(level));
        const auto across = tiles_across(d.width);
        if (tx < 0 || ty < 0 || static_cast<std::uint32_t>(tx) >= across ||
            static_cast<std::uint32_t>(ty) >= tiles_across(d.height))
            throw Error(ErrorCode::Range, fmt::format("tile ({}, {}) outside level {}", tx, ty, level));
        auto data = std::make_shared<TileData>(kTileBytes);
        const auto offset = _directory[static_cast<std::size_t>(level)][static_cast<std::size_t>(ty) * across + tx];
        pread_exact(_fd.get(), data->data(), data->size(), offset, _path);
        return data;
    }

private:
    std::string _path;
    FileDescriptor _fd;
    std::vector<LevelDims> _levels;
    std::vector<std::vector<std::uint64_t>> _directory;
};

} // namespace

std::vector<LevelDims> pyramid_dims(std::uint32_t width0, std::uint32_t height0, int level_count)
{
    std::vector<LevelDims> out;
    for (int l = 0; l < level_count; ++l)
    {
        const std::uint64_t f = 1ULL << l;
        out.push_back({static_cast<std::uint32_t>((width0 + f - 1) / f), static_cast<std::uint32_t>((height0 + f - 1) / f)});
    }
    return out;
}

PyramidSlide::PyramidSlide(std::string id, std::shared_ptr<const PyramidSource> source):
    _id(std::move(id)), _source(std::move(source))
{
    if (!_source)
        throw Error(ErrorCode::Precondition, "null pyramid source");
    _levels = _source->levels();
    if (_levels.size() < static_cast<std::size_t>(kMinLevels))
        throw Error(ErrorCode::Unsupported,
                    fmt::format("slide {}: {} levels, at least {} required", _id, _levels.size(), kMinLevels));
    const auto expected = pyramid_dims(_levels[0].width, _levels[0].height, static_cast<int>(_levels.size()));
    if (_levels[0].width == 0 || _levels[0].height == 0 || expected != _levels)
        throw Error(ErrorCode::CorruptHeader, fmt::format("slide {}: level dimensions are not a 2x pyramid", _id));
    for (std::size_t l = 1; l < _levels.size(); ++l)
        if (_levels[l].width >= _levels[l - 1].width || _levels[l].height >= _levels[l - 1].height)
            throw Error(ErrorCode::CorruptHeader, fmt::format("slide {}: level {} does not shrink", _id, l));
}

void PyramidSlide::check_level(int level) const
{
    if (level < 0 || level >= level_count())
        throw Error(ErrorCode::Range, fmt::format("level {} outside [0, {})", level, level_count()));
}

std::int64_t PyramidSlide::width(int level) const
{
    check_level(level);
    return _levels[static_cast<std::size_t>(level)].width;
}

std::int64_t PyramidSlide::height(int level) const
{
    check_level(level);
    return _levels[static_cast<std::size_t>(level)].height;
}

std::int64_t PyramidSlide::downsample(int level) const
{
    check_level(level);
    return std::int64_t{1} << level;
}

Image PyramidSlide::read_region(int level, std::int64_t x, std::int64_t y, int w, int h) const
{
    check_level(level);
    if (x < 0 || y < 0 || w < 0 || h < 0 || x + w > width(level) || y + h > height(level))
        throw Error(ErrorCode::Range, fmt::format("region {}x{}+{}+{} outside level {}", w, h, x, y, level));
    Image out(w, h);
    if (w == 0 || h == 0)
        return out;
    const auto tx0 = static_cast<int>(x / kTileSize);
    const auto ty0 = static_cast<int>(y / kTileSize);
    const auto tx1 = static_cast<int>((x + w - 1) / kTileSize);
    const auto ty1 = static_cast<int>((y + h - 1) / kTileSize);
    for (int ty = ty0; ty <= ty1; ++ty)
        for (int tx = tx0; tx <= tx1; ++tx)
        {
            const auto t = _source->tile(level, tx, ty);
            const std::int64_t ox = std::int64_t{tx} * kTileSize;
            const std::int64_t oy = std::int64_t{ty} * kTileSize;
            const std::int64_t cx0 = std::max(x, ox);
            const std::int64_t cx1 = std::min(x + w, ox + kTileSize);
            const std::int64_t cy0 = std::max(y, oy);
            const std::int64_t cy1 = std::min(y + h, oy + kTileSize);
            for (std::int64_t row = cy0; row < cy1; ++row)
            {
                const auto* src = t->data() + ((row - oy) * kTileSize + (cx0 - ox)) * 3;
                std::memcpy(out.at(static_cast<int>(cx0 - x), static_cast<int>(row - y)), src,
                            static_cast<std::size_t>(cx1 - cx0) * 3);
            }
        }
    return out;
}

Image PyramidSlide::read_level(int level) const
{
    return read_region(level, 0, 0, static_cast<int>(width(level)), static_cast<int>(height(level)));
}

PyramidSlide open_slide(const std::filesystem::path& path)
{
    if (!std::filesystem::exists(path))
        throw Error(ErrorCode::Io, "no such slide: " + path.string());
    return PyramidSlide(path.stem().string(), std::make_shared<TiledFileSource>(path));
}

void write_pyramid(const std::filesystem::path& path, const PyramidSlide& slide)
{
    const auto levels = slide.source().levels();

    std::string header(kMagic.begin(), kMagic.end());
    put_u32(header, static_cast<std::uint32_t>(levels.size()));
    for (const auto& d: levels)
    {
        put_u32(header, d.width);
        put_u32(header, d.height);
    }
    std::uint64_t directory_entries = 0;
    for (const auto& d: levels)
        directory_entries += static_cast<std::uint64_t>(tiles_across(d.width)) * tiles_across(d.height);
    const std::uint64_t data_start = header.size() + 8 * directory_entries;

    auto tmp = path;
    tmp += ".partial";
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorCode::Io, "cannot write " + path.string());
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    out.seekp(static_cast<std::streamoff>(data_start));

    // Payload dedup: by shared tile pointer (canonical tiles), then by content digest.
    std::unordered_map<const TileData*, std::uint64_t> by_pointer;
    std::vector<TilePtr> pinned;
    std::unordered_map<std::string, std::uint64_t> by_content;
    std::string directory;
    directory.reserve(8 * directory_entries);
    std::uint64_t cursor = data_start;

    for (int l = 0; l < static_cast<int>(levels.size()); ++l)
    {
        const auto across = tiles_across(levels[static_cast<std::size_t>(l)].width);
        const auto down = tiles_across(levels[static_cast<std::size_t>(l)].height);
        for (std::uint32_t ty = 0; ty < down; ++ty)
            for (std::uint32_t tx = 0; tx < across; ++tx)
            {
                auto t = slide.source().tile(l, static_cast<int>(tx), static_cast<int>(ty));
                if (t->size() != kTileBytes)
                    throw Error(ErrorCode::Io, "source produced a malformed tile");
                std::uint64_t offset = 0;
                if (auto it = by_pointer.find(t.get()); it != by_pointer.end())
                    offset = it->second;
                else
                {
                    const auto digest = sha256_hex(std::span<const std::uint8_t>(*t));
                    if (auto ct = by_content.find(digest); ct != by_content.end())
                        offset = ct->second;
                    else
                    {
                        offset = cursor;
                        out.write(reinterpret_cast<const char*>(t->data()), static_cast<std::streamsize>(t->size()));
                        cursor += t->size();
                        by_content.emplace(digest, offset);
                    }
                    // Pointer identity is only trustworthy while we hold the tile.
                    if (t.use_count() > 1)
                    {
                        if (pinned.size() >= 256)
                        {
                            pinned.clear();
                            by_pointer.clear();
                        }
                        by_pointer.emplace(t.get(), offset);
                        pinned.push_back(std::move(t));
                    }
                }
                put_u64(directory, offset);
            }
    }
    out.seekp(static_cast<std::streamoff>(header.size()));
    out.write(directory.data(), static_cast<std::streamsize>(directory.size()));
    out.close();
    if (!out)
    {
        std::filesystem::remove(tmp);
        throw Error(ErrorCode::Io, "write failed for " + path.string());
    }
    std::filesystem::rename(tmp, path);
}

} // namespace pathnav::slide
