// SPDX-License-Identifier: Apache-2.0
#include "pathnav/fileio.hpp"

#include "pathnav/error.hpp"

#include <fstream>
#include <iterator>

namespace pathnav
{

void write_file_atomic(const std::filesystem::path& path, std::string_view content)
{
    auto tmp = path;
    tmp += ".partial";
    if (path.has_parent_path())
    {
        std::error_code mk;
        std::filesystem::create_directories(path.parent_path(), mk);
    }
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error(ErrorCode::Io, "cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out)
        {
            out.close();
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw Error(ErrorCode::Io, "short write to " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec)
    {
        std::filesystem::remove(tmp, ec);
        throw Error(ErrorCode::Io, "cannot rename onto " + path.string());
    }
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> content)
{
    write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(content.data()), content.size()));
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace pathnav
