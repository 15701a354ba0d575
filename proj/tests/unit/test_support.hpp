#pragma once

#include "pathnav/error.hpp"
#include "pathnav/slide/synthetic.hpp"

#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <unistd.h>

namespace pathnav::test
{

/// Fresh directory under the system temp dir, removed on scope exit.
class TempDir
{
public:
    TempDir()
    {
        static std::atomic<int> counter{0};
        _path = std::filesystem::temp_directory_path() /
                ("pathnav-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(_path);
        std::filesystem::create_directories(_path);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(_path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] const std::filesystem::path& path() const noexcept { return _path; }
    [[nodiscard]] std::filesystem::path operator/(const std::string& name) const { return _path / name; }

private:
    std::filesystem::path _path;
};

inline std::string read_file(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& p, const std::string& content)
{
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << content;
}

/// Code of the pathnav::Error thrown by fn; fails the test if none is thrown.
template <typename Fn>
ErrorCode code_of(Fn&& fn)
{
    try
    {
        fn();
    }
    catch (const Error& e)
    {
        return e.code();
    }
    FAIL("expected pathnav::Error");
    return ErrorCode::Io;
}

/// 4096x3072, five levels, one centered blob, one class-A lesion.
inline slide::SyntheticSlideSpec small_spec(std::uint64_t seed = 1)
{
    slide::SyntheticSlideSpec spec;
    spec.seed = seed;
    spec.width = 4096;
    spec.height = 3072;
    spec.level_count = 5;
    spec.label_set = {"A", "B", "C"};
    spec.blobs.push_back({0.5, 0.5, 0.3, 0.35});
    spec.lesions.push_back({{0.45, 0.40, 0.60, 0.60}, "A", 1});
    return spec;
}

} // namespace pathnav::test
