// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace pathnav
{

/// Writes `<path>.partial` then renames over path, so readers never see a torn file.
/// Missing parent directories are created.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> content);

/// Whole file as bytes; throws Io when unreadable.
[[nodiscard]] std::string read_file(const std::filesystem::path& path);

} // namespace pathnav
