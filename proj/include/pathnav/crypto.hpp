// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace pathnav
{

/// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view data);
std::string sha256_hex(std::span<const std::uint8_t> data);
std::string sha256_file_hex(const std::filesystem::path& path);

std::string base64_encode(std::span<const std::uint8_t> data);

} // namespace pathnav
