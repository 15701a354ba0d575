// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pathnav/image.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pathnav::heads
{

inline constexpr std::size_t kEmbeddingDim = 1536;

enum class EmbeddingSource
{
    Bridge,
    Toy,
};

struct Embedding
{
    std::string case_id;
    std::vector<float> values;
    EmbeddingSource source = EmbeddingSource::Bridge;

    friend bool operator==(const Embedding&, const Embedding&) = default;
};

/// Throws Precondition unless the vector has 1536 finite components.
void validate(const Embedding& e);

/// EMB1 layout, all integers u32 little-endian:
///   "EMB1" count dim(=1536)
///   per record: id_len id_bytes dim x f32 (IEEE-754, little-endian)
[[nodiscard]] std::vector<std::uint8_t> encode_emb1(std::span<const Embedding> records);
/// Records come back with source Bridge. Bad magic, a dimension other than
/// 1536, truncation or trailing bytes raise CorruptHeader.
[[nodiscard]] std::vector<Embedding> decode_emb1(std::span<const std::uint8_t> bytes);

void write_embeddings(const std::filesystem::path& path, std::span<const Embedding> records);
[[nodiscard]] std::vector<Embedding> read_embeddings(const std::filesystem::path& path);

/// Deterministic stand-in encoder over the preprocessed grid. Three scales
/// (224, 112, 56 px) x 4x4 cells x (3 channels x 8 intensity bins + 8
/// gradient-orientation bins) = 1536 values, L2-normalized.
[[nodiscard]] Embedding toy_encode(const Image& patch, std::string case_id = {});

} // namespace pathnav::heads
