// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pathnav/heads/embedding.hpp"
#include "pathnav/heads/logistic.hpp"

#include <string>
#include <vector>

namespace pathnav::heads
{

/// Per-test-case class scores from both heads, columns in `classes` order.
struct HeadScores
{
    std::vector<std::string> classes;
    std::vector<std::vector<double>> knn;
    std::vector<std::vector<double>> lr;
};

/// Fits both heads on the training split only and scores the test split.
/// Classes are the sorted distinct training labels; a test label outside
/// them raises UnknownLabel. LengthMismatch when labels and embeddings differ.
[[nodiscard]] HeadScores score_heads(const std::vector<Embedding>& train, const std::vector<std::string>& train_labels,
                                     const std::vector<Embedding>& test, const std::vector<std::string>& test_labels,
                                     int k = 10, const LrOptions& lr = {});

/// Index of the largest score (first on ties).
[[nodiscard]] std::size_t argmax(const std::vector<double>& scores);

} // namespace pathnav::heads
