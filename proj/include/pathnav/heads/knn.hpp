// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pathnav::heads
{

/// 1 - cos(a, b); a zero vector is at distance 1 from everything.
[[nodiscard]] double cosine_distance(std::span<const float> a, std::span<const float> b);

/// Cosine k-NN over a fixed training set. Labels are class indices in [0, classes).
class KnnIndex
{
public:
    /// Throws LengthMismatch on ragged input, Range on a label outside [0, classes).
    KnnIndex(std::vector<std::vector<float>> train, std::vector<int> labels, int classes);

    /// Neighbor label fractions among the k nearest; ties in distance go to the
    /// lower train index. Precondition error when the train set is smaller than k.
    [[nodiscard]] std::vector<double> scores(std::span<const float> query, int k = 10) const;

    /// Train indices of the k nearest, nearest first.
    [[nodiscard]] std::vector<std::size_t> neighbors(std::span<const float> query, int k = 10) const;

    [[nodiscard]] std::size_t size() const noexcept { return _train.size(); }
    [[nodiscard]] int classes() const noexcept { return _classes; }

private:
    std::vector<std::vector<float>> _train;
    std::vector<double> _norms; ///< squared
    std::vector<int> _labels;
    int _classes;
};

} // namespace pathnav::heads
