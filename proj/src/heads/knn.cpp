// SPDX-License-Identifier: Apache-2.0
#include "pathnav/heads/knn.hpp"

#include "pathnav/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <utility>

namespace pathnav::heads
{

namespace
{

double dot(std::span<const float> a, std::span<const float> b)
{
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += static_cast<double>(a[i]) * b[i];
    return s;
}

/// Squared norms in, one sqrt of the product, so proportional train vectors tie exactly.
double distance_with_norms(std::span<const float> a, double aa, std::span<const float> b, double bb)
{
    if (aa == 0 || bb == 0)
        return 1.0;
    return 1.0 - dot(a, b) / std::sqrt(aa * bb);
}

} // namespace

double cosine_distance(std::span<const float> a, std::span<const float> b)
{
    if (a.size() != b.size())
        throw Error(ErrorCode::LengthMismatch, fmt::format("vectors of length {} and {}", a.size(), b.size()));
    return distance_with_norms(a, dot(a, a), b, dot(b, b));
}

KnnIndex::KnnIndex(std::vector<std::vector<float>> train, std::vector<int> labels, int classes)
    : _train(std::move(train)), _labels(std::move(labels)), _classes(classes)
{
    if (_train.size() != _labels.size())
        throw Error(ErrorCode::LengthMismatch,
                    fmt::format("{} train vectors but {} labels", _train.size(), _labels.size()));
    if (classes < 1)
        throw Error(ErrorCode::Precondition, "need at least one class");
    for (std::size_t i = 0; i < _train.size(); ++i)
    {
        if (_train[i].size() != _train.front().size())
            throw Error(ErrorCode::LengthMismatch, fmt::format("train vector {} has a different dimension", i));
        if (_labels[i] < 0 || _labels[i] >= classes)
            throw Error(ErrorCode::Range, fmt::format("label {} outside [0, {})", _labels[i], classes));
        _norms.push_back(dot(_train[i], _train[i]));
    }
}

std::vector<std::size_t> KnnIndex::neighbors(std::span<const float> query, int k) const
{
    if (k < 1 || _train.size() < static_cast<std::size_t>(k))
        throw Error(ErrorCode::Precondition, fmt::format("k = {} with {} train points", k, _train.size()));
    if (query.size() != _train.front().size())
        throw Error(ErrorCode::LengthMismatch,
                    fmt::format("query has {} components, index {}", query.size(), _train.front().size()));
    const double nq = dot(query, query);
    std::vector<std::pair<double, std::size_t>> d;
    d.reserve(_train.size());
    for (std::size_t i = 0; i < _train.size(); ++i)
        d.emplace_back(distance_with_norms(query, nq, _train[i], _norms[i]), i);
    const auto mid = d.begin() + k;
    std::partial_sort(d.begin(), mid, d.end());
    std::vector<std::size_t> out;
    for (auto it = d.begin(); it != mid; ++it)
        out.push_back(it->second);
    return out;
}

std::vector<double> KnnIndex::scores(std::span<const float> query, int k) const
{
    std::vector<double> s(static_cast<std::size_t>(_classes), 0.0);
    for (auto i: neighbors(query, k))
        s[static_cast<std::size_t>(_labels[i])] += 1.0;
    for (auto& v: s)
        v /= k;
    return s;
}

} // namespace pathnav::heads
