// SPDX-License-Identifier: Apache-2.0
#include "pathnav/heads/evaluate.hpp"

#include "pathnav/error.hpp"
#include "pathnav/heads/knn.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <set>

namespace pathnav::heads
{

std::size_t argmax(const std::vector<double>& scores)
{
    if (scores.empty())
        throw Error(ErrorCode::Precondition, "argmax of an empty vector");
    return static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

HeadScores score_heads(const std::vector<Embedding>& train, const std::vector<std::string>& train_labels,
                       const std::vector<Embedding>& test, const std::vector<std::string>& test_labels, int k,
                       const LrOptions& lr)
{
    if (train.size() != train_labels.size() || test.size() != test_labels.size())
        throw Error(ErrorCode::LengthMismatch, "embeddings and labels differ in length");
    HeadScores out;
    const std::set<std::string> distinct(train_labels.begin(), train_labels.end());
    out.classes.assign(distinct.begin(), distinct.end());
    const auto index_of = [&](const std::string& label) {
        const auto it = std::lower_bound(out.classes.begin(), out.classes.end(), label);
        if (it == out.classes.end() || *it != label)
            throw Error(ErrorCode::UnknownLabel, fmt::format("label '{}' is not in the training split", label));
        return static_cast<int>(it - out.classes.begin());
    };
    for (const auto& l: test_labels)
        (void)index_of(l);

    std::vector<std::vector<float>> X;
    std::vector<int> y;
    for (std::size_t i = 0; i < train.size(); ++i)
    {
        validate(train[i]);
        X.push_back(train[i].values);
        y.push_back(index_of(train_labels[i]));
    }
    const int classes = static_cast<int>(out.classes.size());
    const auto fit = lr_train(stack_rows(X), y, classes, lr);
    const KnnIndex index(std::move(X), std::move(y), classes);
    for (const auto& e: test)
    {
        validate(e);
        out.knn.push_back(index.scores(e.values, k));
        out.lr.push_back(lr_scores(fit.head, e.values));
    }
    return out;
}

} // namespace pathnav::heads
