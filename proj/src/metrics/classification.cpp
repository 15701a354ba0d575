// SPDX-License-Identifier: Apache-2.0
#include "pathnav/metrics/classification.hpp"

#include "pathnav/error.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <numeric>

namespace pathnav::metrics
{

namespace
{

void require_same_length(std::size_t a, std::size_t b)
{
    if (a != b)
        throw Error(ErrorCode::LengthMismatch, fmt::format("{} predictions vs {} labels", a, b));
}

std::size_t class_index(const std::vector<std::string>& classes, const std::string& label)
{
    const auto it = std::find(classes.begin(), classes.end(), label);
    if (it == classes.end())
        throw Error(ErrorCode::UnknownLabel, fmt::format("label '{}' is not a listed class", label));
    return static_cast<std::size_t>(it - classes.begin());
}

} // namespace

ConfusionCounts confusion_counts(const std::vector<std::string>& preds, const std::vector<std::string>& labels,
                                 const std::vector<std::string>& classes)
{
    require_same_length(preds.size(), labels.size());
    ConfusionCounts c;
    c.classes = classes;
    c.tp.assign(classes.size(), 0);
    c.fp.assign(classes.size(), 0);
    c.fn.assign(classes.size(), 0);
    c.n = preds.size();
    for (std::size_t i = 0; i < preds.size(); ++i)
    {
        const auto p = class_index(classes, preds[i]);
        const auto y = class_index(classes, labels[i]);
        if (p == y)
        {
            ++c.tp[p];
        }
        else
        {
            ++c.fp[p];
            ++c.fn[y];
        }
    }
    return c;
}

double accuracy(const std::vector<std::string>& preds, const std::vector<std::string>& labels)
{
    require_same_length(preds.size(), labels.size());
    if (preds.empty())
        throw Error(ErrorCode::Precondition, "accuracy of no cases");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < preds.size(); ++i)
        hits += preds[i] == labels[i] ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(preds.size());
}

double macro_f1(const ConfusionCounts& counts)
{
    if (counts.classes.empty())
        throw Error(ErrorCode::Precondition, "macro F1 over no classes");
    double sum = 0.0;
    for (std::size_t k = 0; k < counts.classes.size(); ++k)
    {
        const double tp = static_cast<double>(counts.tp[k]);
        const double prec = counts.tp[k] + counts.fp[k] > 0 ? tp / static_cast<double>(counts.tp[k] + counts.fp[k]) : 0.0;
        const double rec = counts.tp[k] + counts.fn[k] > 0 ? tp / static_cast<double>(counts.tp[k] + counts.fn[k]) : 0.0;
        sum += prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
    }
    return sum / static_cast<double>(counts.classes.size());
}

double macro_f1(const std::vector<std::string>& preds, const std::vector<std::string>& labels,
                const std::vector<std::string>& classes)
{
    return macro_f1(confusion_counts(preds, labels, classes));
}

double auroc_binary(const std::vector<double>& scores, const std::vector<bool>& positive)
{
    require_same_length(scores.size(), positive.size());
    const auto n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    // midranks, 1-based
    std::vector<double> rank(n);
    for (std::size_t i = 0; i < n;)
    {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]])
            ++j;
        const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k)
            rank[order[k]] = mid;
        i = j + 1;
    }
    double pos = 0, rank_sum = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (positive[i])
        {
            pos += 1;
            rank_sum += rank[i];
        }
    const double neg = static_cast<double>(n) - pos;
    if (pos == 0 || neg == 0)
        return -1.0;
    return (rank_sum - pos * (pos + 1) / 2) / (pos * neg);
}

AurocResult auroc_ovr(const std::vector<std::vector<double>>& scores, const std::vector<std::string>& labels,
                      const std::vector<std::string>& classes)
{
    require_same_length(scores.size(), labels.size());
    std::vector<std::size_t> y;
    for (const auto& l: labels)
        y.push_back(class_index(classes, l));
    for (const auto& row: scores)
        if (row.size() != classes.size())
            throw Error(ErrorCode::LengthMismatch,
                        fmt::format("score row has {} entries for {} classes", row.size(), classes.size()));
    AurocResult out;
    double sum = 0;
    int defined = 0;
    for (std::size_t c = 0; c < classes.size(); ++c)
    {
        std::vector<double> s(scores.size());
        std::vector<bool> pos(scores.size());
        for (std::size_t i = 0; i < scores.size(); ++i)
        {
            s[i] = scores[i][c];
            pos[i] = y[i] == c;
        }
        const double a = auroc_binary(s, pos);
        out.per_class.push_back(a);
        if (a < 0)
        {
            spdlog::warn("AUROC for class '{}' is undefined (no positives or no negatives); skipped", classes[c]);
            out.skipped.push_back(classes[c]);
            continue;
        }
        sum += a;
        ++defined;
    }
    if (defined == 0)
        throw Error(ErrorCode::Undefined, "AUROC is undefined for every class");
    out.macro = sum / defined;
    return out;
}

double auroc_ovr_macro(const std::vector<std::vector<double>>& scores, const std::vector<std::string>& labels,
                       const std::vector<std::string>& classes)
{
    return auroc_ovr(scores, labels, classes).macro;
}

std::vector<double> checklist_case_accuracies(const std::vector<std::vector<std::string>>& predicted,
                                              const std::vector<std::vector<std::string>>& reference)
{
    if (predicted.size() != reference.size())
        throw Error(ErrorCode::LengthMismatch,
                    fmt::format("{} predicted cases vs {} reference cases", predicted.size(), reference.size()));
    std::vector<double> out;
    for (std::size_t n = 0; n < predicted.size(); ++n)
    {
        const auto& p = predicted[n];
        const auto& r = reference[n];
        if (p.size() != r.size() || p.empty())
            throw Error(ErrorCode::LengthMismatch,
                        fmt::format("case {}: {} predicted items vs {} reference items", n, p.size(), r.size()));
        std::size_t agree = 0;
        for (std::size_t m = 0; m < p.size(); ++m)
            agree += p[m] == r[m] ? 1 : 0;
        out.push_back(static_cast<double>(agree) / static_cast<double>(p.size()));
    }
    return out;
}

double checklist_accuracy(const std::vector<std::vector<std::string>>& predicted,
                          const std::vector<std::vector<std::string>>& reference)
{
    const auto acc = checklist_case_accuracies(predicted, reference);
    if (acc.empty())
        throw Error(ErrorCode::Precondition, "checklist accuracy over no cases");
    return std::accumulate(acc.begin(), acc.end(), 0.0) / static_cast<double>(acc.size());
}

} // namespace pathnav::metrics
