// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace pathnav::metrics
{

struct ConfusionCounts
{
    std::vector<std::string> classes;
    std::vector<std::size_t> tp;
    std::vector<std::size_t> fp;
    std::vector<std::size_t> fn;
    std::size_t n = 0;
};

/// One-vs-rest counts per class. LengthMismatch on unequal lengths,
/// UnknownLabel when a label or prediction is not in `classes`.
[[nodiscard]] ConfusionCounts confusion_counts(const std::vector<std::string>& preds,
                                               const std::vector<std::string>& labels,
                                               const std::vector<std::string>& classes);

/// Fraction of exact matches. LengthMismatch on unequal lengths, Precondition when empty.
[[nodiscard]] double accuracy(const std::vector<std::string>& preds, const std::vector<std::string>& labels);

[[nodiscard]] double macro_f1(const ConfusionCounts& counts);
/// Unweighted mean of per-class F1; a class with precision + recall = 0 counts as 0.
[[nodiscard]] double macro_f1(const std::vector<std::string>& preds, const std::vector<std::string>& labels,
                              const std::vector<std::string>& classes);

/// P(score_pos > score_neg) + P(tie)/2 from midranks. Returns a negative
/// value when either side is empty.
[[nodiscard]] double auroc_binary(const std::vector<double>& scores, const std::vector<bool>& positive);

struct AurocResult
{
    double macro = 0.0;
    /// Per class; negative where undefined.
    std::vector<double> per_class;
    std::vector<std::string> skipped;
};

/// One-vs-rest AUROC per class, averaged over classes where it is defined.
/// scores[i][c] is case i's score for classes[c]. Classes without positives
/// or negatives are skipped with a warning; Undefined when all are skipped.
[[nodiscard]] AurocResult auroc_ovr(const std::vector<std::vector<double>>& scores,
                                    const std::vector<std::string>& labels, const std::vector<std::string>& classes);
[[nodiscard]] double auroc_ovr_macro(const std::vector<std::vector<double>>& scores,
                                     const std::vector<std::string>& labels, const std::vector<std::string>& classes);

/// Per-case agreement rate, then the unweighted mean over cases.
/// LengthMismatch when a case's vectors differ in length or are empty.
[[nodiscard]] double checklist_accuracy(const std::vector<std::vector<std::string>>& predicted,
                                        const std::vector<std::vector<std::string>>& reference);
/// Per-case agreement rates, in case order.
[[nodiscard]] std::vector<double> checklist_case_accuracies(const std::vector<std::vector<std::string>>& predicted,
                                                            const std::vector<std::vector<std::string>>& reference);

} // namespace pathnav::metrics
