// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace pathnav::metrics
{

struct SurvivalRecord
{
    double time = 0.0;
    /// true: death observed; false: censored.
    bool event = false;
    int group = 0;
};

/// Product-limit curve evaluated at the distinct event times.
struct KMCurve
{
    std::vector<double> times;
    std::vector<double> survival;
    std::vector<std::size_t> at_risk;
    std::vector<std::size_t> events;
    /// Censoring times, for plot marks.
    std::vector<double> censored;

    /// S(t): 1 before the first event time.
    [[nodiscard]] double at(double t) const noexcept;
};

/// Precondition on empty input, Range on negative or non-finite times.
[[nodiscard]] KMCurve km_estimate(const std::vector<SurvivalRecord>& records);

struct LogRankResult
{
    double chi_squared = 0.0;
    int df = 0;
    double p_value = 1.0;
    std::vector<double> observed;
    std::vector<double> expected;
};

/// G-group log-rank test. Statistic over the first G-1 groups with a
/// pseudo-inverse of the hypergeometric covariance; df = its rank.
/// Precondition when fewer than 2 groups, any group is empty, or no events.
[[nodiscard]] LogRankResult logrank_test(const std::vector<std::vector<SurvivalRecord>>& groups);
/// Groups records by `group`, in ascending group order.
[[nodiscard]] std::vector<std::vector<SurvivalRecord>> split_by_group(const std::vector<SurvivalRecord>& records);

/// Regularized incomplete gamma functions P(a,x) and Q(a,x) = 1 - P(a,x):
/// series below x = a + 1, continued fraction above.
[[nodiscard]] double regularized_gamma_p(double a, double x);
[[nodiscard]] double regularized_gamma_q(double a, double x);
/// Chi-square CDF and upper tail with k degrees of freedom.
[[nodiscard]] double chi2_cdf(double x, double k);
[[nodiscard]] double chi2_sf(double x, double k);

} // namespace pathnav::metrics
