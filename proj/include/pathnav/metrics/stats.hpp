// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pathnav/rng.hpp"

#include <cstddef>
#include <functional>
#include <vector>

namespace pathnav::metrics
{

[[nodiscard]] double mean(const std::vector<double>& v);

/// Type-7 sample quantile (linear interpolation between order statistics).
[[nodiscard]] double quantile(std::vector<double> v, double q);

struct BootstrapResult
{
    double estimate = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    int B = 1000;
};

/// Statistic evaluated on a resample given as case indices.
using IndexStatistic = std::function<double(const std::vector<std::size_t>&)>;

/// Case-level percentile bootstrap over n cases. The interval is widened to
/// contain the point estimate if the percentiles miss it.
[[nodiscard]] BootstrapResult bootstrap_ci(std::size_t n, const IndexStatistic& statistic, Rng& rng, int B = 1000,
                                           double level = 0.95);
/// Mean of `values` with a percentile interval.
[[nodiscard]] BootstrapResult bootstrap_ci(const std::vector<double>& values, Rng& rng, int B = 1000,
                                           double level = 0.95);

struct PairedTResult
{
    double t = 0.0;
    int df = 0;
    double p_value = 1.0;
    double mean_difference = 0.0;
    /// All differences zero: p is 1 by convention.
    bool degenerate = false;
};

/// Two-sided paired t-test on a - b with n - 1 degrees of freedom.
/// LengthMismatch on unequal lengths, Precondition when n < 2.
[[nodiscard]] PairedTResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b);

/// Student t CDF with df degrees of freedom.
[[nodiscard]] double student_t_cdf(double t, double df);

} // namespace pathnav::metrics
