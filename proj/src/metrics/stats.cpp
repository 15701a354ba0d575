// SPDX-License-Identifier: Apache-2.0
#include "pathnav/metrics/stats.hpp"

#include "pathnav/error.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace pathnav::metrics
{

double mean(const std::vector<double>& v)
{
    if (v.empty())
        throw Error(ErrorCode::Precondition, "mean of no values");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double quantile(std::vector<double> v, double q)
{
    if (v.empty())
        throw Error(ErrorCode::Precondition, "quantile of no values");
    if (!(q >= 0 && q <= 1))
        throw Error(ErrorCode::Range, fmt::format("quantile level {} outside [0,1]", q));
    std::sort(v.begin(), v.end());
    const double h = (static_cast<double>(v.size()) - 1) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

BootstrapResult bootstrap_ci(std::size_t n, const IndexStatistic& statistic, Rng& rng, int B, double level)
{
    if (n == 0)
        throw Error(ErrorCode::Precondition, "bootstrap over no cases");
    if (B < 1)
        throw Error(ErrorCode::Precondition, fmt::format("B must be >= 1, got {}", B));
    if (!(level > 0 && level < 1))
        throw Error(ErrorCode::Range, fmt::format("confidence level {} outside (0,1)", level));
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    BootstrapResult r;
    r.B = B;
    r.estimate = statistic(idx);
    std::vector<double> reps;
    reps.reserve(static_cast<std::size_t>(B));
    for (int b = 0; b < B; ++b)
    {
        for (auto& i: idx)
            i = uniform_index(rng, n);
        reps.push_back(statistic(idx));
    }
    const double alpha = (1 - level) / 2;
    r.lower = std::min(quantile(reps, alpha), r.estimate);
    r.upper = std::max(quantile(reps, 1 - alpha), r.estimate);
    return r;
}

BootstrapResult bootstrap_ci(const std::vector<double>& values, Rng& rng, int B, double level)
{
    return bootstrap_ci(
        values.size(),
        [&](const std::vector<std::size_t>& idx) {
            double s = 0;
            for (const auto i: idx)
                s += values[i];
            return s / static_cast<double>(idx.size());
        },
        rng, B, level);
}

double student_t_cdf(double t, double df)
{
    if (!(df > 0))
        throw Error(ErrorCode::Range, fmt::format("degrees of freedom must be positive, got {}", df));
    if (std::isinf(t))
        return t > 0 ? 1.0 : 0.0;
    return boost::math::cdf(boost::math::students_t_distribution<double>(df), t);
}

PairedTResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b)
{
    if (a.size() != b.size())
        throw Error(ErrorCode::LengthMismatch, fmt::format("{} vs {} paired values", a.size(), b.size()));
    if (a.size() < 2)
        throw Error(ErrorCode::Precondition, "paired t-test needs at least 2 pairs");
    const auto n = a.size();
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i)
        d[i] = a[i] - b[i];
    PairedTResult r;
    r.df = static_cast<int>(n) - 1;
    r.mean_difference = mean(d);
    if (std::all_of(d.begin(), d.end(), [](double x) { return x == 0.0; }))
    {
        r.degenerate = true;
        r.p_value = 1.0;
        return r;
    }
    double ss = 0;
    for (const double x: d)
        ss += (x - r.mean_difference) * (x - r.mean_difference);
    const double se = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
    if (se == 0)
    {
        // constant non-zero difference
        r.t = std::copysign(std::numeric_limits<double>::infinity(), r.mean_difference);
        r.p_value = 0.0;
        return r;
    }
    r.t = r.mean_difference / se;
    r.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(
                                        boost::math::students_t_distribution<double>(r.df), std::fabs(r.t))));
    return r;
}

} // namespace pathnav::metrics
