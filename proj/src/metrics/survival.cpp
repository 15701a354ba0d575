// SPDX-License-Identifier: Apache-2.0
#include "pathnav/metrics/survival.hpp"

#include "pathnav/error.hpp"

#include <Eigen/Dense>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace pathnav::metrics
{

double KMCurve::at(double t) const noexcept
{
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    if (it == times.begin())
        return 1.0;
    return survival[static_cast<std::size_t>(it - times.begin()) - 1];
}

namespace
{

void check_times(const std::vector<SurvivalRecord>& records)
{
    for (const auto& r: records)
        if (!(r.time >= 0) || !std::isfinite(r.time))
            throw Error(ErrorCode::Range, fmt::format("survival time {} must be finite and >= 0", r.time));
}

} // namespace

KMCurve km_estimate(const std::vector<SurvivalRecord>& records)
{
    if (records.empty())
        throw Error(ErrorCode::Precondition, "Kaplan-Meier estimate of no records");
    check_times(records);
    auto sorted = records;
    std::sort(sorted.begin(), sorted.end(), [](const SurvivalRecord& a, const SurvivalRecord& b) { return a.time < b.time; });

    KMCurve c;
    double s = 1.0;
    std::size_t at_risk = sorted.size();
    for (std::size_t i = 0; i < sorted.size();)
    {
        const double t = sorted[i].time;
        std::size_t deaths = 0, leaving = 0;
        for (; i < sorted.size() && sorted[i].time == t; ++i, ++leaving)
        {
            if (sorted[i].event)
                ++deaths;
            else
                c.censored.push_back(t);
        }
        if (deaths > 0)
        {
            s *= 1.0 - static_cast<double>(deaths) / static_cast<double>(at_risk);
            c.times.push_back(t);
            c.survival.push_back(s);
            c.at_risk.push_back(at_risk);
            c.events.push_back(deaths);
        }
        at_risk -= leaving;
    }
    return c;
}

std::vector<std::vector<SurvivalRecord>> split_by_group(const std::vector<SurvivalRecord>& records)
{
    std::map<int, std::vector<SurvivalRecord>> by;
    for (const auto& r: records)
        by[r.group].push_back(r);
    std::vector<std::vector<SurvivalRecord>> out;
    for (auto& [g, v]: by)
        out.push_back(std::move(v));
    return out;
}

LogRankResult logrank_test(const std::vector<std::vector<SurvivalRecord>>& groups)
{
    const auto G = groups.size();
    if (G < 2)
        throw Error(ErrorCode::Precondition, fmt::format("log-rank test needs >= 2 groups, got {}", G));
    for (std::size_t g = 0; g < G; ++g)
    {
        if (groups[g].empty())
            throw Error(ErrorCode::Precondition, fmt::format("group {} is empty", g));
        check_times(groups[g]);
    }

    // (time, group, event) sorted by time
    struct Obs
    {
        double time;
        std::size_t group;
        bool event;
    };
    std::vector<Obs> all;
    for (std::size_t g = 0; g < G; ++g)
        for (const auto& r: groups[g])
            all.push_back({r.time, g, r.event});
    std::sort(all.begin(), all.end(), [](const Obs& a, const Obs& b) { return a.time < b.time; });

    std::vector<double> at_risk(G);
    for (std::size_t g = 0; g < G; ++g)
        at_risk[g] = static_cast<double>(groups[g].size());

    LogRankResult res;
    res.observed.assign(G, 0.0);
    res.expected.assign(G, 0.0);
    const auto k = static_cast<Eigen::Index>(G - 1);
    Eigen::MatrixXd V = Eigen::MatrixXd::Zero(k, k);
    double total_events = 0;

    for (std::size_t i = 0; i < all.size();)
    {
        const double t = all[i].time;
        std::vector<double> d(G, 0.0), leaving(G, 0.0);
        for (; i < all.size() && all[i].time == t; ++i)
        {
            leaving[all[i].group] += 1;
            if (all[i].event)
                d[all[i].group] += 1;
        }
        double n = 0, dt = 0;
        for (std::size_t g = 0; g < G; ++g)
        {
            n += at_risk[g];
            dt += d[g];
        }
        if (dt > 0)
        {
            total_events += dt;
            for (std::size_t g = 0; g < G; ++g)
            {
                res.observed[g] += d[g];
                res.expected[g] += dt * at_risk[g] / n;
            }
            if (n > 1)
            {
                const double f = dt * (n - dt) / (n - 1);
                for (Eigen::Index a = 0; a < k; ++a)
                    for (Eigen::Index b = 0; b < k; ++b)
                    {
                        const double na = at_risk[static_cast<std::size_t>(a)] / n;
                        const double nb = at_risk[static_cast<std::size_t>(b)] / n;
                        V(a, b) += f * na * ((a == b ? 1.0 : 0.0) - nb);
                    }
            }
        }
        for (std::size_t g = 0; g < G; ++g)
            at_risk[g] -= leaving[g];
    }
    if (total_events == 0)
        throw Error(ErrorCode::Precondition, "log-rank test needs at least one event");

    Eigen::VectorXd u(k);
    for (Eigen::Index a = 0; a < k; ++a)
        u(a) = res.observed[static_cast<std::size_t>(a)] - res.expected[static_cast<std::size_t>(a)];

    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(V);
    const auto& lambda = eig.eigenvalues();
    const double tol = std::numeric_limits<double>::epsilon() * static_cast<double>(k) *
                       std::max(1.0, lambda.cwiseAbs().maxCoeff());
    const Eigen::VectorXd proj = eig.eigenvectors().transpose() * u;
    double chi2 = 0;
    int rank = 0;
    for (Eigen::Index a = 0; a < k; ++a)
        if (lambda(a) > tol)
        {
            chi2 += proj(a) * proj(a) / lambda(a);
            ++rank;
        }
    res.chi_squared = std::max(0.0, chi2);
    res.df = rank;
    res.p_value = rank == 0 ? 1.0 : chi2_sf(res.chi_squared, rank);
    return res;
}

namespace
{

constexpr int kMaxIter = 1000;
constexpr double kEps = 1e-16;

double gamma_series(double a, double x)
{
    double ap = a, sum = 1.0 / a, del = sum;
    for (int n = 0; n < kMaxIter; ++n)
    {
        ap += 1;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * kEps)
            break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

/// Modified Lentz evaluation of the continued fraction for Q(a,x).
double gamma_continued_fraction(double a, double x)
{
    constexpr double tiny = 1e-300;
    double b = x + 1 - a, c = 1 / tiny, d = 1 / b, h = d;
    for (int i = 1; i <= kMaxIter; ++i)
    {
        const double an = -i * (i - a);
        b += 2;
        d = an * d + b;
        if (std::fabs(d) < tiny)
            d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny)
            c = tiny;
        d = 1 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1) < kEps)
            break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

void check_gamma_args(double a, double x)
{
    if (!(a > 0) || !(x >= 0))
        throw Error(ErrorCode::Range, fmt::format("incomplete gamma needs a > 0 and x >= 0, got a={}, x={}", a, x));
}

} // namespace

double regularized_gamma_p(double a, double x)
{
    check_gamma_args(a, x);
    if (x == 0)
        return 0.0;
    if (std::isinf(x))
        return 1.0;
    return x < a + 1 ? gamma_series(a, x) : 1.0 - gamma_continued_fraction(a, x);
}

double regularized_gamma_q(double a, double x)
{
    check_gamma_args(a, x);
    if (x == 0)
        return 1.0;
    if (std::isinf(x))
        return 0.0;
    return x < a + 1 ? 1.0 - gamma_series(a, x) : gamma_continued_fraction(a, x);
}

double chi2_cdf(double x, double k)
{
    return regularized_gamma_p(k / 2, x / 2);
}

double chi2_sf(double x, double k)
{
    return regularized_gamma_q(k / 2, x / 2);
}

} // namespace pathnav::metrics
