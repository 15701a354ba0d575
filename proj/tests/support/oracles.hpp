#pragma once

// Independent reference implementations for the metric and head checks. Written from
// the textbook definitions, sharing no code with pathnav::metrics or pathnav::heads.

#include "pathnav/metrics/survival.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace pathnav::test
{

using metrics::SurvivalRecord;

using Labels = std::vector<std::string>;

/// Brute-force macro F1 straight from the definitions.
inline double oracle_macro_f1(const Labels& p, const Labels& y, const Labels& classes)
{
    double sum = 0;
    for (const auto& c: classes)
    {
        int tp = 0, pp = 0, ap = 0;
        for (std::size_t i = 0; i < p.size(); ++i)
        {
            tp += (p[i] == c && y[i] == c);
            pp += p[i] == c;
            ap += y[i] == c;
        }
        const double prec = pp ? double(tp) / pp : 0;
        const double rec = ap ? double(tp) / ap : 0;
        sum += prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0;
    }
    return sum / classes.size();
}

/// O(n^2) pair counting with half credit for ties.
inline double oracle_auroc(const std::vector<double>& s, const std::vector<bool>& pos)
{
    double good = 0, pairs = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < s.size(); ++j)
            if (pos[i] && !pos[j])
            {
                pairs += 1;
                good += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
            }
    return good / pairs;
}

/// Continued fraction for the incomplete beta function (modified Lentz).
inline double betacf(double a, double b, double x)
{
    const double tiny = 1e-300;
    double c = 1, d = 1 - (a + b) * x / (a + 1);
    if (std::fabs(d) < tiny)
        d = tiny;
    d = 1 / d;
    double h = d;
    for (int m = 1; m <= 10000; ++m)
    {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((a + m2 - 1) * (a + m2));
        d = 1 + aa * d;
        if (std::fabs(d) < tiny)
            d = tiny;
        c = 1 + aa / c;
        if (std::fabs(c) < tiny)
            c = tiny;
        d = 1 / d;
        h *= d * c;
        aa = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1));
        d = 1 + aa * d;
        if (std::fabs(d) < tiny)
            d = tiny;
        c = 1 + aa / c;
        if (std::fabs(c) < tiny)
            c = tiny;
        d = 1 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1) < 1e-15)
            break;
    }
    return h;
}

inline double incomplete_beta(double a, double b, double x)
{
    if (x <= 0)
        return 0;
    if (x >= 1)
        return 1;
    const double front =
        std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log(1 - x));
    if (x < (a + 1) / (a + b + 2))
        return front * betacf(a, b, x) / a;
    return 1 - front * betacf(b, a, 1 - x) / b;
}

/// Two-sided p of a t statistic: I_{df/(df+t^2)}(df/2, 1/2).
inline double oracle_t_two_sided(double t, double df)
{
    return incomplete_beta(df / 2, 0.5, df / (df + t * t));
}

/// Two-group log-rank written out directly: (O1 - E1)^2 / V11.
inline double oracle_logrank_two(const std::vector<SurvivalRecord>& a, const std::vector<SurvivalRecord>& b)
{
    std::vector<double> times;
    for (const auto* g: {&a, &b})
        for (const auto& r: *g)
            if (r.event)
                times.push_back(r.time);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    double o = 0, e = 0, v = 0;
    for (double t: times)
    {
        double n1 = 0, n2 = 0, d1 = 0, d2 = 0;
        for (const auto& r: a)
        {
            n1 += r.time >= t;
            d1 += r.time == t && r.event;
        }
        for (const auto& r: b)
        {
            n2 += r.time >= t;
            d2 += r.time == t && r.event;
        }
        const double n = n1 + n2, d = d1 + d2;
        o += d1;
        e += d * n1 / n;
        if (n > 1)
            v += d * (n1 / n) * (n2 / n) * (n - d) / (n - 1);
    }
    return (o - e) * (o - e) / v;
}

/// Kolmogorov distribution upper tail P(K > x).
inline double kolmogorov_sf(double x)
{
    double s = 0;
    for (int k = 1; k < 200; ++k)
        s += (k % 2 ? 2.0 : -2.0) * std::exp(-2.0 * k * k * x * x);
    return std::clamp(s, 0.0, 1.0);
}

/// Exhaustive scan: every distance, stable order by (distance, index).
inline std::vector<std::size_t> oracle_neighbors(const std::vector<std::vector<float>>& train, const std::vector<float>& q,
                                          int k)
{
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t i = 0; i < train.size(); ++i)
    {
        double ab = 0, aa = 0, bb = 0;
        for (std::size_t j = 0; j < q.size(); ++j)
        {
            ab += double(train[i][j]) * q[j];
            aa += double(train[i][j]) * train[i][j];
            bb += double(q[j]) * q[j];
        }
        d.push_back({aa == 0 || bb == 0 ? 1.0 : 1.0 - ab / std::sqrt(aa * bb), i});
    }
    std::stable_sort(d.begin(), d.end(), [](auto& a, auto& b) { return a.first < b.first; });
    std::vector<std::size_t> out;
    for (int i = 0; i < k; ++i)
        out.push_back(d[static_cast<std::size_t>(i)].second);
    return out;
}

} // namespace pathnav::test
