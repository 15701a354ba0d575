#include "../support/oracles.hpp"
#include "test_support.hpp"

#include "pathnav/metrics/classification.hpp"
#include "pathnav/metrics/stats.hpp"
#include "pathnav/metrics/survival.hpp"
#include "pathnav/rng.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace pathnav;
using namespace pathnav::metrics;
using namespace pathnav::test;

namespace
{

std::vector<SurvivalRecord> recs(std::initializer_list<std::pair<double, bool>> items, int group = 0)
{
    std::vector<SurvivalRecord> out;
    for (const auto& [t, e]: items)
        out.push_back({t, e, group});
    return out;
}

} // namespace

TEST_CASE("accuracy and macro F1")
{
    const Labels classes = {"A", "B", "C"};
    CHECK(accuracy({"A", "B"}, {"A", "B"}) == 1.0);
    CHECK(accuracy({"A", "B", "B", "B"}, {"A", "A", "B", "B"}) == 0.75);
    CHECK(accuracy({"A", "A"}, {"B", "B"}) == 0.0);
    CHECK(code_of([] { (void)accuracy({"A"}, {"A", "B"}); }) == ErrorCode::LengthMismatch);
    CHECK(code_of([] { (void)accuracy({}, {}); }) == ErrorCode::Precondition);

    CHECK(macro_f1({"A", "B", "C"}, {"A", "B", "C"}, classes) == 1.0);
    CHECK(macro_f1({"A", "B", "B", "B"}, {"A", "A", "B", "B"}, {"A", "B"}) == doctest::Approx((2.0 / 3 + 0.8) / 2));
    // C never appears: contributes 0
    CHECK(macro_f1({"A", "B"}, {"A", "B"}, classes) == doctest::Approx(2.0 / 3));
    CHECK(code_of([&] { (void)macro_f1({"A", "D"}, {"A", "B"}, classes); }) == ErrorCode::UnknownLabel);
    CHECK(code_of([&] { (void)macro_f1({"A"}, {"A", "B"}, classes); }) == ErrorCode::LengthMismatch);

    SUBCASE("fuzz against brute force")
    {
        auto rng = make_rng(1, "f1");
        for (int trial = 0; trial < 500; ++trial)
        {
            const auto n = 1 + uniform_index(rng, 60);
            Labels p, y;
            for (std::size_t i = 0; i < n; ++i)
            {
                p.push_back(classes[uniform_index(rng, 3)]);
                y.push_back(uniform01(rng) < 0.6 ? p.back() : classes[uniform_index(rng, 3)]);
            }
            CHECK(macro_f1(p, y, classes) == doctest::Approx(oracle_macro_f1(p, y, classes)).epsilon(1e-12));
            const auto cc = confusion_counts(p, y, classes);
            std::size_t tp = 0;
            for (std::size_t k = 0; k < 3; ++k)
            {
                tp += cc.tp[k];
                CHECK(cc.tp[k] + cc.fn[k] == static_cast<std::size_t>(std::count(y.begin(), y.end(), classes[k])));
                CHECK(cc.tp[k] + cc.fp[k] == static_cast<std::size_t>(std::count(p.begin(), p.end(), classes[k])));
            }
            CHECK(static_cast<double>(tp) / n == doctest::Approx(accuracy(p, y)).epsilon(1e-12));
        }
    }
}

TEST_CASE("AUROC")
{
    CHECK(auroc_binary({0.1, 0.4, 0.35, 0.8}, {false, false, true, true}) == 0.75);
    CHECK(auroc_binary({0.5, 0.5, 0.5, 0.5}, {false, true, false, true}) == 0.5);
    CHECK(auroc_binary({0.1, 0.2, 0.8, 0.9}, {false, false, true, true}) == 1.0);
    CHECK(auroc_binary({0.1, 0.2}, {true, true}) < 0);

    const Labels classes = {"A", "B", "C", "D"};
    SUBCASE("macro equals the pair-counting oracle")
    {
        auto rng = make_rng(2, "auroc");
        for (int trial = 0; trial < 1000; ++trial)
        {
            const auto n = 2 + uniform_index(rng, 199);
            const auto k = 2 + uniform_index(rng, 3);
            const Labels cls(classes.begin(), classes.begin() + static_cast<std::ptrdiff_t>(k));
            std::vector<std::vector<double>> scores(n, std::vector<double>(k));
            Labels y;
            for (std::size_t i = 0; i < n; ++i)
            {
                y.push_back(cls[uniform_index(rng, k)]);
                for (auto& s: scores[i])
                    s = std::round(uniform01(rng) * 20) / 20; // coarse grid forces ties
            }
            double sum = 0;
            int defined = 0;
            for (std::size_t c = 0; c < k; ++c)
            {
                std::vector<double> s;
                std::vector<bool> pos;
                for (std::size_t i = 0; i < n; ++i)
                {
                    s.push_back(scores[i][c]);
                    pos.push_back(y[i] == cls[c]);
                }
                const auto np = std::count(pos.begin(), pos.end(), true);
                if (np == 0 || np == static_cast<std::ptrdiff_t>(n))
                    continue;
                sum += oracle_auroc(s, pos);
                ++defined;
            }
            if (defined == 0)
            {
                CHECK(code_of([&] { (void)auroc_ovr_macro(scores, y, cls); }) == ErrorCode::Undefined);
                continue;
            }
            CHECK(std::fabs(auroc_ovr_macro(scores, y, cls) - sum / defined) < 1e-9);
        }
    }
    SUBCASE("skipped classes")
    {
        const std::vector<std::vector<double>> s = {{0.9, 0.1, 0.0}, {0.2, 0.8, 0.0}, {0.7, 0.3, 0.0}};
        const auto r = auroc_ovr(s, {"A", "B", "A"}, {"A", "B", "C"});
        CHECK(r.skipped == Labels{"C"});
        CHECK(r.macro == 1.0);
        CHECK(code_of([] { (void)auroc_ovr_macro({{1.0}, {0.5}}, {"A", "A"}, {"A"}); }) == ErrorCode::Undefined);
    }
}

TEST_CASE("checklist two-stage accuracy")
{
    const std::vector<Labels> pred = {{"Yes", "No"}, Labels(10, "x")};
    const std::vector<Labels> ref = {{"Yes", "Yes"}, Labels(10, "x")};
    CHECK(checklist_accuracy(pred, ref) == 0.75);
    // pooled items would give 11/12
    CHECK(checklist_accuracy(pred, ref) != doctest::Approx(11.0 / 12));
    CHECK(checklist_accuracy(ref, ref) == 1.0);
    CHECK(checklist_accuracy({{"a", "b"}}, {{"c", "d"}}) == 0.0);
    CHECK(code_of([] { (void)checklist_accuracy({{"a"}}, {{"a", "b"}}); }) == ErrorCode::LengthMismatch);
    CHECK(code_of([] { (void)checklist_accuracy({{}}, {{}}); }) == ErrorCode::LengthMismatch);
}

TEST_CASE("Kaplan-Meier")
{
    const auto a = km_estimate(recs({{1, true}, {2, true}, {3, true}}));
    REQUIRE(a.times == std::vector<double>{1, 2, 3});
    CHECK(std::fabs(a.survival[0] - 2.0 / 3) < 1e-12);
    CHECK(std::fabs(a.survival[1] - 1.0 / 3) < 1e-12);
    CHECK(a.survival[2] == 0.0);
    CHECK(a.at_risk == std::vector<std::size_t>{3, 2, 1});

    const auto b = km_estimate(recs({{1, true}, {2, false}, {3, true}}));
    REQUIRE(b.times == std::vector<double>{1, 3});
    CHECK(std::fabs(b.survival[0] - 2.0 / 3) < 1e-12);
    CHECK(b.survival[1] == 0.0);
    CHECK(b.censored == std::vector<double>{2});
    CHECK(std::fabs(b.at(2.5) - 2.0 / 3) < 1e-12);
    CHECK(b.at(0.5) == 1.0);

    const auto c = km_estimate(recs({{5, false}}));
    CHECK(c.times.empty());
    CHECK(c.at(100) == 1.0);

    CHECK(code_of([] { (void)km_estimate({}); }) == ErrorCode::Precondition);
    CHECK(code_of([] { (void)km_estimate(recs({{-1, true}})); }) == ErrorCode::Range);

    SUBCASE("monotone on random data")
    {
        auto rng = make_rng(4, "km");
        for (int trial = 0; trial < 200; ++trial)
        {
            std::vector<SurvivalRecord> r;
            const auto n = 1 + uniform_index(rng, 50);
            for (std::size_t i = 0; i < n; ++i)
                r.push_back({std::round(uniform01(rng) * 30), uniform01(rng) < 0.7, 0});
            const auto k = km_estimate(r);
            double prev = 1.0;
            for (double s: k.survival)
            {
                CHECK(s <= prev);
                CHECK(s >= 0.0);
                prev = s;
            }
        }
    }
}

TEST_CASE("log-rank")
{
    SUBCASE("identical groups")
    {
        const auto g = recs({{1, true}, {2, false}, {3, true}, {5, true}});
        const auto r = logrank_test({g, g});
        CHECK(r.chi_squared < 1e-12);
        CHECK(r.p_value == doctest::Approx(1.0));
        CHECK(r.df == 1);
    }
    SUBCASE("separated groups")
    {
        const auto a = recs({{1, true}, {2, true}, {3, true}});
        const auto b = recs({{10, true}, {11, true}, {12, true}}, 1);
        const auto r = logrank_test({a, b});
        CHECK(r.chi_squared == doctest::Approx(oracle_logrank_two(a, b)).epsilon(1e-12));
        CHECK(r.p_value < 0.05);
        CHECK(r.observed == std::vector<double>{3, 3});
    }
    SUBCASE("errors")
    {
        const auto a = recs({{1, true}});
        CHECK(code_of([&] { (void)logrank_test({a, a, {}}); }) == ErrorCode::Precondition);
        CHECK(code_of([&] { (void)logrank_test({a}); }) == ErrorCode::Precondition);
        const auto c = recs({{1, false}});
        CHECK(code_of([&] { (void)logrank_test({c, c}); }) == ErrorCode::Precondition);
    }
    SUBCASE("two-group fuzz against the direct formula")
    {
        auto rng = make_rng(5, "lr2");
        for (int trial = 0; trial < 200; ++trial)
        {
            std::vector<SurvivalRecord> a, b;
            for (int i = 0; i < 15; ++i)
            {
                a.push_back({std::round(uniform01(rng) * 40), uniform01(rng) < 0.7, 0});
                b.push_back({std::round(uniform01(rng) * 60), uniform01(rng) < 0.7, 1});
            }
            const auto r = logrank_test({a, b});
            CHECK(r.chi_squared == doctest::Approx(oracle_logrank_two(a, b)).epsilon(1e-10));
            CHECK(r.p_value == doctest::Approx(boost::math::gamma_q(0.5, r.chi_squared / 2)).epsilon(1e-10));
        }
    }
    SUBCASE("split_by_group")
    {
        std::vector<SurvivalRecord> all = {{1, true, 2}, {2, true, 0}, {3, false, 2}};
        const auto g = split_by_group(all);
        REQUIRE(g.size() == 2);
        CHECK(g[0].size() == 1);
        CHECK(g[1].size() == 2);
    }
    SUBCASE("permutation p-values are uniform")
    {
        auto rng = make_rng(6, "lr-perm");
        std::vector<SurvivalRecord> pool;
        for (int i = 0; i < 75; ++i)
        {
            const double t = -std::log(1 - uniform01(rng)) * 20;
            const double c = uniform01(rng) * 60;
            pool.push_back({std::min(t, c), t <= c, 0});
        }
        std::vector<double> ps;
        for (int perm = 0; perm < 2000; ++perm)
        {
            std::shuffle(pool.begin(), pool.end(), rng);
            std::vector<std::vector<SurvivalRecord>> groups(3);
            for (std::size_t i = 0; i < pool.size(); ++i)
                groups[i % 3].push_back(pool[i]);
            const auto r = logrank_test(groups);
            CHECK(r.df == 2);
            ps.push_back(r.p_value);
        }
        std::sort(ps.begin(), ps.end());
        double D = 0;
        const double n = static_cast<double>(ps.size());
        for (std::size_t i = 0; i < ps.size(); ++i)
            D = std::max({D, (i + 1) / n - ps[i], ps[i] - i / n});
        const double p_ks = kolmogorov_sf(D * std::sqrt(n));
        MESSAGE("KS D = " << D << ", p = " << p_ks);
        CHECK(p_ks > 0.01);
    }
}

TEST_CASE("chi-square CDF")
{
    for (double k: {1.0, 2.0, 3.0, 5.0, 10.0, 30.0})
        for (double x: {0.0, 0.01, 0.5, 1.0, 2.0, 3.84, 5.99, 10.0, 25.0, 60.0, 100.0})
        {
            CHECK(std::fabs(chi2_sf(x, k) - boost::math::gamma_q(k / 2, x / 2)) < 1e-10);
            CHECK(std::fabs(chi2_cdf(x, k) - boost::math::gamma_p(k / 2, x / 2)) < 1e-10);
        }
    CHECK(chi2_sf(3.841458820694124, 1) == doctest::Approx(0.05).epsilon(1e-9));
    CHECK(code_of([] { (void)regularized_gamma_p(0, 1); }) == ErrorCode::Range);
}

TEST_CASE("bootstrap")
{
    SUBCASE("constant values")
    {
        auto rng = make_rng(1, "boot");
        const auto r = bootstrap_ci(std::vector<double>(30, 4.25), rng);
        CHECK(r.estimate == 4.25);
        CHECK(r.lower == 4.25);
        CHECK(r.upper == 4.25);
        CHECK(r.B == 1000);
    }
    SUBCASE("deterministic per seed")
    {
        std::vector<double> v;
        auto g = make_rng(2, "data");
        for (int i = 0; i < 40; ++i)
            v.push_back(standard_normal(g));
        auto r1 = make_rng(9, "boot");
        auto r2 = make_rng(9, "boot");
        const auto a = bootstrap_ci(v, r1);
        const auto b = bootstrap_ci(v, r2);
        CHECK(a.lower == b.lower);
        CHECK(a.upper == b.upper);
        CHECK(a.lower <= a.estimate);
        CHECK(a.estimate <= a.upper);
    }
    SUBCASE("coverage of the mean")
    {
        auto data = make_rng(3, "coverage-data");
        auto boot = make_rng(3, "coverage-boot");
        int covered = 0;
        const int reps = 1000;
        for (int rep = 0; rep < reps; ++rep)
        {
            std::vector<double> v(100);
            for (auto& x: v)
                x = 2.0 + standard_normal(data);
            const auto r = bootstrap_ci(v, boot, 1000);
            covered += r.lower <= 2.0 && 2.0 <= r.upper;
            CHECK(r.lower <= r.estimate);
            CHECK(r.estimate <= r.upper);
        }
        const double cov = static_cast<double>(covered) / reps;
        MESSAGE("coverage " << cov);
        CHECK(cov >= 0.93);
        CHECK(cov <= 0.97);
    }
    SUBCASE("width shrinks with n")
    {
        auto data = make_rng(4, "width-data");
        auto boot = make_rng(4, "width-boot");
        double prev = std::numeric_limits<double>::infinity();
        for (int n: {10, 40, 160})
        {
            double w = 0;
            for (int rep = 0; rep < 50; ++rep)
            {
                std::vector<double> v(static_cast<std::size_t>(n));
                for (auto& x: v)
                    x = standard_normal(data);
                const auto r = bootstrap_ci(v, boot, 300);
                w += r.upper - r.lower;
            }
            CHECK(w / 50 < prev);
            prev = w / 50;
        }
    }
    SUBCASE("quantile type 7")
    {
        CHECK(quantile({1, 2, 3, 4}, 0.5) == 2.5);
        CHECK(quantile({1, 2, 3, 4}, 0.25) == 1.75);
        CHECK(quantile({5}, 0.9) == 5);
    }
    CHECK(code_of([] {
              auto r = make_rng(1, "x");
              (void)bootstrap_ci(std::vector<double>{}, r);
          }) == ErrorCode::Precondition);
}

TEST_CASE("paired t-test")
{
    SUBCASE("identical samples")
    {
        const auto r = paired_t_test({1, 2, 3}, {1, 2, 3});
        CHECK(r.degenerate);
        CHECK(r.p_value == 1.0);
    }
    SUBCASE("consistent positive shift")
    {
        const auto r = paired_t_test({2.001, 1.999, 2.002, 1.998}, {1, 1, 1, 1});
        CHECK_FALSE(r.degenerate);
        CHECK(r.p_value < 1e-6);
    }
    SUBCASE("fixture against the incomplete-beta oracle")
    {
        const std::vector<double> a = {0.81, 0.74, 0.92, 0.66, 0.79, 0.85, 0.70, 0.88, 0.77, 0.83};
        const std::vector<double> b = {0.72, 0.75, 0.80, 0.61, 0.70, 0.86, 0.64, 0.79, 0.73, 0.74};
        const auto r = paired_t_test(a, b);
        CHECK(r.df == 9);
        CHECK(std::fabs(r.p_value - oracle_t_two_sided(r.t, 9)) < 1e-6);
        // independent arithmetic for t
        std::vector<double> d;
        for (std::size_t i = 0; i < a.size(); ++i)
            d.push_back(a[i] - b[i]);
        const double m = std::accumulate(d.begin(), d.end(), 0.0) / 10;
        double ss = 0;
        for (double x: d)
            ss += (x - m) * (x - m);
        CHECK(r.t == doctest::Approx(m / std::sqrt(ss / 9 / 10)).epsilon(1e-12));
    }
    SUBCASE("t CDF across df")
    {
        for (double df: {1.0, 2.0, 5.0, 30.0, 200.0})
            for (double t: {0.1, 1.0, 2.0, 4.0, 10.0})
                CHECK(std::fabs(2 * (1 - student_t_cdf(t, df)) - oracle_t_two_sided(t, df)) < 1e-9);
    }
    CHECK(code_of([] { (void)paired_t_test({1, 2}, {1}); }) == ErrorCode::LengthMismatch);
    CHECK(code_of([] { (void)paired_t_test({1}, {2}); }) == ErrorCode::Precondition);
}
