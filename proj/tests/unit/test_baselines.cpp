#include "test_support.hpp"

#include "pathnav/baselines/baselines.hpp"
#include "pathnav/nav/trajectory_io.hpp"
#include "pathnav/slide/tissue.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace pathnav;
using namespace pathnav::baselines;
using pathnav::test::code_of;
using slide::NormPoint;

namespace
{

/// Picks a fixed candidate index every call and keeps the views it was shown.
class FixedPickPolicy final : public policy::Policy
{
public:
    explicit FixedPickPolicy(std::size_t index) : _index(index) {}
    std::vector<policy::AgentView> views;

    policy::Decision decide(const policy::AgentView& v) override
    {
        views.push_back(v);
        policy::Decision d;
        d.point = (*v.candidates)[_index];
        d.justification = "fixed";
        return d;
    }
    std::string name() const override { return "fixed"; }

private:
    std::size_t _index;
};

std::vector<NormPoint> grid_candidates(int n)
{
    std::vector<NormPoint> out;
    for (int i = 0; i < n; ++i)
        out.push_back({0.1 + 0.04 * i, 0.5});
    return out;
}

policy::AgentView view_with(std::vector<NormPoint> cands)
{
    policy::AgentView v;
    v.thumbnail = std::make_shared<const Image>(Image(8, 8));
    v.candidates = std::move(cands);
    v.query = "q";
    return v;
}

const slide::PyramidSlide& big_slide()
{
    static const auto s = slide::synthetic_slide(
        slide::random_spec(5, 16384, 12288, {"A", "B", "C"}, "B"), "big");
    return s;
}

const slide::TissueMask& big_mask()
{
    static const auto m = slide::compute_tissue_mask(big_slide());
    return m;
}

double kahan_mean(const std::vector<double>& v)
{
    double sum = 0, comp = 0;
    for (double x: v)
    {
        const double y = x - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum / static_cast<double>(v.size());
}

} // namespace

TEST_CASE("random tiles are disjoint foreground windows")
{
    const auto& s = big_slide();
    const auto& mask = big_mask();

    SUBCASE("defaults give 21 disjoint windows")
    {
        for (std::uint64_t seed: {1u, 2u, 3u, 4u, 5u})
        {
            auto rng = make_rng(seed, "random-rois");
            const auto rois = random_rois(s, mask, 21, rng);
            REQUIRE(rois.size() == 21);
            std::vector<slide::PixelWindow> w;
            for (const auto& r: rois)
            {
                CHECK(mask.contains(r.center));
                CHECK(r.level == 0);
                CHECK(r.size == 1024);
                w.push_back(slide::region_window(s, r));
            }
            for (std::size_t i = 0; i < w.size(); ++i)
                for (std::size_t j = i + 1; j < w.size(); ++j)
                    CHECK(slide::intersection_area(w[i], w[j]) == 0);
        }
    }
    SUBCASE("deterministic per seed")
    {
        auto a = make_rng(9, "random-rois");
        auto b = make_rng(9, "random-rois");
        auto c = make_rng(10, "random-rois");
        const auto ra = random_rois(s, mask, 21, a);
        CHECK(ra == random_rois(s, mask, 21, b));
        CHECK(ra != random_rois(s, mask, 21, c));
    }
    SUBCASE("K = 1")
    {
        auto rng = make_rng(1, "random-rois");
        CHECK(random_rois(s, mask, 1, rng).size() == 1);
    }
    SUBCASE("infeasible packing")
    {
        // about 4.1 Mpx of tissue cannot hold 21 windows of 1 Mpx
        const auto small = slide::synthetic_slide(test::small_spec());
        const auto small_mask = slide::compute_tissue_mask(small);
        auto rng = make_rng(1, "random-rois");
        CHECK(code_of([&] { (void)random_rois(small, small_mask, 21, rng); }) == ErrorCode::Capacity);
        CHECK(code_of([&] { (void)random_rois(small, small_mask, 0, rng); }) == ErrorCode::Precondition);
    }
}

TEST_CASE("majority vote")
{
    const std::vector<std::string> order = {"A", "B", "C"};
    CHECK(majority_vote({"A", "A", "B"}, order) == "A");
    CHECK(majority_vote({"A", "B"}, order) == "A");
    CHECK(majority_vote({"B", "A"}, order) == "A");
    CHECK(majority_vote({"C", "B", "B", "C"}, order) == "B");
    CHECK(majority_vote(std::vector<std::string>(21, "C"), order) == "C");
    CHECK(majority_vote({"C", "C", "A"}, order) == "C");
    CHECK(code_of([&] { (void)majority_vote({"A", "D"}, order); }) == ErrorCode::UnknownLabel);
    CHECK(code_of([&] { (void)majority_vote({}, order); }) == ErrorCode::Precondition);

    SUBCASE("permutation invariance")
    {
        auto rng = make_rng(3, "votes");
        for (int trial = 0; trial < 200; ++trial)
        {
            std::vector<std::string> votes;
            const auto n = 1 + uniform_index(rng, 21);
            for (std::size_t i = 0; i < n; ++i)
                votes.push_back(order[uniform_index(rng, 3)]);
            const auto expected = majority_vote(votes, order);
            std::shuffle(votes.begin(), votes.end(), rng);
            CHECK(majority_vote(votes, order) == expected);
        }
    }
}

TEST_CASE("score aggregators")
{
    CHECK(mean_score_aggregate({7, 7, 7}) == 7.0);
    CHECK(mean_score_aggregate({0, 10}) == 5.0);
    CHECK(code_of([] { (void)mean_score_aggregate({}); }) == ErrorCode::Precondition);

    auto rng = make_rng(11, "scores");
    std::vector<double> scores;
    for (int i = 0; i < 21; ++i)
        scores.push_back(static_cast<double>(uniform_index(rng, 11)) + uniform01(rng));
    CHECK(mean_score_aggregate(scores) == doctest::Approx(kahan_mean(scores)).epsilon(1e-12));

    CHECK(checklist_aggregate({1.0, 0.5}) == 0.75);
    CHECK(checklist_aggregate({1.0, 1.0, 1.0}) == 1.0);
    CHECK(checklist_aggregate({0, 0, 0}) == 0.0);
    CHECK(code_of([] { (void)checklist_aggregate({0.5, 1.5}); }) == ErrorCode::Range);
    CHECK(code_of([] { (void)checklist_aggregate({-0.1}); }) == ErrorCode::Range);

    // unanimous inputs come back exactly
    for (double v: {0.0, 0.3, 1.0})
    {
        CHECK(mean_score_aggregate(std::vector<double>(21, v)) == v);
        CHECK(checklist_aggregate(std::vector<double>(21, v)) == v);
    }
}

TEST_CASE("single-turn selection")
{
    const auto cands = grid_candidates(20);

    SUBCASE("m = 1 takes the chosen candidate")
    {
        FixedPickPolicy p(7);
        const auto r = single_turn_select(view_with(cands), p, 1);
        REQUIRE(r.regions.size() == 1);
        CHECK(r.regions[0].center == cands[7]);
        CHECK(r.picks[0] == 7);
    }
    SUBCASE("m = 3 gives distinct picks and no patch memory")
    {
        FixedPickPolicy p(7);
        auto v = view_with(cands);
        v.prior_patches.push_back({{{0.3, 0.3}, 0, 1024}, std::make_shared<const Image>(Image(4, 4)), "old"});
        v.round = 4;
        const auto r = single_turn_select(v, p, 3);
        REQUIRE(r.regions.size() == 3);
        std::set<std::size_t> picks(r.picks.begin(), r.picks.end());
        CHECK(picks.size() == 3);
        CHECK(r.picks[0] == 7);
        // the duplicates go to the nearest free neighbours
        CHECK(picks == std::set<std::size_t>{6, 7, 8});
        REQUIRE(p.views.size() == 3);
        for (const auto& seen: p.views)
        {
            CHECK(seen.prior_patches.empty());
            CHECK(seen.round == 1);
            CHECK(*seen.candidates == cands);
        }
        for (std::size_t i = 0; i < 3; ++i)
            CHECK(r.regions[i].center == cands[r.picks[i]]);
    }
    SUBCASE("m = K uses every candidate")
    {
        FixedPickPolicy p(0);
        const auto r = single_turn_select(view_with(cands), p, 20);
        std::set<std::size_t> picks(r.picks.begin(), r.picks.end());
        CHECK(picks.size() == 20);
    }
    SUBCASE("m above the candidate budget")
    {
        FixedPickPolicy p(0);
        CHECK(code_of([&] { (void)single_turn_select(view_with(cands), p, 21); }) == ErrorCode::Precondition);
        CHECK(code_of([&] { (void)single_turn_select(view_with(cands), p, 0); }) == ErrorCode::Precondition);
        CHECK(code_of([&] { (void)single_turn_select(view_with({}), p, 1); }) == ErrorCode::Precondition);
    }
    SUBCASE("grammar errors propagate")
    {
        policy::ScriptedPolicy p({"no coordinate here"});
        CHECK(code_of([&] { (void)single_turn_select(view_with(cands), p, 1); }) == ErrorCode::Grammar);
    }
    SUBCASE("terminate without a point is rejected")
    {
        policy::ScriptedPolicy p({"TERMINATE"});
        CHECK(code_of([&] { (void)single_turn_select(view_with(cands), p, 1); }) == ErrorCode::Grammar);
    }
}

TEST_CASE("baseline runners")
{
    const auto& s = big_slide();
    nav::NavConfig nav_cfg;
    BaselineConfig cfg;
    cfg.class_order = {"A", "B", "C"};
    cfg.seed = 4;

    SUBCASE("random baseline defaults to 21 tiles")
    {
        const auto t = run_random_baseline(s, "subtype", cfg, nav_cfg);
        CHECK(t.reason == nav::Termination::Baseline);
        CHECK(t.records.size() == 21);
        CHECK(t.records.front().patch->width == 1024);
        CHECK(t.records.back().patch_id == "big.r21");
    }
    SUBCASE("matched m")
    {
        cfg.matched_m = 3;
        const auto r = run_random_baseline(s, "subtype", cfg, nav_cfg);
        CHECK(r.records.size() == 3);
        FixedPickPolicy p(2);
        const auto t = run_single_turn_baseline(s, "subtype", p, cfg, nav_cfg);
        CHECK(t.reason == nav::Termination::Baseline);
        CHECK(t.records.size() == 3);
        CHECK(p.views.size() == 3);
        CHECK(p.views[0].candidates->size() == 20);
    }
    SUBCASE("single turn defaults to one region")
    {
        FixedPickPolicy p(5);
        const auto t = run_single_turn_baseline(s, "subtype", p, cfg, nav_cfg);
        CHECK(t.records.size() == 1);
        CHECK(t.policy == "single-turn/fixed");
    }
    SUBCASE("policy failure is recorded")
    {
        policy::ScriptedPolicy p({"nothing"});
        const auto t = run_single_turn_baseline(s, "subtype", p, cfg, nav_cfg);
        CHECK(t.reason == nav::Termination::Error);
        CHECK(t.records.empty());
        CHECK(t.error.find("grammar") == 0);
    }
    SUBCASE("trajectory format round-trips")
    {
        cfg.matched_m = 2;
        const auto t = run_random_baseline(s, "subtype", cfg, nav_cfg);
        const auto back = nav::parse_trajectory_jsonl(nav::trajectory_jsonl(t));
        CHECK(back.reason == nav::Termination::Baseline);
        CHECK(back.records.size() == 2);
        CHECK(back.records[1].region == t.records[1].region);
    }
    SUBCASE("config validation")
    {
        cfg.random_K = 0;
        CHECK(code_of([&] { validate(cfg); }) == ErrorCode::Config);
        cfg.random_K = 21;
        cfg.matched_m = 0;
        CHECK(code_of([&] { validate(cfg); }) == ErrorCode::Config);
    }
}
