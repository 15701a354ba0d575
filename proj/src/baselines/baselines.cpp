// SPDX-License-Identifier: Apache-2.0
#include "pathnav/baselines/baselines.hpp"

#include "pathnav/error.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <limits>

namespace pathnav::baselines
{

using slide::NormPoint;
using slide::RegionSpec;

void validate(const BaselineConfig& cfg)
{
    if (cfg.random_K < 1)
        throw Error(ErrorCode::Config, fmt::format("random_K must be >= 1, got {}", cfg.random_K));
    if (cfg.single_turn_K < 1)
        throw Error(ErrorCode::Config, fmt::format("single_turn_K must be >= 1, got {}", cfg.single_turn_K));
    if (cfg.matched_m && *cfg.matched_m < 1)
        throw Error(ErrorCode::Config, fmt::format("matched_m must be >= 1, got {}", *cfg.matched_m));
}

std::vector<RegionSpec> random_rois(const slide::PyramidSlide& slide, const slide::TissueMask& mask, int K, Rng& rng,
                                    int roi_size, slide::Anchor anchor)
{
    if (K < 1)
        throw Error(ErrorCode::Precondition, "K must be >= 1");
    const nav::ForegroundSampler sampler(mask);
    std::vector<RegionSpec> out;
    std::vector<slide::PixelWindow> windows;
    const std::int64_t budget = std::int64_t{10000} * K;
    for (std::int64_t attempt = 0; attempt < budget && static_cast<int>(out.size()) < K; ++attempt)
    {
        const auto p = sampler.sample(rng);
        if (!mask.contains(p))
            continue;
        const RegionSpec r{p, 0, roi_size};
        const auto w = slide::region_window(slide, r, anchor);
        const bool disjoint = std::all_of(windows.begin(), windows.end(),
                                          [&](const slide::PixelWindow& o) { return slide::intersection_area(w, o) == 0; });
        if (!disjoint)
            continue;
        out.push_back(r);
        windows.push_back(w);
    }
    if (static_cast<int>(out.size()) < K)
        throw Error(ErrorCode::Capacity,
                    fmt::format("placed {} of {} disjoint {} px tiles after {} attempts", out.size(), K, roi_size, budget));
    return out;
}

std::string majority_vote(const std::vector<std::string>& preds, const std::vector<std::string>& class_order)
{
    if (preds.empty())
        throw Error(ErrorCode::Precondition, "majority vote over no predictions");
    std::vector<int> counts(class_order.size(), 0);
    for (const auto& p: preds)
    {
        const auto it = std::find(class_order.begin(), class_order.end(), p);
        if (it == class_order.end())
            throw Error(ErrorCode::UnknownLabel, fmt::format("label '{}' is not in the class order", p));
        ++counts[static_cast<std::size_t>(it - class_order.begin())];
    }
    // max_element returns the first maximum, which is the tie-break
    const auto best = std::max_element(counts.begin(), counts.end());
    return class_order[static_cast<std::size_t>(best - counts.begin())];
}

double mean_score_aggregate(const std::vector<double>& scores)
{
    if (scores.empty())
        throw Error(ErrorCode::Precondition, "mean of no scores");
    // running mean: exact when every score is equal
    double mean = 0.0;
    std::size_t n = 0;
    for (double s: scores)
        mean += (s - mean) / static_cast<double>(++n);
    return mean;
}

double checklist_aggregate(const std::vector<double>& case_accs)
{
    for (double a: case_accs)
        if (!(a >= 0.0 && a <= 1.0))
            throw Error(ErrorCode::Range, fmt::format("case accuracy {} outside [0,1]", a));
    return mean_score_aggregate(case_accs);
}

SingleTurnResult single_turn_select(const policy::AgentView& view, policy::Policy& policy, int m, double delta,
                                    int roi_size)
{
    if (!view.candidates || view.candidates->empty())
        throw Error(ErrorCode::Precondition, "single-turn selection needs a candidate list");
    const auto& cands = *view.candidates;
    if (m < 1 || static_cast<std::size_t>(m) > cands.size())
        throw Error(ErrorCode::Precondition,
                    fmt::format("m = {} must be in [1, {}] (the candidate count)", m, cands.size()));

    policy::AgentView bare = view;
    bare.prior_patches.clear();
    bare.round = 1;

    SingleTurnResult out;
    std::vector<bool> taken(cands.size(), false);
    for (int i = 0; i < m; ++i)
    {
        auto d = policy.decide(bare);
        if (d.terminate || !d.has_point)
            throw Error(ErrorCode::Grammar, "single-turn reply carries no coordinate");
        auto idx = policy::snap_to_candidates(d, cands, delta).index;
        if (taken[idx])
        {
            double best = std::numeric_limits<double>::infinity();
            std::size_t pick = cands.size();
            for (std::size_t j = 0; j < cands.size(); ++j)
            {
                const double dist = slide::distance(cands[j], cands[idx]);
                if (!taken[j] && dist < best)
                {
                    best = dist;
                    pick = j;
                }
            }
            if (pick == cands.size())
                throw Error(ErrorCode::Capacity, "every candidate is already selected");
            idx = pick;
            d.point = cands[idx];
        }
        taken[idx] = true;
        out.regions.push_back({d.point, d.level, roi_size});
        out.decisions.push_back(d);
        out.picks.push_back(idx);
    }
    return out;
}

int regions_for(const BaselineConfig& cfg, int fallback)
{
    return cfg.matched_m.value_or(fallback);
}

namespace
{

nav::RoiRecord make_record(const slide::PyramidSlide& slide, const RegionSpec& region, int round,
                           std::string justification, const nav::NavConfig& nav_cfg)
{
    nav::RoiRecord rec;
    rec.round = round;
    rec.region = region;
    rec.patch = std::make_shared<const Image>(slide::extract_region(slide, region, nav_cfg.anchor));
    rec.patch_id = fmt::format("{}.r{:02d}", slide.id(), round);
    rec.justification = std::move(justification);
    rec.timestamp = fmt::format("round-{}", round);
    return rec;
}

nav::Trajectory baseline_header(const slide::PyramidSlide& slide, const std::string& task, std::string name,
                                const nav::NavConfig& nav_cfg)
{
    nav::Trajectory traj;
    traj.slide_id = slide.id();
    traj.task = task;
    traj.policy = std::move(name);
    traj.config = nav_cfg;
    traj.reason = nav::Termination::Baseline;
    return traj;
}

} // namespace

nav::Trajectory run_random_baseline(const slide::PyramidSlide& slide, const std::string& task,
                                    const BaselineConfig& cfg, const nav::NavConfig& nav_cfg)
{
    validate(cfg);
    nav::validate(nav_cfg);
    const auto mask = slide::compute_tissue_mask(slide);
    auto rng = make_rng(cfg.seed, "random-rois");
    const auto regions = random_rois(slide, mask, regions_for(cfg, cfg.random_K), rng, nav_cfg.roi_size, nav_cfg.anchor);
    auto traj = baseline_header(slide, task, "random", nav_cfg);
    int round = 1;
    for (const auto& r: regions)
        traj.records.push_back(make_record(slide, r, round++, "random tile", nav_cfg));
    return traj;
}

nav::Trajectory run_single_turn_baseline(const slide::PyramidSlide& slide, const std::string& task,
                                         policy::Policy& policy, const BaselineConfig& cfg,
                                         const nav::NavConfig& nav_cfg)
{
    validate(cfg);
    const auto ctx = nav::make_context(slide, nav_cfg);
    auto traj = baseline_header(slide, task, "single-turn/" + policy.name(), nav_cfg);
    try
    {
        nav::NavConfig cand_cfg = nav_cfg;
        cand_cfg.K = cfg.single_turn_K;
        auto rng = make_rng(cfg.seed, "single-turn");
        policy::AgentView view;
        view.thumbnail = std::make_shared<const Image>(ctx.thumbnail_base);
        view.query = task;
        view.round = 1;
        view.max_level = ctx.max_level;
        view.candidates = nav::propose_candidates(ctx.mask, cand_cfg, rng, {}, 1).points;

        const auto sel = single_turn_select(view, policy, regions_for(cfg, 1), nav_cfg.delta, nav_cfg.roi_size);
        for (std::size_t i = 0; i < sel.regions.size(); ++i)
        {
            if (sel.regions[i].level > ctx.max_level)
                throw Error(ErrorCode::Range, fmt::format("level {} exceeds the maximum ROI level {}",
                                                          sel.regions[i].level, ctx.max_level));
            auto rec = make_record(slide, sel.regions[i], static_cast<int>(i) + 1, sel.decisions[i].justification,
                                   nav_cfg);
            rec.off_tissue = !ctx.mask.contains(sel.regions[i].center);
            traj.records.push_back(std::move(rec));
        }
    }
    catch (const Error& e)
    {
        traj.reason = nav::Termination::Error;
        traj.error = e.what();
        traj.records.clear();
        spdlog::warn("{}: single-turn baseline failed: {}", slide.id(), e.what());
    }
    return traj;
}

} // namespace pathnav::baselines
