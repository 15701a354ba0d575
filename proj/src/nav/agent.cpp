// SPDX-License-Identifier: Apache-2.0
#include "pathnav/nav/agent.hpp"

#include "pathnav/error.hpp"

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>

namespace pathnav::nav
{

using slide::NormPoint;

void validate(const NavConfig& cfg)
{
    if (cfg.K < 1)
        throw Error(ErrorCode::Config, fmt::format("K must be >= 1, got {}", cfg.K));
    if (!(cfg.delta > 0 && cfg.delta < 1))
        throw Error(ErrorCode::Config, fmt::format("delta must be in (0,1), got {}", cfg.delta));
    if (cfg.T < 1 || cfg.proposal_rounds < 1 || cfg.proposal_rounds > cfg.T)
        throw Error(ErrorCode::Config,
                    fmt::format("need 1 <= proposal_rounds ({}) <= T ({})", cfg.proposal_rounds, cfg.T));
    if (cfg.roi_size < 1)
        throw Error(ErrorCode::Config, "roi_size must be positive");
    if (cfg.thumbnail_max_edge < 1)
        throw Error(ErrorCode::Config, "thumbnail_max_edge must be positive");
}

ForegroundSampler::ForegroundSampler(const slide::TissueMask& mask) : _mask(mask)
{
    double total = 0;
    for (int r = 0; r < mask.rows; ++r)
        for (int c = 0; c < mask.cols; ++c)
        {
            if (!mask.cell(c, r))
                continue;
            double x0, y0, x1, y1;
            mask.cell_bounds(c, r, x0, y0, x1, y1);
            total += (x1 - x0) * (y1 - y0);
            _cells.push_back(static_cast<std::size_t>(r) * mask.cols + c);
            _cumulative.push_back(total);
        }
    if (_cells.empty())
        throw Error(ErrorCode::DegenerateSlide, "mask has no foreground cells");
}

NormPoint ForegroundSampler::sample(Rng& rng) const
{
    const double u = uniform01(rng) * _cumulative.back();
    auto it = std::upper_bound(_cumulative.begin(), _cumulative.end(), u);
    if (it == _cumulative.end())
        --it;
    const auto idx = _cells[static_cast<std::size_t>(it - _cumulative.begin())];
    const int col = static_cast<int>(idx % static_cast<std::size_t>(_mask.cols));
    const int row = static_cast<int>(idx / static_cast<std::size_t>(_mask.cols));
    double x0, y0, x1, y1;
    _mask.cell_bounds(col, row, x0, y0, x1, y1);
    return {uniform(rng, x0, x1), uniform(rng, y0, y1)};
}

CandidateSet propose_candidates(const slide::TissueMask& mask, const NavConfig& cfg, Rng& rng,
                                std::span<const NormPoint> exclusions, int round, int count)
{
    const int k = count < 0 ? cfg.K : count;
    if (k < 1)
        throw Error(ErrorCode::Precondition, "candidate count must be positive");
    const ForegroundSampler sampler(mask);
    CandidateSet out;
    out.round = round;
    out.points.reserve(static_cast<std::size_t>(k));
    const auto far_enough = [&](NormPoint p, std::span<const NormPoint> others) {
        return std::all_of(others.begin(), others.end(), [&](NormPoint o) { return slide::distance(p, o) >= cfg.delta; });
    };
    const std::int64_t budget = std::int64_t{10000} * k;
    for (std::int64_t attempt = 0; attempt < budget && static_cast<int>(out.points.size()) < k; ++attempt)
    {
        const auto p = sampler.sample(rng);
        // floating-point edges of a cell can land in the neighbour
        if (!mask.contains(p))
            continue;
        if (far_enough(p, out.points) && far_enough(p, exclusions))
            out.points.push_back(p);
    }
    if (static_cast<int>(out.points.size()) < k)
        throw Error(ErrorCode::Capacity, fmt::format("placed {} of {} candidates at spacing {} after {} attempts",
                                                     out.points.size(), k, cfg.delta, budget));
    return out;
}

std::string_view to_string(Termination t) noexcept
{
    switch (t)
    {
    case Termination::TerminateSignal:
        return "terminate-signal";
    case Termination::ConfidenceGate:
        return "confidence-gate";
    case Termination::RoundCap:
        return "round-cap";
    case Termination::Error:
        return "error";
    case Termination::Baseline:
        return "baseline";
    }
    return "error";
}

Termination termination_from_string(std::string_view s)
{
    for (auto t: {Termination::TerminateSignal, Termination::ConfidenceGate, Termination::RoundCap, Termination::Error,
                  Termination::Baseline})
        if (to_string(t) == s)
            return t;
    throw Error(ErrorCode::Parse, fmt::format("unknown termination reason '{}'", s));
}

StopCheck should_stop(const policy::Decision& d, int t, const NavConfig& cfg) noexcept
{
    if (d.terminate)
        return {true, Termination::TerminateSignal};
    if (policy::stop_probability(d) > cfg.tau_stop)
        return {true, Termination::ConfidenceGate};
    if (t >= cfg.T)
        return {true, Termination::RoundCap};
    return {false, Termination::RoundCap};
}

int max_roi_level(const slide::PyramidSlide& slide, int roi_size)
{
    int best = -1;
    for (int L = 0; L < slide.level_count(); ++L)
        if (slide.width(L) >= roi_size && slide.height(L) >= roi_size)
            best = L;
    if (best < 0)
        throw Error(ErrorCode::Range, fmt::format("slide {}x{} is smaller than the {} px ROI", slide.width(0),
                                                  slide.height(0), roi_size));
    return best;
}

NavContext make_context(const slide::PyramidSlide& slide, const NavConfig& cfg)
{
    validate(cfg);
    auto mask = slide::compute_tissue_mask(slide);
    auto base = resize_to_fit(slide.read_level(mask.thumbnail_level), cfg.thumbnail_max_edge);
    return NavContext{slide, std::move(mask), std::move(base), max_roi_level(slide, cfg.roi_size)};
}

NavState initial_state(const NavConfig& cfg)
{
    NavState s;
    s.rng = make_rng(cfg.seed, "candidates");
    return s;
}

namespace
{

std::string timestamp_for(int round, bool wall_clock)
{
    if (!wall_clock)
        return fmt::format("round-{}", round);
    const auto now = std::chrono::floor<std::chrono::milliseconds>(std::chrono::system_clock::now());
    return fmt::format("{:%Y-%m-%dT%H:%M:%S}Z", now);
}

} // namespace

policy::Decision step(NavState& state, const NavContext& ctx, policy::Policy& policy, const std::string& task,
                      const NavConfig& cfg)
{
    if (state.stopped)
        throw Error(ErrorCode::Precondition, "navigation already stopped");
    if (state.round > cfg.T)
        throw Error(ErrorCode::Precondition, fmt::format("round {} exceeds T = {}", state.round, cfg.T));

    std::vector<NormPoint> visited;
    std::vector<slide::RegionSpec> regions;
    for (const auto& r: state.records)
    {
        visited.push_back(r.region.center);
        regions.push_back(r.region);
    }

    policy::AgentView view;
    view.thumbnail = std::make_shared<const Image>(slide::draw_overlays(ctx.slide, ctx.thumbnail_base, regions));
    for (const auto& r: state.records)
        view.prior_patches.push_back({r.region, r.patch, r.justification});
    view.query = task;
    view.round = state.round;
    view.max_level = ctx.max_level;
    const bool proposal = state.round <= cfg.proposal_rounds;
    if (proposal)
        view.candidates = propose_candidates(ctx.mask, cfg, state.rng, visited, state.round).points;

    auto d = policy.decide(view);

    if (!d.terminate)
    {
        if (!d.has_point)
            throw Error(ErrorCode::Grammar, "non-terminating decision without a coordinate");
        if (proposal)
            (void)policy::snap_to_candidates(d, *view.candidates, cfg.delta);
        if (d.level > ctx.max_level)
            throw Error(ErrorCode::Range, fmt::format("level {} exceeds the maximum ROI level {}", d.level, ctx.max_level));

        RoiRecord rec;
        rec.round = state.round;
        rec.region = {d.point, d.level, cfg.roi_size};
        rec.patch = std::make_shared<const Image>(slide::extract_region(ctx.slide, rec.region, cfg.anchor));
        rec.patch_id = fmt::format("{}.r{:02d}", ctx.slide.id(), state.round);
        rec.justification = d.justification;
        rec.stop_confidence = policy::stop_probability(d);
        rec.timestamp = timestamp_for(state.round, cfg.wall_clock);
        rec.revisit = std::any_of(visited.begin(), visited.end(),
                                  [&](NormPoint v) { return slide::distance(v, d.point) < cfg.delta; });
        rec.off_tissue = !ctx.mask.contains(d.point);
        if (rec.revisit)
            spdlog::info("{} round {}: revisit near ({:.4f}, {:.4f})", ctx.slide.id(), state.round, d.point.x, d.point.y);
        if (rec.off_tissue)
            spdlog::warn("{} round {}: ({:.4f}, {:.4f}) is outside the tissue mask", ctx.slide.id(), state.round,
                         d.point.x, d.point.y);
        state.records.push_back(std::move(rec));
    }

    const auto check = should_stop(d, state.round, cfg);
    if (check.stop)
    {
        state.stopped = true;
        state.reason = check.reason;
    }
    else
    {
        ++state.round;
    }
    return d;
}

Trajectory run_navigation(const slide::PyramidSlide& slide, const std::string& task, policy::Policy& policy,
                          const NavConfig& cfg)
{
    const auto ctx = make_context(slide, cfg);
    Trajectory traj;
    traj.slide_id = slide.id();
    traj.task = task;
    traj.policy = policy.name();
    traj.config = cfg;

    auto state = initial_state(cfg);
    try
    {
        while (!state.stopped)
            (void)step(state, ctx, policy, task, cfg);
        traj.reason = *state.reason;
    }
    catch (const Error& e)
    {
        traj.reason = Termination::Error;
        traj.error = e.what();
        spdlog::warn("{}: navigation failed in round {}: {}", slide.id(), state.round, e.what());
    }
    traj.records = std::move(state.records);
    if (traj.reason != Termination::Error && traj.records.empty())
    {
        traj.reason = Termination::Error;
        traj.error = Error(ErrorCode::EmptyEvidence, "stopped before extracting any region").what();
    }
    return traj;
}

std::vector<RoiRecord> select_evidence(const Trajectory& traj, EvidenceMode mode, int k)
{
    if (traj.records.empty())
        throw Error(ErrorCode::EmptyEvidence, fmt::format("trajectory for {} has no regions", traj.slide_id));
    if (mode == EvidenceMode::Single)
        return {traj.records.back()};
    if (k < 1)
        throw Error(ErrorCode::Precondition, "k must be >= 1");
    const auto n = std::min(traj.records.size(), static_cast<std::size_t>(k));
    return {traj.records.end() - static_cast<std::ptrdiff_t>(n), traj.records.end()};
}

} // namespace pathnav::nav
