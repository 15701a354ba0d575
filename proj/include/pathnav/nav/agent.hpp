// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pathnav/policy/policy.hpp"
#include "pathnav/rng.hpp"
#include "pathnav/slide/tissue.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pathnav::nav
{

struct NavConfig
{
    int K = 20;
    double delta = 0.01;
    int T = 10;
    int proposal_rounds = 3;
    double tau_stop = 0.5;
    int roi_size = 1024;
    std::uint64_t seed = 0;
    slide::Anchor anchor = slide::Anchor::Center;
    int thumbnail_max_edge = 1024;
    /// Wall-clock timestamps in trajectory records; logical ones otherwise.
    bool wall_clock = false;
};

/// Throws Config on K < 1, delta outside (0,1), or proposal_rounds outside [1, T].
void validate(const NavConfig& cfg);

/// Uniform sampling over the area of foreground cells.
class ForegroundSampler
{
public:
    explicit ForegroundSampler(const slide::TissueMask& mask);
    [[nodiscard]] slide::NormPoint sample(Rng& rng) const;
    [[nodiscard]] const slide::TissueMask& mask() const noexcept { return _mask; }

private:
    const slide::TissueMask& _mask;
    std::vector<std::size_t> _cells;
    std::vector<double> _cumulative;
};

struct CandidateSet
{
    std::vector<slide::NormPoint> points;
    int round = 1;
};

/// Dart throwing: `count` (default cfg.K) foreground points, pairwise and
/// against every exclusion at least cfg.delta apart. Throws Capacity after
/// 10000 * count attempts.
[[nodiscard]] CandidateSet propose_candidates(const slide::TissueMask& mask, const NavConfig& cfg, Rng& rng,
                                              std::span<const slide::NormPoint> exclusions, int round = 1,
                                              int count = -1);

enum class Termination
{
    TerminateSignal,
    ConfidenceGate,
    RoundCap,
    Error,
    Baseline,
};

[[nodiscard]] std::string_view to_string(Termination t) noexcept;
/// Throws Parse for unknown names.
[[nodiscard]] Termination termination_from_string(std::string_view s);

struct StopCheck
{
    bool stop = false;
    Termination reason = Termination::RoundCap;
};

/// Stop iff terminate, stop probability > tau_stop (strict), or t == T.
[[nodiscard]] StopCheck should_stop(const policy::Decision& d, int t, const NavConfig& cfg) noexcept;

struct RoiRecord
{
    int round = 1;
    slide::RegionSpec region;
    std::string patch_id;
    std::string justification;
    double stop_confidence = 0.0;
    bool revisit = false;
    bool off_tissue = false;
    std::string timestamp;
    /// In-memory raster; not serialized.
    ImagePtr patch;
};

struct Trajectory
{
    std::string slide_id;
    std::string task;
    std::string policy;
    std::vector<RoiRecord> records;
    Termination reason = Termination::RoundCap;
    std::string error;
    NavConfig config;
};

/// Highest level whose dimensions both hold a roi_size window. Throws Range
/// when even level 0 is too small.
[[nodiscard]] int max_roi_level(const slide::PyramidSlide& slide, int roi_size);

/// Per-run data shared by all rounds.
struct NavContext
{
    const slide::PyramidSlide& slide;
    slide::TissueMask mask;
    Image thumbnail_base;
    int max_level = 0;
};

/// Computes the tissue mask (DegenerateSlide on an empty slide) and the base view.
[[nodiscard]] NavContext make_context(const slide::PyramidSlide& slide, const NavConfig& cfg);

struct NavState
{
    int round = 1;
    std::vector<RoiRecord> records;
    bool stopped = false;
    std::optional<Termination> reason;
    Rng rng;
};

[[nodiscard]] NavState initial_state(const NavConfig& cfg);

/// One Think-Act-Reflect round: view, policy call, ROI extraction, stop check.
policy::Decision step(NavState& state, const NavContext& ctx, policy::Policy& policy, const std::string& task,
                      const NavConfig& cfg);

/// Policy errors and stopping before any ROI end the run with Termination::Error
/// and a message; a degenerate slide throws.
[[nodiscard]] Trajectory run_navigation(const slide::PyramidSlide& slide, const std::string& task,
                                        policy::Policy& policy, const NavConfig& cfg);

enum class EvidenceMode
{
    Single,
    Multi,
};

/// Single: the last record. Multi: the last min(k, n) records in visit order.
[[nodiscard]] std::vector<RoiRecord> select_evidence(const Trajectory& traj, EvidenceMode mode, int k = 1);

} // namespace pathnav::nav
