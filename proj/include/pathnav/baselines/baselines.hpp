// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pathnav/nav/agent.hpp"

#include <optional>
#include <string>
#include <vector>

namespace pathnav::baselines
{

struct BaselineConfig
{
    int random_K = 21;
    int single_turn_K = 20;
    /// When set, both baselines emit exactly this many regions.
    std::optional<int> matched_m;
    /// Tie-break order for majority voting.
    std::vector<std::string> class_order;
    std::uint64_t seed = 0;
};

/// Throws Config on random_K < 1, single_turn_K < 1 or matched_m < 1.
void validate(const BaselineConfig& cfg);

/// K foreground points whose level-0 windows (after the in-bounds shift
/// extract_region applies) are pairwise disjoint. Capacity error after
/// 10000 * K attempts.
[[nodiscard]] std::vector<slide::RegionSpec> random_rois(const slide::PyramidSlide& slide,
                                                         const slide::TissueMask& mask, int K, Rng& rng,
                                                         int roi_size = 1024,
                                                         slide::Anchor anchor = slide::Anchor::Center);

/// Modal label; ties go to the label listed first in class_order.
/// Throws Precondition on empty input, UnknownLabel for labels outside the order.
[[nodiscard]] std::string majority_vote(const std::vector<std::string>& preds,
                                        const std::vector<std::string>& class_order);

/// Arithmetic mean. Throws Precondition on empty input.
[[nodiscard]] double mean_score_aggregate(const std::vector<double>& scores);

/// Mean of per-report case accuracies. Throws Range for values outside [0,1].
[[nodiscard]] double checklist_aggregate(const std::vector<double>& case_accs);

struct SingleTurnResult
{
    std::vector<slide::RegionSpec> regions;
    std::vector<policy::Decision> decisions;
    /// Candidate index each region came from.
    std::vector<std::size_t> picks;
};

/// m one-shot picks from the same candidate list. Every call sees the bare
/// thumbnail and no prior patches. A repeated pick moves to the nearest
/// unselected candidate. Throws Precondition when m exceeds the candidate count.
[[nodiscard]] SingleTurnResult single_turn_select(const policy::AgentView& view, policy::Policy& policy, int m,
                                                  double delta = 0.01, int roi_size = 1024);

/// Number of regions a baseline emits: matched_m if set, else `fallback`.
[[nodiscard]] int regions_for(const BaselineConfig& cfg, int fallback);

/// Random-tile baseline as a trajectory with termination "baseline".
[[nodiscard]] nav::Trajectory run_random_baseline(const slide::PyramidSlide& slide, const std::string& task,
                                                  const BaselineConfig& cfg, const nav::NavConfig& nav_cfg);

/// Single-turn baseline as a trajectory with termination "baseline". Policy
/// errors are recorded on the trajectory, as for navigation runs.
[[nodiscard]] nav::Trajectory run_single_turn_baseline(const slide::PyramidSlide& slide, const std::string& task,
                                                       policy::Policy& policy, const BaselineConfig& cfg,
                                                       const nav::NavConfig& nav_cfg);

} // namespace pathnav::baselines
