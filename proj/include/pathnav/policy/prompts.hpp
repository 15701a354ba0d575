// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pathnav/image.hpp"
#include "pathnav/slide/geometry.hpp"

#include <optional>
#include <string>
#include <vector>

namespace pathnav::policy
{

/// A region the agent already looked at, as shown back to it.
struct PriorPatch
{
    slide::RegionSpec region;
    ImagePtr patch;
    std::string justification;
};

/// What the policy sees at round t.
struct AgentView
{
    ImagePtr thumbnail;
    std::vector<PriorPatch> prior_patches;
    /// Present only in proposal rounds.
    std::optional<std::vector<slide::NormPoint>> candidates;
    std::string query;
    int round = 1;
    int max_level = 0;
};

struct PromptBundle
{
    std::string system_text;
    std::string user_text;
    /// Thumbnail first, then prior patches in visit order.
    std::vector<ImagePtr> images;
};

struct PromptOptions
{
    int roi_size = 1024;
    slide::Anchor anchor = slide::Anchor::Center;
};

[[nodiscard]] std::string build_system_prompt(int roi_size = 1024, int max_level = 4,
                                              slide::Anchor anchor = slide::Anchor::Center);

/// `task` overrides view.query when non-empty.
[[nodiscard]] PromptBundle build_round_prompt(const AgentView& view, const std::string& task = {},
                                              const PromptOptions& options = {});

/// Appended after a reply the parser rejected.
[[nodiscard]] std::string format_reminder();

} // namespace pathnav::policy
