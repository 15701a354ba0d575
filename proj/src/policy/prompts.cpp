// SPDX-License-Identifier: Apache-2.0
#include "pathnav/policy/prompts.hpp"

#include <fmt/format.h>

namespace pathnav::policy
{

namespace
{

// {size}, {anchor_sentence} and {max_level} are substituted.
constexpr const char* kSystemTemplate =
    R"(Find a {size}px x {size}px region of interest (ROI) on the whole slide image (WSI) based on the user's query. Select the most relevant ROI by defining its bounding box and downsample level. {anchor_sentence} For example, x=0.5, y=0.5 represents the center of the WSI.

Adjust the downsample level to zoom in or out:

- Zoom in for more detail with a lower level (e.g., level=0 for highest magnification).
- Zoom out for a larger area with a higher level (e.g., level=1 or above).

The maximum downsample level of the WSI is {max_level}. An overview of the WSI and the current ROI, highlighted by a bounding box, will also be shown.

Assess if the current ROI meets the user's needs. If it does, respond with "TERMINATE." If not, suggest a new ROI in the format: <<x, y, level>>.

To check different areas, adjust the coordinates. For example:

- To check the left area from the current location (x=0.5, y=0.5), use (x=0.4, y=0.5).
- To check the lower area, use (x=0.5, y=0.6).

Ensure to check multiple areas in the slide to find the best region of interest.

In each response, provide a brief medical reasoning (one sentence) explaining why the selected region is appropriate. Describe any notable cellular or structural features that support your decision.

End your response using the following two-line format:

"<one sentence of reasoning>"
<<x=..., y=..., level=...>>

For example:

"This region displays dense nuclear atypia and irregular gland formation, consistent with carcinoma."
<<x=0.43, y=0.62, level=0>>

Make sure the coordinate format exactly matches <<x=..., y=..., level=...>> for automatic parsing.)";

constexpr const char* kCenterSentence =
    "The bounding box is determined by its center (x, y) relative to the top-left corner of the WSI, where (0, 0) is the top-left corner and (1, 1) the bottom-right corner.";
constexpr const char* kCornerSentence =
    "The bounding box is determined by its top-left corner (x, y) relative to the top-left corner of the WSI.";

void replace_all(std::string& s, std::string_view from, std::string_view to)
{
    for (auto p = s.find(from); p != std::string::npos; p = s.find(from, p + to.size()))
        s.replace(p, from.size(), to);
}

} // namespace

std::string build_system_prompt(int roi_size, int max_level, slide::Anchor anchor)
{
    std::string s = kSystemTemplate;
    replace_all(s, "{anchor_sentence}", anchor == slide::Anchor::Center ? kCenterSentence : kCornerSentence);
    replace_all(s, "{size}", std::to_string(roi_size));
    replace_all(s, "{max_level}", std::to_string(max_level));
    return s;
}

PromptBundle build_round_prompt(const AgentView& view, const std::string& task, const PromptOptions& options)
{
    PromptBundle b;
    b.system_text = build_system_prompt(options.roi_size, view.max_level, options.anchor);

    std::string u;
    u += fmt::format("Query: {}\n\n", task.empty() ? view.query : task);
    u += fmt::format("Round {}. The maximum downsample level is {}.\n", view.round, view.max_level);
    u += "Image 1 is the slide overview; previously explored regions are outlined and numbered in visit order.\n";
    if (!view.prior_patches.empty())
    {
        u += fmt::format("Images 2-{} are the previously selected regions, in visit order:\n",
                         view.prior_patches.size() + 1);
        for (std::size_t i = 0; i < view.prior_patches.size(); ++i)
        {
            const auto& p = view.prior_patches[i];
            u += fmt::format("{}. (x={:.4f}, y={:.4f}, level={}) {}\n", i + 1, p.region.center.x, p.region.center.y,
                             p.region.level, p.justification);
        }
    }
    u += '\n';
    if (view.candidates)
    {
        u += fmt::format("Candidate coordinates ({}):\n", view.candidates->size());
        for (std::size_t i = 0; i < view.candidates->size(); ++i)
            u += fmt::format("{}. (x={:.4f}, y={:.4f})\n", i + 1, (*view.candidates)[i].x, (*view.candidates)[i].y);
        u += "\nSelect exactly one coordinate from the candidate list above and copy its x and y values into your answer.";
    }
    else
    {
        u += "No candidate list is given in this round. Choose any coordinate in [0, 1] that is worth examining next, "
             "or respond with TERMINATE if the explored regions already answer the query.";
    }
    b.user_text = std::move(u);

    b.images.reserve(view.prior_patches.size() + 1);
    if (view.thumbnail)
        b.images.push_back(view.thumbnail);
    for (const auto& p: view.prior_patches)
        b.images.push_back(p.patch);
    return b;
}

std::string format_reminder()
{
    return "Your previous reply could not be parsed. Reply again with one sentence of reasoning followed by a line "
           "that exactly matches <<x=..., y=..., level=...>>, or with TERMINATE.";
}

} // namespace pathnav::policy
