// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pathnav/tasks/task_spec.hpp"

#include <string>
#include <vector>

namespace pathnav::tasks
{

/// Query handed to the navigator for a task.
[[nodiscard]] std::string navigation_query(const TaskSpec& spec);

[[nodiscard]] std::string subtype_prompt(const std::vector<LabelDef>& labels, int num_images);

/// "Question k: ..." / "Choices: a | b" blocks, blank-line separated.
[[nodiscard]] std::string questions_block(const std::vector<Question>& questions);
[[nodiscard]] std::string vqa_prompt(const std::vector<Question>& questions, int num_images);

/// Each exemplar appears as one "Example k:" block.
[[nodiscard]] std::string report_prompt(const std::string& cancer_type, const std::vector<std::string>& exemplars);
inline constexpr std::string_view kExemplarBlockPrefix = "Example ";

[[nodiscard]] std::string risk_prompt(const std::string& cancer_type, const std::vector<RiskLevel>& exemplar_levels);

[[nodiscard]] std::string judge_system_prompt();
[[nodiscard]] std::string judge_user_prompt(const std::string& generated, const std::string& reference);

/// Pairwise form check: the model answers 0 (same) or 1 (different) per item.
[[nodiscard]] std::string checklist_compare_prompt(const std::string& reference, const std::string& candidate,
                                                   const std::vector<Question>& items);
/// Single-report form filling: one item, answer copied from the option list.
[[nodiscard]] std::string checklist_extract_prompt(const std::string& report, const Question& item);

} // namespace pathnav::tasks
