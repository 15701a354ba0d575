// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pathnav/image.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pathnav::tasks
{

enum class TaskKind
{
    Subtyping,
    Report,
    Vqa,
    Checklist,
    Survival,
};

[[nodiscard]] std::string_view to_string(TaskKind k) noexcept;
/// Throws Config for unknown names.
[[nodiscard]] TaskKind task_kind_from_string(std::string_view s);

struct LabelDef
{
    std::string label;
    std::string description;
};

struct SubtypeGroup
{
    std::string name;  // e.g. BRCA
    std::string title; // e.g. Breast Cancer
    std::vector<LabelDef> labels;
};

/// Closed-form question; `answer` is the reference when known.
struct Question
{
    std::string text;
    std::vector<std::string> options;
    std::optional<std::string> answer;
};

enum class RiskLevel : int
{
    Low = 0,
    Medium = 1,
    High = 2,
};

/// Throws Range unless value is 0, 1 or 2.
[[nodiscard]] RiskLevel risk_level(int value);

struct RiskExemplar
{
    ImagePtr patch;
    RiskLevel level = RiskLevel::Low;
};

struct TaskSpec
{
    TaskKind kind = TaskKind::Subtyping;
    std::string cancer_type;
    std::vector<LabelDef> labels;
    std::vector<Question> questions;
    std::vector<std::string> report_exemplars;
    std::vector<RiskExemplar> risk_exemplars;
};

/// Throws Precondition: subtyping needs >= 2 labels, report exactly 5
/// exemplars, survival exactly 3, vqa/checklist at least one question.
void validate(const TaskSpec& spec);

/// "[GROUP] title" starts a group; "LABEL: description" lines add labels.
/// '#' lines and blank lines are skipped. Throws Parse with a line number.
[[nodiscard]] std::vector<SubtypeGroup> parse_subtype_groups(const std::string& text);
[[nodiscard]] std::vector<SubtypeGroup> load_subtype_groups(const std::filesystem::path& path);
/// Throws UnknownLabel when the group is missing.
[[nodiscard]] const SubtypeGroup& find_group(const std::vector<SubtypeGroup>& groups, std::string_view name);

/// question<TAB>opt1|opt2|...[<TAB>answer]. The answer must be one of the
/// options. Used for VQA files and checklist forms.
[[nodiscard]] std::vector<Question> parse_questions(const std::string& text);
[[nodiscard]] std::vector<Question> load_questions(const std::filesystem::path& path);

/// Blocks separated by lines holding only "---"; '#' lines at the top are skipped.
[[nodiscard]] std::vector<std::string> parse_exemplars(const std::string& text);
[[nodiscard]] std::vector<std::string> load_exemplars(const std::filesystem::path& path);

struct SurvivalCase
{
    std::string case_id;
    double months = 0.0;
    bool event = false;
};

/// case_id<TAB>months<TAB>event (1/0, true/false, dead/alive).
[[nodiscard]] std::vector<SurvivalCase> parse_survival_table(const std::string& text);
[[nodiscard]] std::vector<SurvivalCase> load_survival_table(const std::filesystem::path& path);

} // namespace pathnav::tasks
