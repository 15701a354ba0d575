// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pathnav/tasks/task_spec.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace pathnav::tasks
{

/// One case's outcome. Scalar tasks hold a single value in predicted and
/// ground_truth; VQA and checklist hold one entry per question.
struct PredictionRecord
{
    std::string case_id;
    TaskKind task = TaskKind::Subtyping;
    std::string method;
    std::vector<std::string> predicted;
    std::vector<std::string> ground_truth;
    /// Patch ids of the evidence regions.
    std::vector<std::string> evidence;
    std::string raw_response;
    /// Set when the case failed; predicted is then empty.
    std::string error;

    friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

[[nodiscard]] std::string predictions_jsonl(const std::vector<PredictionRecord>& records);
/// Throws Parse with a line number.
[[nodiscard]] std::vector<PredictionRecord> parse_predictions_jsonl(const std::string& text);
void write_predictions(const std::filesystem::path& path, const std::vector<PredictionRecord>& records);
[[nodiscard]] std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path);

} // namespace pathnav::tasks
