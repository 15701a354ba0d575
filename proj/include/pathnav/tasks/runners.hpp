// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pathnav/error.hpp"
#include "pathnav/policy/chat.hpp"
#include "pathnav/tasks/task_spec.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pathnav::tasks
{

/// Chat endpoint plus the model name sent with every request.
struct Llm
{
    policy::ChatClient& client;
    std::string model;
};

/// Parsed value, the accepted reply text and the number of calls used.
template <typename T>
struct Answer
{
    T value;
    std::string raw;
    int attempts = 1;
};

/// Trim, drop wrapping quotes/backticks/asterisks and trailing punctuation.
[[nodiscard]] std::string normalize_reply(std::string_view text);
/// Index of the option equal to the normalized reply, ignoring case.
[[nodiscard]] std::optional<std::size_t> match_option(std::string_view reply, const std::vector<std::string>& options);

/// Throws UnknownLabel when the reply names no label.
[[nodiscard]] std::string parse_label(std::string_view reply, const std::vector<LabelDef>& labels);
/// Comma-separated answers in question order. Options that contain commas
/// are matched longest first. Throws LengthMismatch on a count mismatch and
/// UnknownLabel on an off-option answer.
[[nodiscard]] std::vector<std::string> parse_vqa_answers(std::string_view reply, const std::vector<Question>& questions);
/// First standalone digit in {0,1,2}. Throws Parse otherwise.
[[nodiscard]] RiskLevel parse_risk(std::string_view reply);
/// First number in the reply. Parse when none, Range outside [0,10].
[[nodiscard]] double parse_judge_score(std::string_view reply);
/// JSON array of 0/1 flags of the given length. Parse or LengthMismatch.
[[nodiscard]] std::vector<int> parse_flag_array(std::string_view reply, std::size_t expected);

/// Sends `request`; on a parse failure appends the reply and a reminder and
/// asks once more. Transport and cache errors are not retried.
template <typename T, typename Parse>
Answer<T> ask_with_retry(const Llm& llm, policy::ChatRequest request, Parse&& parse, const std::string& reminder);

[[nodiscard]] Answer<std::string> predict_subtype(const std::vector<ImagePtr>& evidence, const TaskSpec& spec,
                                                  const Llm& llm);
[[nodiscard]] Answer<std::vector<std::string>> answer_vqa(const std::vector<ImagePtr>& evidence, const TaskSpec& spec,
                                                          const Llm& llm);
/// Throws Parse on an empty reply.
[[nodiscard]] Answer<std::string> generate_report(const std::vector<ImagePtr>& evidence, const TaskSpec& spec,
                                                  const Llm& llm);
/// One extraction per item, in order.
[[nodiscard]] Answer<std::vector<std::string>> extract_checklist(const std::string& report,
                                                                 const std::vector<Question>& items, const Llm& llm);
/// Single pairwise call; flag 1 marks an item whose answers differ.
[[nodiscard]] Answer<std::vector<int>> compare_checklist(const std::string& reference, const std::string& candidate,
                                                         const std::vector<Question>& items, const Llm& llm);
[[nodiscard]] Answer<RiskLevel> predict_risk(const std::vector<ImagePtr>& evidence, const TaskSpec& spec,
                                             const Llm& llm);
/// Similarity of two reports on the 0-10 rubric.
[[nodiscard]] Answer<double> judge_score(const std::string& generated, const std::string& reference, const Llm& llm);

enum class QuestionCategory
{
    Diagnosis,
    Staging,
    Grading,
    Structure,
    Margins,
    Biomarkers,
    LymphNodes,
    Size,
    Other,
};

[[nodiscard]] std::string_view to_string(QuestionCategory c) noexcept;

struct CategoryRule
{
    QuestionCategory category;
    std::vector<std::string_view> keywords;
};

/// Rules in match order; the first category with a keyword hit wins.
[[nodiscard]] const std::vector<CategoryRule>& category_rules();
/// Keywords match case-insensitively at the start of a word.
[[nodiscard]] QuestionCategory categorize_question(std::string_view text);

/// <12 months -> High, 12..36 -> Medium, >36 -> Low. Censored cases with
/// months <= 36 return nullopt (not enough follow-up). Range on months < 0.
[[nodiscard]] std::optional<RiskLevel> risk_from_survival_months(double months, bool event);

template <typename T, typename Parse>
Answer<T> ask_with_retry(const Llm& llm, policy::ChatRequest request, Parse&& parse, const std::string& reminder)
{
    request.model = llm.model;
    auto reply = llm.client.complete(request);
    try
    {
        return {parse(reply), reply, 1};
    }
    catch (const Error& e)
    {
        switch (e.code())
        {
        case ErrorCode::Grammar:
        case ErrorCode::Parse:
        case ErrorCode::UnknownLabel:
        case ErrorCode::LengthMismatch:
        case ErrorCode::Range:
            break;
        default:
            throw;
        }
        request.messages.push_back({"assistant", reply, {}});
        request.messages.push_back({"user", reminder, {}});
    }
    reply = llm.client.complete(request);
    return {parse(reply), reply, 2};
}

} // namespace pathnav::tasks
