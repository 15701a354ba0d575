// SPDX-License-Identifier: Apache-2.0
#include "pathnav/tasks/runners.hpp"

#include "pathnav/tasks/prompts.hpp"

#include <boost/algorithm/string.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numeric>

namespace pathnav::tasks
{

namespace
{

bool is_space(char c)
{
    return std::isspace(static_cast<unsigned char>(c)) != 0;
}

bool is_digit(char c)
{
    return c >= '0' && c <= '9';
}

std::string fold(std::string_view s)
{
    std::string out(s);
    boost::algorithm::to_lower(out);
    return out;
}

constexpr std::string_view kWrapChars = "\"'`*";
constexpr std::string_view kTrailingPunct = ".,;:!?";

policy::ChatRequest user_request(std::string text, std::vector<ImagePtr> images)
{
    policy::ChatRequest r;
    r.messages.push_back({"user", std::move(text), std::move(images)});
    return r;
}

void require_evidence(const std::vector<ImagePtr>& evidence)
{
    if (evidence.empty())
        throw Error(ErrorCode::EmptyEvidence, "task needs at least one evidence patch");
    for (const auto& p: evidence)
        if (!p)
            throw Error(ErrorCode::EmptyEvidence, "evidence patch without a raster");
}

void require_kind(const TaskSpec& spec, TaskKind kind)
{
    if (spec.kind != kind)
        throw Error(ErrorCode::Precondition,
                    fmt::format("expected a {} task, got {}", to_string(kind), to_string(spec.kind)));
    validate(spec);
}

std::size_t naive_answer_count(std::string_view text)
{
    std::vector<std::string> parts;
    boost::algorithm::split(parts, text, boost::algorithm::is_any_of(","));
    return static_cast<std::size_t>(std::count_if(parts.begin(), parts.end(), [](const std::string& p) {
        return !boost::algorithm::trim_copy(p).empty();
    }));
}

} // namespace

std::string normalize_reply(std::string_view text)
{
    std::string s(text);
    for (;;)
    {
        const auto before = s.size();
        boost::algorithm::trim(s);
        while (!s.empty() && kWrapChars.find(s.front()) != std::string_view::npos)
            s.erase(s.begin());
        while (!s.empty() && (kWrapChars.find(s.back()) != std::string_view::npos ||
                              kTrailingPunct.find(s.back()) != std::string_view::npos))
            s.pop_back();
        boost::algorithm::trim(s);
        if (s.size() == before)
            return s;
    }
}

std::optional<std::size_t> match_option(std::string_view reply, const std::vector<std::string>& options)
{
    const auto r = fold(normalize_reply(reply));
    for (std::size_t i = 0; i < options.size(); ++i)
        if (fold(normalize_reply(options[i])) == r)
            return i;
    return std::nullopt;
}

std::string parse_label(std::string_view reply, const std::vector<LabelDef>& labels)
{
    std::vector<std::string> names;
    for (const auto& l: labels)
        names.push_back(l.label);
    if (const auto i = match_option(reply, names))
        return names[*i];
    throw Error(ErrorCode::UnknownLabel,
                fmt::format("reply '{}' is not one of {}", normalize_reply(reply), fmt::join(names, ", ")));
}

std::vector<std::string> parse_vqa_answers(std::string_view reply, const std::vector<Question>& questions)
{
    std::string text = boost::algorithm::trim_copy(std::string(reply));
    if (boost::algorithm::istarts_with(text, "answers:"))
        text.erase(0, 8);
    const auto lower = fold(text);
    const auto fail = [&](std::size_t at) -> std::vector<std::string> {
        const auto n = naive_answer_count(text);
        if (n != questions.size())
            throw Error(ErrorCode::LengthMismatch,
                        fmt::format("expected {} answers, reply has {}", questions.size(), n));
        throw Error(ErrorCode::UnknownLabel, fmt::format("answer {} is not one of its choices", at + 1));
    };
    const auto skip = [&](std::size_t p, std::string_view chars) {
        while (p < text.size() && (is_space(text[p]) || chars.find(text[p]) != std::string_view::npos))
            ++p;
        return p;
    };

    std::vector<std::string> out;
    std::size_t pos = 0;
    for (std::size_t j = 0; j < questions.size(); ++j)
    {
        pos = skip(pos, kWrapChars);
        const auto& opts = questions[j].options;
        std::vector<std::size_t> order(opts.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return opts[a].size() > opts[b].size(); });
        bool matched = false;
        for (const auto i: order)
        {
            const auto o = fold(opts[i]);
            if (o.empty() || lower.compare(pos, o.size(), o) != 0)
                continue;
            const auto after = skip(pos + o.size(), ".;!?\"'`*");
            if (after < text.size() && text[after] != ',')
                continue;
            out.push_back(opts[i]);
            pos = after < text.size() ? after + 1 : after;
            matched = true;
            break;
        }
        if (!matched)
            return fail(j);
    }
    if (skip(pos, ".,;!?\"'`*") < text.size())
        return fail(questions.size());
    return out;
}

RiskLevel parse_risk(std::string_view reply)
{
    for (std::size_t i = 0; i < reply.size(); ++i)
    {
        if (!is_digit(reply[i]))
            continue;
        const bool left = i == 0 || (!is_digit(reply[i - 1]) && reply[i - 1] != '.');
        const bool right = i + 1 == reply.size() || (!is_digit(reply[i + 1]) && !(reply[i + 1] == '.' &&
                                                                                   i + 2 < reply.size() &&
                                                                                   is_digit(reply[i + 2])));
        if (left && right && reply[i] <= '2')
            return static_cast<RiskLevel>(reply[i] - '0');
    }
    throw Error(ErrorCode::Parse, fmt::format("no risk level 0, 1 or 2 in '{}'", normalize_reply(reply)));
}

double parse_judge_score(std::string_view reply)
{
    for (std::size_t i = 0; i < reply.size(); ++i)
    {
        if (!is_digit(reply[i]))
            continue;
        std::size_t start = i;
        if (i > 0 && reply[i - 1] == '-')
            start = i - 1;
        double v = 0;
        const auto [ptr, ec] = std::from_chars(reply.data() + start, reply.data() + reply.size(), v);
        if (ec != std::errc())
            break;
        if (!(v >= 0.0 && v <= 10.0))
            throw Error(ErrorCode::Range, fmt::format("judge score {} outside [0, 10]", v));
        (void)ptr;
        return v;
    }
    throw Error(ErrorCode::Parse, fmt::format("no score in '{}'", normalize_reply(reply)));
}

std::vector<int> parse_flag_array(std::string_view reply, std::size_t expected)
{
    const auto open = reply.find('[');
    const auto close = reply.find(']', open == std::string_view::npos ? 0 : open);
    if (open == std::string_view::npos || close == std::string_view::npos)
        throw Error(ErrorCode::Parse, "reply holds no JSON array");
    nlohmann::json arr;
    try
    {
        arr = nlohmann::json::parse(reply.substr(open, close - open + 1));
    }
    catch (const nlohmann::json::exception& e)
    {
        throw Error(ErrorCode::Parse, fmt::format("bad JSON array: {}", e.what()));
    }
    std::vector<int> out;
    for (const auto& v: arr)
    {
        if (!v.is_number_integer() || (v.get<int>() != 0 && v.get<int>() != 1))
            throw Error(ErrorCode::Parse, fmt::format("flag {} is not 0 or 1", v.dump()));
        out.push_back(v.get<int>());
    }
    if (out.size() != expected)
        throw Error(ErrorCode::LengthMismatch, fmt::format("expected {} flags, got {}", expected, out.size()));
    return out;
}

Answer<std::string> predict_subtype(const std::vector<ImagePtr>& evidence, const TaskSpec& spec, const Llm& llm)
{
    require_kind(spec, TaskKind::Subtyping);
    require_evidence(evidence);
    std::vector<std::string> names;
    for (const auto& l: spec.labels)
        names.push_back(l.label);
    const auto prompt = subtype_prompt(spec.labels, static_cast<int>(evidence.size()));
    return ask_with_retry<std::string>(
        llm, user_request(prompt, evidence), [&](const std::string& r) { return parse_label(r, spec.labels); },
        fmt::format("Reply with exactly one of: {}. No other text.", fmt::join(names, ", ")));
}

Answer<std::vector<std::string>> answer_vqa(const std::vector<ImagePtr>& evidence, const TaskSpec& spec,
                                            const Llm& llm)
{
    require_kind(spec, TaskKind::Vqa);
    require_evidence(evidence);
    const auto prompt = vqa_prompt(spec.questions, static_cast<int>(evidence.size()));
    return ask_with_retry<std::vector<std::string>>(
        llm, user_request(prompt, evidence),
        [&](const std::string& r) { return parse_vqa_answers(r, spec.questions); },
        fmt::format("Reply with exactly {} answers in question order, separated by commas, each copied from its "
                    "question's choices.",
                    spec.questions.size()));
}

Answer<std::string> generate_report(const std::vector<ImagePtr>& evidence, const TaskSpec& spec, const Llm& llm)
{
    require_kind(spec, TaskKind::Report);
    require_evidence(evidence);
    const auto prompt = report_prompt(spec.cancer_type, spec.report_exemplars);
    return ask_with_retry<std::string>(
        llm, user_request(prompt, evidence),
        [](const std::string& r) {
            if (boost::algorithm::trim_copy(r).empty())
                throw Error(ErrorCode::Parse, "empty report");
            return r;
        },
        "The reply was empty. Write the pathology report.");
}

Answer<std::vector<std::string>> extract_checklist(const std::string& report, const std::vector<Question>& items,
                                                   const Llm& llm)
{
    if (items.empty())
        throw Error(ErrorCode::Precondition, "checklist has no items");
    Answer<std::vector<std::string>> out{{}, {}, 0};
    for (const auto& item: items)
    {
        const auto a = ask_with_retry<std::string>(
            llm, user_request(checklist_extract_prompt(report, item), {}),
            [&](const std::string& r) {
                if (const auto i = match_option(r, item.options))
                    return item.options[*i];
                throw Error(ErrorCode::UnknownLabel, fmt::format("'{}' is not a choice for '{}'",
                                                                 normalize_reply(r), item.text));
            },
            fmt::format("Reply with exactly one of: {}.", fmt::join(item.options, " | ")));
        out.value.push_back(a.value);
        if (!out.raw.empty())
            out.raw += '\n';
        out.raw += a.raw;
        out.attempts += a.attempts;
    }
    return out;
}

Answer<std::vector<int>> compare_checklist(const std::string& reference, const std::string& candidate,
                                           const std::vector<Question>& items, const Llm& llm)
{
    if (items.empty())
        throw Error(ErrorCode::Precondition, "checklist has no items");
    return ask_with_retry<std::vector<int>>(
        llm, user_request(checklist_compare_prompt(reference, candidate, items), {}),
        [&](const std::string& r) { return parse_flag_array(r, items.size()); },
        fmt::format("Return only a JSON array of exactly {} values, each 0 or 1.", items.size()));
}

Answer<RiskLevel> predict_risk(const std::vector<ImagePtr>& evidence, const TaskSpec& spec, const Llm& llm)
{
    require_kind(spec, TaskKind::Survival);
    require_evidence(evidence);
    std::vector<ImagePtr> images;
    std::vector<RiskLevel> levels;
    for (const auto& e: spec.risk_exemplars)
    {
        images.push_back(e.patch);
        levels.push_back(e.level);
    }
    images.insert(images.end(), evidence.begin(), evidence.end());
    return ask_with_retry<RiskLevel>(llm, user_request(risk_prompt(spec.cancer_type, levels), images),
                                     [](const std::string& r) { return parse_risk(r); },
                                     "Return only a single number: 0, 1 or 2.");
}

Answer<double> judge_score(const std::string& generated, const std::string& reference, const Llm& llm)
{
    if (boost::algorithm::trim_copy(generated).empty() || boost::algorithm::trim_copy(reference).empty())
        throw Error(ErrorCode::Precondition, "both reports must be non-empty");
    policy::ChatRequest r;
    r.messages.push_back({"system", judge_system_prompt(), {}});
    r.messages.push_back({"user", judge_user_prompt(generated, reference), {}});
    return ask_with_retry<double>(llm, std::move(r), [](const std::string& s) { return parse_judge_score(s); },
                                  "Provide only a single number from 0 to 10.");
}

std::string_view to_string(QuestionCategory c) noexcept
{
    switch (c)
    {
    case QuestionCategory::Diagnosis:
        return "diagnosis";
    case QuestionCategory::Staging:
        return "staging";
    case QuestionCategory::Grading:
        return "grading";
    case QuestionCategory::Structure:
        return "structure";
    case QuestionCategory::Margins:
        return "margins";
    case QuestionCategory::Biomarkers:
        return "biomarkers";
    case QuestionCategory::LymphNodes:
        return "lymph-nodes";
    case QuestionCategory::Size:
        return "size";
    case QuestionCategory::Other:
        return "other";
    }
    return "other";
}

const std::vector<CategoryRule>& category_rules()
{
    // v1. Specific topics first: "size of the nodal metastasis" is a lymph-node
    // question, "histologic grade" a grading one.
    static const std::vector<CategoryRule> rules = {
        {QuestionCategory::Biomarkers,
         {"her2", "estrogen", "progesterone", "receptor", "ihc", "immunohisto", "pd-l1", "mismatch repair", "msi",
          "e-cadherin", "allred", "triple negative", "hormone"}},
        {QuestionCategory::LymphNodes, {"lymph node", "node", "nodal", "axillary", "sentinel"}},
        {QuestionCategory::Margins, {"margin"}},
        {QuestionCategory::Grading,
         {"grade", "mitot", "mitos", "prolif", "ki-67", "nottingham", "differentiat", "fuhrman"}},
        {QuestionCategory::Staging, {"stage", "pt", "pn", "tnm", "metasta", "ajcc"}},
        {QuestionCategory::Size, {"size", "cm", "multifocal", "multiplicity", "unifocal", "foci", "dimension"}},
        {QuestionCategory::Structure, {"architectur", "gland", "pattern", "stroma", "cribriform"}},
        {QuestionCategory::Diagnosis, {"subtype", "carcinoma", "diagnosis", "histologic type", "variant"}},
    };
    return rules;
}

QuestionCategory categorize_question(std::string_view text)
{
    const auto lower = fold(text);
    const auto hit = [&](std::string_view kw) {
        for (auto pos = lower.find(kw); pos != std::string::npos; pos = lower.find(kw, pos + 1))
            if (pos == 0 || !std::isalnum(static_cast<unsigned char>(lower[pos - 1])))
                return true;
        return false;
    };
    for (const auto& rule: category_rules())
        if (std::any_of(rule.keywords.begin(), rule.keywords.end(), hit))
            return rule.category;
    return QuestionCategory::Other;
}

std::optional<RiskLevel> risk_from_survival_months(double months, bool event)
{
    if (!(months >= 0.0) || !std::isfinite(months))
        throw Error(ErrorCode::Range, fmt::format("survival months must be >= 0, got {}", months));
    if (!event && months <= 36.0)
        return std::nullopt;
    if (months < 12.0)
        return RiskLevel::High;
    if (months <= 36.0)
        return RiskLevel::Medium;
    return RiskLevel::Low;
}

} // namespace pathnav::tasks
