// SPDX-License-Identifier: Apache-2.0
#include "pathnav/tasks/task_spec.hpp"

#include "pathnav/error.hpp"
#include "pathnav/fileio.hpp"

#include <boost/algorithm/string.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <sstream>

namespace pathnav::tasks
{

namespace
{

constexpr std::pair<TaskKind, std::string_view> kKindNames[] = {
    {TaskKind::Subtyping, "subtyping"}, {TaskKind::Report, "report"},     {TaskKind::Vqa, "vqa"},
    {TaskKind::Checklist, "checklist"}, {TaskKind::Survival, "survival"},
};

/// Lines with their 1-based numbers; CR stripped.
std::vector<std::pair<std::size_t, std::string>> numbered_lines(const std::string& text)
{
    std::vector<std::pair<std::size_t, std::string>> out;
    std::istringstream in(text);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line))
    {
        ++n;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        out.emplace_back(n, std::move(line));
    }
    return out;
}

bool skippable(const std::string& line)
{
    const auto t = boost::algorithm::trim_copy(line);
    return t.empty() || t.front() == '#';
}

} // namespace

std::string_view to_string(TaskKind k) noexcept
{
    for (const auto& [kind, name]: kKindNames)
        if (kind == k)
            return name;
    return "subtyping";
}

TaskKind task_kind_from_string(std::string_view s)
{
    for (const auto& [kind, name]: kKindNames)
        if (name == s)
            return kind;
    throw Error(ErrorCode::Config, fmt::format("unknown task kind '{}'", s));
}

RiskLevel risk_level(int value)
{
    if (value < 0 || value > 2)
        throw Error(ErrorCode::Range, fmt::format("risk level must be 0, 1 or 2, got {}", value));
    return static_cast<RiskLevel>(value);
}

void validate(const TaskSpec& spec)
{
    switch (spec.kind)
    {
    case TaskKind::Subtyping:
        if (spec.labels.size() < 2)
            throw Error(ErrorCode::Precondition,
                        fmt::format("subtyping needs at least 2 labels, got {}", spec.labels.size()));
        break;
    case TaskKind::Report:
        if (spec.report_exemplars.size() != 5)
            throw Error(ErrorCode::Precondition,
                        fmt::format("report generation needs 5 exemplars, got {}", spec.report_exemplars.size()));
        break;
    case TaskKind::Survival:
        if (spec.risk_exemplars.size() != 3)
            throw Error(ErrorCode::Precondition,
                        fmt::format("risk prediction needs 3 exemplars, got {}", spec.risk_exemplars.size()));
        for (const auto& e: spec.risk_exemplars)
            if (!e.patch)
                throw Error(ErrorCode::Precondition, "risk exemplar without an image");
        break;
    case TaskKind::Vqa:
    case TaskKind::Checklist:
        if (spec.questions.empty())
            throw Error(ErrorCode::Precondition, fmt::format("{} task has no questions", to_string(spec.kind)));
        for (const auto& q: spec.questions)
            if (q.options.empty())
                throw Error(ErrorCode::Precondition, fmt::format("question '{}' has no options", q.text));
        break;
    }
}

std::vector<SubtypeGroup> parse_subtype_groups(const std::string& text)
{
    std::vector<SubtypeGroup> groups;
    for (const auto& [n, line]: numbered_lines(text))
    {
        if (skippable(line))
            continue;
        const auto t = boost::algorithm::trim_copy(line);
        if (t.front() == '[')
        {
            const auto close = t.find(']');
            if (close == std::string::npos || close == 1)
                throw Error(ErrorCode::Parse, fmt::format("line {}: malformed group header", n));
            groups.push_back({t.substr(1, close - 1), boost::algorithm::trim_copy(t.substr(close + 1)), {}});
            continue;
        }
        const auto colon = t.find(':');
        if (colon == std::string::npos || colon == 0)
            throw Error(ErrorCode::Parse, fmt::format("line {}: expected 'LABEL: description'", n));
        if (groups.empty())
            throw Error(ErrorCode::Parse, fmt::format("line {}: label before any [GROUP] header", n));
        auto label = boost::algorithm::trim_copy(t.substr(0, colon));
        auto& labels = groups.back().labels;
        if (std::any_of(labels.begin(), labels.end(), [&](const LabelDef& d) { return d.label == label; }))
            throw Error(ErrorCode::Parse, fmt::format("line {}: duplicate label '{}'", n, label));
        labels.push_back({std::move(label), boost::algorithm::trim_copy(t.substr(colon + 1))});
    }
    return groups;
}

std::vector<SubtypeGroup> load_subtype_groups(const std::filesystem::path& path)
{
    return parse_subtype_groups(read_file(path));
}

const SubtypeGroup& find_group(const std::vector<SubtypeGroup>& groups, std::string_view name)
{
    for (const auto& g: groups)
        if (g.name == name)
            return g;
    throw Error(ErrorCode::UnknownLabel, fmt::format("no subtype group '{}'", name));
}

std::vector<Question> parse_questions(const std::string& text)
{
    std::vector<Question> out;
    for (const auto& [n, line]: numbered_lines(text))
    {
        if (skippable(line))
            continue;
        std::vector<std::string> fields;
        boost::algorithm::split(fields, line, boost::algorithm::is_any_of("\t"));
        if (fields.size() < 2 || fields.size() > 3)
            throw Error(ErrorCode::Parse, fmt::format("line {}: expected 2 or 3 tab-separated fields", n));
        Question q;
        q.text = boost::algorithm::trim_copy(fields[0]);
        boost::algorithm::split(q.options, fields[1], boost::algorithm::is_any_of("|"));
        for (auto& o: q.options)
        {
            boost::algorithm::trim(o);
            if (o.empty())
                throw Error(ErrorCode::Parse, fmt::format("line {}: empty option", n));
        }
        if (fields.size() == 3)
        {
            auto a = boost::algorithm::trim_copy(fields[2]);
            if (std::find(q.options.begin(), q.options.end(), a) == q.options.end())
                throw Error(ErrorCode::Parse, fmt::format("line {}: answer '{}' is not an option", n, a));
            q.answer = std::move(a);
        }
        out.push_back(std::move(q));
    }
    return out;
}

std::vector<Question> load_questions(const std::filesystem::path& path)
{
    return parse_questions(read_file(path));
}

std::vector<std::string> parse_exemplars(const std::string& text)
{
    std::vector<std::string> out;
    std::string current;
    bool leading = true;
    const auto flush = [&] {
        boost::algorithm::trim(current);
        if (!current.empty())
            out.push_back(current);
        current.clear();
    };
    for (const auto& [n, line]: numbered_lines(text))
    {
        if (leading && (line.empty() || line.front() == '#'))
            continue;
        leading = false;
        if (boost::algorithm::trim_copy(line) == "---")
        {
            flush();
            continue;
        }
        current += line;
        current += '\n';
    }
    flush();
    return out;
}

std::vector<std::string> load_exemplars(const std::filesystem::path& path)
{
    return parse_exemplars(read_file(path));
}

std::vector<SurvivalCase> parse_survival_table(const std::string& text)
{
    std::vector<SurvivalCase> out;
    for (const auto& [n, line]: numbered_lines(text))
    {
        if (skippable(line))
            continue;
        std::vector<std::string> fields;
        boost::algorithm::split(fields, line, boost::algorithm::is_any_of("\t"));
        if (fields.size() != 3)
            throw Error(ErrorCode::Parse, fmt::format("line {}: expected case_id, months, event", n));
        for (auto& f: fields)
            boost::algorithm::trim(f);
        SurvivalCase c;
        c.case_id = fields[0];
        const auto& m = fields[1];
        const auto [ptr, ec] = std::from_chars(m.data(), m.data() + m.size(), c.months);
        if (ec != std::errc() || ptr != m.data() + m.size() || !(c.months >= 0))
            throw Error(ErrorCode::Parse, fmt::format("line {}: bad months value '{}'", n, m));
        const auto ev = boost::algorithm::to_lower_copy(fields[2]);
        if (ev == "1" || ev == "true" || ev == "dead" || ev == "deceased")
            c.event = true;
        else if (ev == "0" || ev == "false" || ev == "alive" || ev == "living")
            c.event = false;
        else
            throw Error(ErrorCode::Parse, fmt::format("line {}: bad event flag '{}'", n, fields[2]));
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<SurvivalCase> load_survival_table(const std::filesystem::path& path)
{
    return parse_survival_table(read_file(path));
}

} // namespace pathnav::tasks
