// SPDX-License-Identifier: Apache-2.0
#include "pathnav/policy/decision.hpp"

#include "pathnav/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <vector>

namespace pathnav::policy
{

namespace
{

constexpr std::string_view kTerminate = "TERMINATE";

struct Cursor
{
    std::string_view s;
    std::size_t pos = 0;

    void skip_ws() noexcept
    {
        while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t'))
            ++pos;
    }
    bool eat(char c) noexcept
    {
        skip_ws();
        if (pos < s.size() && s[pos] == c)
        {
            ++pos;
            return true;
        }
        return false;
    }
    bool eat_word(std::string_view w) noexcept
    {
        skip_ws();
        if (s.size() - pos < w.size())
            return false;
        for (std::size_t i = 0; i < w.size(); ++i)
            if (std::tolower(static_cast<unsigned char>(s[pos + i])) != w[i])
                return false;
        pos += w.size();
        return true;
    }
    std::optional<double> number() noexcept
    {
        skip_ws();
        std::size_t p = pos;
        if (p < s.size() && s[p] == '+')
            ++p;
        double v = 0;
        const auto [end, ec] = std::from_chars(s.data() + p, s.data() + s.size(), v, std::chars_format::general);
        if (ec != std::errc{} || end == s.data() + p)
            return std::nullopt;
        pos = static_cast<std::size_t>(end - s.data());
        return v;
    }
    std::optional<long long> integer() noexcept
    {
        skip_ws();
        std::size_t p = pos;
        if (p < s.size() && s[p] == '+')
            ++p;
        long long v = 0;
        const auto [end, ec] = std::from_chars(s.data() + p, s.data() + s.size(), v);
        if (ec != std::errc{} || end == s.data() + p)
            return std::nullopt;
        pos = static_cast<std::size_t>(end - s.data());
        return v;
    }
};

struct CoordLine
{
    std::size_t line = 0;
    std::size_t start = 0; // offset of "<<" within the line
    double x = 0;
    double y = 0;
    long long level = 0;
    std::optional<double> confidence;
};

std::optional<CoordLine> parse_coord_at(std::string_view line, std::size_t start)
{
    Cursor c{line, start + 2};
    CoordLine out;
    out.start = start;
    if (!c.eat_word("x") || !c.eat('='))
        return std::nullopt;
    auto x = c.number();
    if (!x || !c.eat(',') || !c.eat_word("y") || !c.eat('='))
        return std::nullopt;
    auto y = c.number();
    if (!y || !c.eat(',') || !c.eat_word("level") || !c.eat('='))
        return std::nullopt;
    auto level = c.integer();
    if (!level)
        return std::nullopt;
    if (c.eat(','))
    {
        if (!c.eat_word("confidence") || !c.eat('='))
            return std::nullopt;
        out.confidence = c.number();
        if (!out.confidence)
            return std::nullopt;
    }
    if (!c.eat('>') || c.pos >= line.size() || line[c.pos] != '>')
        return std::nullopt;
    ++c.pos;
    out.x = *x;
    out.y = *y;
    out.level = *level;

    // same-line suffix: ">> confidence=0.83"
    Cursor tail = c;
    tail.eat(',') || tail.eat(';');
    if (!out.confidence && tail.eat_word("confidence") && (tail.eat('=') || tail.eat(':')))
        out.confidence = tail.number();
    return out;
}

bool word_char(char ch) noexcept
{
    return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_';
}

std::optional<std::size_t> find_terminate(std::string_view s) noexcept
{
    for (auto p = s.find(kTerminate); p != std::string_view::npos; p = s.find(kTerminate, p + 1))
    {
        const bool left = p == 0 || !word_char(s[p - 1]);
        const auto after = p + kTerminate.size();
        const bool right = after >= s.size() || !word_char(s[after]);
        if (left && right)
            return p;
    }
    return std::nullopt;
}

std::string_view trim(std::string_view s) noexcept
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

std::string clean_justification(std::string_view s)
{
    s = trim(s);
    while (s.size() >= 1 && (s.front() == '"' || s.front() == '\'' || s.front() == '`'))
        s = trim(s.substr(1));
    while (s.size() >= 1 && (s.back() == '"' || s.back() == '\'' || s.back() == '`'))
        s = trim(s.substr(0, s.size() - 1));
    return std::string(s);
}

bool is_fence(std::string_view line) noexcept
{
    const auto t = trim(line);
    return t.empty() || t.starts_with("```");
}

std::vector<std::string_view> split_lines(std::string_view text)
{
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size())
    {
        auto nl = text.find('\n', start);
        if (nl == std::string_view::npos)
            nl = text.size();
        auto line = text.substr(start, nl - start);
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        lines.push_back(line);
        start = nl + 1;
    }
    return lines;
}

std::string justification_before(const std::vector<std::string_view>& lines, std::size_t line, std::string_view same_line)
{
    auto j = clean_justification(same_line);
    if (!j.empty())
        return j;
    for (std::size_t i = line; i-- > 0;)
    {
        if (is_fence(lines[i]))
            continue;
        j = clean_justification(lines[i]);
        if (!j.empty())
            return j;
    }
    return std::string(kNoJustification);
}

std::string strip_terminate(std::string_view line)
{
    std::string out(line);
    if (auto p = find_terminate(out))
        out.erase(*p, kTerminate.size());
    auto t = clean_justification(out);
    while (!t.empty() && (t.back() == '.' || t.back() == '!' || std::isspace(static_cast<unsigned char>(t.back()))))
        t.pop_back();
    return clean_justification(t);
}

} // namespace

double stop_probability(const Decision& d) noexcept
{
    if (d.terminate)
        return 1.0;
    return d.stop_confidence.value_or(0.0);
}

Decision parse_decision(std::string_view response)
{
    const auto lines = split_lines(response);
    std::optional<CoordLine> last;
    for (std::size_t i = 0; i < lines.size(); ++i)
        for (auto p = lines[i].find("<<"); p != std::string_view::npos; p = lines[i].find("<<", p + 1))
            if (auto c = parse_coord_at(lines[i], p))
            {
                c->line = i;
                last = c;
            }

    std::optional<std::size_t> term_line;
    for (std::size_t i = 0; i < lines.size(); ++i)
        if (find_terminate(lines[i]))
            term_line = i;

    Decision d;
    if (!last && !term_line)
        throw Error(ErrorCode::Grammar, "no <<x=..., y=..., level=...>> line and no TERMINATE");

    if (last)
    {
        if (!std::isfinite(last->x) || !std::isfinite(last->y) || last->x < 0 || last->x > 1 || last->y < 0 || last->y > 1)
            throw Error(ErrorCode::Range, fmt::format("coordinate ({}, {}) outside [0,1]", last->x, last->y));
        if (last->level < 0 || last->level > std::numeric_limits<int>::max())
            throw Error(ErrorCode::Range, fmt::format("level {} out of range", last->level));
        if (last->confidence && (!std::isfinite(*last->confidence) || *last->confidence < 0 || *last->confidence > 1))
            throw Error(ErrorCode::Range, fmt::format("confidence {} outside [0,1]", *last->confidence));
        d.point = {last->x, last->y};
        d.level = static_cast<int>(last->level);
        d.stop_confidence = last->confidence;
        d.has_point = true;
        auto before = lines[last->line].substr(0, last->start);
        if (find_terminate(before))
            d.justification = strip_terminate(before);
        else
            d.justification = justification_before(lines, last->line, before);
        if (d.justification.empty() || find_terminate(d.justification))
        {
            auto s = strip_terminate(d.justification);
            d.justification = s.empty() ? std::string(kNoJustification) : s;
        }
    }
    else
    {
        d.has_point = false;
        auto own = strip_terminate(lines[*term_line]);
        d.justification = own.empty() ? justification_before(lines, *term_line, {}) : own;
        if (find_terminate(d.justification))
        {
            auto s = strip_terminate(d.justification);
            d.justification = s.empty() ? std::string(kNoJustification) : s;
        }
    }
    d.terminate = term_line.has_value();
    return d;
}

std::string format_decision(const Decision& d)
{
    std::string just = d.justification.empty() ? std::string(kNoJustification) : d.justification;
    std::replace(just.begin(), just.end(), '\n', ' ');
    std::string out = just;
    if (d.has_point)
    {
        out += fmt::format("\n<<x={:.4f}, y={:.4f}, level={}", d.point.x, d.point.y, d.level);
        if (d.stop_confidence)
            out += fmt::format(", confidence={:.4f}", *d.stop_confidence);
        out += ">>";
    }
    if (d.terminate)
        out += "\nTERMINATE";
    return out;
}

SnapResult snap_to_candidates(Decision& d, std::span<const slide::NormPoint> candidates, double delta)
{
    if (candidates.empty())
        throw Error(ErrorCode::Precondition, "no candidates to snap to");
    SnapResult best;
    best.distance = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < candidates.size(); ++i)
    {
        const double dist = slide::distance(d.point, candidates[i]);
        if (dist < best.distance)
        {
            best.distance = dist;
            best.index = i;
        }
    }
    if (best.distance > delta)
        throw Error(ErrorCode::OffCandidate,
                    fmt::format("({:.4f}, {:.4f}) is {:.4f} from the nearest candidate (delta {})", d.point.x, d.point.y,
                                best.distance, delta));
    best.kind = best.distance <= delta / 2 ? SnapKind::Echo : SnapKind::Snapped;
    d.point = candidates[best.index];
    return best;
}

} // namespace pathnav::policy
