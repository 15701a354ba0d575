// SPDX-License-Identifier: Apache-2.0
#include "pathnav/policy/policy.hpp"

#include "pathnav/error.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

namespace pathnav::policy
{

ChatPolicy::ChatPolicy(std::shared_ptr<ChatClient> client, ChatPolicyOptions options)
    : _client(std::move(client)), _options(std::move(options))
{
    if (!_client)
        throw Error(ErrorCode::Precondition, "chat policy needs a client");
}

Decision ChatPolicy::decide(const AgentView& view)
{
    const auto bundle = build_round_prompt(view, {}, {_options.roi_size, _options.anchor});
    auto request = make_request(bundle, _options.model);
    auto reply = _client->complete(request);
    Decision d;
    try
    {
        d = parse_decision(reply);
    }
    catch (const Error& e)
    {
        if (e.code() != ErrorCode::Grammar)
            throw;
        request.messages.push_back({"assistant", reply, {}});
        request.messages.push_back({"user", format_reminder(), {}});
        reply = _client->complete(request);
        d = parse_decision(reply);
    }
    if (view.candidates && !d.terminate)
        (void)snap_to_candidates(d, *view.candidates, _options.delta);
    _last_response = reply;
    return d;
}

OraclePolicy::OraclePolicy(const slide::PyramidSlide& slide, slide::GroundTruth truth, OracleOptions options)
    : _slide(slide), _truth(std::move(truth)), _options(options)
{
    if (_truth.lesions.empty())
        throw Error(ErrorCode::Precondition, "oracle policy needs at least one lesion");
}

Decision OraclePolicy::decide(const AgentView& view)
{
    Decision d;
    d.level = _options.level;
    if (!view.prior_patches.empty())
    {
        const auto& last = view.prior_patches.back().region;
        for (const auto& les: _truth.lesions)
            if (slide::lesion_overlap_fraction(_slide, last, les, _options.anchor) >= _options.overlap_threshold)
            {
                d.terminate = true;
                d.has_point = false;
                d.justification = fmt::format("The last region covers the {} lesion.", les.label);
                return d;
            }
    }

    if (view.candidates)
    {
        const auto& cands = *view.candidates;
        if (cands.empty())
            throw Error(ErrorCode::Precondition, "empty candidate list");
        double best = std::numeric_limits<double>::infinity();
        std::size_t pick = 0;
        for (std::size_t i = 0; i < cands.size(); ++i)
            for (const auto& les: _truth.lesions)
            {
                const double dist = slide::distance(cands[i], les.rect.center());
                if (dist < best)
                {
                    best = dist;
                    pick = i;
                }
            }
        d.point = cands[pick];
        d.justification = fmt::format("Candidate {} is the closest to a lesion.", pick + 1);
        return d;
    }

    const slide::NormPoint from = view.prior_patches.empty() ? slide::NormPoint{0.5, 0.5}
                                                             : view.prior_patches.back().region.center;
    const slide::Lesion* target = nullptr;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& les: _truth.lesions)
    {
        const auto c = les.rect.center();
        const double dist = slide::distance(from, c);
        bool better = dist < best;
        if (!better && dist == best && target)
        {
            const auto t = target->rect.center();
            better = c.y < t.y || (c.y == t.y && c.x < t.x);
        }
        if (better)
        {
            best = dist;
            target = &les;
        }
    }
    d.point = target->rect.center();
    d.justification = fmt::format("Moving to the center of the {} lesion.", target->label);
    return d;
}

ScriptedPolicy::ScriptedPolicy(std::vector<std::string> replies, double delta) : _replies(std::move(replies)), _delta(delta)
{
}

Decision ScriptedPolicy::decide(const AgentView& view)
{
    if (_next >= _replies.size())
        throw Error(ErrorCode::Precondition, fmt::format("script exhausted after {} replies", _replies.size()));
    auto d = parse_decision(_replies[_next++]);
    if (view.candidates && !d.terminate)
        (void)snap_to_candidates(d, *view.candidates, _delta);
    return d;
}

MockPolicy::MockPolicy(MockPolicyOptions options) : _options(options), _rng(make_rng(options.seed, "mock-policy")) {}

Decision MockPolicy::decide(const AgentView& view)
{
    Decision d;
    d.level = _options.max_level > 0
                  ? static_cast<int>(uniform_index(_rng, static_cast<std::uint64_t>(std::min(_options.max_level, view.max_level)) + 1))
                  : 0;
    if (view.candidates && !view.candidates->empty())
        d.point = (*view.candidates)[uniform_index(_rng, view.candidates->size())];
    else
        d.point = {uniform01(_rng), uniform01(_rng)};
    if (uniform01(_rng) < _options.confidence_probability)
        d.stop_confidence = uniform01(_rng);
    if (uniform01(_rng) < _options.terminate_probability)
    {
        d.terminate = true;
        d.has_point = false;
    }
    d.justification = fmt::format("Random pick for round {}.", view.round);
    return d;
}

} // namespace pathnav::policy
