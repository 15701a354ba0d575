// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pathnav/policy/chat.hpp"
#include "pathnav/policy/decision.hpp"
#include "pathnav/policy/prompts.hpp"
#include "pathnav/rng.hpp"
#include "pathnav/slide/synthetic.hpp"

#include <memory>
#include <string>
#include <vector>

namespace pathnav::policy
{

class Policy
{
public:
    virtual ~Policy() = default;
    /// Proposal-round decisions must land on a listed candidate.
    virtual Decision decide(const AgentView& view) = 0;
    [[nodiscard]] virtual std::string name() const = 0;
};

struct ChatPolicyOptions
{
    std::string model;
    int roi_size = 1024;
    double delta = 0.01;
    slide::Anchor anchor = slide::Anchor::Center;
};

/// Prompt-programmed policy over a chat endpoint. One retry with a format
/// reminder on a grammar error; proposal-round replies are snapped onto the
/// candidate list.
class ChatPolicy final : public Policy
{
public:
    ChatPolicy(std::shared_ptr<ChatClient> client, ChatPolicyOptions options);
    Decision decide(const AgentView& view) override;
    [[nodiscard]] std::string name() const override { return "chat"; }

    /// Raw text of the last accepted reply.
    [[nodiscard]] const std::string& last_response() const noexcept { return _last_response; }

private:
    std::shared_ptr<ChatClient> _client;
    ChatPolicyOptions _options;
    std::string _last_response;
};

struct OracleOptions
{
    int level = 0;
    double overlap_threshold = 0.5;
    slide::Anchor anchor = slide::Anchor::Center;
};

/// Reads the planted lesions. Proposal rounds: candidate nearest any lesion
/// center. Free rounds: the lesion center nearest the last ROI (ties: lower
/// y, then lower x). Stops once the last ROI covers a lesion by the threshold.
class OraclePolicy final : public Policy
{
public:
    OraclePolicy(const slide::PyramidSlide& slide, slide::GroundTruth truth, OracleOptions options = {});
    Decision decide(const AgentView& view) override;
    [[nodiscard]] std::string name() const override { return "oracle"; }

private:
    const slide::PyramidSlide& _slide;
    slide::GroundTruth _truth;
    OracleOptions _options;
};

/// Replays stored reply texts through the parser, one per call.
class ScriptedPolicy final : public Policy
{
public:
    ScriptedPolicy(std::vector<std::string> replies, double delta = 0.01);
    Decision decide(const AgentView& view) override;
    [[nodiscard]] std::string name() const override { return "scripted"; }

private:
    std::vector<std::string> _replies;
    double _delta;
    std::size_t _next = 0;
};

struct MockPolicyOptions
{
    std::uint64_t seed = 0;
    double terminate_probability = 0.15;
    /// Chance of attaching a uniform random confidence to a decision.
    double confidence_probability = 0.2;
    int max_level = 0;
};

/// Seeded random decisions for loop and harness tests.
class MockPolicy final : public Policy
{
public:
    explicit MockPolicy(MockPolicyOptions options);
    Decision decide(const AgentView& view) override;
    [[nodiscard]] std::string name() const override { return "mock"; }

private:
    MockPolicyOptions _options;
    Rng _rng;
};

} // namespace pathnav::policy
