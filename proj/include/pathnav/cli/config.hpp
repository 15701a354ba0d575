// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pathnav/baselines/baselines.hpp"
#include "pathnav/nav/agent.hpp"
#include "pathnav/policy/policy.hpp"
#include "pathnav/tasks/task_spec.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace pathnav::cli
{

inline constexpr std::string_view kToolVersion = "0.3.0";

enum class PolicyKind
{
    Chat,
    Mock,
    Oracle,
    Scripted,
};

[[nodiscard]] std::string_view to_string(PolicyKind k) noexcept;
/// Throws Config for unknown names.
[[nodiscard]] PolicyKind policy_kind_from_string(std::string_view s);

struct PolicyConfig
{
    PolicyKind kind = PolicyKind::Oracle;
    /// Chat: model name; PATHNAV_LLM_MODEL when empty.
    std::string model;
    /// Scripted: JSON array of reply strings, replayed per slide.
    std::filesystem::path script;
    policy::MockPolicyOptions mock;
    policy::OracleOptions oracle;
};

/// Task definition file (JSON). Paths inside are relative to the file.
///   {"kind": "subtyping", "cancer_type": "SYNTH3",
///    "subtypes": "subtypes.txt", "group": "SYNTH3",
///    "questions": "q.tsv", "exemplars": "reports.txt",
///    "risk_exemplars": [{"patch": "low.png", "level": 0}, ...]}
struct TaskFile
{
    tasks::TaskSpec spec;
    std::filesystem::path path;
};

/// Throws Config on a malformed file; loader errors propagate.
[[nodiscard]] TaskFile load_task_file(const std::filesystem::path& path);

struct RunConfig
{
    /// A directory of .pyr files or a single .pyr file.
    std::filesystem::path slide_store;
    std::filesystem::path task_file;
    /// Navigation query when no task file is given.
    std::string query = "Locate the region most informative for the diagnosis.";
    PolicyConfig policy;
    nav::NavConfig nav;
    baselines::BaselineConfig baseline;
    std::filesystem::path output = "out";
    /// Response cache (JSONL). Empty: in-memory only.
    std::filesystem::path cache;
    std::uint64_t seed = 0;
    int workers = 1;
};

[[nodiscard]] nlohmann::json to_json(const RunConfig& cfg);
/// Accepts a bare config or a manifest (whose "config" member is used).
/// Relative paths resolve against `base`. Throws Config.
[[nodiscard]] RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base = {});
[[nodiscard]] RunConfig load_run_config(const std::filesystem::path& path);

/// Throws Config when referenced paths are missing or values are out of range.
void validate(const RunConfig& cfg);

/// Slide files of the store, sorted by name.
[[nodiscard]] std::vector<std::filesystem::path> list_slides(const std::filesystem::path& store);

/// Per-slide seed: derive_seed(run seed, "slide/<id>").
[[nodiscard]] std::uint64_t slide_seed(std::uint64_t seed, const std::string& slide_id) noexcept;

} // namespace pathnav::cli
