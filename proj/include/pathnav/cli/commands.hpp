// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pathnav/cli/config.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pathnav::cli
{

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitConfig = 2;

struct SlideOutcome
{
    std::string slide_id;
    std::filesystem::path slide_path;
    bool ok = false;
    std::string error;
    std::string termination;
    std::size_t rounds = 0;
    /// Relative to the output directory.
    std::string trajectory;
    std::string trajectory_sha256;
};

struct RunReport
{
    std::string command;
    std::vector<SlideOutcome> slides;
    [[nodiscard]] int exit_code() const noexcept;
};

enum class BaselineKind
{
    Majority,
    SingleTurn,
};

/// Runs the agent on every slide of the store and writes, under cfg.output:
///   manifest.json, trajectories/<id>.jsonl, patches/<id>/<patch>.png, overlays/<id>.png
/// A failing slide is reported in the manifest; the others still complete.
/// Throws Config for an unusable configuration.
[[nodiscard]] RunReport cmd_navigate(const RunConfig& cfg);
/// Same artifacts for a baseline. Majority: random_K (or matched_m) disjoint
/// random tiles. SingleTurn: one-shot picks by the configured policy.
[[nodiscard]] RunReport cmd_baseline(const RunConfig& cfg, BaselineKind which);

enum class EvidenceSelection
{
    Single,
    Multi,
    Majority,
};

[[nodiscard]] EvidenceSelection evidence_from_string(std::string_view s);

struct TaskOptions
{
    std::filesystem::path task_file;
    /// Output directory of a navigate or baseline run.
    std::filesystem::path run_dir;
    /// Optional case_id<TAB>value[|value...] ground truth. Without it,
    /// subtyping uses the synthetic sidecar, question tasks the reference
    /// answers in the question file, survival the survival table.
    std::filesystem::path truth;
    std::filesystem::path survival;
    EvidenceSelection evidence = EvidenceSelection::Multi;
    int k = 3;
    /// Defaults to "<run policy>/<evidence>".
    std::string method;
    /// "chat" (cache + endpoint from the environment) or "scripted".
    std::string llm = "chat";
    std::filesystem::path script;
    std::string model;
    std::filesystem::path cache;
    std::filesystem::path output;
};

/// Writes <output>/predictions.jsonl and <output>/manifest.json.
/// Returns kExitPartial when some cases failed.
[[nodiscard]] int cmd_task(const TaskOptions& opts);

struct EvaluateOptions
{
    std::vector<std::filesystem::path> predictions;
    /// case_id<TAB>months<TAB>event; required for survival records.
    std::filesystem::path survival;
    /// Methods to compare with a paired t-test.
    std::optional<std::pair<std::string, std::string>> pair;
    std::filesystem::path output;
    int bootstrap = 1000;
    double level = 0.95;
    std::uint64_t seed = 0;
};

/// Writes <output>/metrics.csv (task,method,metric,value,ci_lower,ci_upper,n)
/// and <output>/km/<method>__<group>.csv for survival records. Throws
/// LengthMismatch when case ids do not join (empty input included).
void cmd_evaluate(const EvaluateOptions& opts);

struct GenerateOptions
{
    std::filesystem::path output;
    int count = 5;
    std::uint64_t seed = 0;
    std::uint32_t width = 16384;
    std::uint32_t height = 12288;
    /// Subtype file and group naming the lesion labels; the slide's label
    /// cycles through them.
    std::filesystem::path subtypes;
    std::string group = "SYNTH3";
    double lesion_fraction = 0.02;
};

/// Writes slide_NNN.pyr + sidecars and labels.tsv (case_id<TAB>label).
void cmd_generate_slides(const GenerateOptions& opts);

struct HeadsOptions
{
    std::filesystem::path train;
    std::filesystem::path test;
    /// case_id<TAB>label for every case in both files.
    std::filesystem::path labels;
    int k = 10;
    double C_reg = 1.0;
    std::filesystem::path output;
    int bootstrap = 1000;
    std::uint64_t seed = 0;
};

/// Writes <output>/heads.csv with k-NN and logistic AUROC/accuracy rows.
void cmd_heads(const HeadsOptions& opts);

[[nodiscard]] nlohmann::json cache_inspect(const std::filesystem::path& cache);
void cache_freeze(const std::filesystem::path& cache);

/// case_id<TAB>value[|value...]; '#' lines skipped. Throws Parse.
[[nodiscard]] std::vector<std::pair<std::string, std::vector<std::string>>> load_truth_table(
    const std::filesystem::path& path);

} // namespace pathnav::cli
