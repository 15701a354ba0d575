// SPDX-License-Identifier: Apache-2.0
#include "pathnav/cli/commands.hpp"

#include "pathnav/crypto.hpp"
#include "pathnav/error.hpp"
#include "pathnav/fileio.hpp"
#include "pathnav/nav/trajectory_io.hpp"
#include "pathnav/rng.hpp"
#include "pathnav/tasks/prompts.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <atomic>
#include <functional>
#include <thread>

namespace pathnav::cli
{

namespace fs = std::filesystem;
using nlohmann::json;

int RunReport::exit_code() const noexcept
{
    for (const auto& s: slides)
        if (!s.ok)
            return kExitPartial;
    return kExitOk;
}

namespace
{

/// Runs fn(i) for i in [0, n) on up to `workers` threads.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn)
{
    const auto threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), n);
    if (threads <= 1)
    {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++)
                fn(i);
        });
    for (auto& th: pool)
        th.join();
}

/// Shared chat plumbing; each slide wraps it in its own CachingChatClient.
struct ChatBackend
{
    std::shared_ptr<policy::ResponseCache> cache;
    std::shared_ptr<policy::ChatClient> upstream;
    std::string model;
};

ChatBackend make_chat_backend(const fs::path& cache_path, const std::string& model)
{
    ChatBackend b;
    b.cache = std::make_shared<policy::ResponseCache>(cache_path);
    auto opts = policy::http_options_from_env();
    b.model = model.empty() ? opts.model : model;
    if (!opts.endpoint.empty())
    {
        if (!b.cache->frozen())
        {
            opts.model = b.model;
            b.upstream = std::make_shared<policy::HttpChatClient>(opts);
        }
    }
    else if (b.cache->size() == 0)
    {
        throw Error(ErrorCode::Config, "chat needs PATHNAV_LLM_ENDPOINT (and PATHNAV_LLM_MODEL, PATHNAV_LLM_API_KEY) "
                                       "or a populated response cache; none is available");
    }
    return b;
}

std::vector<std::string> load_script(const fs::path& path)
{
    try
    {
        return json::parse(read_file(path)).get<std::vector<std::string>>();
    }
    catch (const json::exception& e)
    {
        throw Error(ErrorCode::Config, fmt::format("{}: expected a JSON array of strings ({})", path.string(), e.what()));
    }
}

std::unique_ptr<policy::Policy> make_policy(const RunConfig& cfg, const ChatBackend* chat,
                                            const std::vector<std::string>& script, const slide::PyramidSlide& slide,
                                            const fs::path& slide_path, std::uint64_t seed)
{
    switch (cfg.policy.kind)
    {
    case PolicyKind::Chat:
    {
        auto client = std::make_shared<policy::CachingChatClient>(chat->cache, chat->upstream);
        return std::make_unique<policy::ChatPolicy>(
            client, policy::ChatPolicyOptions{chat->model, cfg.nav.roi_size, cfg.nav.delta, cfg.nav.anchor});
    }
    case PolicyKind::Mock:
    {
        auto o = cfg.policy.mock;
        o.seed = derive_seed(seed, "mock");
        return std::make_unique<policy::MockPolicy>(o);
    }
    case PolicyKind::Oracle:
        return std::make_unique<policy::OraclePolicy>(slide, slide::read_ground_truth(slide::truth_path_for(slide_path)),
                                                      cfg.policy.oracle);
    case PolicyKind::Scripted:
        return std::make_unique<policy::ScriptedPolicy>(script, cfg.nav.delta);
    }
    throw Error(ErrorCode::Config, "unknown policy");
}

std::string navigation_query_for(const RunConfig& cfg)
{
    if (cfg.task_file.empty())
        return cfg.query;
    return tasks::navigation_query(load_task_file(cfg.task_file).spec);
}

void write_slide_artifacts(const fs::path& out, const slide::PyramidSlide& slide, const nav::Trajectory& traj,
                           const RunConfig& cfg, SlideOutcome& outcome)
{
    const auto rel = fs::path("trajectories") / (slide.id() + ".jsonl");
    const auto text = nav::trajectory_jsonl(traj);
    write_file_atomic(out / rel, text);
    outcome.trajectory = rel.generic_string();
    outcome.trajectory_sha256 = sha256_hex(text);
    nav::write_patches(out / "patches" / slide.id(), traj);
    std::vector<slide::RegionSpec> regions;
    for (const auto& r: traj.records)
        regions.push_back(r.region);
    const auto overlay = slide::render_thumbnail(slide, cfg.nav.thumbnail_max_edge, regions);
    const auto png = encode_png(overlay);
    write_file_atomic(out / "overlays" / (slide.id() + ".png"), std::span<const std::uint8_t>(png));
}

json outcome_json(const SlideOutcome& s)
{
    return {{"slide_id", s.slide_id},     {"slide_path", s.slide_path.string()},
            {"status", s.ok ? "ok" : "failed"}, {"error", s.error},
            {"termination", s.termination}, {"rounds", s.rounds},
            {"trajectory", s.trajectory}, {"trajectory_sha256", s.trajectory_sha256}};
}

void write_manifest(const RunConfig& cfg, const RunReport& report, const std::string& extra_key, const json& extra)
{
    json m = {{"tool", "pathnav"},
              {"version", kToolVersion},
              {"command", report.command},
              {"config", to_json(cfg)},
              {"seed", cfg.seed}};
    m["cache_sha256"] = cfg.cache.empty() ? "" : policy::ResponseCache(cfg.cache).file_digest();
    if (!extra_key.empty())
        m[extra_key] = extra;
    json slides = json::array();
    for (const auto& s: report.slides)
        slides.push_back(outcome_json(s));
    m["slides"] = slides;
    write_file_atomic(cfg.output / "manifest.json", m.dump(2) + "\n");
}

using Runner = std::function<nav::Trajectory(const slide::PyramidSlide&, const fs::path&, const nav::NavConfig&,
                                              std::uint64_t)>;

RunReport run_over_slides(const RunConfig& cfg, const std::string& command, const Runner& runner)
{
    validate(cfg);
    const auto paths = list_slides(cfg.slide_store);
    if (paths.empty())
        throw Error(ErrorCode::Config, fmt::format("no .pyr slides in '{}'", cfg.slide_store.string()));
    fs::create_directories(cfg.output);

    RunReport report;
    report.command = command;
    report.slides.resize(paths.size());
    parallel_for(paths.size(), cfg.workers, [&](std::size_t i) {
        auto& outcome = report.slides[i];
        outcome.slide_path = paths[i];
        outcome.slide_id = paths[i].stem().string();
        try
        {
            const auto slide = slide::open_slide(paths[i]);
            auto nav_cfg = cfg.nav;
            const auto seed = slide_seed(cfg.nav.seed, slide.id());
            nav_cfg.seed = seed;
            const auto traj = runner(slide, paths[i], nav_cfg, seed);
            outcome.termination = std::string(nav::to_string(traj.reason));
            outcome.rounds = traj.records.size();
            outcome.error = traj.error;
            outcome.ok = traj.reason != nav::Termination::Error;
            write_slide_artifacts(cfg.output, slide, traj, cfg, outcome);
            spdlog::info("{}: {} after {} region(s)", slide.id(), outcome.termination, outcome.rounds);
        }
        catch (const std::exception& e)
        {
            outcome.ok = false;
            outcome.error = e.what();
            spdlog::error("{}: {}", outcome.slide_id, e.what());
        }
    });
    return report;
}

} // namespace

RunReport cmd_navigate(const RunConfig& cfg)
{
    validate(cfg);
    const auto query = navigation_query_for(cfg);
    std::optional<ChatBackend> chat;
    if (cfg.policy.kind == PolicyKind::Chat)
        chat = make_chat_backend(cfg.cache, cfg.policy.model);
    const auto script = cfg.policy.kind == PolicyKind::Scripted ? load_script(cfg.policy.script)
                                                                 : std::vector<std::string>{};
    auto report = run_over_slides(cfg, "navigate", [&](const slide::PyramidSlide& slide, const fs::path& path,
                                                       const nav::NavConfig& nav_cfg, std::uint64_t seed) {
        auto policy = make_policy(cfg, chat ? &*chat : nullptr, script, slide, path, seed);
        return nav::run_navigation(slide, query, *policy, nav_cfg);
    });
    write_manifest(cfg, report, "query", query);
    return report;
}

RunReport cmd_baseline(const RunConfig& cfg, BaselineKind which)
{
    validate(cfg);
    const auto query = navigation_query_for(cfg);
    std::optional<ChatBackend> chat;
    if (which == BaselineKind::SingleTurn && cfg.policy.kind == PolicyKind::Chat)
        chat = make_chat_backend(cfg.cache, cfg.policy.model);
    const auto script = which == BaselineKind::SingleTurn && cfg.policy.kind == PolicyKind::Scripted
                            ? load_script(cfg.policy.script)
                            : std::vector<std::string>{};
    const auto name = which == BaselineKind::Majority ? "baseline majority" : "baseline single-turn";
    auto report = run_over_slides(cfg, name, [&](const slide::PyramidSlide& slide, const fs::path& path,
                                                 const nav::NavConfig& nav_cfg, std::uint64_t seed) {
        auto b = cfg.baseline;
        b.seed = seed;
        if (which == BaselineKind::Majority)
            return baselines::run_random_baseline(slide, query, b, nav_cfg);
        auto policy = make_policy(cfg, chat ? &*chat : nullptr, script, slide, path, seed);
        return baselines::run_single_turn_baseline(slide, query, *policy, b, nav_cfg);
    });
    write_manifest(cfg, report, "query", query);
    return report;
}

void cmd_generate_slides(const GenerateOptions& opts)
{
    if (opts.count < 1)
        throw Error(ErrorCode::Config, "count must be >= 1");
    std::vector<std::string> labels;
    if (opts.subtypes.empty())
        throw Error(ErrorCode::Config, "a subtype file is required");
    const auto groups = tasks::load_subtype_groups(opts.subtypes);
    for (const auto& l: tasks::find_group(groups, opts.group).labels)
        labels.push_back(l.label);
    fs::create_directories(opts.output);
    std::string table = "# case_id\tlabel\n";
    for (int i = 0; i < opts.count; ++i)
    {
        const auto id = fmt::format("slide_{:03d}", i);
        const auto seed = derive_seed(opts.seed, "synthetic/" + id);
        const auto& label = labels[static_cast<std::size_t>(i) % labels.size()];
        const auto spec = slide::random_spec(seed, opts.width, opts.height, labels, label, opts.lesion_fraction);
        (void)slide::generate_synthetic_slide(spec, opts.output / (id + ".pyr"));
        table += fmt::format("{}\t{}\n", id, label);
        spdlog::info("wrote {} ({})", id, label);
    }
    write_file_atomic(opts.output / "labels.tsv", table);
}

json cache_inspect(const fs::path& cache)
{
    if (!fs::exists(cache))
        throw Error(ErrorCode::Config, fmt::format("no cache at '{}'", cache.string()));
    const policy::ResponseCache c(cache);
    return {{"path", cache.string()}, {"entries", c.size()}, {"frozen", c.frozen()}, {"sha256", c.file_digest()}};
}

void cache_freeze(const fs::path& cache)
{
    if (!fs::exists(cache))
        throw Error(ErrorCode::Config, fmt::format("no cache at '{}'", cache.string()));
    policy::ResponseCache c(cache);
    c.freeze();
}

} // namespace pathnav::cli
