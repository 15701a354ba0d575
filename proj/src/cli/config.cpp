// SPDX-License-Identifier: Apache-2.0
#include "pathnav/cli/config.hpp"

#include "pathnav/error.hpp"
#include "pathnav/fileio.hpp"
#include "pathnav/nav/trajectory_io.hpp"
#include "pathnav/rng.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace pathnav::cli
{

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(PolicyKind k) noexcept
{
    switch (k)
    {
    case PolicyKind::Chat:
        return "chat";
    case PolicyKind::Mock:
        return "mock";
    case PolicyKind::Oracle:
        return "oracle";
    case PolicyKind::Scripted:
        return "scripted";
    }
    return "oracle";
}

PolicyKind policy_kind_from_string(std::string_view s)
{
    for (auto k: {PolicyKind::Chat, PolicyKind::Mock, PolicyKind::Oracle, PolicyKind::Scripted})
        if (to_string(k) == s)
            return k;
    throw Error(ErrorCode::Config, fmt::format("unknown policy '{}' (chat, mock, oracle, scripted)", s));
}

namespace
{

fs::path resolve(const fs::path& base, const std::string& p)
{
    if (p.empty())
        return {};
    const fs::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

json baseline_json(const baselines::BaselineConfig& b)
{
    json j = {{"random_K", b.random_K}, {"single_turn_K", b.single_turn_K}, {"class_order", b.class_order}};
    j["matched_m"] = b.matched_m ? json(*b.matched_m) : json(nullptr);
    return j;
}

} // namespace

TaskFile load_task_file(const fs::path& path)
{
    json j;
    try
    {
        j = json::parse(read_file(path));
    }
    catch (const json::exception& e)
    {
        throw Error(ErrorCode::Config, fmt::format("{}: {}", path.string(), e.what()));
    }
    const auto base = path.parent_path();
    TaskFile out;
    out.path = path;
    auto& spec = out.spec;
    try
    {
        spec.kind = tasks::task_kind_from_string(j.at("kind").get<std::string>());
        spec.cancer_type = j.value("cancer_type", std::string());
        if (j.contains("subtypes"))
        {
            const auto groups = tasks::load_subtype_groups(resolve(base, j.at("subtypes").get<std::string>()));
            const auto name = j.value("group", spec.cancer_type);
            const auto& g = tasks::find_group(groups, name);
            spec.labels = g.labels;
            if (spec.cancer_type.empty())
                spec.cancer_type = g.title;
        }
        if (j.contains("questions"))
            spec.questions = tasks::load_questions(resolve(base, j.at("questions").get<std::string>()));
        if (j.contains("exemplars"))
            spec.report_exemplars = tasks::load_exemplars(resolve(base, j.at("exemplars").get<std::string>()));
        for (const auto& r: j.value("risk_exemplars", json::array()))
            spec.risk_exemplars.push_back(
                {std::make_shared<const Image>(read_png(resolve(base, r.at("patch").get<std::string>()))),
                 tasks::risk_level(r.at("level").get<int>())});
    }
    catch (const json::exception& e)
    {
        throw Error(ErrorCode::Config, fmt::format("{}: {}", path.string(), e.what()));
    }
    try
    {
        tasks::validate(spec);
    }
    catch (const Error& e)
    {
        throw Error(ErrorCode::Config, fmt::format("{}: {}", path.string(), e.what()));
    }
    return out;
}

json to_json(const RunConfig& cfg)
{
    json policy = {{"kind", to_string(cfg.policy.kind)},
                   {"model", cfg.policy.model},
                   {"script", cfg.policy.script.string()},
                   {"mock",
                    {{"terminate_probability", cfg.policy.mock.terminate_probability},
                     {"confidence_probability", cfg.policy.mock.confidence_probability},
                     {"max_level", cfg.policy.mock.max_level}}},
                   {"oracle",
                    {{"level", cfg.policy.oracle.level}, {"overlap_threshold", cfg.policy.oracle.overlap_threshold}}}};
    return {{"slide_store", cfg.slide_store.string()},
            {"task_file", cfg.task_file.string()},
            {"query", cfg.query},
            {"policy", policy},
            {"nav", nav::to_json(cfg.nav)},
            {"baseline", baseline_json(cfg.baseline)},
            {"output", cfg.output.string()},
            {"cache", cfg.cache.string()},
            {"seed", cfg.seed},
            {"workers", cfg.workers}};
}

RunConfig run_config_from_json(const json& input, const fs::path& base)
{
    const json& j = input.contains("config") && input.at("config").is_object() ? input.at("config") : input;
    if (!j.is_object())
        throw Error(ErrorCode::Config, "config must be a JSON object");
    RunConfig cfg;
    try
    {
        cfg.slide_store = resolve(base, j.value("slide_store", std::string()));
        cfg.task_file = resolve(base, j.value("task_file", std::string()));
        cfg.query = j.value("query", cfg.query);
        cfg.output = resolve(base, j.value("output", cfg.output.string()));
        cfg.cache = resolve(base, j.value("cache", std::string()));
        cfg.seed = j.value("seed", cfg.seed);
        cfg.workers = j.value("workers", cfg.workers);

        const auto& p = j.contains("policy") ? j.at("policy") : json::object();
        if (p.is_string())
            cfg.policy.kind = policy_kind_from_string(p.get<std::string>());
        else
        {
            cfg.policy.kind = policy_kind_from_string(p.value("kind", std::string("oracle")));
            cfg.policy.model = p.value("model", std::string());
            cfg.policy.script = resolve(base, p.value("script", std::string()));
            if (p.contains("mock"))
            {
                const auto& m = p.at("mock");
                cfg.policy.mock.terminate_probability =
                    m.value("terminate_probability", cfg.policy.mock.terminate_probability);
                cfg.policy.mock.confidence_probability =
                    m.value("confidence_probability", cfg.policy.mock.confidence_probability);
                cfg.policy.mock.max_level = m.value("max_level", cfg.policy.mock.max_level);
            }
            if (p.contains("oracle"))
            {
                const auto& o = p.at("oracle");
                cfg.policy.oracle.level = o.value("level", cfg.policy.oracle.level);
                cfg.policy.oracle.overlap_threshold = o.value("overlap_threshold", cfg.policy.oracle.overlap_threshold);
            }
        }

        cfg.nav = nav::nav_config_from_json(j.contains("nav") ? j.at("nav") : json());
        if (!j.contains("nav") || !j.at("nav").contains("seed"))
            cfg.nav.seed = cfg.seed;
        cfg.policy.oracle.anchor = cfg.nav.anchor;

        if (j.contains("baseline"))
        {
            const auto& b = j.at("baseline");
            cfg.baseline.random_K = b.value("random_K", cfg.baseline.random_K);
            cfg.baseline.single_turn_K = b.value("single_turn_K", cfg.baseline.single_turn_K);
            if (b.contains("matched_m") && !b.at("matched_m").is_null())
                cfg.baseline.matched_m = b.at("matched_m").get<int>();
            cfg.baseline.class_order = b.value("class_order", cfg.baseline.class_order);
        }
        cfg.baseline.seed = cfg.seed;
    }
    catch (const json::exception& e)
    {
        throw Error(ErrorCode::Config, fmt::format("config: {}", e.what()));
    }
    return cfg;
}

RunConfig load_run_config(const fs::path& path)
{
    json j;
    try
    {
        j = json::parse(read_file(path));
    }
    catch (const json::exception& e)
    {
        throw Error(ErrorCode::Config, fmt::format("{}: {}", path.string(), e.what()));
    }
    catch (const Error& e)
    {
        throw Error(ErrorCode::Config, e.what());
    }
    // a manifest already holds resolved paths
    const bool manifest = j.contains("config");
    return run_config_from_json(j, manifest ? fs::path() : path.parent_path());
}

void validate(const RunConfig& cfg)
{
    if (cfg.slide_store.empty() || !fs::exists(cfg.slide_store))
        throw Error(ErrorCode::Config, fmt::format("slide store '{}' does not exist", cfg.slide_store.string()));
    if (!cfg.task_file.empty() && !fs::exists(cfg.task_file))
        throw Error(ErrorCode::Config, fmt::format("task file '{}' does not exist", cfg.task_file.string()));
    if (cfg.policy.kind == PolicyKind::Scripted && !fs::exists(cfg.policy.script))
        throw Error(ErrorCode::Config, fmt::format("policy script '{}' does not exist", cfg.policy.script.string()));
    if (cfg.workers < 1)
        throw Error(ErrorCode::Config, "workers must be >= 1");
    if (cfg.output.empty())
        throw Error(ErrorCode::Config, "output directory is required");
    nav::validate(cfg.nav);
    baselines::validate(cfg.baseline);
}

std::vector<fs::path> list_slides(const fs::path& store)
{
    std::vector<fs::path> out;
    if (fs::is_regular_file(store))
        return {store};
    if (!fs::is_directory(store))
        throw Error(ErrorCode::Config, fmt::format("slide store '{}' is neither a file nor a directory", store.string()));
    for (const auto& e: fs::directory_iterator(store))
        if (e.is_regular_file() && e.path().extension() == ".pyr")
            out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

std::uint64_t slide_seed(std::uint64_t seed, const std::string& slide_id) noexcept
{
    return derive_seed(seed, "slide/" + slide_id);
}

} // namespace pathnav::cli
