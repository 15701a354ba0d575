// SPDX-License-Identifier: Apache-2.0
#include "pathnav/nav/trajectory_io.hpp"

#include "pathnav/error.hpp"
#include "pathnav/fileio.hpp"

#include <fmt/format.h>

#include <sstream>

namespace pathnav::nav
{

using nlohmann::json;

json to_json(const NavConfig& cfg)
{
    return {{"K", cfg.K},
            {"delta", cfg.delta},
            {"T", cfg.T},
            {"proposal_rounds", cfg.proposal_rounds},
            {"tau_stop", cfg.tau_stop},
            {"roi_size", cfg.roi_size},
            {"seed", cfg.seed},
            {"anchor", cfg.anchor == slide::Anchor::Center ? "center" : "top-left"},
            {"thumbnail_max_edge", cfg.thumbnail_max_edge},
            {"wall_clock", cfg.wall_clock}};
}

NavConfig nav_config_from_json(const json& j)
{
    NavConfig cfg;
    if (j.is_null())
        return cfg;
    if (!j.is_object())
        throw Error(ErrorCode::Config, "nav config must be an object");
    try
    {
        cfg.K = j.value("K", cfg.K);
        cfg.delta = j.value("delta", cfg.delta);
        cfg.T = j.value("T", cfg.T);
        cfg.proposal_rounds = j.value("proposal_rounds", cfg.proposal_rounds);
        cfg.tau_stop = j.value("tau_stop", cfg.tau_stop);
        cfg.roi_size = j.value("roi_size", cfg.roi_size);
        cfg.seed = j.value("seed", cfg.seed);
        cfg.thumbnail_max_edge = j.value("thumbnail_max_edge", cfg.thumbnail_max_edge);
        cfg.wall_clock = j.value("wall_clock", cfg.wall_clock);
        const auto anchor = j.value("anchor", std::string("center"));
        if (anchor == "center")
            cfg.anchor = slide::Anchor::Center;
        else if (anchor == "top-left")
            cfg.anchor = slide::Anchor::TopLeft;
        else
            throw Error(ErrorCode::Config, fmt::format("anchor must be center or top-left, got '{}'", anchor));
    }
    catch (const json::exception& e)
    {
        throw Error(ErrorCode::Config, fmt::format("nav config: {}", e.what()));
    }
    return cfg;
}

std::string trajectory_jsonl(const Trajectory& traj)
{
    std::string out;
    json head = {{"type", "run"},
                 {"slide_id", traj.slide_id},
                 {"task", traj.task},
                 {"policy", traj.policy},
                 {"termination", to_string(traj.reason)},
                 {"error", traj.error},
                 {"rounds", traj.records.size()},
                 {"config", to_json(traj.config)}};
    out += head.dump();
    out += '\n';
    for (const auto& r: traj.records)
    {
        json rec = {{"type", "roi"},
                    {"slide_id", traj.slide_id},
                    {"round", r.round},
                    {"x", r.region.center.x},
                    {"y", r.region.center.y},
                    {"level", r.region.level},
                    {"size", r.region.size},
                    {"justification", r.justification},
                    {"stop_confidence", r.stop_confidence},
                    {"timestamp", r.timestamp},
                    {"patch", r.patch_id},
                    {"revisit", r.revisit},
                    {"off_tissue", r.off_tissue}};
        out += rec.dump();
        out += '\n';
    }
    return out;
}

Trajectory parse_trajectory_jsonl(const std::string& text)
{
    Trajectory traj;
    std::istringstream in(text);
    std::string line;
    bool have_head = false;
    std::size_t lineno = 0;
    try
    {
        while (std::getline(in, line))
        {
            ++lineno;
            if (line.empty())
                continue;
            const auto j = json::parse(line);
            const auto type = j.at("type").get<std::string>();
            if (type == "run")
            {
                traj.slide_id = j.at("slide_id").get<std::string>();
                traj.task = j.at("task").get<std::string>();
                traj.policy = j.at("policy").get<std::string>();
                traj.reason = termination_from_string(j.at("termination").get<std::string>());
                traj.error = j.value("error", std::string());
                traj.config = nav_config_from_json(j.at("config"));
                have_head = true;
            }
            else if (type == "roi")
            {
                RoiRecord r;
                r.round = j.at("round").get<int>();
                r.region.center = {j.at("x").get<double>(), j.at("y").get<double>()};
                r.region.level = j.at("level").get<int>();
                r.region.size = j.at("size").get<int>();
                r.justification = j.at("justification").get<std::string>();
                r.stop_confidence = j.at("stop_confidence").get<double>();
                r.timestamp = j.at("timestamp").get<std::string>();
                r.patch_id = j.at("patch").get<std::string>();
                r.revisit = j.value("revisit", false);
                r.off_tissue = j.value("off_tissue", false);
                traj.records.push_back(std::move(r));
            }
            else
            {
                throw Error(ErrorCode::Parse, fmt::format("line {}: unknown record type '{}'", lineno, type));
            }
        }
    }
    catch (const json::exception& e)
    {
        throw Error(ErrorCode::Parse, fmt::format("line {}: {}", lineno, e.what()));
    }
    if (!have_head)
        throw Error(ErrorCode::Parse, "trajectory has no run header");
    return traj;
}

void write_trajectory(const std::filesystem::path& path, const Trajectory& traj)
{
    write_file_atomic(path, trajectory_jsonl(traj));
}

Trajectory read_trajectory(const std::filesystem::path& path)
{
    return parse_trajectory_jsonl(read_file(path));
}

void write_patches(const std::filesystem::path& dir, const Trajectory& traj)
{
    std::filesystem::create_directories(dir);
    for (const auto& r: traj.records)
        if (r.patch)
            write_png(dir / (r.patch_id + ".png"), *r.patch);
}

} // namespace pathnav::nav
