// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pathnav/nav/agent.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace pathnav::nav
{

[[nodiscard]] nlohmann::json to_json(const NavConfig& cfg);
/// Missing keys keep their defaults; wrong types raise Config.
[[nodiscard]] NavConfig nav_config_from_json(const nlohmann::json& j);

/// First line: run header (slide, task, policy, termination, config).
/// Then one line per RoiRecord.
[[nodiscard]] std::string trajectory_jsonl(const Trajectory& traj);
[[nodiscard]] Trajectory parse_trajectory_jsonl(const std::string& text);

void write_trajectory(const std::filesystem::path& path, const Trajectory& traj);
[[nodiscard]] Trajectory read_trajectory(const std::filesystem::path& path);

/// Writes `<dir>/<patch_id>.png` for every record holding a raster.
void write_patches(const std::filesystem::path& dir, const Trajectory& traj);

} // namespace pathnav::nav
