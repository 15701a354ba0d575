// SPDX-License-Identifier: Apache-2.0
#include "pathnav/tasks/records.hpp"

#include "pathnav/error.hpp"
#include "pathnav/fileio.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <sstream>

namespace pathnav::tasks
{

using nlohmann::json;

std::string predictions_jsonl(const std::vector<PredictionRecord>& records)
{
    std::string out;
    for (const auto& r: records)
    {
        json j = {{"case_id", r.case_id},     {"task", to_string(r.task)},   {"method", r.method},
                  {"predicted", r.predicted}, {"ground_truth", r.ground_truth}, {"evidence", r.evidence},
                  {"raw_response", r.raw_response}};
        if (!r.error.empty())
            j["error"] = r.error;
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::vector<PredictionRecord> parse_predictions_jsonl(const std::string& text)
{
    std::vector<PredictionRecord> out;
    std::istringstream in(text);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line))
    {
        ++n;
        if (line.empty())
            continue;
        try
        {
            const auto j = json::parse(line);
            PredictionRecord r;
            r.case_id = j.at("case_id").get<std::string>();
            r.task = task_kind_from_string(j.at("task").get<std::string>());
            r.method = j.value("method", std::string());
            r.predicted = j.at("predicted").get<std::vector<std::string>>();
            r.ground_truth = j.value("ground_truth", std::vector<std::string>{});
            r.evidence = j.value("evidence", std::vector<std::string>{});
            r.raw_response = j.value("raw_response", std::string());
            r.error = j.value("error", std::string());
            out.push_back(std::move(r));
        }
        catch (const json::exception& e)
        {
            throw Error(ErrorCode::Parse, fmt::format("line {}: {}", n, e.what()));
        }
        catch (const Error& e)
        {
            throw Error(ErrorCode::Parse, fmt::format("line {}: {}", n, e.what()));
        }
    }
    return out;
}

void write_predictions(const std::filesystem::path& path, const std::vector<PredictionRecord>& records)
{
    write_file_atomic(path, predictions_jsonl(records));
}

std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path)
{
    return parse_predictions_jsonl(read_file(path));
}

} // namespace pathnav::tasks
