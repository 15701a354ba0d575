// SPDX-License-Identifier: Apache-2.0
#include "pathnav/cli/commands.hpp"

#include "pathnav/baselines/baselines.hpp"
#include "pathnav/error.hpp"
#include "pathnav/fileio.hpp"
#include "pathnav/nav/trajectory_io.hpp"
#include "pathnav/tasks/records.hpp"
#include "pathnav/tasks/runners.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <map>
#include <sstream>

namespace pathnav::cli
{

namespace fs = std::filesystem;
using nlohmann::json;
using tasks::TaskKind;

EvidenceSelection evidence_from_string(std::string_view s)
{
    if (s == "single")
        return EvidenceSelection::Single;
    if (s == "multi")
        return EvidenceSelection::Multi;
    if (s == "majority")
        return EvidenceSelection::Majority;
    throw Error(ErrorCode::Config, fmt::format("unknown evidence mode '{}' (single, multi, majority)", s));
}

namespace
{

std::string_view to_string(EvidenceSelection e) noexcept
{
    switch (e)
    {
    case EvidenceSelection::Single:
        return "single";
    case EvidenceSelection::Multi:
        return "multi";
    case EvidenceSelection::Majority:
        return "majority";
    }
    return "multi";
}

std::string unescape(const std::string& s)
{
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i)
    {
        if (s[i] == '\\' && i + 1 < s.size() && (s[i + 1] == 'n' || s[i + 1] == 't' || s[i + 1] == '\\'))
        {
            out += s[i + 1] == 'n' ? '\n' : s[i + 1] == 't' ? '\t' : '\\';
            ++i;
        }
        else
            out += s[i];
    }
    return out;
}

struct CaseInput
{
    std::string slide_id;
    fs::path slide_path;
    nav::Trajectory trajectory;
};

std::vector<CaseInput> load_run(const fs::path& run_dir)
{
    json manifest;
    try
    {
        manifest = json::parse(read_file(run_dir / "manifest.json"));
    }
    catch (const std::exception& e)
    {
        throw Error(ErrorCode::Config, fmt::format("{} is not a run directory: {}", run_dir.string(), e.what()));
    }
    std::vector<CaseInput> out;
    for (const auto& s: manifest.at("slides"))
    {
        if (s.at("trajectory").get<std::string>().empty())
            continue;
        CaseInput c;
        c.slide_id = s.at("slide_id").get<std::string>();
        c.slide_path = s.at("slide_path").get<std::string>();
        c.trajectory = nav::read_trajectory(run_dir / s.at("trajectory").get<std::string>());
        for (auto& r: c.trajectory.records)
        {
            const auto png = run_dir / "patches" / c.slide_id / (r.patch_id + ".png");
            if (fs::exists(png))
                r.patch = std::make_shared<const Image>(read_png(png));
        }
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<ImagePtr> images_of(const std::vector<nav::RoiRecord>& records)
{
    std::vector<ImagePtr> out;
    for (const auto& r: records)
    {
        if (!r.patch)
            throw Error(ErrorCode::Io, fmt::format("patch {} is missing from the run directory", r.patch_id));
        out.push_back(r.patch);
    }
    return out;
}

struct Prediction
{
    std::vector<std::string> values;
    std::string raw;
};

Prediction predict_once(const tasks::TaskSpec& spec, const std::vector<ImagePtr>& evidence, const tasks::Llm& llm)
{
    switch (spec.kind)
    {
    case TaskKind::Subtyping:
    {
        auto a = tasks::predict_subtype(evidence, spec, llm);
        return {{a.value}, a.raw};
    }
    case TaskKind::Vqa:
    {
        auto a = tasks::answer_vqa(evidence, spec, llm);
        return {a.value, a.raw};
    }
    case TaskKind::Report:
    {
        auto a = tasks::generate_report(evidence, spec, llm);
        return {{a.value}, a.raw};
    }
    case TaskKind::Checklist:
    {
        const auto report = tasks::generate_report(evidence, spec, llm);
        auto a = tasks::extract_checklist(report.value, spec.questions, llm);
        return {a.value, report.value};
    }
    case TaskKind::Survival:
    {
        auto a = tasks::predict_risk(evidence, spec, llm);
        return {{std::to_string(static_cast<int>(a.value))}, a.raw};
    }
    }
    throw Error(ErrorCode::Config, "unknown task");
}

/// One call per ROI, then a vote per answer slot.
Prediction predict_majority(const tasks::TaskSpec& spec, const std::vector<nav::RoiRecord>& records,
                            const tasks::Llm& llm)
{
    if (spec.kind == TaskKind::Report || spec.kind == TaskKind::Checklist)
        throw Error(ErrorCode::Config, "majority voting is defined for subtyping, vqa and survival only");
    std::vector<Prediction> per;
    for (const auto& r: records)
        per.push_back(predict_once(spec, images_of({r}), llm));
    const auto slots = per.front().values.size();
    Prediction out;
    for (std::size_t s = 0; s < slots; ++s)
    {
        std::vector<std::string> votes;
        for (const auto& p: per)
            votes.push_back(p.values.at(s));
        std::vector<std::string> order;
        if (spec.kind == TaskKind::Subtyping)
            for (const auto& l: spec.labels)
                order.push_back(l.label);
        else if (spec.kind == TaskKind::Vqa)
            order = spec.questions.at(s).options;
        else
            order = {"0", "1", "2"};
        out.values.push_back(baselines::majority_vote(votes, order));
    }
    for (const auto& p: per)
        out.raw += p.raw + "\n";
    return out;
}

} // namespace

std::vector<std::pair<std::string, std::vector<std::string>>> load_truth_table(const fs::path& path)
{
    std::istringstream in(read_file(path));
    std::vector<std::pair<std::string, std::vector<std::string>>> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line.front() == '#')
            continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0)
            throw Error(ErrorCode::Parse, fmt::format("{}:{}: expected case_id<TAB>value", path.string(), lineno));
        std::vector<std::string> values;
        std::string rest = line.substr(tab + 1);
        std::size_t start = 0;
        while (true)
        {
            const auto bar = rest.find('|', start);
            values.push_back(unescape(rest.substr(start, bar - start)));
            if (bar == std::string::npos)
                break;
            start = bar + 1;
        }
        out.emplace_back(line.substr(0, tab), std::move(values));
    }
    return out;
}

int cmd_task(const TaskOptions& opts)
{
    if (opts.task_file.empty() || !fs::exists(opts.task_file))
        throw Error(ErrorCode::Config, fmt::format("task file '{}' does not exist", opts.task_file.string()));
    if (opts.output.empty())
        throw Error(ErrorCode::Config, "output directory is required");
    if (opts.k < 1)
        throw Error(ErrorCode::Config, "k must be >= 1");
    const auto task = load_task_file(opts.task_file);
    const auto& spec = task.spec;
    const auto cases = load_run(opts.run_dir);

    std::map<std::string, std::vector<std::string>> truth;
    if (!opts.truth.empty())
        for (auto& [id, v]: load_truth_table(opts.truth))
            truth[id] = v;
    std::map<std::string, tasks::SurvivalCase> survival;
    if (!opts.survival.empty())
        for (const auto& s: tasks::load_survival_table(opts.survival))
            survival[s.case_id] = s;

    std::shared_ptr<policy::ResponseCache> cache;
    std::shared_ptr<policy::ChatClient> upstream;
    std::string model = opts.model;
    if (opts.llm == "scripted")
    {
        std::vector<std::string> replies;
        try
        {
            replies = json::parse(read_file(opts.script)).get<std::vector<std::string>>();
        }
        catch (const std::exception& e)
        {
            throw Error(ErrorCode::Config, fmt::format("script '{}': {}", opts.script.string(), e.what()));
        }
        upstream = std::make_shared<policy::MockChatClient>(std::move(replies));
        cache = std::make_shared<policy::ResponseCache>(opts.cache);
        if (model.empty())
            model = "scripted";
    }
    else if (opts.llm == "chat")
    {
        cache = std::make_shared<policy::ResponseCache>(opts.cache);
        auto http = policy::http_options_from_env();
        if (model.empty())
            model = http.model;
        if (!http.endpoint.empty() && !cache->frozen())
        {
            http.model = model;
            upstream = std::make_shared<policy::HttpChatClient>(http);
        }
        else if (http.endpoint.empty() && cache->size() == 0)
            throw Error(ErrorCode::Config, "chat needs PATHNAV_LLM_ENDPOINT or a populated response cache");
    }
    else
        throw Error(ErrorCode::Config, fmt::format("unknown llm '{}' (chat, scripted)", opts.llm));

    fs::create_directories(opts.output);
    std::vector<tasks::PredictionRecord> records;
    json case_log = json::array();
    int failures = 0;
    for (const auto& c: cases)
    {
        tasks::PredictionRecord rec;
        rec.case_id = c.slide_id;
        rec.task = spec.kind;
        rec.method = opts.method.empty() ? fmt::format("{}/{}", c.trajectory.policy, to_string(opts.evidence))
                                         : opts.method;

        if (auto it = truth.find(c.slide_id); it != truth.end())
            rec.ground_truth = it->second;
        else if (spec.kind == TaskKind::Subtyping && fs::exists(slide::truth_path_for(c.slide_path)))
        {
            const auto gt = slide::read_ground_truth(slide::truth_path_for(c.slide_path));
            if (!gt.lesions.empty())
                rec.ground_truth = {gt.lesions.front().label};
        }
        else if (spec.kind == TaskKind::Vqa || spec.kind == TaskKind::Checklist)
        {
            for (const auto& q: spec.questions)
                rec.ground_truth.push_back(q.answer.value_or(""));
        }
        else if (spec.kind == TaskKind::Survival)
        {
            if (auto s = survival.find(c.slide_id); s != survival.end())
                if (auto level = tasks::risk_from_survival_months(s->second.months, s->second.event))
                    rec.ground_truth = {std::to_string(static_cast<int>(*level))};
        }

        try
        {
            policy::CachingChatClient client(cache, upstream);
            const tasks::Llm llm{client, model};
            Prediction p;
            if (opts.evidence == EvidenceSelection::Majority)
            {
                if (c.trajectory.records.empty())
                    throw Error(ErrorCode::EmptyEvidence, "trajectory has no regions");
                p = predict_majority(spec, c.trajectory.records, llm);
                for (const auto& r: c.trajectory.records)
                    rec.evidence.push_back(r.patch_id);
            }
            else
            {
                const auto ev = nav::select_evidence(
                    c.trajectory, opts.evidence == EvidenceSelection::Single ? nav::EvidenceMode::Single
                                                                             : nav::EvidenceMode::Multi,
                    opts.k);
                for (const auto& r: ev)
                    rec.evidence.push_back(r.patch_id);
                p = predict_once(spec, images_of(ev), llm);
            }
            rec.predicted = std::move(p.values);
            rec.raw_response = std::move(p.raw);
            case_log.push_back({{"case_id", rec.case_id}, {"status", "ok"}});
        }
        catch (const Error& e)
        {
            ++failures;
            rec.error = e.what();
            case_log.push_back({{"case_id", rec.case_id}, {"status", "failed"}, {"error", rec.error}});
            spdlog::error("{}: {}", rec.case_id, e.what());
        }
        records.push_back(std::move(rec));
    }
    tasks::write_predictions(opts.output / "predictions.jsonl", records);
    json m = {{"tool", "pathnav"},
              {"version", kToolVersion},
              {"command", "task"},
              {"task_file", opts.task_file.string()},
              {"task", tasks::to_string(spec.kind)},
              {"run_dir", opts.run_dir.string()},
              {"evidence", to_string(opts.evidence)},
              {"k", opts.k},
              {"llm", opts.llm},
              {"model", model},
              {"cache_sha256", cache->file_digest()},
              {"cases", case_log}};
    write_file_atomic(opts.output / "manifest.json", m.dump(2) + "\n");
    return failures ? kExitPartial : kExitOk;
}

} // namespace pathnav::cli
