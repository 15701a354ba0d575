// SPDX-License-Identifier: Apache-2.0
// pathnav: navigation, baselines, tasks and evaluation from the command line.
#include "pathnav/cli/commands.hpp"
#include "pathnav/error.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <iostream>

namespace fs = std::filesystem;
using namespace pathnav;
using namespace pathnav::cli;

namespace
{

/// Flags that override values from --config.
struct Overrides
{
    fs::path config;
    fs::path slides;
    fs::path task;
    fs::path output;
    fs::path cache;
    std::string policy;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<int> matched_m;
};

void add_run_flags(CLI::App* cmd, Overrides& o)
{
    cmd->add_option("-c,--config", o.config, "JSON run config or a previous manifest.json");
    cmd->add_option("--slides", o.slides, "Slide store (.pyr file or directory)");
    cmd->add_option("--task", o.task, "Task definition file");
    cmd->add_option("-o,--output", o.output, "Output directory");
    cmd->add_option("--cache", o.cache, "Response cache (JSONL)");
    cmd->add_option("--policy", o.policy, "chat, mock, oracle or scripted");
    cmd->add_option("--seed", o.seed, "Run seed");
    cmd->add_option("--workers", o.workers, "Slides processed in parallel");
}

RunConfig resolve(const Overrides& o)
{
    RunConfig cfg = o.config.empty() ? RunConfig{} : load_run_config(o.config);
    if (!o.slides.empty())
        cfg.slide_store = o.slides;
    if (!o.task.empty())
        cfg.task_file = o.task;
    if (!o.output.empty())
        cfg.output = o.output;
    if (!o.cache.empty())
        cfg.cache = o.cache;
    if (!o.policy.empty())
        cfg.policy.kind = policy_kind_from_string(o.policy);
    if (o.seed)
    {
        cfg.seed = *o.seed;
        cfg.nav.seed = *o.seed;
        cfg.baseline.seed = *o.seed;
    }
    if (o.workers)
        cfg.workers = *o.workers;
    if (o.matched_m)
        cfg.baseline.matched_m = *o.matched_m;
    return cfg;
}

int report(const RunReport& r)
{
    std::size_t failed = 0;
    for (const auto& s: r.slides)
        if (!s.ok)
        {
            ++failed;
            std::cerr << s.slide_id << ": " << s.error << "\n";
        }
    std::cout << r.command << ": " << r.slides.size() - failed << "/" << r.slides.size() << " slide(s) ok\n";
    return r.exit_code();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Agentic region-of-interest navigation over pyramid slides"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string log_level = "info";
    app.add_option("--log-level", log_level, "trace, debug, info, warn, error, off");

    Overrides nav_o;
    auto* navigate = app.add_subcommand("navigate", "Run the navigation agent on every slide");
    add_run_flags(navigate, nav_o);

    Overrides base_o;
    std::string which = "majority";
    auto* baseline = app.add_subcommand("baseline", "Run the majority (random tiles) or single-turn baseline");
    add_run_flags(baseline, base_o);
    baseline->add_option("which", which, "majority or single-turn")->check(CLI::IsMember({"majority", "single-turn"}));
    baseline->add_option("--matched-m", base_o.matched_m, "Emit exactly m regions");

    TaskOptions task_o;
    std::string evidence = "multi";
    auto* task = app.add_subcommand("task", "Answer a downstream task from a run's evidence");
    task->add_option("--task", task_o.task_file, "Task definition file")->required();
    task->add_option("--run", task_o.run_dir, "Output directory of navigate/baseline")->required();
    task->add_option("-o,--output", task_o.output, "Output directory")->required();
    task->add_option("--truth", task_o.truth, "case_id<TAB>value[|value...] ground truth");
    task->add_option("--survival", task_o.survival, "case_id<TAB>months<TAB>event table");
    task->add_option("--evidence", evidence, "single, multi or majority");
    task->add_option("-k", task_o.k, "Regions used in multi mode");
    task->add_option("--method", task_o.method, "Method name recorded with each prediction");
    task->add_option("--llm", task_o.llm, "chat or scripted");
    task->add_option("--script", task_o.script, "JSON array of replies for --llm scripted");
    task->add_option("--model", task_o.model, "Model name (default PATHNAV_LLM_MODEL)");
    task->add_option("--cache", task_o.cache, "Response cache (JSONL)");

    EvaluateOptions eval_o;
    std::string pair;
    auto* evaluate = app.add_subcommand("evaluate", "Metrics with bootstrap CIs from prediction files");
    evaluate->add_option("predictions", eval_o.predictions, "predictions.jsonl files")->required();
    evaluate->add_option("-o,--output", eval_o.output, "Output directory")->required();
    evaluate->add_option("--survival", eval_o.survival, "case_id<TAB>months<TAB>event table");
    evaluate->add_option("--pair", pair, "Paired t-test between two methods: A,B");
    evaluate->add_option("--bootstrap", eval_o.bootstrap, "Bootstrap resamples");
    evaluate->add_option("--level", eval_o.level, "Confidence level");
    evaluate->add_option("--seed", eval_o.seed, "Bootstrap seed");

    GenerateOptions gen_o;
    auto* generate = app.add_subcommand("generate-slides", "Write seeded synthetic slides with planted lesions");
    generate->add_option("-o,--output", gen_o.output, "Output directory")->required();
    generate->add_option("-n,--count", gen_o.count, "Number of slides");
    generate->add_option("--seed", gen_o.seed, "Generation seed");
    generate->add_option("--width", gen_o.width, "Level-0 width");
    generate->add_option("--height", gen_o.height, "Level-0 height");
    generate->add_option("--subtypes", gen_o.subtypes, "Subtype definition file")->required();
    generate->add_option("--group", gen_o.group, "Subtype group providing the lesion labels");
    generate->add_option("--lesion-fraction", gen_o.lesion_fraction, "Lesion area as a fraction of tissue");

    HeadsOptions heads_o;
    auto* heads = app.add_subcommand("heads", "k-NN and logistic heads over EMB1 embeddings");
    heads->add_option("--train", heads_o.train, "Training embeddings (EMB1)")->required();
    heads->add_option("--test", heads_o.test, "Test embeddings (EMB1)")->required();
    heads->add_option("--labels", heads_o.labels, "case_id<TAB>label for both splits")->required();
    heads->add_option("-k", heads_o.k, "Neighbours");
    heads->add_option("--C", heads_o.C_reg, "Inverse regularization strength");
    heads->add_option("-o,--output", heads_o.output, "Output directory")->required();
    heads->add_option("--seed", heads_o.seed, "Bootstrap seed");

    fs::path cache_path;
    auto* cache = app.add_subcommand("cache", "Inspect or freeze a response cache");
    cache->require_subcommand(1);
    auto* inspect = cache->add_subcommand("inspect", "Entry count, frozen flag and digest");
    inspect->add_option("path", cache_path, "Cache file")->required();
    auto* freeze = cache->add_subcommand("freeze", "Mark the cache read-only");
    freeze->add_option("path", cache_path, "Cache file")->required();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }
    spdlog::set_default_logger(spdlog::stderr_color_mt("pathnav"));
    spdlog::set_level(spdlog::level::from_str(log_level));

    try
    {
        if (*navigate)
            return report(cmd_navigate(resolve(nav_o)));
        if (*baseline)
            return report(cmd_baseline(resolve(base_o),
                                       which == "majority" ? BaselineKind::Majority : BaselineKind::SingleTurn));
        if (*task)
        {
            task_o.evidence = evidence_from_string(evidence);
            return cmd_task(task_o);
        }
        if (*evaluate)
        {
            if (!pair.empty())
            {
                const auto comma = pair.find(',');
                if (comma == std::string::npos)
                    throw Error(ErrorCode::Config, "--pair expects A,B");
                eval_o.pair = {pair.substr(0, comma), pair.substr(comma + 1)};
            }
            cmd_evaluate(eval_o);
            std::cout << "wrote " << (eval_o.output / "metrics.csv").string() << "\n";
            return kExitOk;
        }
        if (*generate)
        {
            cmd_generate_slides(gen_o);
            return kExitOk;
        }
        if (*heads)
        {
            cmd_heads(heads_o);
            std::cout << "wrote " << (heads_o.output / "heads.csv").string() << "\n";
            return kExitOk;
        }
        if (*inspect)
        {
            std::cout << cache_inspect(cache_path).dump(2) << "\n";
            return kExitOk;
        }
        if (*freeze)
        {
            cache_freeze(cache_path);
            return kExitOk;
        }
    }
    catch (const Error& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.code())
        {
        case ErrorCode::Config:
        case ErrorCode::LengthMismatch:
        case ErrorCode::Parse:
            return kExitConfig;
        default:
            return kExitPartial;
        }
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPartial;
    }
    return kExitOk;
}
