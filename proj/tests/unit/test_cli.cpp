#include "pathnav/cli/commands.hpp"
#include "pathnav/cli/config.hpp"
#include "pathnav/metrics/classification.hpp"
#include "pathnav/metrics/survival.hpp"
#include "pathnav/nav/trajectory_io.hpp"
#include "pathnav/policy/chat.hpp"
#include "pathnav/tasks/records.hpp"

#include "../support/mock_llm_server.hpp"
#include "test_support.hpp"

#include <doctest.h>
#include <fmt/format.h>

#include <cstdlib>
#include <map>
#include <sstream>

using namespace pathnav;
using namespace pathnav::cli;
using pathnav::test::code_of;
using pathnav::test::read_file;
using pathnav::test::TempDir;
using pathnav::test::write_file;
namespace fs = std::filesystem;

namespace
{

const fs::path kSource = PATHNAV_SOURCE_DIR;

void make_slides(const fs::path& dir, int count, std::uint64_t seed, std::uint32_t w = 8192, std::uint32_t h = 6144)
{
    GenerateOptions g;
    g.output = dir;
    g.count = count;
    g.seed = seed;
    g.width = w;
    g.height = h;
    g.subtypes = kSource / "data" / "synthetic_subtypes.txt";
    cmd_generate_slides(g);
}

RunConfig oracle_config(const fs::path& store, const fs::path& out, std::uint64_t seed = 7)
{
    RunConfig cfg;
    cfg.slide_store = store;
    cfg.output = out;
    cfg.seed = seed;
    cfg.nav.seed = seed;
    cfg.policy.kind = PolicyKind::Oracle;
    return cfg;
}

/// metric -> value for one method of metrics.csv.
std::map<std::string, double> metric_values(const fs::path& csv, const std::string& method)
{
    std::map<std::string, double> out;
    std::istringstream in(read_file(csv));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line))
    {
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            f.push_back(cell);
        if (f.size() >= 4 && f[1] == method)
            out[f[2]] = std::stod(f[3]);
    }
    return out;
}

class ScopedEnv
{
public:
    ScopedEnv(const char* name, const std::string& value) : _name(name)
    {
        if (const char* old = std::getenv(name))
            _old = old;
        if (value.empty())
            ::unsetenv(name);
        else
            ::setenv(name, value.c_str(), 1);
    }
    ~ScopedEnv()
    {
        if (_old)
            ::setenv(_name, _old->c_str(), 1);
        else
            ::unsetenv(_name);
    }

private:
    const char* _name;
    std::optional<std::string> _old;
};

} // namespace

TEST_CASE("run config round-trips through JSON and manifests")
{
    TempDir tmp;
    RunConfig cfg = oracle_config(tmp / "store", tmp / "out", 42);
    cfg.policy.kind = PolicyKind::Mock;
    cfg.policy.mock.terminate_probability = 0.25;
    cfg.nav.K = 12;
    cfg.nav.delta = 0.02;
    cfg.baseline.matched_m = 4;
    cfg.workers = 3;

    const auto back = run_config_from_json(to_json(cfg));
    CHECK(to_json(back) == to_json(cfg));

    const nlohmann::json manifest = {{"tool", "pathnav"}, {"config", to_json(cfg)}};
    CHECK(to_json(run_config_from_json(manifest)) == to_json(cfg));

    SUBCASE("relative paths resolve against the config file")
    {
        write_file(tmp / "run.json", R"({"slide_store": "slides", "output": "o", "seed": 5})");
        const auto c = load_run_config(tmp / "run.json");
        CHECK(c.slide_store == tmp / "slides");
        CHECK(c.output == tmp / "o");
        CHECK(c.nav.seed == 5u);
    }
    SUBCASE("bad values are configuration errors")
    {
        CHECK(code_of([] { (void)run_config_from_json({{"policy", "telepathy"}}); }) == ErrorCode::Config);
        CHECK(code_of([] { (void)run_config_from_json({{"nav", {{"anchor", "corner"}}}}); }) == ErrorCode::Config);
        CHECK(code_of([] { (void)run_config_from_json(nlohmann::json::array()); }) == ErrorCode::Config);
        write_file(tmp / "broken.json", "{");
        CHECK(code_of([&] { (void)load_run_config(tmp / "broken.json"); }) == ErrorCode::Config);
        RunConfig missing = oracle_config(tmp / "nowhere", tmp / "out");
        CHECK(code_of([&] { validate(missing); }) == ErrorCode::Config);
    }
}

TEST_CASE("slide seeds depend on the run seed and the slide id only")
{
    CHECK(slide_seed(1, "a") == slide_seed(1, "a"));
    CHECK(slide_seed(1, "a") != slide_seed(1, "b"));
    CHECK(slide_seed(1, "a") != slide_seed(2, "a"));
}

TEST_CASE("navigate writes one bounded trajectory per slide and is reproducible")
{
    TempDir tmp;
    make_slides(tmp / "store", 5, 11);
    CHECK(list_slides(tmp / "store").size() == 5);

    const auto report = cmd_navigate(oracle_config(tmp / "store", tmp / "a"));
    CHECK(report.exit_code() == kExitOk);
    REQUIRE(report.slides.size() == 5);
    for (const auto& s: report.slides)
    {
        CAPTURE(s.slide_id);
        CHECK(s.ok);
        CHECK(s.rounds >= 1);
        CHECK(s.rounds <= 10);
        const auto traj = nav::read_trajectory(tmp / "a" / s.trajectory);
        CHECK(traj.records.size() == s.rounds);
        CHECK(nav::to_string(traj.reason) == s.termination);
        CHECK(fs::exists(tmp / "a" / "overlays" / (s.slide_id + ".png")));
        for (const auto& r: traj.records)
            CHECK(fs::exists(tmp / "a" / "patches" / s.slide_id / (r.patch_id + ".png")));
    }
    const auto manifest = nlohmann::json::parse(read_file(tmp / "a" / "manifest.json"));
    CHECK(manifest.at("command") == "navigate");
    CHECK(manifest.at("slides").size() == 5);

    auto again = oracle_config(tmp / "store", tmp / "b");
    again.workers = 3;
    const auto second = cmd_navigate(again);
    for (std::size_t i = 0; i < 5; ++i)
    {
        CHECK(second.slides[i].trajectory_sha256 == report.slides[i].trajectory_sha256);
        CHECK(read_file(tmp / "b" / second.slides[i].trajectory) == read_file(tmp / "a" / report.slides[i].trajectory));
    }

    SUBCASE("rerunning from the manifest reproduces the run")
    {
        auto cfg = load_run_config(tmp / "a" / "manifest.json");
        cfg.output = tmp / "c";
        const auto third = cmd_navigate(cfg);
        for (std::size_t i = 0; i < 5; ++i)
            CHECK(third.slides[i].trajectory_sha256 == report.slides[i].trajectory_sha256);
    }
}

TEST_CASE("a corrupt slide fails alone")
{
    TempDir tmp;
    make_slides(tmp / "store", 2, 3);
    write_file(tmp / "store" / "slide_000a.pyr", "not a pyramid");
    const auto report = cmd_navigate(oracle_config(tmp / "store", tmp / "out"));
    REQUIRE(report.slides.size() == 3);
    CHECK(report.exit_code() == kExitPartial);
    int failed = 0;
    for (const auto& s: report.slides)
    {
        if (s.slide_id == "slide_000a")
        {
            CHECK_FALSE(s.ok);
            CHECK_FALSE(s.error.empty());
            ++failed;
        }
        else
        {
            CHECK(s.ok);
        }
    }
    CHECK(failed == 1);
    const auto manifest = nlohmann::json::parse(read_file(tmp / "out" / "manifest.json"));
    CHECK(manifest.at("slides").size() == 3);
}

TEST_CASE("baselines emit the configured number of regions")
{
    TempDir tmp;
    make_slides(tmp / "store", 2, 5, 16384, 12288);

    const auto regions = [&](const RunReport& r) {
        std::vector<std::size_t> out;
        for (const auto& s: r.slides)
        {
            CHECK(s.ok);
            out.push_back(s.rounds);
        }
        return out;
    };

    auto cfg = oracle_config(tmp / "store", tmp / "maj");
    CHECK(regions(cmd_baseline(cfg, BaselineKind::Majority)) == std::vector<std::size_t>{21, 21});

    cfg.output = tmp / "maj3";
    cfg.baseline.matched_m = 3;
    CHECK(regions(cmd_baseline(cfg, BaselineKind::Majority)) == std::vector<std::size_t>{3, 3});

    cfg.output = tmp / "st3";
    CHECK(regions(cmd_baseline(cfg, BaselineKind::SingleTurn)) == std::vector<std::size_t>{3, 3});

    cfg.output = tmp / "st1";
    cfg.baseline.matched_m = 1;
    CHECK(regions(cmd_baseline(cfg, BaselineKind::SingleTurn)) == std::vector<std::size_t>{1, 1});

    cfg.output = tmp / "st1m";
    cfg.policy.kind = PolicyKind::Mock;
    cfg.policy.mock.terminate_probability = 0.0;
    CHECK(regions(cmd_baseline(cfg, BaselineKind::SingleTurn)) == std::vector<std::size_t>{1, 1});
}

TEST_CASE("chat policy without endpoint or cache is a configuration error")
{
    TempDir tmp;
    make_slides(tmp / "store", 1, 9);
    ScopedEnv endpoint("PATHNAV_LLM_ENDPOINT", "");
    auto cfg = oracle_config(tmp / "store", tmp / "out");
    cfg.policy.kind = PolicyKind::Chat;
    cfg.cache = tmp / "cache.jsonl";
    CHECK(code_of([&] { (void)cmd_navigate(cfg); }) == ErrorCode::Config);
    cfg.cache.clear();
    CHECK(code_of([&] { (void)cmd_navigate(cfg); }) == ErrorCode::Config);
}

TEST_CASE("evaluate subtyping agrees with the metric library")
{
    TempDir tmp;
    const std::vector<std::string> truth = {"A", "A", "B", "B", "C", "C", "A", "B"};
    const std::vector<std::string> m1 = {"A", "B", "B", "B", "C", "A", "A", "C"};
    const std::vector<std::string> m2 = {"A", "A", "B", "A", "C", "C", "B", "B"};
    std::vector<tasks::PredictionRecord> recs;
    for (std::size_t i = 0; i < truth.size(); ++i)
    {
        for (const auto& [method, preds]: {std::pair{"m1", &m1}, std::pair{"m2", &m2}})
        {
            tasks::PredictionRecord r;
            r.case_id = fmt::format("case{}", i);
            r.method = method;
            r.predicted = {(*preds)[i]};
            r.ground_truth = {truth[i]};
            recs.push_back(r);
        }
    }
    tasks::write_predictions(tmp / "p.jsonl", recs);

    EvaluateOptions opts;
    opts.predictions = {tmp / "p.jsonl"};
    opts.output = tmp / "eval";
    opts.bootstrap = 200;
    opts.pair = std::pair{std::string("m1"), std::string("m2")};
    cmd_evaluate(opts);

    const std::vector<std::string> classes = {"A", "B", "C"};
    const auto v1 = metric_values(tmp / "eval" / "metrics.csv", "m1");
    const auto v2 = metric_values(tmp / "eval" / "metrics.csv", "m2");
    CHECK(v1.at("accuracy") == doctest::Approx(metrics::accuracy(m1, truth)).epsilon(1e-9));
    CHECK(v1.at("macro_f1") == doctest::Approx(metrics::macro_f1(m1, truth, classes)).epsilon(1e-9));
    CHECK(v2.at("accuracy") == doctest::Approx(0.75).epsilon(1e-9));
    const auto csv = read_file(tmp / "eval" / "metrics.csv");
    CHECK(csv.find("paired_p") != std::string::npos);

    const auto first = csv;
    cmd_evaluate(opts);
    CHECK(read_file(tmp / "eval" / "metrics.csv") == first);

    SUBCASE("empty input is rejected")
    {
        write_file(tmp / "empty.jsonl", "");
        EvaluateOptions e;
        e.predictions = {tmp / "empty.jsonl"};
        e.output = tmp / "e";
        CHECK(code_of([&] { cmd_evaluate(e); }) == ErrorCode::LengthMismatch);
    }
}

TEST_CASE("evaluate survival writes a three-group log-rank and KM curves")
{
    TempDir tmp;
    std::string table;
    std::vector<tasks::PredictionRecord> recs;
    std::vector<std::vector<metrics::SurvivalRecord>> groups(3);
    for (int i = 0; i < 30; ++i)
    {
        const int level = i % 3;
        const double months = 5.0 + 7.0 * (2 - level) + (i * 37 % 11);
        const bool event = i % 4 != 0;
        table += fmt::format("c{}\t{}\t{}\n", i, months, event ? 1 : 0);
        tasks::PredictionRecord r;
        r.case_id = fmt::format("c{}", i);
        r.task = tasks::TaskKind::Survival;
        r.method = "agent";
        r.predicted = {std::to_string(level)};
        recs.push_back(r);
        groups[level].push_back({months, event, level});
    }
    write_file(tmp / "surv.tsv", table);
    tasks::write_predictions(tmp / "p.jsonl", recs);

    EvaluateOptions opts;
    opts.predictions = {tmp / "p.jsonl"};
    opts.survival = tmp / "surv.tsv";
    opts.output = tmp / "eval";
    cmd_evaluate(opts);

    const auto v = metric_values(tmp / "eval" / "metrics.csv", "agent");
    const auto lr = metrics::logrank_test(groups);
    CHECK(v.at("logrank_df") == 2.0);
    CHECK(v.at("logrank_chi2") == doctest::Approx(lr.chi_squared).epsilon(1e-9));
    CHECK(v.at("logrank_p") == doctest::Approx(lr.p_value).epsilon(1e-9));
    int curves = 0;
    for (const auto& e: fs::directory_iterator(tmp / "eval" / "km"))
        curves += e.path().extension() == ".csv";
    CHECK(curves == 3);

    SUBCASE("cases missing from the table do not join")
    {
        write_file(tmp / "short.tsv", "c0\t3\t1\n");
        opts.survival = tmp / "short.tsv";
        CHECK(code_of([&] { cmd_evaluate(opts); }) == ErrorCode::LengthMismatch);
    }
}

TEST_CASE("frozen cache replays navigation, task and metrics byte for byte")
{
    TempDir tmp;
    make_slides(tmp / "store", 3, 21);
    test::MockLlmServer server;
    const auto cache = tmp / "cache.jsonl";
    const auto task_file = kSource / "data" / "tasks" / "synth3_subtyping.json";

    const auto run = [&](const std::string& tag) {
        auto cfg = oracle_config(tmp / "store", tmp / ("nav_" + tag));
        cfg.policy.kind = PolicyKind::Chat;
        cfg.policy.model = "mock-model";
        cfg.cache = cache;
        cfg.task_file = task_file;
        const auto report = cmd_navigate(cfg);
        CHECK(report.exit_code() == kExitOk);

        TaskOptions t;
        t.task_file = task_file;
        t.run_dir = cfg.output;
        t.model = "mock-model";
        t.cache = cache;
        t.output = tmp / ("task_" + tag);
        CHECK(cmd_task(t) == kExitOk);

        EvaluateOptions e;
        e.predictions = {t.output / "predictions.jsonl"};
        e.output = tmp / ("eval_" + tag);
        e.bootstrap = 100;
        cmd_evaluate(e);
        return report;
    };

    RunReport live;
    {
        ScopedEnv endpoint("PATHNAV_LLM_ENDPOINT", server.endpoint());
        live = run("live");
    }
    const int calls = server.hits();
    CHECK(calls > 0);
    for (const auto& s: live.slides)
        CHECK(s.rounds <= 10);

    cache_freeze(cache);
    CHECK(cache_inspect(cache).at("frozen") == true);
    const auto digest = policy::ResponseCache(cache).file_digest();

    ScopedEnv endpoint("PATHNAV_LLM_ENDPOINT", server.endpoint());
    run("r1");
    run("r2");
    CHECK(server.hits() == calls);
    CHECK(policy::ResponseCache(cache).file_digest() == digest);

    for (const auto& s: live.slides)
    {
        const auto rel = fs::path("trajectories") / (s.slide_id + ".jsonl");
        const auto a = read_file(tmp / "nav_live" / rel);
        CHECK(read_file(tmp / "nav_r1" / rel) == a);
        CHECK(read_file(tmp / "nav_r2" / rel) == a);
    }
    CHECK(read_file(tmp / "task_r1" / "predictions.jsonl") == read_file(tmp / "task_r2" / "predictions.jsonl"));
    const auto m1 = read_file(tmp / "eval_r1" / "metrics.csv");
    CHECK_FALSE(m1.empty());
    CHECK(m1 == read_file(tmp / "eval_r2" / "metrics.csv"));
    CHECK(m1 == read_file(tmp / "eval_live" / "metrics.csv"));
}
