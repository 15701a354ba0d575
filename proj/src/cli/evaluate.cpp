// SPDX-License-Identifier: Apache-2.0
#include "pathnav/cli/commands.hpp"

#include "pathnav/error.hpp"
#include "pathnav/fileio.hpp"
#include "pathnav/heads/evaluate.hpp"
#include "pathnav/metrics/classification.hpp"
#include "pathnav/metrics/stats.hpp"
#include "pathnav/metrics/survival.hpp"
#include "pathnav/tasks/records.hpp"
#include "pathnav/tasks/runners.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <map>
#include <set>

namespace pathnav::cli
{

namespace fs = std::filesystem;
using tasks::PredictionRecord;
using tasks::TaskKind;

namespace
{

struct Row
{
    std::string task;
    std::string method;
    std::string metric;
    double value = 0;
    std::optional<double> lower;
    std::optional<double> upper;
    std::size_t n = 0;
};

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c: s)
    {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

std::string format_rows(const std::vector<Row>& rows)
{
    std::string out = "task,method,metric,value,ci_lower,ci_upper,n\n";
    const auto num = [](std::optional<double> v) { return v ? fmt::format("{:.10g}", *v) : std::string(); };
    for (const auto& r: rows)
        out += fmt::format("{},{},{},{:.10g},{},{},{}\n", csv_field(r.task), csv_field(r.method), csv_field(r.metric),
                           r.value, num(r.lower), num(r.upper), r.n);
    return out;
}

Row with_ci(std::string task, std::string method, std::string metric, std::size_t n,
            const metrics::IndexStatistic& stat, const EvaluateOptions& opts)
{
    auto rng = make_rng(opts.seed, fmt::format("bootstrap/{}/{}/{}", task, method, metric));
    const auto b = metrics::bootstrap_ci(n, stat, rng, opts.bootstrap, opts.level);
    return {std::move(task), std::move(method), std::move(metric), b.estimate, b.lower, b.upper, n};
}

std::vector<std::size_t> all_indices(std::size_t n)
{
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i)
        idx[i] = i;
    return idx;
}

/// Per-case score used for CIs and paired tests: exact match for scalar
/// tasks, fraction of matching slots for question tasks.
std::vector<double> case_scores(const std::vector<const PredictionRecord*>& recs)
{
    std::vector<double> out;
    for (const auto* r: recs)
    {
        if (!r->error.empty() || r->predicted.size() != r->ground_truth.size() || r->ground_truth.empty())
        {
            out.push_back(0.0);
            continue;
        }
        std::size_t hit = 0;
        for (std::size_t i = 0; i < r->predicted.size(); ++i)
            hit += r->predicted[i] == r->ground_truth[i];
        out.push_back(static_cast<double>(hit) / static_cast<double>(r->predicted.size()));
    }
    return out;
}

void subtyping_rows(const std::string& method, const std::vector<const PredictionRecord*>& recs,
                    const EvaluateOptions& opts, std::vector<Row>& rows)
{
    std::vector<std::string> pred, truth;
    std::set<std::string> gt_classes, all_classes;
    for (const auto* r: recs)
    {
        if (r->ground_truth.size() != 1)
            throw Error(ErrorCode::LengthMismatch, fmt::format("case {} has no single ground-truth label", r->case_id));
        truth.push_back(r->ground_truth.front());
        // failed cases count as wrong
        pred.push_back(r->error.empty() && r->predicted.size() == 1 ? r->predicted.front() : std::string("<none>"));
        gt_classes.insert(truth.back());
        all_classes.insert(truth.back());
        all_classes.insert(pred.back());
    }
    const std::vector<std::string> classes(all_classes.begin(), all_classes.end());
    const auto sub = [&](const std::vector<std::size_t>& idx, auto&& f) {
        std::vector<std::string> p, t;
        for (auto i: idx)
        {
            p.push_back(pred[i]);
            t.push_back(truth[i]);
        }
        return f(p, t);
    };
    rows.push_back(with_ci("subtyping", method, "accuracy", recs.size(),
                           [&](const std::vector<std::size_t>& idx) {
                               return sub(idx, [](auto& p, auto& t) { return metrics::accuracy(p, t); });
                           },
                           opts));
    // F1 averaged over ground-truth classes; stray predictions still cost precision/recall
    const auto f1 = [&](const std::vector<std::string>& p, const std::vector<std::string>& t) {
        const auto cc = metrics::confusion_counts(p, t, classes);
        metrics::ConfusionCounts kept;
        kept.n = cc.n;
        for (std::size_t c = 0; c < cc.classes.size(); ++c)
            if (gt_classes.count(cc.classes[c]))
            {
                kept.classes.push_back(cc.classes[c]);
                kept.tp.push_back(cc.tp[c]);
                kept.fp.push_back(cc.fp[c]);
                kept.fn.push_back(cc.fn[c]);
            }
        return metrics::macro_f1(kept);
    };
    rows.push_back(with_ci("subtyping", method, "macro_f1", recs.size(),
                           [&](const std::vector<std::size_t>& idx) { return sub(idx, f1); }, opts));
}

void question_rows(const std::string& task, const std::string& method,
                   const std::vector<const PredictionRecord*>& recs, const std::vector<std::string>& questions,
                   const EvaluateOptions& opts, std::vector<Row>& rows)
{
    std::vector<std::vector<std::string>> pred, ref;
    for (const auto* r: recs)
    {
        if (r->ground_truth.empty())
            throw Error(ErrorCode::LengthMismatch, fmt::format("case {} has no reference answers", r->case_id));
        ref.push_back(r->ground_truth);
        pred.push_back(r->error.empty() && r->predicted.size() == r->ground_truth.size()
                           ? r->predicted
                           : std::vector<std::string>(r->ground_truth.size(), "<none>"));
    }
    const auto stat = [&](const std::vector<std::size_t>& idx) {
        std::vector<std::vector<std::string>> p, t;
        for (auto i: idx)
        {
            p.push_back(pred[i]);
            t.push_back(ref[i]);
        }
        return metrics::checklist_accuracy(p, t);
    };
    rows.push_back(with_ci(task, method, task == "checklist" ? "checklist_accuracy" : "accuracy", recs.size(), stat, opts));

    if (task != "vqa" || questions.empty())
        return;
    // pooled per-category accuracy when the question list is known
    std::map<std::string, std::vector<std::size_t>> by_cat;
    for (std::size_t q = 0; q < questions.size(); ++q)
        by_cat[std::string(tasks::to_string(tasks::categorize_question(questions[q])))].push_back(q);
    for (const auto& [cat, qs]: by_cat)
    {
        if (std::any_of(ref.begin(), ref.end(), [&](const auto& r) { return r.size() != questions.size(); }))
            break;
        rows.push_back(with_ci(task, method, "accuracy/" + cat, recs.size(),
                               [&](const std::vector<std::size_t>& idx) {
                                   double hit = 0, total = 0;
                                   for (auto i: idx)
                                       for (auto q: qs)
                                       {
                                           hit += pred[i][q] == ref[i][q];
                                           total += 1;
                                       }
                                   return hit / total;
                               },
                               opts));
    }
}

void survival_rows(const std::string& method, const std::vector<const PredictionRecord*>& recs,
                   const std::map<std::string, tasks::SurvivalCase>& table, const EvaluateOptions& opts,
                   std::vector<Row>& rows)
{
    std::vector<metrics::SurvivalRecord> all;
    std::vector<std::string> missing;
    for (const auto* r: recs)
    {
        const auto it = table.find(r->case_id);
        if (it == table.end())
        {
            missing.push_back(r->case_id);
            continue;
        }
        if (!r->error.empty() || r->predicted.size() != 1)
        {
            spdlog::warn("{}: no risk prediction; excluded from the survival analysis", r->case_id);
            continue;
        }
        all.push_back({it->second.months, it->second.event, std::stoi(r->predicted.front())});
    }
    if (!missing.empty())
        throw Error(ErrorCode::LengthMismatch,
                    fmt::format("{} case(s) missing from the survival table, first '{}'", missing.size(), missing.front()));
    // groups present, in level order
    std::map<int, std::vector<metrics::SurvivalRecord>> groups;
    for (const auto& r: all)
        groups[r.group].push_back(r);
    std::vector<std::vector<metrics::SurvivalRecord>> g;
    for (auto& [level, v]: groups)
    {
        const auto km = metrics::km_estimate(v);
        std::string csv = "time,survival,at_risk,events\n";
        csv += fmt::format("0,1,{},0\n", v.size());
        for (std::size_t i = 0; i < km.times.size(); ++i)
            csv += fmt::format("{:.10g},{:.10g},{},{}\n", km.times[i], km.survival[i], km.at_risk[i], km.events[i]);
        auto name = method;
        std::replace(name.begin(), name.end(), '/', '_');
        write_file_atomic(opts.output / "km" / fmt::format("{}__risk{}.csv", name, level), csv);
        g.push_back(v);
    }
    const auto lr = metrics::logrank_test(g);
    rows.push_back({"survival", method, "logrank_chi2", lr.chi_squared, {}, {}, all.size()});
    rows.push_back({"survival", method, "logrank_df", static_cast<double>(lr.df), {}, {}, all.size()});
    rows.push_back({"survival", method, "logrank_p", lr.p_value, {}, {}, all.size()});
}

} // namespace

void cmd_evaluate(const EvaluateOptions& opts)
{
    if (opts.output.empty())
        throw Error(ErrorCode::Config, "output directory is required");
    if (opts.bootstrap < 1)
        throw Error(ErrorCode::Config, "bootstrap must be >= 1");
    std::vector<PredictionRecord> records;
    for (const auto& p: opts.predictions)
    {
        auto r = tasks::read_predictions(p);
        records.insert(records.end(), r.begin(), r.end());
    }
    if (records.empty())
        throw Error(ErrorCode::LengthMismatch, "no prediction records to join with ground truth");

    std::map<std::string, tasks::SurvivalCase> survival;
    if (!opts.survival.empty())
        for (const auto& s: tasks::load_survival_table(opts.survival))
            survival[s.case_id] = s;

    // (task, method) -> records sorted by case id
    std::map<std::pair<std::string, std::string>, std::vector<const PredictionRecord*>> groups;
    for (const auto& r: records)
        groups[{std::string(tasks::to_string(r.task)), r.method}].push_back(&r);
    for (auto& [key, v]: groups)
    {
        std::sort(v.begin(), v.end(), [](auto* a, auto* b) { return a->case_id < b->case_id; });
        for (std::size_t i = 1; i < v.size(); ++i)
            if (v[i]->case_id == v[i - 1]->case_id)
                throw Error(ErrorCode::Config, fmt::format("duplicate case '{}' for {} / {}", v[i]->case_id,
                                                           key.first, key.second));
    }

    fs::create_directories(opts.output);
    std::vector<Row> rows;
    for (const auto& [key, recs]: groups)
    {
        const auto& [task, method] = key;
        const auto kind = tasks::task_kind_from_string(task);
        switch (kind)
        {
        case TaskKind::Subtyping:
            subtyping_rows(method, recs, opts, rows);
            break;
        case TaskKind::Vqa:
        case TaskKind::Checklist:
            question_rows(task, method, recs, {}, opts, rows);
            break;
        case TaskKind::Survival:
            if (opts.survival.empty())
                throw Error(ErrorCode::Config, "survival records need --survival");
            survival_rows(method, recs, survival, opts, rows);
            break;
        case TaskKind::Report:
            spdlog::warn("{}: report records are scored through the checklist task; skipped", method);
            break;
        }
    }

    if (opts.pair)
    {
        const auto& [a, b] = *opts.pair;
        bool any = false;
        for (const auto& [key, recs_a]: groups)
        {
            if (key.second != a)
                continue;
            const auto it = groups.find({key.first, b});
            if (it == groups.end())
                continue;
            const auto& recs_b = it->second;
            std::vector<std::string> ids_a, ids_b;
            for (auto* r: recs_a)
                ids_a.push_back(r->case_id);
            for (auto* r: recs_b)
                ids_b.push_back(r->case_id);
            if (ids_a != ids_b)
                throw Error(ErrorCode::LengthMismatch,
                            fmt::format("{}: methods {} and {} cover different cases", key.first, a, b));
            const auto t = metrics::paired_t_test(case_scores(recs_a), case_scores(recs_b));
            const auto label = fmt::format("{} vs {}", a, b);
            rows.push_back({key.first, label, "mean_difference", t.mean_difference, {}, {}, ids_a.size()});
            rows.push_back({key.first, label, "paired_t", t.t, {}, {}, ids_a.size()});
            rows.push_back({key.first, label, "paired_p", t.p_value, {}, {}, ids_a.size()});
            any = true;
        }
        if (!any)
            throw Error(ErrorCode::Config, fmt::format("no task has predictions from both '{}' and '{}'", a, b));
    }
    write_file_atomic(opts.output / "metrics.csv", format_rows(rows));
}

void cmd_heads(const HeadsOptions& opts)
{
    if (opts.output.empty())
        throw Error(ErrorCode::Config, "output directory is required");
    const auto train = heads::read_embeddings(opts.train);
    const auto test = heads::read_embeddings(opts.test);
    std::map<std::string, std::string> labels;
    for (const auto& [id, v]: load_truth_table(opts.labels))
        labels[id] = v.front();
    const auto label_of = [&](const std::vector<heads::Embedding>& es) {
        std::vector<std::string> out;
        for (const auto& e: es)
        {
            const auto it = labels.find(e.case_id);
            if (it == labels.end())
                throw Error(ErrorCode::LengthMismatch, fmt::format("no label for case '{}'", e.case_id));
            out.push_back(it->second);
        }
        return out;
    };
    const auto y_train = label_of(train);
    const auto y_test = label_of(test);
    heads::LrOptions lr;
    lr.C_reg = opts.C_reg;
    const auto s = heads::score_heads(train, y_train, test, y_test, opts.k, lr);

    EvaluateOptions eo;
    eo.bootstrap = opts.bootstrap;
    eo.seed = opts.seed;
    std::vector<Row> rows;
    for (const auto& [name, scores]: {std::pair{"knn", &s.knn}, {"logistic", &s.lr}})
    {
        // macro over classes defined in the resample; auroc_ovr would log every skip
        const auto auroc = [&](const std::vector<std::size_t>& idx) {
            double sum = 0;
            int defined = 0;
            for (std::size_t c = 0; c < s.classes.size(); ++c)
            {
                std::vector<double> sc;
                std::vector<bool> pos;
                for (auto i: idx)
                {
                    sc.push_back((*scores)[i][c]);
                    pos.push_back(y_test[i] == s.classes[c]);
                }
                const double a = metrics::auroc_binary(sc, pos);
                if (a >= 0)
                {
                    sum += a;
                    ++defined;
                }
            }
            if (defined == 0)
                throw Error(ErrorCode::Undefined, "AUROC undefined for every class");
            return sum / defined;
        };
        const auto acc = [&](const std::vector<std::size_t>& idx) {
            double hit = 0;
            for (auto i: idx)
                hit += s.classes[heads::argmax((*scores)[i])] == y_test[i];
            return hit / static_cast<double>(idx.size());
        };
        // resamples missing a class would make AUROC undefined; report the point value with no CI then
        try
        {
            rows.push_back(with_ci("heads", name, "auroc", test.size(), auroc, eo));
        }
        catch (const Error& e)
        {
            if (e.code() != ErrorCode::Undefined)
                throw;
            rows.push_back({"heads", name, "auroc", auroc(all_indices(test.size())), {}, {}, test.size()});
        }
        rows.push_back(with_ci("heads", name, "accuracy", test.size(), acc, eo));
    }
    fs::create_directories(opts.output);
    write_file_atomic(opts.output / "heads.csv", format_rows(rows));
}

} // namespace pathnav::cli
