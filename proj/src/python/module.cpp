// SPDX-License-Identifier: Apache-2.0
#include "pathnav/cli/commands.hpp"
#include "pathnav/error.hpp"
#include "pathnav/heads/embedding.hpp"
#include "pathnav/heads/evaluate.hpp"
#include "pathnav/heads/preprocess.hpp"
#include "pathnav/metrics/classification.hpp"
#include "pathnav/metrics/stats.hpp"
#include "pathnav/metrics/survival.hpp"
#include "pathnav/policy/decision.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>

namespace py = pybind11;
using namespace pathnav;

namespace
{

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using F32Array = py::array_t<float, py::array::c_style | py::array::forcecast>;

Image image_from_array(const U8Array& a)
{
    if (a.ndim() != 3 || a.shape(2) != 3)
        throw Error(ErrorCode::Precondition, "expected an HxWx3 uint8 array");
    Image img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
    std::memcpy(img.pixels.data(), a.data(), img.pixels.size());
    return img;
}

F32Array to_array(const FloatImage& f)
{
    F32Array out({f.channels, f.height, f.width});
    std::memcpy(out.mutable_data(), f.values.data(), f.values.size() * sizeof(float));
    return out;
}

F32Array to_array(const std::vector<float>& v)
{
    F32Array out(static_cast<py::ssize_t>(v.size()));
    std::memcpy(out.mutable_data(), v.data(), v.size() * sizeof(float));
    return out;
}

heads::Embedding embedding_from(const std::string& id, const F32Array& values)
{
    if (values.ndim() != 1)
        throw Error(ErrorCode::Precondition, "embedding must be a 1-D float32 array");
    heads::Embedding e{id, std::vector<float>(values.data(), values.data() + values.size()), heads::EmbeddingSource::Bridge};
    return e;
}

std::vector<heads::Embedding> embeddings_from(const py::iterable& records)
{
    std::vector<heads::Embedding> out;
    for (const auto& item: records)
    {
        const auto pair = item.cast<py::tuple>();
        if (pair.size() != 2)
            throw Error(ErrorCode::Precondition, "records are (case_id, vector) pairs");
        out.push_back(embedding_from(pair[0].cast<std::string>(), pair[1].cast<F32Array>()));
    }
    return out;
}

py::list embeddings_to(const std::vector<heads::Embedding>& records)
{
    py::list out;
    for (const auto& r: records)
        out.append(py::make_tuple(r.case_id, to_array(r.values)));
    return out;
}

py::dict decision_dict(const policy::Decision& d)
{
    py::dict out;
    out["x"] = d.point.x;
    out["y"] = d.point.y;
    out["level"] = d.level;
    out["terminate"] = d.terminate;
    out["has_point"] = d.has_point;
    out["justification"] = d.justification;
    out["confidence"] = d.stop_confidence ? py::cast(*d.stop_confidence) : py::none();
    return out;
}

std::vector<metrics::SurvivalRecord> survival_records(const std::vector<double>& time, const std::vector<bool>& event,
                                                      const std::vector<int>& group)
{
    if (time.size() != event.size() || (!group.empty() && group.size() != time.size()))
        throw Error(ErrorCode::LengthMismatch, "time, event and group must have equal lengths");
    std::vector<metrics::SurvivalRecord> out;
    for (std::size_t i = 0; i < time.size(); ++i)
        out.push_back({time[i], event[i], group.empty() ? 0 : group[i]});
    return out;
}

py::dict run_report(const cli::RunReport& r)
{
    py::list slides;
    for (const auto& s: r.slides)
    {
        py::dict d;
        d["slide_id"] = s.slide_id;
        d["ok"] = s.ok;
        d["error"] = s.error;
        d["termination"] = s.termination;
        d["rounds"] = s.rounds;
        d["trajectory"] = s.trajectory;
        d["trajectory_sha256"] = s.trajectory_sha256;
        slides.append(d);
    }
    py::dict out;
    out["command"] = r.command;
    out["exit_code"] = r.exit_code();
    out["slides"] = slides;
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "pathnav core: decision grammar, preprocessing, embeddings, metrics and the navigate command";
    m.attr("EMBEDDING_DIM") = heads::kEmbeddingDim;

    PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
    error_type.call_once_and_store_result(
        [&]() { return py::object(py::exception<Error>(m, "PathnavError", PyExc_RuntimeError)); });
    py::register_exception_translator([](std::exception_ptr p) {
        try
        {
            if (p)
                std::rethrow_exception(p);
        }
        catch (const Error& e)
        {
            const auto& type = error_type.get_stored();
            py::object inst = type(e.what());
            inst.attr("code") = std::string(to_string(e.code()));
            PyErr_SetObject(type.ptr(), inst.ptr());
        }
    });

    m.def("parse_decision", [](const std::string& text) { return decision_dict(policy::parse_decision(text)); },
          py::arg("text"));
    m.def(
        "format_decision",
        [](double x, double y, int level, bool terminate, std::optional<double> confidence,
           const std::string& justification) {
            policy::Decision d;
            d.point = {x, y};
            d.level = level;
            d.terminate = terminate;
            d.stop_confidence = confidence;
            d.justification = justification;
            return policy::format_decision(d);
        },
        py::arg("x"), py::arg("y"), py::arg("level") = 0, py::arg("terminate") = false,
        py::arg("confidence") = py::none(), py::arg("justification") = std::string(policy::kNoJustification));

    m.def("preprocess", [](const U8Array& rgb) { return to_array(heads::preprocess(image_from_array(rgb))); },
          py::arg("rgb"), "HxWx3 uint8 -> 3x224x224 float32, normalized");
    m.def("toy_encode", [](const U8Array& rgb) { return to_array(heads::toy_encode(image_from_array(rgb)).values); },
          py::arg("rgb"));

    m.def("encode_emb1", [](const py::iterable& records) {
        const auto bytes = heads::encode_emb1(embeddings_from(records));
        return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    });
    m.def("decode_emb1", [](const py::bytes& data) {
        const std::string s = data;
        const std::span<const std::uint8_t> view(reinterpret_cast<const std::uint8_t*>(s.data()), s.size());
        return embeddings_to(heads::decode_emb1(view));
    });
    m.def("write_embeddings", [](const std::filesystem::path& path, const py::iterable& records) {
        heads::write_embeddings(path, embeddings_from(records));
    });
    m.def("read_embeddings", [](const std::filesystem::path& path) { return embeddings_to(heads::read_embeddings(path)); });

    m.def(
        "score_heads",
        [](const py::iterable& train, const std::vector<std::string>& train_labels, const py::iterable& test,
           const std::vector<std::string>& test_labels, int k, double C_reg) {
            heads::LrOptions o;
            o.C_reg = C_reg;
            const auto s = heads::score_heads(embeddings_from(train), train_labels, embeddings_from(test), test_labels,
                                              k, o);
            py::dict out;
            out["classes"] = s.classes;
            out["knn"] = s.knn;
            out["lr"] = s.lr;
            return out;
        },
        py::arg("train"), py::arg("train_labels"), py::arg("test"), py::arg("test_labels"), py::arg("k") = 10,
        py::arg("C_reg") = 1.0);

    m.def("accuracy", &metrics::accuracy, py::arg("preds"), py::arg("labels"));
    m.def("macro_f1",
          py::overload_cast<const std::vector<std::string>&, const std::vector<std::string>&,
                            const std::vector<std::string>&>(&metrics::macro_f1),
          py::arg("preds"), py::arg("labels"), py::arg("classes"));
    m.def("auroc_ovr_macro", &metrics::auroc_ovr_macro, py::arg("scores"), py::arg("labels"), py::arg("classes"));
    m.def("checklist_accuracy", &metrics::checklist_accuracy, py::arg("predicted"), py::arg("reference"));
    m.def(
        "km_estimate",
        [](const std::vector<double>& time, const std::vector<bool>& event) {
            const auto c = metrics::km_estimate(survival_records(time, event, {}));
            py::dict out;
            out["times"] = c.times;
            out["survival"] = c.survival;
            out["at_risk"] = c.at_risk;
            out["events"] = c.events;
            return out;
        },
        py::arg("time"), py::arg("event"));
    m.def(
        "logrank_test",
        [](const std::vector<double>& time, const std::vector<bool>& event, const std::vector<int>& group) {
            const auto r = metrics::logrank_test(metrics::split_by_group(survival_records(time, event, group)));
            py::dict out;
            out["chi_squared"] = r.chi_squared;
            out["df"] = r.df;
            out["p_value"] = r.p_value;
            return out;
        },
        py::arg("time"), py::arg("event"), py::arg("group"));
    m.def(
        "paired_t_test",
        [](const std::vector<double>& a, const std::vector<double>& b) {
            const auto r = metrics::paired_t_test(a, b);
            py::dict out;
            out["t"] = r.t;
            out["df"] = r.df;
            out["p_value"] = r.p_value;
            out["mean_difference"] = r.mean_difference;
            return out;
        },
        py::arg("a"), py::arg("b"));

    m.def(
        "generate_slides",
        [](const std::filesystem::path& output, int count, std::uint64_t seed, std::uint32_t width,
           std::uint32_t height, const std::filesystem::path& subtypes, const std::string& group) {
            cli::GenerateOptions g;
            g.output = output;
            g.count = count;
            g.seed = seed;
            g.width = width;
            g.height = height;
            g.subtypes = subtypes;
            g.group = group;
            py::gil_scoped_release release;
            cli::cmd_generate_slides(g);
        },
        py::arg("output"), py::arg("count"), py::arg("seed"), py::arg("width") = 16384, py::arg("height") = 12288,
        py::arg("subtypes"), py::arg("group") = "SYNTH3");
    m.def(
        "navigate",
        [](const std::string& config_json, const std::filesystem::path& base) {
            const auto cfg = cli::run_config_from_json(nlohmann::json::parse(config_json), base);
            cli::RunReport report;
            {
                py::gil_scoped_release release;
                report = cli::cmd_navigate(cfg);
            }
            return run_report(report);
        },
        py::arg("config_json"), py::arg("base") = std::filesystem::path(),
        "Runs the navigate command from a JSON run config and returns the per-slide report");
}
