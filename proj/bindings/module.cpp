// Python bindings for the main operations: simulation, CSV I/O, training,
// prediction, evaluation and the Kaplan-Meier estimator.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "monosurv/data.hpp"
#include "monosurv/loss.hpp"
#include "monosurv/metrics.hpp"
#include "monosurv/model_io.hpp"
#include "monosurv/net.hpp"
#include "monosurv/trainer.hpp"

namespace py = pybind11;
namespace ms = monosurv;

namespace {

py::dict dataset_to_dict(const ms::Dataset& data) {
    std::vector<std::vector<double>> x;
    std::vector<double> duration;
    std::vector<int> event;
    x.reserve(data.size());
    for (const auto& rec : data.records) {
        x.push_back(rec.covariates);
        duration.push_back(rec.duration);
        event.push_back(rec.event);
    }
    py::dict out;
    out["covariate_names"] = data.covariate_names;
    out["x"] = std::move(x);
    out["duration"] = std::move(duration);
    out["event"] = std::move(event);
    if (!data.latent_event_time.empty()) {
        out["latent_event_time"] = data.latent_event_time;
        out["latent_censor_time"] = data.latent_censor_time;
    }
    return out;
}

ms::Dataset dataset_from_dict(const py::dict& d) {
    ms::Dataset data;
    const auto x = d["x"].cast<std::vector<std::vector<double>>>();
    const auto duration = d["duration"].cast<std::vector<double>>();
    const auto event = d["event"].cast<std::vector<int>>();
    if (x.size() != duration.size() || x.size() != event.size()) {
        throw ms::InputError("x, duration and event must have equal lengths");
    }
    if (d.contains("covariate_names")) {
        data.covariate_names = d["covariate_names"].cast<std::vector<std::string>>();
    } else if (!x.empty()) {
        for (std::size_t j = 0; j < x.front().size(); ++j) {
            data.covariate_names.push_back("x" + std::to_string(j));
        }
    }
    data.records.reserve(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        ms::SurvivalRecord rec;
        rec.covariates = x[i];
        rec.duration = duration[i];
        rec.event = event[i];
        data.records.push_back(std::move(rec));
    }
    return data;
}

py::dict report_to_dict(const ms::TrainReport& report) {
    py::dict out;
    out["initial_train_nll"] = report.initial_train_nll;
    out["train_nll"] = report.train_nll;
    out["val_nll"] = report.val_nll;
    out["best_epoch"] = report.best_epoch;
    out["best_val_nll"] = report.best_val_nll;
    out["stop_reason"] = report.stop_reason;
    out["lr_halvings"] = report.lr_halvings;
    out["wall_seconds"] = report.wall_seconds;
    out["seed"] = report.seed;
    return out;
}

py::dict metrics_to_dict(const ms::MetricsReport& metrics) {
    py::dict out;
    if (metrics.c_td.has_value()) {
        out["c_td"] = *metrics.c_td;
    } else {
        out["c_td"] = py::none();
    }
    out["ibs"] = metrics.ibs;
    out["ibll"] = metrics.ibll;
    out["test_nll"] = metrics.test_nll;
    out["grid_size"] = metrics.grid_size;
    out["z_max"] = metrics.z_max;
    out["ipcw_skipped_terms"] = metrics.ipcw_skipped_terms;
    return out;
}

std::pair<ms::Model, py::dict> train_py(const py::dict& train_data, const py::dict& val_data,
                                        std::uint64_t seed, int cov_layers, int cov_nodes,
                                        int mixed_layers, int nodes_per_layer, double dropout,
                                        double weight_decay, double learning_rate, int batch_size,
                                        const std::string& head, int max_epochs, int patience,
                                        bool dropout_on_mixed, bool density_finite_difference) {
    const ms::Dataset train_raw = dataset_from_dict(train_data);
    const ms::Dataset val_raw = dataset_from_dict(val_data);
    const ms::Preprocessing prep = ms::fit_preprocess(train_raw);
    const ms::StandardizedData train = ms::apply_preprocess(prep, train_raw);
    const ms::StandardizedData val = ms::apply_preprocess(prep, val_raw);

    ms::HyperParams hp;
    hp.cov_layers = cov_layers;
    hp.cov_nodes = cov_nodes;
    hp.mixed_layers = mixed_layers;
    hp.nodes_per_layer = nodes_per_layer;
    hp.dropout = dropout;
    hp.weight_decay = weight_decay;
    hp.learning_rate = learning_rate;
    hp.batch_size = batch_size;
    hp.head = ms::parse_head_kind(head);

    ms::OptimSettings optim = ms::OptimSettings::from_hyper(hp);
    optim.max_epochs = max_epochs;
    optim.patience = patience;
    ms::NetworkConfig config = hp.to_config(train_raw.covariate_dim());
    config.dropout_on_mixed = dropout_on_mixed;
    config.density_finite_difference = density_finite_difference;
    auto [model, report] = ms::train_model(config, optim, train, val, prep, seed);
    return {std::move(model), report_to_dict(report)};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Survival regression with partially monotonic neural networks";
    m.attr("__version__") = "0.1.0";

    py::register_exception<ms::UsageError>(m, "UsageError", PyExc_ValueError);
    py::register_exception<ms::InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<ms::ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<ms::ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ms::TrainingError>(m, "TrainingError", PyExc_RuntimeError);

    py::class_<ms::Model>(m, "Model")
        .def_property_readonly("head",
                               [](const ms::Model& model) { return ms::head_kind_name(model.config.head); })
        .def_property_readonly("covariate_dim",
                               [](const ms::Model& model) { return model.config.covariate_dim; })
        .def_property_readonly("param_count",
                               [](const ms::Model& model) { return model.layout.param_count; })
        .def_property_readonly("universal",
                               [](const ms::Model& model) { return model.config.universal(); })
        .def(
            "predict_survival",
            [](const ms::Model& model, const std::vector<double>& x, double t) {
                return ms::predict_survival(model, x, t);
            },
            py::arg("x"), py::arg("t"), "Survival probability at time t for covariates in original units")
        .def(
            "predict_curve",
            [](const ms::Model& model, const std::vector<double>& x, const std::vector<double>& times) {
                return ms::predict_curve(model, x, times);
            },
            py::arg("x"), py::arg("times"), "Survival curve over a non-decreasing time grid")
        .def(
            "save", [](const ms::Model& model, const std::string& path) { ms::save_model(model, path); },
            py::arg("path"));

    m.def("load_model", &ms::load_model, py::arg("path"));

    m.def(
        "simulate_toy",
        [](const std::string& kind, int n, std::uint64_t seed, bool keep_latents) {
            return dataset_to_dict(ms::simulate_toy(ms::parse_toy_kind(kind), n, seed, keep_latents));
        },
        py::arg("kind"), py::arg("n"), py::arg("seed"), py::arg("keep_latents") = false,
        "Draw a right-censored toy dataset (weibull, normal or checkerboard)");

    m.def(
        "load_csv",
        [](const std::string& path, const std::string& duration_col, const std::string& event_col) {
            return dataset_to_dict(ms::load_csv(path, duration_col, event_col));
        },
        py::arg("path"), py::arg("duration_col") = "duration", py::arg("event_col") = "event");

    m.def(
        "save_csv",
        [](const py::dict& data, const std::string& path) { ms::save_csv(dataset_from_dict(data), path); },
        py::arg("data"), py::arg("path"));

    m.def("train", &train_py, py::arg("train_data"), py::arg("val_data"), py::arg("seed"),
          py::kw_only(), py::arg("cov_layers") = 1, py::arg("cov_nodes") = 32,
          py::arg("mixed_layers") = 2, py::arg("nodes_per_layer") = 32, py::arg("dropout") = 0.0,
          py::arg("weight_decay") = 0.0, py::arg("learning_rate") = 1e-3, py::arg("batch_size") = 128,
          py::arg("head") = "survival", py::arg("max_epochs") = 200, py::arg("patience") = 10,
          py::arg("dropout_on_mixed") = true, py::arg("density_finite_difference") = false,
          "Train one model; returns (model, report)");

    m.def(
        "evaluate",
        [](const ms::Model& model, const py::dict& data, int grid_size) {
            return metrics_to_dict(ms::evaluate_model(model, dataset_from_dict(data), grid_size));
        },
        py::arg("model"), py::arg("data"), py::arg("grid_size") = 100,
        "Concordance, IBS, IBLL and test NLL of a model on a dataset");

    py::class_<ms::KaplanMeierCurve>(m, "KaplanMeierCurve")
        .def(py::init([](const std::vector<double>& times, const std::vector<int>& events) {
                 return ms::KaplanMeierCurve::fit(times, events);
             }),
             py::arg("times"), py::arg("events"))
        .def("at", &ms::KaplanMeierCurve::at, py::arg("t"), "Right-continuous value S(t)")
        .def("left_limit", &ms::KaplanMeierCurve::left_limit, py::arg("t"), "Left limit S(t-)")
        .def_property_readonly("step_times", &ms::KaplanMeierCurve::step_times)
        .def_property_readonly("step_values", &ms::KaplanMeierCurve::step_values);
}
