#include "monosurv/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace monosurv {

using nlohmann::json;

void write_text_atomic(const std::string& path, const std::string& text) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw InputError("cannot write file '" + tmp + "'");
        }
        out << text;
        if (!out) {
            throw InputError("failed while writing '" + tmp + "'");
        }
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        throw InputError("cannot move '" + tmp + "' to '" + path + "'");
    }
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open file '" + path + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

namespace {

json parse_json(const std::string& text, const std::string& what) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) {
        throw ParseError("malformed JSON in " + what);
    }
    return doc;
}

}  // namespace

json model_to_json(const Model& model) {
    json doc;
    doc["format"] = "monosurv-model";
    doc["version"] = 1;
    doc["config"] = {
        {"covariate_dim", model.config.covariate_dim},
        {"cov_widths", model.config.cov_widths},
        {"mixed_widths", model.config.mixed_widths},
        {"head", head_kind_name(model.config.head)},
        {"dropout_rate", model.config.dropout_rate},
        {"dropout_on_mixed", model.config.dropout_on_mixed},
        {"density_finite_difference", model.config.density_finite_difference},
    };
    doc["preprocessing"] = {
        {"covariate_mean", model.prep.covariate_mean},
        {"covariate_sd", model.prep.covariate_sd},
        {"duration_scale", model.prep.duration_scale},
    };
    json blocks = json::array();
    auto dump_layer = [&](const std::string& name, const LayerSlots& slots) {
        const auto w_begin = model.params.raw.begin() + slots.w;
        const auto b_begin = model.params.raw.begin() + slots.b;
        blocks.push_back({{"name", name + ".weight"},
                          {"rows", slots.rows},
                          {"cols", slots.cols},
                          {"values", std::vector<double>(w_begin, w_begin + slots.rows * slots.cols)}});
        blocks.push_back({{"name", name + ".bias"},
                          {"rows", slots.rows},
                          {"cols", 1},
                          {"values", std::vector<double>(b_begin, b_begin + slots.rows)}});
    };
    for (std::size_t l = 0; l < model.layout.cov.size(); ++l) {
        dump_layer("cov" + std::to_string(l + 1), model.layout.cov[l]);
    }
    for (std::size_t l = 0; l < model.layout.mixed.size(); ++l) {
        dump_layer("mixed" + std::to_string(l + 1), model.layout.mixed[l]);
    }
    doc["parameters"] = std::move(blocks);
    return doc;
}

Model model_from_json(const json& doc) {
    if (!doc.is_object() || doc.value("format", "") != "monosurv-model") {
        throw ParseError("not a monosurv model document");
    }
    if (doc.value("version", 0) != 1) {
        throw ParseError("unsupported model document version");
    }
    Model model;
    const json& cfg = doc.at("config");
    model.config.covariate_dim = cfg.at("covariate_dim").get<int>();
    model.config.cov_widths = cfg.at("cov_widths").get<std::vector<int>>();
    model.config.mixed_widths = cfg.at("mixed_widths").get<std::vector<int>>();
    model.config.head = parse_head_kind(cfg.at("head").get<std::string>());
    model.config.dropout_rate = cfg.at("dropout_rate").get<double>();
    model.config.dropout_on_mixed = cfg.value("dropout_on_mixed", true);
    model.config.density_finite_difference = cfg.value("density_finite_difference", false);
    model.layout = build_layout(model.config, model.params);

    const json& prep = doc.at("preprocessing");
    model.prep.covariate_mean = prep.at("covariate_mean").get<std::vector<double>>();
    model.prep.covariate_sd = prep.at("covariate_sd").get<std::vector<double>>();
    model.prep.duration_scale = prep.at("duration_scale").get<double>();
    if (static_cast<int>(model.prep.covariate_mean.size()) != model.config.covariate_dim ||
        static_cast<int>(model.prep.covariate_sd.size()) != model.config.covariate_dim) {
        throw ParseError("preprocessing statistics do not match the covariate dimension");
    }

    auto load_layer = [&](const std::string& name, const LayerSlots& slots, const json& blocks,
                          std::size_t& cursor) {
        for (const std::string suffix : {".weight", ".bias"}) {
            if (cursor >= blocks.size()) {
                throw ParseError("model document is missing parameter block " + name + suffix);
            }
            const json& block = blocks[cursor++];
            if (block.at("name").get<std::string>() != name + suffix) {
                throw ParseError("unexpected parameter block '" + block.at("name").get<std::string>() +
                                 "', expected '" + name + suffix + "'");
            }
            const int rows = block.at("rows").get<int>();
            const int cols = block.at("cols").get<int>();
            const auto values = block.at("values").get<std::vector<double>>();
            const bool is_weight = suffix == ".weight";
            const int expect_rows = slots.rows;
            const int expect_cols = is_weight ? slots.cols : 1;
            if (rows != expect_rows || cols != expect_cols ||
                static_cast<int>(values.size()) != rows * cols) {
                throw ParseError("parameter block '" + name + suffix + "' has shape " + std::to_string(rows) +
                                 "x" + std::to_string(cols) + ", expected " + std::to_string(expect_rows) +
                                 "x" + std::to_string(expect_cols));
            }
            const int offset = is_weight ? slots.w : slots.b;
            std::copy(values.begin(), values.end(), model.params.raw.begin() + offset);
        }
    };
    const json& blocks = doc.at("parameters");
    std::size_t cursor = 0;
    for (std::size_t l = 0; l < model.layout.cov.size(); ++l) {
        load_layer("cov" + std::to_string(l + 1), model.layout.cov[l], blocks, cursor);
    }
    for (std::size_t l = 0; l < model.layout.mixed.size(); ++l) {
        load_layer("mixed" + std::to_string(l + 1), model.layout.mixed[l], blocks, cursor);
    }
    if (cursor != blocks.size()) {
        throw ParseError("model document has trailing parameter blocks");
    }
    model.params.refresh();
    return model;
}

void save_model(const Model& model, const std::string& path) {
    write_text_atomic(path, model_to_json(model).dump(2) + "\n");
}

Model load_model(const std::string& path) {
    return model_from_json(parse_json(read_text(path), "model file '" + path + "'"));
}

json metrics_to_json(const MetricsReport& report) {
    json doc;
    if (report.c_td.has_value()) {
        doc["c_td"] = *report.c_td;
    } else {
        doc["c_td"] = nullptr;
    }
    doc["ibs"] = report.ibs;
    doc["ibll"] = report.ibll;
    doc["test_nll"] = report.test_nll;
    doc["grid_size"] = report.grid_size;
    doc["z_max"] = report.z_max;
    doc["ipcw_skipped_terms"] = report.ipcw_skipped_terms;
    return doc;
}

MetricsReport metrics_from_json(const json& doc) {
    MetricsReport report;
    if (doc.contains("c_td") && !doc.at("c_td").is_null()) {
        report.c_td = doc.at("c_td").get<double>();
    }
    report.ibs = doc.at("ibs").get<double>();
    report.ibll = doc.at("ibll").get<double>();
    report.test_nll = doc.at("test_nll").get<double>();
    report.grid_size = doc.at("grid_size").get<int>();
    report.z_max = doc.at("z_max").get<double>();
    report.ipcw_skipped_terms = doc.value("ipcw_skipped_terms", 0LL);
    return report;
}

json train_report_to_json(const TrainReport& report) {
    return json{{"initial_train_nll", report.initial_train_nll},
                {"train_nll", report.train_nll},
                {"val_nll", report.val_nll},
                {"best_epoch", report.best_epoch},
                {"best_val_nll", report.best_val_nll},
                {"stop_reason", report.stop_reason},
                {"lr_halvings", report.lr_halvings},
                {"wall_seconds", report.wall_seconds},
                {"seed", report.seed}};
}

json hyper_params_to_json(const HyperParams& hp) {
    return json{{"mixed_layers", hp.mixed_layers},
                {"cov_layers", hp.cov_layers},
                {"nodes_per_layer", hp.nodes_per_layer},
                {"cov_nodes", hp.cov_nodes},
                {"dropout", hp.dropout},
                {"weight_decay", hp.weight_decay},
                {"learning_rate", hp.learning_rate},
                {"batch_size", hp.batch_size},
                {"head", head_kind_name(hp.head)}};
}

HyperParams hyper_params_from_json(const json& doc) {
    HyperParams hp;
    hp.mixed_layers = doc.value("mixed_layers", hp.mixed_layers);
    hp.cov_layers = doc.value("cov_layers", hp.cov_layers);
    hp.nodes_per_layer = doc.value("nodes_per_layer", hp.nodes_per_layer);
    hp.cov_nodes = doc.value("cov_nodes", hp.cov_nodes);
    hp.dropout = doc.value("dropout", hp.dropout);
    hp.weight_decay = doc.value("weight_decay", hp.weight_decay);
    hp.learning_rate = doc.value("learning_rate", hp.learning_rate);
    hp.batch_size = doc.value("batch_size", hp.batch_size);
    if (doc.contains("head")) {
        hp.head = parse_head_kind(doc.at("head").get<std::string>());
    }
    return hp;
}

namespace {

json real_dim_to_json(const RealDim& dim) {
    if (dim.continuous) {
        return json{{"min", dim.lo}, {"max", dim.hi}};
    }
    return json(dim.choices);
}

RealDim real_dim_from_json(const json& doc, const std::string& name) {
    if (doc.is_array()) {
        return RealDim::discrete(doc.get<std::vector<double>>());
    }
    if (doc.is_object() && doc.contains("min") && doc.contains("max")) {
        return RealDim::range(doc.at("min").get<double>(), doc.at("max").get<double>());
    }
    throw ParseError("grid dimension '" + name + "' must be an array or a {min, max} object");
}

}  // namespace

json hyper_grid_to_json(const HyperGrid& grid) {
    std::vector<std::string> head_names;
    for (const HeadKind head : grid.heads) {
        head_names.push_back(head_kind_name(head));
    }
    return json{{"mixed_layers", grid.mixed_layers},
                {"cov_layers", grid.cov_layers},
                {"nodes_per_layer", grid.nodes_per_layer},
                {"cov_nodes", grid.cov_nodes},
                {"dropout", real_dim_to_json(grid.dropout)},
                {"weight_decay", real_dim_to_json(grid.weight_decay)},
                {"learning_rate", real_dim_to_json(grid.learning_rate)},
                {"batch_sizes", grid.batch_sizes},
                {"heads", head_names}};
}

HyperGrid hyper_grid_from_json(const json& doc) {
    HyperGrid grid = HyperGrid::small_grid();
    if (doc.contains("mixed_layers")) grid.mixed_layers = doc.at("mixed_layers").get<std::vector<int>>();
    if (doc.contains("cov_layers")) grid.cov_layers = doc.at("cov_layers").get<std::vector<int>>();
    if (doc.contains("nodes_per_layer")) grid.nodes_per_layer = doc.at("nodes_per_layer").get<std::vector<int>>();
    if (doc.contains("cov_nodes")) grid.cov_nodes = doc.at("cov_nodes").get<std::vector<int>>();
    if (doc.contains("dropout")) grid.dropout = real_dim_from_json(doc.at("dropout"), "dropout");
    if (doc.contains("weight_decay")) grid.weight_decay = real_dim_from_json(doc.at("weight_decay"), "weight_decay");
    if (doc.contains("learning_rate")) grid.learning_rate = real_dim_from_json(doc.at("learning_rate"), "learning_rate");
    if (doc.contains("batch_sizes")) grid.batch_sizes = doc.at("batch_sizes").get<std::vector<int>>();
    if (doc.contains("heads")) {
        grid.heads.clear();
        for (const auto& name : doc.at("heads")) {
            grid.heads.push_back(parse_head_kind(name.get<std::string>()));
        }
    }
    grid.validate();
    return grid;
}

NetworkConfig TrainSpec::to_config(int covariate_dim) const {
    NetworkConfig config = hyper.to_config(covariate_dim);
    config.dropout_on_mixed = dropout_on_mixed;
    config.density_finite_difference = density_finite_difference;
    return config;
}

OptimSettings TrainSpec::to_optim() const {
    OptimSettings optim = OptimSettings::from_hyper(hyper);
    optim.max_epochs = max_epochs;
    optim.patience = patience;
    optim.decay_constrained = decay_constrained;
    return optim;
}

TrainSpec train_spec_from_json(const json& doc) {
    TrainSpec spec;
    spec.hyper = hyper_params_from_json(doc);
    spec.max_epochs = doc.value("max_epochs", spec.max_epochs);
    spec.patience = doc.value("patience", spec.patience);
    spec.dropout_on_mixed = doc.value("dropout_on_mixed", spec.dropout_on_mixed);
    spec.density_finite_difference = doc.value("density_finite_difference", spec.density_finite_difference);
    spec.decay_constrained = doc.value("decay_constrained", spec.decay_constrained);
    return spec;
}

json train_spec_to_json(const TrainSpec& spec) {
    json doc = hyper_params_to_json(spec.hyper);
    doc["max_epochs"] = spec.max_epochs;
    doc["patience"] = spec.patience;
    doc["dropout_on_mixed"] = spec.dropout_on_mixed;
    doc["density_finite_difference"] = spec.density_finite_difference;
    doc["decay_constrained"] = spec.decay_constrained;
    return doc;
}

}  // namespace monosurv
