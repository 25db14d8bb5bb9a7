#pragma once

#include <string>

#include <json.hpp>

#include "monosurv/metrics.hpp"
#include "monosurv/net.hpp"
#include "monosurv/trainer.hpp"

namespace monosurv {

// Writes `text` to a temporary file in the target directory and renames it
// into place, so readers never observe a partial file.
void write_text_atomic(const std::string& path, const std::string& text);

std::string read_text(const std::string& path);

// Versioned model document: config, preprocessing statistics and every raw
// parameter block flattened row-major with its declared shape. Doubles are
// serialized with shortest round-trip precision, so save/load is value-exact.
nlohmann::json model_to_json(const Model& model);
Model model_from_json(const nlohmann::json& doc);
void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

nlohmann::json metrics_to_json(const MetricsReport& report);
MetricsReport metrics_from_json(const nlohmann::json& doc);

nlohmann::json train_report_to_json(const TrainReport& report);

nlohmann::json hyper_params_to_json(const HyperParams& hp);
HyperParams hyper_params_from_json(const nlohmann::json& doc);

nlohmann::json hyper_grid_to_json(const HyperGrid& grid);
HyperGrid hyper_grid_from_json(const nlohmann::json& doc);

// Fixed single-training configuration consumed by the CLI train subcommand.
struct TrainSpec {
    HyperParams hyper;
    int max_epochs = 200;
    int patience = 10;
    bool dropout_on_mixed = true;
    bool density_finite_difference = false;
    bool decay_constrained = false;

    NetworkConfig to_config(int covariate_dim) const;
    OptimSettings to_optim() const;
};

TrainSpec train_spec_from_json(const nlohmann::json& doc);
nlohmann::json train_spec_to_json(const TrainSpec& spec);

}  // namespace monosurv
