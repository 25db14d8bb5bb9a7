#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "monosurv/data.hpp"
#include "monosurv/loss.hpp"
#include "monosurv/metrics.hpp"
#include "monosurv/net.hpp"
#include "monosurv/rng.hpp"

namespace monosurv {

// One point of the hyperparameter search space.
struct HyperParams {
    int mixed_layers = 2;
    int cov_layers = 1;
    int nodes_per_layer = 32;
    int cov_nodes = 32;
    double dropout = 0.0;
    double weight_decay = 0.0;
    double learning_rate = 1e-3;
    int batch_size = 128;
    HeadKind head = HeadKind::Survival;

    NetworkConfig to_config(int covariate_dim) const;
    bool operator==(const HyperParams&) const = default;
};

// A real-valued search dimension: a finite choice set or a closed interval.
struct RealDim {
    std::vector<double> choices;
    double lo = 0.0, hi = 0.0;
    bool continuous = false;

    static RealDim discrete(std::vector<double> values) { return {std::move(values), 0.0, 0.0, false}; }
    static RealDim range(double lo, double hi) { return {{}, lo, hi, true}; }
    double sample(Rng& rng) const;
    bool contains(double v) const;
};

struct HyperGrid {
    std::vector<int> mixed_layers;
    std::vector<int> cov_layers;
    std::vector<int> nodes_per_layer;
    std::vector<int> cov_nodes;
    RealDim dropout;
    RealDim weight_decay;
    RealDim learning_rate;
    std::vector<int> batch_sizes;
    std::vector<HeadKind> heads;

    // Search space used for the smaller benchmark datasets.
    static HyperGrid small_grid();
    // Search space used for the large dataset runs.
    static HyperGrid large_grid();

    HyperParams sample(Rng& rng) const;
    bool contains(const HyperParams& hp) const;
    void validate() const;
};

struct OptimSettings {
    double learning_rate = 1e-3;
    double weight_decay = 0.0;
    int batch_size = 128;
    int max_epochs = 200;
    int patience = 10;
    // Weight decay normally exempts constrained raw parameters so squared
    // effective weights are not dragged toward the raw=0 dead point.
    bool decay_constrained = false;

    static OptimSettings from_hyper(const HyperParams& hp) {
        OptimSettings s;
        s.learning_rate = hp.learning_rate;
        s.weight_decay = hp.weight_decay;
        s.batch_size = hp.batch_size;
        return s;
    }
};

struct TrainReport {
    double initial_train_nll = 0.0;  // full training loss of the fresh initialization
    std::vector<double> train_nll;   // mean minibatch loss per epoch
    std::vector<double> val_nll;     // full validation loss per epoch
    int best_epoch = -1;
    double best_val_nll = 0.0;
    std::string stop_reason;  // "patience" or "max_epochs"
    int lr_halvings = 0;
    double wall_seconds = 0.0;  // excluded from the determinism contract
    std::uint64_t seed = 0;
};

// Adaptive moment estimation with beta1=0.9, beta2=0.999, eps=1e-8.
class Adam {
public:
    explicit Adam(std::size_t n) : m_(n, 0.0), v_(n, 0.0) {}
    void reset();
    void step(ParamStore& params, std::span<const double> grad, double learning_rate);

private:
    std::vector<double> m_, v_;
    long long t_ = 0;
};

// Mini-batch likelihood optimization with early stopping on validation NLL.
// Both datasets must already be standardized with the shared statistics in
// `prep`, which are stored into the returned model. A non-finite loss
// triggers one automatic restart of the epoch at half the learning rate;
// a second failure raises TrainingError.
std::pair<Model, TrainReport> train_model(const NetworkConfig& config, const OptimSettings& optim,
                                          const StandardizedData& train, const StandardizedData& validation,
                                          const Preprocessing& prep, std::uint64_t seed);

struct TrialResult {
    HyperParams hyper;
    bool failed = false;
    std::string error;
    double val_nll = 0.0;
    int param_count = 0;
    int best_epoch = -1;
    double wall_seconds = 0.0;
};

struct SearchResult {
    int best_index = -1;
    Model best_model;
    TrainReport best_report;
    std::vector<TrialResult> trials;
};

// Seeded random search: samples `budget` distinct configurations uniformly
// from the grid, trains each on (train, validation) and selects the minimum
// validation NLL; ties break toward fewer parameters, then earlier trials.
// Trials carry derived per-trial seeds and may run on `workers` threads;
// results merge in trial order, so the outcome does not depend on scheduling.
SearchResult hyper_search(const HyperGrid& grid, int budget, const StandardizedData& train,
                          const StandardizedData& validation, const Preprocessing& prep,
                          std::uint64_t seed, int workers = 1);

struct EvaluateOptions {
    int grid_size = 100;
    TieRule tie_rule = TieRule::Strict;
    CensorEval censor_eval = CensorEval::LeftLimit;
};

// Fits the censoring curve on the test sample itself and evaluates c_td, IBS
// and IBLL over z_max = max test duration, plus the mean test NLL in original
// time units (the density picks up a 1/duration_scale factor).
MetricsReport evaluate_model(const Model& model, const Dataset& test, const EvaluateOptions& options);
MetricsReport evaluate_model(const Model& model, const Dataset& test, int grid_size = 100);

}  // namespace monosurv
