#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "monosurv/data.hpp"
#include "monosurv/dual.hpp"
#include "monosurv/tape.hpp"

namespace monosurv {

enum class HeadKind { Survival, Hazard };

HeadKind parse_head_kind(const std::string& name);
std::string head_kind_name(HeadKind head);

// Two-subnetwork architecture: a covariate subnet feeding a mixed subnet that
// receives (t, u) and is constrained to be non-decreasing in t. cov_widths and
// mixed_widths list the tanh hidden layers; the mixed subnet ends in a linear
// scalar output appended automatically.
struct NetworkConfig {
    int covariate_dim = 1;
    std::vector<int> cov_widths{32};
    std::vector<int> mixed_widths{32, 32};
    HeadKind head = HeadKind::Survival;
    double dropout_rate = 0.0;
    bool dropout_on_mixed = true;
    // Density via a one-sided finite difference of h in t instead of the
    // exact forward tangent; both routes perform comparably, exact tangents
    // are the default.
    bool density_finite_difference = false;

    // Networks with at least 2 hidden mixed layers are universal
    // approximators of monotone-in-t functions; shallower ones still train
    // but are flagged in logs.
    bool universal() const { return mixed_widths.size() >= 2; }

    void validate() const;
};

// Slot range of one affine layer inside the flat parameter store.
struct LayerSlots {
    int w = 0, b = 0;
    int rows = 0, cols = 0;
};

struct NetLayout {
    std::vector<LayerSlots> cov;
    std::vector<LayerSlots> mixed;  // [0] consumes [t, u]; back() is the scalar output layer
    int param_count = 0;
};

// Builds the slot layout and registers all parameter blocks. Constrained
// slots (the t column of mixed layer 1 and every weight of the deeper mixed
// layers) are flagged squared; unconstrained weights are flagged decayable.
NetLayout build_layout(const NetworkConfig& config, ParamStore& store);

// The trained artifact: configuration, raw parameters and the preprocessing
// statistics captured from the training set. Immutable during inference;
// training requires exclusive ownership.
struct Model {
    NetworkConfig config;
    NetLayout layout;
    ParamStore params;
    Preprocessing prep;
};

// Unconstrained weights start uniform on +-sqrt(1/fan_in). Constrained raw
// values get magnitude uniform on [0.3, 1.0]*(1/fan_in)^(1/4) with a random
// sign, keeping effective squared weights small but away from the raw=0
// dead point. Biases start at zero.
Model init_model(const NetworkConfig& config, std::uint64_t seed);

struct ForwardResult {
    Dual h;
    int h_slot = -1;  // node slot of h on the tape
};

// Records one evaluation of h(t, x) on the tape (which may already hold
// earlier records of the same batch). t is scaled time with seed tangent 1;
// x is standardized with tangent 0. In train mode with a positive dropout
// rate, hidden activations are scaled by inverted-dropout masks drawn from
// dropout_seed; the non-negative masks preserve monotonicity in t.
ForwardResult forward_tape(const Model& model, double t, std::span<const double> x,
                           Tape& tape, bool train_mode, std::uint64_t dropout_seed);

// Recording-free forward pass for inference; bit-identical to the tape path
// in eval mode. The workspace is caller-owned scratch so repeated calls do
// not allocate.
struct Workspace {
    std::vector<Dual> a, b;
    std::vector<double> xs;  // standardized covariate scratch
};

Dual forward_eval(const Model& model, double t, std::span<const double> x, Workspace& ws);

// Head outputs in scaled-time units. survival and cumulative_hazard are
// unit-free; density and hazard_rate are per unit of scaled time.
struct HeadOutput {
    double survival = 0.0;         // S(t|x)
    double density = 0.0;          // f(t|x) = -dS/dt
    double cumulative_hazard = 0.0;
    double hazard_rate = 0.0;
};

// survival head: S = 1 - sigmoid(h), f = sigmoid'(h) * dh/dt
// hazard head:   Lambda = softplus(h), S = exp(-Lambda), lambda = sigmoid(h) * dh/dt
HeadOutput head_transform(Dual h, HeadKind head);

// Step of the finite-difference density fallback, on scaled time.
inline constexpr double kDensityFdStep = 1e-4;

// dh/dt at scaled time t: the exact tangent, or (h(t+eps) - h(t))/eps when
// the model selects the finite-difference fallback.
double density_slope(const Model& model, double t, std::span<const double> x, const Dual& h_at_t,
                     Workspace& ws);

// Single-forward-pass prediction in original units: standardizes x, scales t,
// evaluates with dropout disabled. Cost is independent of the training-set
// size.
double predict_survival(const Model& model, std::span<const double> x_raw, double t_raw);
double predict_survival(const Model& model, std::span<const double> x_raw, double t_raw, Workspace& ws);

// Full head outputs with density and hazard rate converted to original time
// units (divided by the duration scale).
HeadOutput predict_head(const Model& model, std::span<const double> x_raw, double t_raw, Workspace& ws);

// One forward pass per grid point; the grid must be non-decreasing and the
// output is non-increasing.
std::vector<double> predict_curve(const Model& model, std::span<const double> x_raw,
                                  std::span<const double> t_grid);

}  // namespace monosurv
