#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "monosurv/dual.hpp"

namespace monosurv {

// Flat store of raw (unconstrained) parameters. Entries flagged `squared`
// enter the network as raw^2, which keeps the corresponding effective weight
// non-negative. `effective` is a cache; call refresh() after mutating raw.
struct ParamStore {
    std::vector<double> raw;
    std::vector<std::uint8_t> squared;    // effective = raw^2
    std::vector<std::uint8_t> decayable;  // weight decay applies (unconstrained weights)
    std::vector<double> effective;

    int add_block(int count, bool is_squared, bool is_decayable);
    void refresh();
    std::size_t size() const { return raw.size(); }
    // d(effective)/d(raw) for slot i
    double chain(std::size_t i) const { return squared[i] ? 2.0 * raw[i] : 1.0; }
};

// Record of one evaluation: an ordered list of primitive operations over
// (value, tangent) node pairs, plus the scalar loss terms they feed. Inputs
// precede the operations that consume them; replaying the list reproduces the
// recorded streams bit-for-bit. One evaluation/gradient pass owns a tape at a
// time; distinct tapes may share a read-only ParamStore.
class Tape {
public:
    explicit Tape(const ParamStore* params = nullptr) : params_(params) {}

    void bind(const ParamStore* params) { params_ = params; }
    const ParamStore* params() const { return params_; }

    // Clears ops, nodes and loss terms but keeps buffer capacity.
    void reset();

    // Leaf nodes.
    int push_input(double value, double tangent);
    int push_inputs(std::span<const double> values, double tangent);

    // Primitive operations; each executes immediately and returns the offset
    // of its first output node.
    int affine(int w_slot, int b_slot, int out_n, int in_off, int in_n);
    int activation(Activation kind, int in_off, int n);
    int scale(int in_off, int n, std::span<const double> factors);
    int copy(int in_off, int n);

    // Scalar loss contributions. The recorder supplies the term value and its
    // partial derivatives with respect to the referenced nodes' value and
    // tangent components, evaluated at the recorded state.
    void add_loss_term(int node_a, int node_b, double value,
                       double d_val_a, double d_tan_a,
                       double d_val_b, double d_tan_b);
    void loss_from_value(int node, double coeff = 1.0);
    void loss_from_tangent(int node, double coeff = 1.0);

    void finalize() { finalized_ = true; }
    bool finalized() const { return finalized_; }

    double loss() const { return loss_; }
    Dual node(int slot) const { return {values_[static_cast<std::size_t>(slot)], tangents_[static_cast<std::size_t>(slot)]}; }
    std::size_t node_count() const { return values_.size(); }
    const std::vector<double>& values() const { return values_; }
    const std::vector<double>& tangents() const { return tangents_; }

    // Re-executes the recorded operations over the stored input nodes,
    // overwriting all derived node slots and the loss. Loss-term partials are
    // kept as recorded; they are pure functions of the replayed streams.
    void replay();

    friend std::vector<double> reverse_gradients(Tape& tape, double loss_adjoint);

private:
    enum class OpKind : std::uint8_t { Affine, ActivationOp, Scale, Copy };

    struct OpRec {
        OpKind kind;
        Activation act;
        int in, out, n, m;  // node offsets and counts; affine uses m = input count
        int w, b, c;        // parameter slots / constant offset
    };

    struct LossTermRec {
        int a, b;
        double value;
        double d_val_a, d_tan_a, d_val_b, d_tan_b;
    };

    int alloc_nodes(int n);
    void execute(const OpRec& op);

    const ParamStore* params_ = nullptr;
    std::vector<double> values_, tangents_;
    std::vector<OpRec> ops_;
    std::vector<double> consts_;
    std::vector<LossTermRec> terms_;
    double loss_ = 0.0;
    bool finalized_ = false;

    // adjoint buffers, zeroed at the start of every reverse pass
    std::vector<double> adj_val_, adj_tan_;
};

// Reverse-mode accumulation through the recorded (value, tangent) computation.
// Returns d(loss_adjoint * loss)/d(raw parameter) for every slot of the bound
// ParamStore, including the second-order path through tangents. The recorded
// streams are left untouched; only the adjoint scratch buffers are written.
std::vector<double> reverse_gradients(Tape& tape, double loss_adjoint);

// Central-difference validation of an analytic gradient.
struct FiniteDiffReport {
    bool ok = true;
    double max_rel_error = 0.0;
    int worst_param = -1;
    int failed_param = -1;  // parameter whose perturbed loss was non-finite
    std::string message;
};

// fn(params) returns (loss, gradient). The gradient is taken from the
// unperturbed call; perturbed calls use only the loss value. Relative error
// is |analytic - central| / (|analytic| + |central| + 1e-12), maximized over
// parameters (0 over an empty parameter vector).
FiniteDiffReport finite_diff_check(
    const std::function<std::pair<double, std::vector<double>>(const std::vector<double>&)>& fn,
    const std::vector<double>& params, double step);

}  // namespace monosurv
