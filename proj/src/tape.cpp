#include "monosurv/tape.hpp"

#include <cmath>

#include "monosurv/errors.hpp"

namespace monosurv {

int ParamStore::add_block(int count, bool is_squared, bool is_decayable) {
    const int offset = static_cast<int>(raw.size());
    raw.resize(raw.size() + static_cast<std::size_t>(count), 0.0);
    squared.resize(raw.size(), is_squared ? 1 : 0);
    decayable.resize(raw.size(), is_decayable ? 1 : 0);
    effective.resize(raw.size(), 0.0);
    return offset;
}

void ParamStore::refresh() {
    for (std::size_t i = 0; i < raw.size(); ++i) {
        effective[i] = squared[i] ? raw[i] * raw[i] : raw[i];
    }
}

void Tape::reset() {
    values_.clear();
    tangents_.clear();
    ops_.clear();
    consts_.clear();
    terms_.clear();
    loss_ = 0.0;
    finalized_ = false;
}

int Tape::alloc_nodes(int n) {
    const int off = static_cast<int>(values_.size());
    values_.resize(values_.size() + static_cast<std::size_t>(n), 0.0);
    tangents_.resize(values_.size(), 0.0);
    return off;
}

int Tape::push_input(double value, double tangent) {
    const int slot = alloc_nodes(1);
    values_[static_cast<std::size_t>(slot)] = value;
    tangents_[static_cast<std::size_t>(slot)] = tangent;
    return slot;
}

int Tape::push_inputs(std::span<const double> values, double tangent) {
    const int off = alloc_nodes(static_cast<int>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) {
        values_[static_cast<std::size_t>(off) + i] = values[i];
        tangents_[static_cast<std::size_t>(off) + i] = tangent;
    }
    return off;
}

int Tape::affine(int w_slot, int b_slot, int out_n, int in_off, int in_n) {
    const int out = alloc_nodes(out_n);
    OpRec op{OpKind::Affine, Activation::Tanh, in_off, out, out_n, in_n, w_slot, b_slot, 0};
    execute(op);
    ops_.push_back(op);
    return out;
}

int Tape::activation(Activation kind, int in_off, int n) {
    const int out = alloc_nodes(n);
    OpRec op{OpKind::ActivationOp, kind, in_off, out, n, 0, 0, 0, 0};
    execute(op);
    ops_.push_back(op);
    return out;
}

int Tape::scale(int in_off, int n, std::span<const double> factors) {
    if (static_cast<int>(factors.size()) != n) {
        throw ConfigError("Tape::scale: factor count does not match node count");
    }
    const int c = static_cast<int>(consts_.size());
    consts_.insert(consts_.end(), factors.begin(), factors.end());
    const int out = alloc_nodes(n);
    OpRec op{OpKind::Scale, Activation::Tanh, in_off, out, n, 0, 0, 0, c};
    execute(op);
    ops_.push_back(op);
    return out;
}

int Tape::copy(int in_off, int n) {
    const int out = alloc_nodes(n);
    OpRec op{OpKind::Copy, Activation::Tanh, in_off, out, n, 0, 0, 0, 0};
    execute(op);
    ops_.push_back(op);
    return out;
}

void Tape::execute(const OpRec& op) {
    const double* v = values_.data();
    const double* t = tangents_.data();
    double* vo = values_.data() + op.out;
    double* to = tangents_.data() + op.out;
    switch (op.kind) {
        case OpKind::Affine: {
            const double* w = params_->effective.data() + op.w;
            const double* b = params_->effective.data() + op.b;
            const double* vi = v + op.in;
            const double* ti = t + op.in;
            for (int r = 0; r < op.n; ++r) {
                const double* wr = w + static_cast<std::size_t>(r) * op.m;
                double val = b[r];
                double tan = 0.0;
                for (int c = 0; c < op.m; ++c) {
                    val += wr[c] * vi[c];
                    tan += wr[c] * ti[c];
                }
                vo[r] = val;
                to[r] = tan;
            }
            break;
        }
        case OpKind::ActivationOp: {
            const double* vi = v + op.in;
            const double* ti = t + op.in;
            for (int i = 0; i < op.n; ++i) {
                vo[i] = activate(op.act, vi[i]);
                to[i] = activate_slope(op.act, vi[i]) * ti[i];
            }
            break;
        }
        case OpKind::Scale: {
            const double* vi = v + op.in;
            const double* ti = t + op.in;
            const double* f = consts_.data() + op.c;
            for (int i = 0; i < op.n; ++i) {
                vo[i] = f[i] * vi[i];
                to[i] = f[i] * ti[i];
            }
            break;
        }
        case OpKind::Copy: {
            const double* vi = v + op.in;
            const double* ti = t + op.in;
            for (int i = 0; i < op.n; ++i) {
                vo[i] = vi[i];
                to[i] = ti[i];
            }
            break;
        }
    }
}

void Tape::add_loss_term(int node_a, int node_b, double value,
                         double d_val_a, double d_tan_a,
                         double d_val_b, double d_tan_b) {
    terms_.push_back({node_a, node_b, value, d_val_a, d_tan_a, d_val_b, d_tan_b});
    loss_ += value;
}

void Tape::loss_from_value(int node, double coeff) {
    add_loss_term(node, -1, coeff * values_[static_cast<std::size_t>(node)], coeff, 0.0, 0.0, 0.0);
}

void Tape::loss_from_tangent(int node, double coeff) {
    add_loss_term(node, -1, coeff * tangents_[static_cast<std::size_t>(node)], 0.0, coeff, 0.0, 0.0);
}

void Tape::replay() {
    double replayed_loss = 0.0;
    for (const OpRec& op : ops_) {
        execute(op);
    }
    for (const LossTermRec& term : terms_) {
        replayed_loss += term.value;
    }
    loss_ = replayed_loss;
}

std::vector<double> reverse_gradients(Tape& tape, double loss_adjoint) {
    if (!tape.finalized_) {
        throw UsageError("reverse_gradients: tape has not been finalized");
    }
    const ParamStore& params = *tape.params_;
    std::vector<double> grad(params.size(), 0.0);

    tape.adj_val_.assign(tape.values_.size(), 0.0);
    tape.adj_tan_.assign(tape.values_.size(), 0.0);
    double* av = tape.adj_val_.data();
    double* at = tape.adj_tan_.data();

    // Seed from the loss terms. They are the only consumers of node state.
    for (const Tape::LossTermRec& term : tape.terms_) {
        av[term.a] += loss_adjoint * term.d_val_a;
        at[term.a] += loss_adjoint * term.d_tan_a;
        if (term.b >= 0) {
            av[term.b] += loss_adjoint * term.d_val_b;
            at[term.b] += loss_adjoint * term.d_tan_b;
        }
    }

    const double* v = tape.values_.data();
    const double* t = tape.tangents_.data();
    for (auto it = tape.ops_.rbegin(); it != tape.ops_.rend(); ++it) {
        const Tape::OpRec& op = *it;
        switch (op.kind) {
            case Tape::OpKind::Affine: {
                const double* w = params.effective.data() + op.w;
                const double* vi = v + op.in;
                const double* ti = t + op.in;
                double* avi = av + op.in;
                double* ati = at + op.in;
                const double* avo = av + op.out;
                const double* ato = at + op.out;
                for (int r = 0; r < op.n; ++r) {
                    const double* wr = w + static_cast<std::size_t>(r) * op.m;
                    double* gw = grad.data() + op.w + static_cast<std::size_t>(r) * op.m;
                    const double a_v = avo[r];
                    const double a_t = ato[r];
                    for (int c = 0; c < op.m; ++c) {
                        avi[c] += wr[c] * a_v;
                        ati[c] += wr[c] * a_t;
                        gw[c] += a_v * vi[c] + a_t * ti[c];
                    }
                    grad[static_cast<std::size_t>(op.b) + r] += a_v;
                }
                break;
            }
            case Tape::OpKind::ActivationOp: {
                const double* vi = v + op.in;
                const double* ti = t + op.in;
                for (int i = 0; i < op.n; ++i) {
                    const double slope = activate_slope(op.act, vi[i]);
                    const double curv = activate_curvature(op.act, vi[i]);
                    av[op.in + i] += av[op.out + i] * slope + at[op.out + i] * curv * ti[i];
                    at[op.in + i] += at[op.out + i] * slope;
                }
                break;
            }
            case Tape::OpKind::Scale: {
                const double* f = tape.consts_.data() + op.c;
                for (int i = 0; i < op.n; ++i) {
                    av[op.in + i] += f[i] * av[op.out + i];
                    at[op.in + i] += f[i] * at[op.out + i];
                }
                break;
            }
            case Tape::OpKind::Copy: {
                for (int i = 0; i < op.n; ++i) {
                    av[op.in + i] += av[op.out + i];
                    at[op.in + i] += at[op.out + i];
                }
                break;
            }
        }
    }

    // Chain from effective weights back to raw values.
    for (std::size_t i = 0; i < grad.size(); ++i) {
        grad[i] *= params.chain(i);
    }
    return grad;
}

FiniteDiffReport finite_diff_check(
    const std::function<std::pair<double, std::vector<double>>(const std::vector<double>&)>& fn,
    const std::vector<double>& params, double step) {
    if (step <= 0.0) {
        throw UsageError("finite_diff_check: step must be positive");
    }
    FiniteDiffReport report;
    if (params.empty()) {
        return report;
    }
    // Copy first: fn may evaluate through state that aliases `params`.
    const std::vector<double> base = params;
    const auto [center, analytic] = fn(base);
    if (!std::isfinite(center)) {
        report.ok = false;
        report.failed_param = -1;
        report.message = "loss non-finite at the unperturbed point";
        return report;
    }
    std::vector<double> perturbed = base;
    for (std::size_t i = 0; i < base.size(); ++i) {
        perturbed[i] = base[i] + step;
        const double hi = fn(perturbed).first;
        perturbed[i] = base[i] - step;
        const double lo = fn(perturbed).first;
        perturbed[i] = base[i];
        if (!std::isfinite(hi) || !std::isfinite(lo)) {
            report.ok = false;
            report.failed_param = static_cast<int>(i);
            report.message = "loss non-finite at perturbed parameter " + std::to_string(i);
            return report;
        }
        const double central = (hi - lo) / (2.0 * step);
        const double rel = std::abs(analytic[i] - central) /
                           (std::abs(analytic[i]) + std::abs(central) + 1e-12);
        if (rel > report.max_rel_error) {
            report.max_rel_error = rel;
            report.worst_param = static_cast<int>(i);
        }
    }
    return report;
}

}  // namespace monosurv
