#include "monosurv/loss.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "monosurv/rng.hpp"

namespace monosurv {

void CensoredBatch::add(std::span<const double> xi, double zi, CensorKind k, double z2i) {
    if (p == 0) {
        p = static_cast<int>(xi.size());
    }
    if (static_cast<int>(xi.size()) != p) {
        throw InputError("record covariate dimension mismatch");
    }
    if (!std::isfinite(zi) || zi < 0.0) {
        throw InputError("durations must be finite and non-negative");
    }
    if (k == CensorKind::Interval) {
        if (!std::isfinite(z2i) || !(zi < z2i)) {
            throw InputError("interval record needs bounds z1 < z2");
        }
    }
    x.insert(x.end(), xi.begin(), xi.end());
    z.push_back(zi);
    z2.push_back(k == CensorKind::Interval ? z2i : zi);
    kind.push_back(k);
}

CensoredBatch CensoredBatch::from_standardized(const StandardizedData& data) {
    CensoredBatch batch;
    batch.p = data.p;
    batch.x = data.x;
    batch.z = data.z;
    batch.z2 = data.z;
    batch.kind.resize(static_cast<std::size_t>(data.n));
    for (int i = 0; i < data.n; ++i) {
        batch.kind[static_cast<std::size_t>(i)] = data.d[static_cast<std::size_t>(i)] ? CensorKind::Observed : CensorKind::Right;
    }
    return batch;
}

double nll_term_survival_form(CensorKind kind, const HeadOutput& at_z, const HeadOutput* at_z2) {
    switch (kind) {
        case CensorKind::Observed:
            return -std::log(std::max(at_z.density, kProbFloor));
        case CensorKind::Right:
            return -std::log(std::max(at_z.survival, kProbFloor));
        case CensorKind::Left:
            return -std::log(std::max(1.0 - at_z.survival, kProbFloor));
        case CensorKind::Interval:
            if (at_z2 == nullptr) {
                throw UsageError("interval term needs the head output at the upper bound");
            }
            return -std::log(std::max(at_z.survival - at_z2->survival, kProbFloor));
    }
    throw UsageError("unknown censoring kind");
}

double nll_term_hazard_form(CensorKind kind, const HeadOutput& at_z) {
    switch (kind) {
        case CensorKind::Observed:
            return -std::log(std::max(at_z.hazard_rate, kProbFloor)) + at_z.cumulative_hazard;
        case CensorKind::Right:
            return at_z.cumulative_hazard;
        default:
            throw UsageError("the hazard-form likelihood covers observed and right-censored records");
    }
}

namespace {

struct TermEval {
    double value = 0.0;
    double d_val1 = 0.0, d_tan1 = 0.0;
    double d_val2 = 0.0, d_tan2 = 0.0;
};

// Analytic partials of the per-record loss with respect to (h, dh/dt) at the
// record's duration(s). Floored terms are constants, so their partials are 0.
TermEval censored_term(HeadKind head, CensorKind kind, Dual h1, Dual h2) {
    TermEval out;
    const double s1 = sigmoid(h1.value);
    if (head == HeadKind::Survival) {
        switch (kind) {
            case CensorKind::Observed: {
                const double f = s1 * (1.0 - s1) * h1.tangent;
                if (f > kProbFloor) {
                    out.value = -std::log(f);
                    out.d_val1 = -(1.0 - 2.0 * s1);
                    out.d_tan1 = -1.0 / h1.tangent;
                } else {
                    out.value = -std::log(kProbFloor);
                }
                break;
            }
            case CensorKind::Right: {
                const double surv = 1.0 - s1;
                if (surv > kProbFloor) {
                    out.value = -std::log(surv);
                    out.d_val1 = s1;
                } else {
                    out.value = -std::log(kProbFloor);
                }
                break;
            }
            case CensorKind::Left: {
                if (s1 > kProbFloor) {
                    out.value = -std::log(s1);
                    out.d_val1 = -(1.0 - s1);
                } else {
                    out.value = -std::log(kProbFloor);
                }
                break;
            }
            case CensorKind::Interval: {
                const double s2 = sigmoid(h2.value);
                const double arg = s2 - s1;  // S(z1) - S(z2) with S = 1 - sigmoid(h)
                if (arg > kProbFloor) {
                    out.value = -std::log(arg);
                    out.d_val1 = s1 * (1.0 - s1) / arg;
                    out.d_val2 = -s2 * (1.0 - s2) / arg;
                } else {
                    out.value = -std::log(kProbFloor);
                }
                break;
            }
        }
        return out;
    }

    // hazard head
    const double cumhaz1 = softplus(h1.value);
    const double surv1 = std::exp(-cumhaz1);
    switch (kind) {
        case CensorKind::Observed: {
            const double rate = s1 * h1.tangent;
            if (rate > kProbFloor) {
                out.value = -std::log(rate) + cumhaz1;
                out.d_val1 = 2.0 * s1 - 1.0;
                out.d_tan1 = -1.0 / h1.tangent;
            } else {
                out.value = -std::log(kProbFloor) + cumhaz1;
                out.d_val1 = s1;
            }
            break;
        }
        case CensorKind::Right: {
            out.value = cumhaz1;
            out.d_val1 = s1;
            break;
        }
        case CensorKind::Left: {
            const double failed = -std::expm1(-cumhaz1);
            if (failed > kProbFloor) {
                out.value = -std::log(failed);
                out.d_val1 = -surv1 * s1 / failed;
            } else {
                out.value = -std::log(kProbFloor);
            }
            break;
        }
        case CensorKind::Interval: {
            const double s2 = sigmoid(h2.value);
            const double surv2 = std::exp(-softplus(h2.value));
            const double arg = surv1 - surv2;
            if (arg > kProbFloor) {
                out.value = -std::log(arg);
                out.d_val1 = surv1 * s1 / arg;
                out.d_val2 = -surv2 * s2 / arg;
            } else {
                out.value = -std::log(kProbFloor);
            }
            break;
        }
    }
    return out;
}

// Observed-record loss when the density uses the finite-difference slope
// (h(z + eps) - h(z)) / eps: partials go to the h values at both points and
// no tangent enters.
TermEval observed_term_fd(HeadKind head, Dual h1, Dual h2) {
    TermEval out;
    const double s1 = sigmoid(h1.value);
    const double slope = (h2.value - h1.value) / kDensityFdStep;
    if (head == HeadKind::Survival) {
        const double f = s1 * (1.0 - s1) * slope;
        if (f > kProbFloor) {
            out.value = -std::log(f);
            out.d_val1 = -(1.0 - 2.0 * s1) + 1.0 / (h2.value - h1.value);
            out.d_val2 = -1.0 / (h2.value - h1.value);
        } else {
            out.value = -std::log(kProbFloor);
        }
        return out;
    }
    const double cumhaz1 = softplus(h1.value);
    const double rate = s1 * slope;
    if (rate > kProbFloor) {
        out.value = -std::log(rate) + cumhaz1;
        out.d_val1 = (2.0 * s1 - 1.0) + 1.0 / (h2.value - h1.value);
        out.d_val2 = -1.0 / (h2.value - h1.value);
    } else {
        out.value = -std::log(kProbFloor) + cumhaz1;
        out.d_val1 = s1;
    }
    return out;
}

}  // namespace

double record_nll(const Model& model, const CensoredBatch& batch, std::span<const int> idx,
                  bool general, bool train_mode, std::uint64_t dropout_base, Tape& tape) {
    if (idx.empty()) {
        throw UsageError("likelihood over an empty batch is undefined");
    }
    const double coeff = 1.0 / static_cast<double>(idx.size());
    const HeadKind head = model.config.head;
    for (std::size_t pos = 0; pos < idx.size(); ++pos) {
        const int i = idx[pos];
        const CensorKind kind = batch.kind[static_cast<std::size_t>(i)];
        if (!general && kind != CensorKind::Observed && kind != CensorKind::Right) {
            throw UsageError("nll_right_censored requires observed or right-censored records only");
        }
        const std::uint64_t record_seed = derive_seed(dropout_base, static_cast<std::uint64_t>(pos));
        const ForwardResult at_z = forward_tape(model, batch.z[static_cast<std::size_t>(i)],
                                                batch.covariates(i), tape, train_mode, record_seed);
        TermEval term;
        if (kind == CensorKind::Observed && model.config.density_finite_difference) {
            // same dropout seed so both points see the same realized network
            const ForwardResult ahead =
                forward_tape(model, batch.z[static_cast<std::size_t>(i)] + kDensityFdStep,
                             batch.covariates(i), tape, train_mode, record_seed);
            term = observed_term_fd(head, at_z.h, ahead.h);
            tape.add_loss_term(at_z.h_slot, ahead.h_slot, coeff * term.value,
                               coeff * term.d_val1, 0.0, coeff * term.d_val2, 0.0);
        } else if (kind == CensorKind::Interval) {
            const ForwardResult at_z2 = forward_tape(model, batch.z2[static_cast<std::size_t>(i)],
                                                     batch.covariates(i), tape, train_mode,
                                                     derive_seed(record_seed, 1));
            term = censored_term(head, kind, at_z.h, at_z2.h);
            tape.add_loss_term(at_z.h_slot, at_z2.h_slot, coeff * term.value,
                               coeff * term.d_val1, coeff * term.d_tan1,
                               coeff * term.d_val2, coeff * term.d_tan2);
        } else {
            term = censored_term(head, kind, at_z.h, Dual{});
            tape.add_loss_term(at_z.h_slot, -1, coeff * term.value,
                               coeff * term.d_val1, coeff * term.d_tan1, 0.0, 0.0);
        }
        if (!std::isfinite(term.value)) {
            throw TrainingError("non-finite loss at record " + std::to_string(i));
        }
    }
    tape.finalize();
    return tape.loss();
}

namespace {

LossResult nll_with_gradient(const Model& model, const CensoredBatch& batch, bool general) {
    std::vector<int> idx(static_cast<std::size_t>(batch.size()));
    std::iota(idx.begin(), idx.end(), 0);
    Tape tape(&model.params);
    LossResult out;
    out.value = record_nll(model, batch, idx, general, false, 0, tape);
    out.gradient = reverse_gradients(tape, 1.0);
    return out;
}

}  // namespace

LossResult nll_right_censored(const Model& model, const CensoredBatch& batch) {
    return nll_with_gradient(model, batch, false);
}

LossResult nll_general_censoring(const Model& model, const CensoredBatch& batch) {
    return nll_with_gradient(model, batch, true);
}

double nll_value(const Model& model, const CensoredBatch& batch, std::span<const int> idx,
                 Workspace& ws) {
    if (idx.empty()) {
        throw UsageError("likelihood over an empty batch is undefined");
    }
    const HeadKind head = model.config.head;
    double total = 0.0;
    for (const int i : idx) {
        const CensorKind kind = batch.kind[static_cast<std::size_t>(i)];
        Dual h1 = forward_eval(model, batch.z[static_cast<std::size_t>(i)], batch.covariates(i), ws);
        Dual h2{};
        if (kind == CensorKind::Interval) {
            h2 = forward_eval(model, batch.z2[static_cast<std::size_t>(i)], batch.covariates(i), ws);
        } else if (kind == CensorKind::Observed) {
            h1.tangent = density_slope(model, batch.z[static_cast<std::size_t>(i)], batch.covariates(i), h1, ws);
        }
        const double value = censored_term(head, kind, h1, h2).value;
        if (!std::isfinite(value)) {
            throw TrainingError("non-finite loss at record " + std::to_string(i));
        }
        total += value;
    }
    return total / static_cast<double>(idx.size());
}

double nll_value(const Model& model, const CensoredBatch& batch) {
    std::vector<int> idx(static_cast<std::size_t>(batch.size()));
    std::iota(idx.begin(), idx.end(), 0);
    Workspace ws;
    return nll_value(model, batch, idx, ws);
}

}  // namespace monosurv
