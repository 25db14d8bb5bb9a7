#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "monosurv/data.hpp"
#include "monosurv/net.hpp"
#include "monosurv/tape.hpp"

namespace monosurv {

enum class CensorKind : std::uint8_t { Observed, Right, Left, Interval };

// Standardized covariates with scaled durations, one censoring tag per
// record. Interval records carry both bounds (z < z2); every other kind uses
// z alone.
struct CensoredBatch {
    int p = 0;
    std::vector<double> x;  // n*p row-major
    std::vector<double> z;
    std::vector<double> z2;
    std::vector<CensorKind> kind;

    int size() const { return static_cast<int>(z.size()); }
    std::span<const double> covariates(int i) const {
        return {x.data() + static_cast<std::size_t>(i) * p, static_cast<std::size_t>(p)};
    }
    void add(std::span<const double> xi, double zi, CensorKind k, double z2i = 0.0);

    // d=1 becomes Observed, d=0 Right.
    static CensoredBatch from_standardized(const StandardizedData& data);
};

// Probability floor applied inside every logarithm of the likelihood.
inline constexpr double kProbFloor = 1e-30;

// Per-record negative log-likelihood contributions at the formula level,
// evaluated from head outputs. The survival form consumes (f, S); the hazard
// form consumes (lambda, Lambda) and is defined for observed/right records.
// The two agree whenever lambda = f/S and Lambda = -log S.
double nll_term_survival_form(CensorKind kind, const HeadOutput& at_z, const HeadOutput* at_z2 = nullptr);
double nll_term_hazard_form(CensorKind kind, const HeadOutput& at_z);

struct LossResult {
    double value = 0.0;
    std::vector<double> gradient;
};

// Mean negative log-likelihood over right-censored records (Observed/Right
// tags only) with its gradient over all raw parameters. The survival head
// optimizes -mean[d log f + (1-d) log S], the hazard head the equivalent
// -mean[d log lambda - Lambda].
LossResult nll_right_censored(const Model& model, const CensoredBatch& batch);

// Mixed-censoring likelihood: observed -log f(z), right -log S(z), left
// -log(1 - S(z)), interval -log(S(z) - S(z2)).
LossResult nll_general_censoring(const Model& model, const CensoredBatch& batch);

// Loss value without recording a tape (validation / test evaluation).
double nll_value(const Model& model, const CensoredBatch& batch);

// Shared engine. Records every selected record's loss terms on the tape with
// coefficient 1/|idx| and returns the mean loss; reverse_gradients on the
// finalized tape yields the gradient. Per-record dropout seeds derive from
// dropout_base and the record's position in idx.
double record_nll(const Model& model, const CensoredBatch& batch, std::span<const int> idx,
                  bool general, bool train_mode, std::uint64_t dropout_base, Tape& tape);

double nll_value(const Model& model, const CensoredBatch& batch, std::span<const int> idx,
                 Workspace& ws);

}  // namespace monosurv
