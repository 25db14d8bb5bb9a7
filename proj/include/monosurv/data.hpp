#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "monosurv/errors.hpp"

namespace monosurv {

// One observation: covariates in original units, the observed duration
// z = min(event time, censoring time) and the event indicator d = 1{z = T}.
struct SurvivalRecord {
    std::vector<double> covariates;
    double duration = 0.0;
    int event = 0;
};

struct Dataset {
    std::vector<std::string> covariate_names;
    std::vector<SurvivalRecord> records;
    std::string provenance;

    // Latent event/censoring times, filled only by simulate_toy(keep_latents).
    std::vector<double> latent_event_time;
    std::vector<double> latent_censor_time;

    int covariate_dim() const {
        return records.empty() ? 0 : static_cast<int>(records.front().covariates.size());
    }
    std::size_t size() const { return records.size(); }
};

enum class ToyKind { Weibull, Normal, Checkerboard };

ToyKind parse_toy_kind(const std::string& name);
std::string toy_kind_name(ToyKind kind);

// Synthetic right-censored draws, X ~ Uniform[0,1]:
//   weibull:      T ~ Weibull(shape 2 + 6X, scale 1),     C ~ Exponential(mean 1.5)
//   normal:       T ~ Normal(100, 6X), C ~ Normal(100, 6), both clamped at 0,
//                 with the T standard deviation floored at 1e-3
//   checkerboard: T ~ CB(4,6 | X) on [0,1]^2,              C ~ Exponential(mean 1.5)
// Each record draws X, T, C in that order from one seeded stream, so output
// is reproducible from (kind, n, seed).
Dataset simulate_toy(ToyKind kind, int n, std::uint64_t seed, bool keep_latents = false);

// CSV with a header row; `duration_column` and `event_column` name two of the
// columns, every other column must be numeric and becomes a covariate in
// header order. Parse failures report 1-based row (header = row 1) and column.
Dataset load_csv(const std::string& path, const std::string& duration_column = "duration",
                 const std::string& event_column = "event");

// Comma-separated, header row, %.17g numerics so a round trip is value-exact.
void save_csv(const Dataset& data, const std::string& path);

// Training-set statistics applied to covariates and durations before the
// network sees them. Durations are divided by the maximum training duration;
// covariates are standardized to zero mean, unit variance.
struct Preprocessing {
    std::vector<double> covariate_mean;
    std::vector<double> covariate_sd;  // floored at 1e-12
    double duration_scale = 1.0;
};

Preprocessing fit_preprocess(const Dataset& train);

// Flattened standardized view consumed by the loss and trainer.
struct StandardizedData {
    int n = 0, p = 0;
    std::vector<double> x;  // n*p row-major standardized covariates
    std::vector<double> z;  // scaled durations (may exceed 1 on test data)
    std::vector<int> d;     // event indicators

    std::span<const double> covariates(int i) const {
        return {x.data() + static_cast<std::size_t>(i) * p, static_cast<std::size_t>(p)};
    }
};

StandardizedData apply_preprocess(const Preprocessing& prep, const Dataset& data);

// Seeded permutation split into k near-equal disjoint folds covering 0..n-1.
std::vector<std::vector<int>> kfold_split(int n, int k, std::uint64_t seed);

// Rotation schedule over k folds: round r tests on fold r, validates on fold
// (r+1) mod k and trains on the remaining k-2 folds.
struct FoldRound {
    std::vector<int> train, validation, test;
};

FoldRound fold_round(const std::vector<std::vector<int>>& folds, int round);

Dataset subset(const Dataset& data, std::span<const int> indices);

}  // namespace monosurv
