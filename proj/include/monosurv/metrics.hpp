#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "monosurv/errors.hpp"

namespace monosurv {

// Product-limit estimate. Right-continuous step function equal to 1 before
// the first event time; steps only occur at times with at least one event,
// with ties processed as simultaneous events over the at-risk count.
class KaplanMeierCurve {
public:
    static KaplanMeierCurve fit(std::span<const double> times, std::span<const int> events);

    double at(double t) const;          // right-continuous value S(t)
    double left_limit(double t) const;  // S(t-)

    const std::vector<double>& step_times() const { return times_; }
    const std::vector<double>& step_values() const { return values_; }

private:
    std::vector<double> times_;   // ascending distinct event times
    std::vector<double> values_;  // survival value just after each time
};

// Survival prediction S(t | subject i) for the test subjects a metric ranges
// over; t is in original time units.
using PredictorFn = std::function<double(double t, int subject)>;

enum class TieRule { Strict, HalfCredit };

// How the censoring curve is read at an event time z_i: the standard IPCW
// left limit G(z-), or the right-continuous value G(z).
enum class CensorEval { LeftLimit, At };

// Time-dependent concordance: among pairs with z_i < z_j and d_i = 1, the
// fraction with S(z_i|x_i) < S(z_i|x_j). Under the strict rule tied
// predictions earn no credit; HalfCredit awards 0.5.
double concordance_td(const PredictorFn& predictor, std::span<const double> z,
                      std::span<const int> d, TieRule rule = TieRule::Strict);

// IPCW Brier score at time t; event terms weight by 1/G at z_i (per
// censor_eval), at-risk terms by 1/G(t). Terms whose G evaluation is 0 are
// skipped and counted into *skipped when given.
double brier_score_at(double t, const PredictorFn& predictor, std::span<const double> z,
                      std::span<const int> d, const KaplanMeierCurve& censor_curve,
                      long long* skipped = nullptr, CensorEval censor_eval = CensorEval::LeftLimit);

// IPCW binomial log-likelihood at time t; survival probabilities are clamped
// to [1e-15, 1 - 1e-15] inside the logarithms.
double bll_at(double t, const PredictorFn& predictor, std::span<const double> z,
              std::span<const int> d, const KaplanMeierCurve& censor_curve,
              long long* skipped = nullptr, CensorEval censor_eval = CensorEval::LeftLimit);

// Mean of score_fn over grid_size equally spaced times z_max/grid_size, ...,
// z_max (the time integral normalized by z_max). Applied to brier_score_at
// this yields the IBS, to bll_at the IBLL.
double integrate_grid(const std::function<double(double)>& score_fn, double z_max,
                      int grid_size = 100);

struct MetricsReport {
    std::optional<double> c_td;  // missing when no comparable pairs exist
    double ibs = 0.0;
    double ibll = 0.0;
    double test_nll = 0.0;
    int grid_size = 100;
    double z_max = 0.0;
    long long ipcw_skipped_terms = 0;
};

}  // namespace monosurv
