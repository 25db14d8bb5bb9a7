#include "monosurv/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace monosurv {

KaplanMeierCurve KaplanMeierCurve::fit(std::span<const double> times, std::span<const int> events) {
    if (times.empty()) {
        throw UsageError("Kaplan-Meier estimate of an empty sample is undefined");
    }
    if (times.size() != events.size()) {
        throw UsageError("Kaplan-Meier inputs must have equal lengths");
    }
    for (const int e : events) {
        if (e != 0 && e != 1) {
            throw InputError("event indicators must be 0 or 1");
        }
    }
    std::vector<int> order(times.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return times[static_cast<std::size_t>(a)] < times[static_cast<std::size_t>(b)];
    });

    KaplanMeierCurve curve;
    double survival = 1.0;
    std::size_t at_risk = times.size();
    std::size_t pos = 0;
    while (pos < order.size()) {
        const double t = times[static_cast<std::size_t>(order[pos])];
        std::size_t deaths = 0, censored = 0;
        while (pos < order.size() && times[static_cast<std::size_t>(order[pos])] == t) {
            if (events[static_cast<std::size_t>(order[pos])]) {
                ++deaths;
            } else {
                ++censored;
            }
            ++pos;
        }
        if (deaths > 0) {
            survival *= 1.0 - static_cast<double>(deaths) / static_cast<double>(at_risk);
            curve.times_.push_back(t);
            curve.values_.push_back(survival);
        }
        at_risk -= deaths + censored;
    }
    return curve;
}

double KaplanMeierCurve::at(double t) const {
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    if (it == times_.begin()) {
        return 1.0;
    }
    return values_[static_cast<std::size_t>(it - times_.begin()) - 1];
}

double KaplanMeierCurve::left_limit(double t) const {
    const auto it = std::lower_bound(times_.begin(), times_.end(), t);
    if (it == times_.begin()) {
        return 1.0;
    }
    return values_[static_cast<std::size_t>(it - times_.begin()) - 1];
}

double concordance_td(const PredictorFn& predictor, std::span<const double> z,
                      std::span<const int> d, TieRule rule) {
    const std::size_t n = z.size();
    if (n != d.size()) {
        throw UsageError("concordance inputs must have equal lengths");
    }
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return z[static_cast<std::size_t>(a)] < z[static_cast<std::size_t>(b)];
    });

    std::vector<double> pred(n, 0.0);
    double concordant = 0.0;
    long long comparable = 0;
    std::size_t group = 0;
    while (group < n) {
        const double zi = z[static_cast<std::size_t>(order[group])];
        std::size_t group_end = group;
        bool any_event = false;
        while (group_end < n && z[static_cast<std::size_t>(order[group_end])] == zi) {
            any_event = any_event || d[static_cast<std::size_t>(order[group_end])] == 1;
            ++group_end;
        }
        if (group_end < n && any_event) {
            // Predictions at the group's event time for everyone still needed.
            for (std::size_t pos = group; pos < n; ++pos) {
                pred[static_cast<std::size_t>(order[pos])] = predictor(zi, order[pos]);
            }
            for (std::size_t k = group; k < group_end; ++k) {
                const int i = order[k];
                if (d[static_cast<std::size_t>(i)] != 1) continue;
                const double si = pred[static_cast<std::size_t>(i)];
                for (std::size_t jpos = group_end; jpos < n; ++jpos) {
                    const double sj = pred[static_cast<std::size_t>(order[jpos])];
                    ++comparable;
                    if (si < sj) {
                        concordant += 1.0;
                    } else if (rule == TieRule::HalfCredit && si == sj) {
                        concordant += 0.5;
                    }
                }
            }
        }
        group = group_end;
    }
    if (comparable == 0) {
        throw UndefinedMetricError("concordance is undefined: no comparable pairs");
    }
    return concordant / static_cast<double>(comparable);
}

double brier_score_at(double t, const PredictorFn& predictor, std::span<const double> z,
                      std::span<const int> d, const KaplanMeierCurve& censor_curve,
                      long long* skipped, CensorEval censor_eval) {
    const std::size_t m = z.size();
    if (m == 0) {
        throw UsageError("Brier score of an empty sample is undefined");
    }
    const double g_at_t = censor_curve.at(t);
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double s = predictor(t, static_cast<int>(i));
        if (z[i] <= t && d[i] == 1) {
            const double g = censor_eval == CensorEval::LeftLimit ? censor_curve.left_limit(z[i])
                                                                  : censor_curve.at(z[i]);
            if (g <= 0.0) {
                if (skipped) ++*skipped;
                continue;
            }
            sum += s * s / g;
        } else if (z[i] > t) {
            if (g_at_t <= 0.0) {
                if (skipped) ++*skipped;
                continue;
            }
            sum += (1.0 - s) * (1.0 - s) / g_at_t;
        }
    }
    return sum / static_cast<double>(m);
}

double bll_at(double t, const PredictorFn& predictor, std::span<const double> z,
              std::span<const int> d, const KaplanMeierCurve& censor_curve,
              long long* skipped, CensorEval censor_eval) {
    const std::size_t m = z.size();
    if (m == 0) {
        throw UsageError("binomial log-likelihood of an empty sample is undefined");
    }
    const double g_at_t = censor_curve.at(t);
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double s = std::clamp(predictor(t, static_cast<int>(i)), 1e-15, 1.0 - 1e-15);
        if (z[i] <= t && d[i] == 1) {
            const double g = censor_eval == CensorEval::LeftLimit ? censor_curve.left_limit(z[i])
                                                                  : censor_curve.at(z[i]);
            if (g <= 0.0) {
                if (skipped) ++*skipped;
                continue;
            }
            sum += std::log(1.0 - s) / g;
        } else if (z[i] > t) {
            if (g_at_t <= 0.0) {
                if (skipped) ++*skipped;
                continue;
            }
            sum += std::log(s) / g_at_t;
        }
    }
    return sum / static_cast<double>(m);
}

double integrate_grid(const std::function<double(double)>& score_fn, double z_max, int grid_size) {
    if (!(z_max > 0.0)) {
        throw UsageError("integrate_grid requires z_max > 0");
    }
    if (grid_size < 1) {
        throw UsageError("integrate_grid requires at least one grid point");
    }
    double sum = 0.0;
    for (int k = 1; k <= grid_size; ++k) {
        sum += score_fn(z_max * static_cast<double>(k) / static_cast<double>(grid_size));
    }
    return sum / static_cast<double>(grid_size);
}

}  // namespace monosurv
