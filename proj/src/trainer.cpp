#include "monosurv/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

namespace monosurv {

namespace {

// Seed-stream tags; every random draw in a run descends from one base seed.
constexpr std::uint64_t kStreamInit = 0x01;
constexpr std::uint64_t kStreamShuffle = 0x02;
constexpr std::uint64_t kStreamDropout = 0x03;
constexpr std::uint64_t kStreamSampler = 0x04;
constexpr std::uint64_t kStreamTrial = 0x05;

}  // namespace

NetworkConfig HyperParams::to_config(int covariate_dim) const {
    NetworkConfig config;
    config.covariate_dim = covariate_dim;
    config.cov_widths.assign(static_cast<std::size_t>(cov_layers), cov_nodes);
    config.mixed_widths.assign(static_cast<std::size_t>(mixed_layers), nodes_per_layer);
    config.head = head;
    config.dropout_rate = dropout;
    return config;
}

double RealDim::sample(Rng& rng) const {
    if (continuous) {
        return rng.uniform(lo, hi);
    }
    if (choices.empty()) {
        throw ConfigError("empty search dimension");
    }
    return choices[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(choices.size()) - 1))];
}

bool RealDim::contains(double v) const {
    if (continuous) {
        return v >= lo && v <= hi;
    }
    return std::find(choices.begin(), choices.end(), v) != choices.end();
}

HyperGrid HyperGrid::small_grid() {
    HyperGrid g;
    g.mixed_layers = {1, 2};
    g.cov_layers = {1, 2};
    g.nodes_per_layer = {8, 16, 32};
    g.cov_nodes = {8, 16, 32};
    g.dropout = RealDim::discrete({0.0, 0.1, 0.2, 0.3, 0.4, 0.5});
    g.weight_decay = RealDim::discrete({0.4, 0.2, 0.1, 0.05, 0.02, 0.01, 0.0});
    g.learning_rate = RealDim::discrete({1e-2, 1e-3, 1e-4});
    g.batch_sizes = {5, 10, 25, 50, 100, 250};
    g.heads = {HeadKind::Survival, HeadKind::Hazard};
    return g;
}

HyperGrid HyperGrid::large_grid() {
    HyperGrid g;
    g.mixed_layers = {1, 2, 4};
    g.cov_layers = {4, 6, 8};
    g.nodes_per_layer = {8, 16, 32, 64};
    g.cov_nodes = {128, 256, 512};
    g.dropout = RealDim::range(0.0, 0.7);
    g.weight_decay = RealDim::discrete({0.4, 0.2, 0.1, 0.05, 0.02, 0.01, 0.0});
    g.learning_rate = RealDim::discrete({1e-2, 1e-3, 1e-4});
    g.batch_sizes = {1000, 2500, 5000};
    g.heads = {HeadKind::Survival, HeadKind::Hazard};
    return g;
}

void HyperGrid::validate() const {
    if (mixed_layers.empty() || cov_layers.empty() || nodes_per_layer.empty() || cov_nodes.empty() ||
        batch_sizes.empty() || heads.empty()) {
        throw ConfigError("hyperparameter grid has an empty dimension");
    }
    if (!dropout.continuous && dropout.choices.empty()) throw ConfigError("empty dropout dimension");
    if (!weight_decay.continuous && weight_decay.choices.empty()) throw ConfigError("empty weight decay dimension");
    if (!learning_rate.continuous && learning_rate.choices.empty()) throw ConfigError("empty learning rate dimension");
}

namespace {

template <typename T>
T pick(Rng& rng, const std::vector<T>& values) {
    return values[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(values.size()) - 1))];
}

}  // namespace

HyperParams HyperGrid::sample(Rng& rng) const {
    HyperParams hp;
    hp.mixed_layers = pick(rng, mixed_layers);
    hp.cov_layers = pick(rng, cov_layers);
    hp.nodes_per_layer = pick(rng, nodes_per_layer);
    hp.cov_nodes = pick(rng, cov_nodes);
    hp.dropout = dropout.sample(rng);
    hp.weight_decay = weight_decay.sample(rng);
    hp.learning_rate = learning_rate.sample(rng);
    hp.batch_size = pick(rng, batch_sizes);
    hp.head = pick(rng, heads);
    return hp;
}

bool HyperGrid::contains(const HyperParams& hp) const {
    auto in = [](const auto& values, auto v) {
        return std::find(values.begin(), values.end(), v) != values.end();
    };
    return in(mixed_layers, hp.mixed_layers) && in(cov_layers, hp.cov_layers) &&
           in(nodes_per_layer, hp.nodes_per_layer) && in(cov_nodes, hp.cov_nodes) &&
           dropout.contains(hp.dropout) && weight_decay.contains(hp.weight_decay) &&
           learning_rate.contains(hp.learning_rate) && in(batch_sizes, hp.batch_size) &&
           in(heads, hp.head);
}

void Adam::reset() {
    std::fill(m_.begin(), m_.end(), 0.0);
    std::fill(v_.begin(), v_.end(), 0.0);
    t_ = 0;
}

void Adam::step(ParamStore& params, std::span<const double> grad, double learning_rate) {
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    ++t_;
    const double bias1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
    const double bias2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.raw.size(); ++i) {
        m_[i] = beta1 * m_[i] + (1.0 - beta1) * grad[i];
        v_[i] = beta2 * v_[i] + (1.0 - beta2) * grad[i] * grad[i];
        const double m_hat = m_[i] / bias1;
        const double v_hat = v_[i] / bias2;
        params.raw[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + eps);
    }
    params.refresh();
}

std::pair<Model, TrainReport> train_model(const NetworkConfig& config, const OptimSettings& optim,
                                          const StandardizedData& train, const StandardizedData& validation,
                                          const Preprocessing& prep, std::uint64_t seed) {
    if (train.n < 1 || validation.n < 1) {
        throw UsageError("train_model needs non-empty training and validation sets");
    }
    if (optim.batch_size < 1) {
        throw ConfigError("batch size must be at least 1");
    }
    const auto clock_start = std::chrono::steady_clock::now();

    Model model = init_model(config, derive_seed(seed, kStreamInit));
    model.prep = prep;

    const CensoredBatch train_batch = CensoredBatch::from_standardized(train);
    const CensoredBatch val_batch = CensoredBatch::from_standardized(validation);
    std::vector<int> val_idx(static_cast<std::size_t>(validation.n));
    std::iota(val_idx.begin(), val_idx.end(), 0);

    TrainReport report;
    report.seed = seed;

    std::vector<int> order(static_cast<std::size_t>(train.n));
    std::iota(order.begin(), order.end(), 0);

    Adam adam(model.params.size());
    Tape tape(&model.params);
    Workspace ws;
    report.initial_train_nll = nll_value(model, train_batch, order, ws);

    std::vector<double> best_raw = model.params.raw;
    double best_val = std::numeric_limits<double>::infinity();
    double learning_rate = optim.learning_rate;
    int epochs_without_improvement = 0;
    const bool apply_decay = optim.weight_decay > 0.0;

    int epoch = 0;
    while (epoch < optim.max_epochs) {
        Rng shuffle_rng(derive_seed(seed, kStreamShuffle + 0x100ULL * static_cast<std::uint64_t>(epoch)));
        shuffle_rng.shuffle(order);

        const std::vector<double> epoch_start_raw = model.params.raw;
        double loss_sum = 0.0;
        int batches = 0;
        bool diverged = false;
        std::string failure;

        for (int start = 0; start < train.n && !diverged; start += optim.batch_size) {
            const int len = std::min(optim.batch_size, train.n - start);
            const std::span<const int> chunk(order.data() + start, static_cast<std::size_t>(len));
            const std::uint64_t dropout_base =
                derive_seed(seed, kStreamDropout + 0x10000ULL * static_cast<std::uint64_t>(epoch) +
                                      static_cast<std::uint64_t>(start));
            tape.reset();
            double loss;
            try {
                loss = record_nll(model, train_batch, chunk, false, true, dropout_base, tape);
            } catch (const TrainingError& err) {
                diverged = true;
                failure = err.what();
                break;
            }
            std::vector<double> grad = reverse_gradients(tape, 1.0);
            if (apply_decay) {
                for (std::size_t i = 0; i < grad.size(); ++i) {
                    if (model.params.decayable[i] || (optim.decay_constrained && model.params.squared[i])) {
                        grad[i] += optim.weight_decay * model.params.raw[i];
                    }
                }
            }
            adam.step(model.params, grad, learning_rate);
            loss_sum += loss;
            ++batches;
        }

        double val = 0.0;
        if (!diverged) {
            try {
                val = nll_value(model, val_batch, val_idx, ws);
            } catch (const TrainingError& err) {
                diverged = true;
                failure = err.what();
            }
        }
        if (diverged) {
            if (report.lr_halvings >= 1) {
                throw TrainingError("loss stayed non-finite after halving the learning rate (epoch " +
                                    std::to_string(epoch) + ", lr " + std::to_string(learning_rate) +
                                    "): " + failure);
            }
            ++report.lr_halvings;
            learning_rate *= 0.5;
            model.params.raw = epoch_start_raw;
            model.params.refresh();
            adam.reset();
            continue;  // retry the same epoch at the halved rate
        }

        report.train_nll.push_back(loss_sum / static_cast<double>(batches));
        report.val_nll.push_back(val);
        if (val < best_val) {
            best_val = val;
            best_raw = model.params.raw;
            report.best_epoch = epoch;
            epochs_without_improvement = 0;
        } else {
            ++epochs_without_improvement;
        }
        ++epoch;
        if (epochs_without_improvement >= optim.patience) {
            report.stop_reason = "patience";
            break;
        }
    }
    if (report.stop_reason.empty()) {
        report.stop_reason = "max_epochs";
    }

    model.params.raw = best_raw;
    model.params.refresh();
    report.best_val_nll = best_val;
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
    return {std::move(model), std::move(report)};
}

SearchResult hyper_search(const HyperGrid& grid, int budget, const StandardizedData& train,
                          const StandardizedData& validation, const Preprocessing& prep,
                          std::uint64_t seed, int workers) {
    if (budget < 1) {
        throw UsageError("hyper_search needs a budget of at least 1");
    }
    if (workers < 1) {
        throw UsageError("hyper_search needs at least one worker");
    }
    grid.validate();

    Rng sampler(derive_seed(seed, kStreamSampler));
    std::vector<HyperParams> candidates;
    candidates.reserve(static_cast<std::size_t>(budget));
    const long long max_attempts = static_cast<long long>(budget) * 200;
    for (long long attempt = 0; attempt < max_attempts && static_cast<int>(candidates.size()) < budget; ++attempt) {
        const HyperParams hp = grid.sample(sampler);
        if (std::find(candidates.begin(), candidates.end(), hp) == candidates.end()) {
            candidates.push_back(hp);
        }
    }

    const std::size_t n_trials = candidates.size();
    std::vector<TrialResult> trials(n_trials);
    std::vector<Model> models(n_trials);
    std::vector<TrainReport> reports(n_trials);

    std::atomic<std::size_t> next{0};
    auto worker_loop = [&]() {
        for (std::size_t t = next.fetch_add(1); t < n_trials; t = next.fetch_add(1)) {
            TrialResult& trial = trials[t];
            trial.hyper = candidates[t];
            const std::uint64_t trial_seed = derive_seed(seed, kStreamTrial + (t << 8));
            try {
                auto [model, report] = train_model(candidates[t].to_config(train.p),
                                                   OptimSettings::from_hyper(candidates[t]), train,
                                                   validation, prep, trial_seed);
                trial.val_nll = report.best_val_nll;
                trial.param_count = model.layout.param_count;
                trial.best_epoch = report.best_epoch;
                trial.wall_seconds = report.wall_seconds;
                models[t] = std::move(model);
                reports[t] = std::move(report);
            } catch (const std::exception& err) {
                trial.failed = true;
                trial.error = err.what();
            }
        }
    };
    if (workers == 1 || n_trials <= 1) {
        worker_loop();
    } else {
        std::vector<std::thread> pool;
        const std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(workers), n_trials);
        pool.reserve(n_threads);
        for (std::size_t w = 0; w < n_threads; ++w) {
            pool.emplace_back(worker_loop);
        }
        for (std::thread& th : pool) {
            th.join();
        }
    }

    // Merge in trial order: minimum validation NLL, ties toward fewer
    // parameters, then the earlier trial.
    SearchResult result;
    for (std::size_t t = 0; t < n_trials; ++t) {
        const TrialResult& trial = trials[t];
        if (trial.failed) continue;
        const bool better = result.best_index < 0 ||
                            trial.val_nll < trials[static_cast<std::size_t>(result.best_index)].val_nll ||
                            (trial.val_nll == trials[static_cast<std::size_t>(result.best_index)].val_nll &&
                             trial.param_count < trials[static_cast<std::size_t>(result.best_index)].param_count);
        if (better) {
            result.best_index = static_cast<int>(t);
        }
    }
    if (result.best_index < 0) {
        std::string detail = "all " + std::to_string(n_trials) + " trials failed:";
        for (std::size_t t = 0; t < n_trials; ++t) {
            detail += "\n  trial " + std::to_string(t) + ": " + trials[t].error;
        }
        throw TrainingError(detail);
    }
    result.best_model = std::move(models[static_cast<std::size_t>(result.best_index)]);
    result.best_report = std::move(reports[static_cast<std::size_t>(result.best_index)]);
    result.trials = std::move(trials);
    return result;
}

MetricsReport evaluate_model(const Model& model, const Dataset& test, int grid_size) {
    EvaluateOptions options;
    options.grid_size = grid_size;
    return evaluate_model(model, test, options);
}

MetricsReport evaluate_model(const Model& model, const Dataset& test, const EvaluateOptions& options) {
    const int grid_size = options.grid_size;
    if (test.records.empty()) {
        throw UsageError("evaluate_model needs a non-empty test set");
    }
    const StandardizedData std_test = apply_preprocess(model.prep, test);
    const int n = std_test.n;

    std::vector<double> z_raw(static_cast<std::size_t>(n));
    std::vector<int> d(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        z_raw[static_cast<std::size_t>(i)] = test.records[static_cast<std::size_t>(i)].duration;
        d[static_cast<std::size_t>(i)] = test.records[static_cast<std::size_t>(i)].event;
    }
    std::vector<int> censor_flags(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        censor_flags[static_cast<std::size_t>(i)] = 1 - d[static_cast<std::size_t>(i)];
    }
    const KaplanMeierCurve censor_curve = KaplanMeierCurve::fit(z_raw, censor_flags);

    Workspace ws;
    const double scale = model.prep.duration_scale;
    const PredictorFn predictor = [&](double t, int subject) {
        const Dual h = forward_eval(model, t / scale, std_test.covariates(subject), ws);
        return head_transform(h, model.config.head).survival;
    };

    MetricsReport report;
    report.grid_size = grid_size;
    report.z_max = *std::max_element(z_raw.begin(), z_raw.end());
    try {
        report.c_td = concordance_td(predictor, z_raw, d, options.tie_rule);
    } catch (const UndefinedMetricError&) {
        report.c_td.reset();
    }
    report.ibs = integrate_grid(
        [&](double t) {
            return brier_score_at(t, predictor, z_raw, d, censor_curve, &report.ipcw_skipped_terms,
                                  options.censor_eval);
        },
        report.z_max, grid_size);
    report.ibll = integrate_grid(
        [&](double t) {
            return bll_at(t, predictor, z_raw, d, censor_curve, &report.ipcw_skipped_terms,
                          options.censor_eval);
        },
        report.z_max, grid_size);

    // Test NLL in original time units: the density of the scaled fit picks up
    // a 1/duration_scale factor.
    double nll = 0.0;
    for (int i = 0; i < n; ++i) {
        Dual h = forward_eval(model, std_test.z[static_cast<std::size_t>(i)], std_test.covariates(i), ws);
        if (d[static_cast<std::size_t>(i)] == 1) {
            h.tangent = density_slope(model, std_test.z[static_cast<std::size_t>(i)], std_test.covariates(i), h, ws);
        }
        const HeadOutput out = head_transform(h, model.config.head);
        if (d[static_cast<std::size_t>(i)] == 1) {
            if (model.config.head == HeadKind::Survival) {
                nll -= std::log(std::max(out.density / scale, kProbFloor));
            } else {
                nll += -std::log(std::max(out.hazard_rate / scale, kProbFloor)) + out.cumulative_hazard;
            }
        } else {
            if (model.config.head == HeadKind::Survival) {
                nll -= std::log(std::max(out.survival, kProbFloor));
            } else {
                nll += out.cumulative_hazard;
            }
        }
    }
    report.test_nll = nll / static_cast<double>(n);
    return report;
}

}  // namespace monosurv
