#include "monosurv/net.hpp"

#include <cmath>
#include <optional>
#include <string>

#include "monosurv/rng.hpp"

namespace monosurv {

HeadKind parse_head_kind(const std::string& name) {
    if (name == "survival") return HeadKind::Survival;
    if (name == "hazard") return HeadKind::Hazard;
    throw UsageError("unknown head '" + name + "' (expected survival or hazard)");
}

std::string head_kind_name(HeadKind head) {
    return head == HeadKind::Survival ? "survival" : "hazard";
}

void NetworkConfig::validate() const {
    if (covariate_dim < 1) {
        throw ConfigError("covariate_dim must be at least 1");
    }
    if (cov_widths.empty() || mixed_widths.empty()) {
        throw ConfigError("both subnetworks need at least one hidden layer");
    }
    for (const int w : cov_widths) {
        if (w < 1) throw ConfigError("covariate layer widths must be at least 1");
    }
    for (const int w : mixed_widths) {
        if (w < 1) throw ConfigError("mixed layer widths must be at least 1");
    }
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
        throw ConfigError("dropout_rate must lie in [0, 1)");
    }
}

NetLayout build_layout(const NetworkConfig& config, ParamStore& store) {
    config.validate();
    NetLayout layout;
    int in_dim = config.covariate_dim;
    for (const int width : config.cov_widths) {
        LayerSlots slots;
        slots.rows = width;
        slots.cols = in_dim;
        slots.w = store.add_block(width * in_dim, false, true);
        slots.b = store.add_block(width, false, false);
        layout.cov.push_back(slots);
        in_dim = width;
    }
    const int u_dim = config.cov_widths.back();
    in_dim = 1 + u_dim;
    for (std::size_t l = 0; l <= config.mixed_widths.size(); ++l) {
        const bool output_layer = (l == config.mixed_widths.size());
        const int width = output_layer ? 1 : config.mixed_widths[l];
        LayerSlots slots;
        slots.rows = width;
        slots.cols = in_dim;
        if (l == 0) {
            // Interleaved [t | u] columns: only the t column is constrained.
            slots.w = store.add_block(width * in_dim, false, true);
            for (int r = 0; r < width; ++r) {
                const std::size_t t_slot = static_cast<std::size_t>(slots.w) + static_cast<std::size_t>(r) * in_dim;
                store.squared[t_slot] = 1;
                store.decayable[t_slot] = 0;
            }
        } else {
            slots.w = store.add_block(width * in_dim, true, false);
        }
        slots.b = store.add_block(width, false, false);
        layout.mixed.push_back(slots);
        in_dim = width;
    }
    layout.param_count = static_cast<int>(store.size());
    return layout;
}

Model init_model(const NetworkConfig& config, std::uint64_t seed) {
    Model model;
    model.config = config;
    model.layout = build_layout(config, model.params);

    Rng rng(derive_seed(seed, 0x1417u));
    auto unconstrained = [&](int fan_in) {
        const double s = std::sqrt(1.0 / fan_in);
        return rng.uniform(-s, s);
    };
    auto constrained = [&](int fan_in) {
        const double c = std::pow(1.0 / fan_in, 0.25);
        const double magnitude = rng.uniform(0.3 * c, 1.0 * c);
        return rng.u01() < 0.5 ? -magnitude : magnitude;
    };

    for (const LayerSlots& slots : model.layout.cov) {
        for (int i = 0; i < slots.rows * slots.cols; ++i) {
            model.params.raw[static_cast<std::size_t>(slots.w + i)] = unconstrained(slots.cols);
        }
    }
    for (std::size_t l = 0; l < model.layout.mixed.size(); ++l) {
        const LayerSlots& slots = model.layout.mixed[l];
        for (int r = 0; r < slots.rows; ++r) {
            for (int c = 0; c < slots.cols; ++c) {
                const std::size_t idx = static_cast<std::size_t>(slots.w) +
                                        static_cast<std::size_t>(r) * slots.cols + c;
                const bool is_constrained = (l == 0) ? (c == 0) : true;
                model.params.raw[idx] = is_constrained ? constrained(slots.cols) : unconstrained(slots.cols);
            }
        }
    }
    model.params.refresh();
    model.prep.covariate_mean.assign(static_cast<std::size_t>(config.covariate_dim), 0.0);
    model.prep.covariate_sd.assign(static_cast<std::size_t>(config.covariate_dim), 1.0);
    model.prep.duration_scale = 1.0;
    return model;
}

namespace {

void check_inputs(const Model& model, double t, std::span<const double> x) {
    if (static_cast<int>(x.size()) != model.config.covariate_dim) {
        throw InputError("covariate vector has length " + std::to_string(x.size()) + ", expected " +
                         std::to_string(model.config.covariate_dim));
    }
    if (!std::isfinite(t)) {
        throw InputError("time input is not finite");
    }
    for (const double v : x) {
        if (!std::isfinite(v)) {
            throw InputError("covariate input is not finite");
        }
    }
}

void draw_masks(Rng& rng, double rate, int n, std::vector<double>& out) {
    const double keep_scale = 1.0 / (1.0 - rate);
    out.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] = (rng.u01() >= rate) ? keep_scale : 0.0;
    }
}

}  // namespace

ForwardResult forward_tape(const Model& model, double t, std::span<const double> x,
                           Tape& tape, bool train_mode, std::uint64_t dropout_seed) {
    check_inputs(model, t, x);
    tape.bind(&model.params);

    const bool dropout = train_mode && model.config.dropout_rate > 0.0;
    std::optional<Rng> rng;
    if (dropout) {
        rng.emplace(derive_seed(dropout_seed, 0xD120u));
    }
    std::vector<double> mask;

    int cur = tape.push_inputs(x, 0.0);
    int cur_n = model.config.covariate_dim;
    for (const LayerSlots& slots : model.layout.cov) {
        cur = tape.affine(slots.w, slots.b, slots.rows, cur, cur_n);
        cur_n = slots.rows;
        cur = tape.activation(Activation::Tanh, cur, cur_n);
        if (dropout) {
            draw_masks(*rng, model.config.dropout_rate, cur_n, mask);
            cur = tape.scale(cur, cur_n, mask);
        }
    }

    // Assemble the mixed input [t, u] contiguously; t enters with tangent 1.
    const int t_slot = tape.push_input(t, 1.0);
    tape.copy(cur, cur_n);
    cur = t_slot;
    cur_n = 1 + cur_n;

    const std::size_t n_mixed = model.layout.mixed.size();
    for (std::size_t l = 0; l + 1 < n_mixed; ++l) {
        const LayerSlots& slots = model.layout.mixed[l];
        cur = tape.affine(slots.w, slots.b, slots.rows, cur, cur_n);
        cur_n = slots.rows;
        cur = tape.activation(Activation::Tanh, cur, cur_n);
        if (dropout && model.config.dropout_on_mixed) {
            draw_masks(*rng, model.config.dropout_rate, cur_n, mask);
            cur = tape.scale(cur, cur_n, mask);
        }
    }
    const LayerSlots& out_slots = model.layout.mixed.back();
    const int h_slot = tape.affine(out_slots.w, out_slots.b, 1, cur, cur_n);
    return {tape.node(h_slot), h_slot};
}

Dual forward_eval(const Model& model, double t, std::span<const double> x, Workspace& ws) {
    check_inputs(model, t, x);
    const std::vector<double>& eff = model.params.effective;

    std::vector<Dual>* in = &ws.a;
    std::vector<Dual>* out = &ws.b;
    in->resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        (*in)[i] = {x[i], 0.0};
    }
    for (const LayerSlots& slots : model.layout.cov) {
        out->resize(static_cast<std::size_t>(slots.rows));
        dual_affine(std::span<const double>(eff.data() + slots.w, static_cast<std::size_t>(slots.rows) * slots.cols),
                    std::span<const double>(eff.data() + slots.b, static_cast<std::size_t>(slots.rows)),
                    std::span<const Dual>(*in), std::span<Dual>(*out));
        for (Dual& d : *out) {
            d = dual_activation(Activation::Tanh, d);
        }
        std::swap(in, out);
    }

    out->resize(in->size() + 1);
    (*out)[0] = {t, 1.0};
    for (std::size_t i = 0; i < in->size(); ++i) {
        (*out)[i + 1] = (*in)[i];
    }
    std::swap(in, out);

    const std::size_t n_mixed = model.layout.mixed.size();
    for (std::size_t l = 0; l < n_mixed; ++l) {
        const LayerSlots& slots = model.layout.mixed[l];
        out->resize(static_cast<std::size_t>(slots.rows));
        dual_affine(std::span<const double>(eff.data() + slots.w, static_cast<std::size_t>(slots.rows) * slots.cols),
                    std::span<const double>(eff.data() + slots.b, static_cast<std::size_t>(slots.rows)),
                    std::span<const Dual>(*in), std::span<Dual>(*out));
        if (l + 1 < n_mixed) {
            for (Dual& d : *out) {
                d = dual_activation(Activation::Tanh, d);
            }
        }
        std::swap(in, out);
    }
    return in->front();
}

HeadOutput head_transform(Dual h, HeadKind head) {
    HeadOutput out;
    if (head == HeadKind::Survival) {
        const double s = sigmoid(h.value);
        out.survival = 1.0 - s;
        out.density = s * (1.0 - s) * h.tangent;
        out.cumulative_hazard = softplus(h.value);
        out.hazard_rate = s * h.tangent;
    } else {
        const double s = sigmoid(h.value);
        out.cumulative_hazard = softplus(h.value);
        out.survival = std::exp(-out.cumulative_hazard);
        out.hazard_rate = s * h.tangent;
        out.density = out.hazard_rate * out.survival;
    }
    return out;
}

namespace {

void standardize_into(const Model& model, std::span<const double> x_raw, std::vector<double>& xs) {
    const Preprocessing& prep = model.prep;
    if (x_raw.size() != prep.covariate_mean.size()) {
        throw InputError("covariate vector has length " + std::to_string(x_raw.size()) + ", expected " +
                         std::to_string(prep.covariate_mean.size()));
    }
    xs.resize(x_raw.size());
    for (std::size_t j = 0; j < x_raw.size(); ++j) {
        xs[j] = (x_raw[j] - prep.covariate_mean[j]) / prep.covariate_sd[j];
    }
}

}  // namespace

double density_slope(const Model& model, double t, std::span<const double> x, const Dual& h_at_t,
                     Workspace& ws) {
    if (!model.config.density_finite_difference) {
        return h_at_t.tangent;
    }
    const double ahead = forward_eval(model, t + kDensityFdStep, x, ws).value;
    return (ahead - h_at_t.value) / kDensityFdStep;
}

double predict_survival(const Model& model, std::span<const double> x_raw, double t_raw, Workspace& ws) {
    standardize_into(model, x_raw, ws.xs);
    const Dual h = forward_eval(model, t_raw / model.prep.duration_scale, ws.xs, ws);
    return head_transform(h, model.config.head).survival;
}

double predict_survival(const Model& model, std::span<const double> x_raw, double t_raw) {
    Workspace ws;
    return predict_survival(model, x_raw, t_raw, ws);
}

HeadOutput predict_head(const Model& model, std::span<const double> x_raw, double t_raw, Workspace& ws) {
    standardize_into(model, x_raw, ws.xs);
    const double t = t_raw / model.prep.duration_scale;
    const Dual h = forward_eval(model, t, ws.xs, ws);
    HeadOutput out = head_transform({h.value, density_slope(model, t, ws.xs, h, ws)}, model.config.head);
    out.density /= model.prep.duration_scale;
    out.hazard_rate /= model.prep.duration_scale;
    return out;
}

std::vector<double> predict_curve(const Model& model, std::span<const double> x_raw,
                                  std::span<const double> t_grid) {
    for (std::size_t i = 1; i < t_grid.size(); ++i) {
        if (t_grid[i] < t_grid[i - 1]) {
            throw InputError("time grid must be non-decreasing");
        }
    }
    Workspace ws;
    std::vector<double> out;
    out.reserve(t_grid.size());
    for (const double t : t_grid) {
        out.push_back(predict_survival(model, x_raw, t, ws));
    }
    return out;
}

}  // namespace monosurv
