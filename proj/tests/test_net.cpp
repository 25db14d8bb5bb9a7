#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <vector>

#include "monosurv/model_io.hpp"
#include "monosurv/net.hpp"
#include "monosurv/rng.hpp"

using namespace monosurv;

namespace {

NetworkConfig random_config(Rng& rng) {
    NetworkConfig config;
    config.covariate_dim = static_cast<int>(rng.uniform_int(1, 4));
    config.cov_widths.assign(static_cast<std::size_t>(rng.uniform_int(1, 2)), 0);
    for (int& w : config.cov_widths) w = static_cast<int>(rng.uniform_int(1, 8));
    config.mixed_widths.assign(static_cast<std::size_t>(rng.uniform_int(1, 3)), 0);
    for (int& w : config.mixed_widths) w = static_cast<int>(rng.uniform_int(1, 8));
    config.head = rng.bernoulli(0.5) ? HeadKind::Survival : HeadKind::Hazard;
    return config;
}

// Fresh init, optionally with raw values rescattered uniform on [-2, 2] so
// the constraint is probed far from the initialization distribution.
Model random_model(std::uint64_t seed, bool scatter) {
    Rng rng(seed);
    Model model = init_model(random_config(rng), seed);
    if (scatter) {
        for (double& r : model.params.raw) {
            r = rng.uniform(-2.0, 2.0);
        }
        model.params.refresh();
    }
    return model;
}

std::vector<double> random_covariates(const Model& model, Rng& rng) {
    std::vector<double> x(static_cast<std::size_t>(model.config.covariate_dim));
    for (double& v : x) v = rng.uniform(-2.0, 2.0);
    return x;
}

}  // namespace

TEST_CASE("init_model is reproducible and honors the squared parametrization") {
    NetworkConfig config;
    config.covariate_dim = 3;
    config.cov_widths = {5, 4};
    config.mixed_widths = {6, 3};
    const Model a = init_model(config, 42);
    const Model b = init_model(config, 42);
    REQUIRE(a.params.raw.size() == b.params.raw.size());
    for (std::size_t i = 0; i < a.params.raw.size(); ++i) {
        CHECK(a.params.raw[i] == b.params.raw[i]);
    }
    const Model c = init_model(config, 43);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.params.raw.size(); ++i) {
        any_diff = any_diff || a.params.raw[i] != c.params.raw[i];
    }
    CHECK(any_diff);

    // effective = raw^2 on the constrained set
    Model m = init_model(config, 7);
    const LayerSlots& out = m.layout.mixed.back();
    m.params.raw[static_cast<std::size_t>(out.w)] = -0.5;
    m.params.refresh();
    CHECK(m.params.effective[static_cast<std::size_t>(out.w)] == 0.25);

    SUBCASE("invalid configs are rejected") {
        NetworkConfig bad = config;
        bad.cov_widths = {0};
        CHECK_THROWS_AS(init_model(bad, 1), ConfigError);
        bad = config;
        bad.mixed_widths.clear();
        CHECK_THROWS_AS(init_model(bad, 1), ConfigError);
        bad = config;
        bad.dropout_rate = 1.0;
        CHECK_THROWS_AS(init_model(bad, 1), ConfigError);
    }
}

TEST_CASE("constrained-set layout: t column and deeper mixed weights squared, rest free") {
    NetworkConfig config;
    config.covariate_dim = 2;
    config.cov_widths = {4};
    config.mixed_widths = {3, 3};
    Model model = init_model(config, 5);
    for (const LayerSlots& slots : model.layout.cov) {
        for (int i = 0; i < slots.rows * slots.cols; ++i) {
            CHECK(model.params.squared[static_cast<std::size_t>(slots.w + i)] == 0);
        }
    }
    const LayerSlots& first = model.layout.mixed.front();
    for (int r = 0; r < first.rows; ++r) {
        for (int c = 0; c < first.cols; ++c) {
            const std::size_t idx = static_cast<std::size_t>(first.w + r * first.cols + c);
            CHECK(model.params.squared[idx] == (c == 0 ? 1 : 0));
        }
    }
    for (std::size_t l = 1; l < model.layout.mixed.size(); ++l) {
        const LayerSlots& slots = model.layout.mixed[l];
        for (int i = 0; i < slots.rows * slots.cols; ++i) {
            CHECK(model.params.squared[static_cast<std::size_t>(slots.w + i)] == 1);
        }
        CHECK(model.params.squared[static_cast<std::size_t>(slots.b)] == 0);
    }
}

TEST_CASE("all-zero parameters give h = (0, 0) everywhere") {
    NetworkConfig config;
    config.covariate_dim = 2;
    config.cov_widths = {3};
    config.mixed_widths = {3};
    Model model = init_model(config, 9);
    std::fill(model.params.raw.begin(), model.params.raw.end(), 0.0);
    model.params.refresh();
    Workspace ws;
    Rng rng(31);
    for (int probe = 0; probe < 20; ++probe) {
        const auto x = random_covariates(model, rng);
        const Dual h = forward_eval(model, rng.uniform(-2.0, 2.0), x, ws);
        CHECK(h.value == 0.0);
        CHECK(h.tangent == 0.0);
    }
}

TEST_CASE("single-unit mixed net tangent has the closed form a*(1-tanh^2)*w") {
    NetworkConfig config;
    config.covariate_dim = 1;
    config.cov_widths = {1};
    config.mixed_widths = {1};
    Model model = init_model(config, 3);
    model.params.raw[static_cast<std::size_t>(model.layout.mixed[0].w)] = 0.8;   // raw t weight
    model.params.raw[static_cast<std::size_t>(model.layout.mixed[1].w)] = -0.6;  // raw output weight
    model.params.refresh();
    const double w_eff = 0.8 * 0.8;
    const double a_eff = 0.6 * 0.6;

    Workspace ws;
    const double t = 0.37;
    const std::vector<double> x{0.5};
    const Dual h = forward_eval(model, t, x, ws);

    // reproduce the pre-activation of the single mixed unit
    const std::vector<double>& eff = model.params.effective;
    const LayerSlots& m0 = model.layout.mixed[0];
    const double u_val = std::tanh(eff[static_cast<std::size_t>(model.layout.cov[0].w)] * x[0] +
                                   eff[static_cast<std::size_t>(model.layout.cov[0].b)]);
    const double pre = w_eff * t + eff[static_cast<std::size_t>(m0.w) + 1] * u_val +
                       eff[static_cast<std::size_t>(m0.b)];
    const double expected_tangent = a_eff * (1.0 - std::tanh(pre) * std::tanh(pre)) * w_eff;
    CHECK(h.tangent == doctest::Approx(expected_tangent).epsilon(1e-12));
    CHECK(h.tangent >= 0.0);
}

TEST_CASE("tape and workspace forward paths agree bitwise in eval mode") {
    for (const std::uint64_t seed : {1u, 2u, 3u, 4u}) {
        Model model = random_model(seed, seed % 2 == 0);
        Rng rng(seed * 17 + 1);
        Workspace ws;
        Tape tape(&model.params);
        for (int probe = 0; probe < 25; ++probe) {
            const auto x = random_covariates(model, rng);
            const double t = rng.uniform(0.0, 2.0);
            tape.reset();
            const ForwardResult rec = forward_tape(model, t, x, tape, false, 0);
            const Dual eval = forward_eval(model, t, x, ws);
            CHECK(rec.h.value == eval.value);
            CHECK(rec.h.tangent == eval.tangent);
        }
    }
}

TEST_CASE("tangent of h matches central differences") {
    Rng rng(99);
    Workspace ws;
    double max_rel = 0.0;
    for (const std::uint64_t seed : {11u, 22u, 33u, 44u, 55u}) {
        Model model = random_model(seed, seed % 2 == 0);
        for (int probe = 0; probe < 40; ++probe) {
            const auto x = random_covariates(model, rng);
            const double t = rng.uniform(0.05, 1.5);
            const double eps = 1e-5;
            const Dual h = forward_eval(model, t, x, ws);
            const double hi = forward_eval(model, t + eps, x, ws).value;
            const double lo = forward_eval(model, t - eps, x, ws).value;
            const double central = (hi - lo) / (2.0 * eps);
            const double rel = std::abs(h.tangent - central) /
                               (std::abs(h.tangent) + std::abs(central) + 1e-12);
            max_rel = std::max(max_rel, rel);
        }
    }
    CHECK(max_rel < 1e-5);
}

TEST_CASE("monotonicity: tangents stay non-negative at any parameter setting") {
    Rng rng(123);
    Workspace ws;
    int probes = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Model model = random_model(seed, true);
        for (int k = 0; k < 1000; ++k) {
            const auto x = random_covariates(model, rng);
            const double t = rng.uniform(-1.0, 3.0);
            const Dual h = forward_eval(model, t, x, ws);
            REQUIRE(h.tangent >= -1e-12);
            ++probes;
        }
    }
    CHECK(probes == 10000);
}

TEST_CASE("dropout masks preserve monotonicity and are seed-deterministic") {
    NetworkConfig config;
    config.covariate_dim = 2;
    config.cov_widths = {6};
    config.mixed_widths = {6, 6};
    config.dropout_rate = 0.4;
    Model model = init_model(config, 17);
    Rng rng(5);
    Tape tape(&model.params);
    for (int k = 0; k < 200; ++k) {
        const auto x = random_covariates(model, rng);
        const double t = rng.uniform(0.0, 2.0);
        tape.reset();
        const ForwardResult a = forward_tape(model, t, x, tape, true, 1000 + static_cast<std::uint64_t>(k));
        CHECK(a.h.tangent >= -1e-12);
        tape.reset();
        const ForwardResult b = forward_tape(model, t, x, tape, true, 1000 + static_cast<std::uint64_t>(k));
        CHECK(a.h.value == b.h.value);
        CHECK(a.h.tangent == b.h.tangent);
    }
}

TEST_CASE("head_transform hand cases") {
    SUBCASE("survival head at h = (0, 1)") {
        const HeadOutput out = head_transform({0.0, 1.0}, HeadKind::Survival);
        CHECK(out.survival == 0.5);
        CHECK(out.density == 0.25);
    }
    SUBCASE("hazard head at h = (0, 1)") {
        const HeadOutput out = head_transform({0.0, 1.0}, HeadKind::Hazard);
        CHECK(out.cumulative_hazard == doctest::Approx(std::log(2.0)).epsilon(1e-15));
        CHECK(out.survival == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(out.hazard_rate == 0.5);
        CHECK(out.density == doctest::Approx(0.25).epsilon(1e-15));
    }
    SUBCASE("flat region has zero density") {
        const HeadOutput out = head_transform({0.7, 0.0}, HeadKind::Survival);
        CHECK(out.density == 0.0);
    }
}

TEST_CASE("hazard head: -d/dt exp(-Lambda) equals the density") {
    Rng rng(8);
    Workspace ws;
    for (const std::uint64_t seed : {5u, 6u, 7u}) {
        Model model = random_model(seed, true);
        model.config.head = HeadKind::Hazard;
        for (int k = 0; k < 50; ++k) {
            const auto x = random_covariates(model, rng);
            const Dual h = forward_eval(model, rng.uniform(0.0, 2.0), x, ws);
            const Dual cumhaz = dual_activation(Activation::Softplus, h);
            const double surv = std::exp(-cumhaz.value);
            const double deriv_of_surv = -cumhaz.tangent * surv;  // chain rule via tangents
            const HeadOutput out = head_transform(h, HeadKind::Hazard);
            const double rel = std::abs(-deriv_of_surv - out.density) /
                               (std::abs(deriv_of_surv) + std::abs(out.density) + 1e-300);
            if (out.density > 0.0) {
                CHECK(rel < 1e-10);
            }
        }
    }
}

TEST_CASE("quadrature consistency: integral of density equals survival drop") {
    Workspace ws;
    Rng rng(14);
    for (const std::uint64_t seed : {2u, 9u}) {
        Model model = random_model(seed, true);
        const auto x = random_covariates(model, rng);
        const double t1 = 0.1, t2 = 2.0;
        const int n = 2000;
        const double step = (t2 - t1) / n;
        double integral = 0.0;
        for (int k = 0; k <= n; ++k) {
            const double t = t1 + step * k;
            const double f = predict_head(model, x, t, ws).density;
            integral += f * ((k == 0 || k == n) ? 0.5 : 1.0);
        }
        integral *= step;
        const double drop = predict_survival(model, x, t1, ws) - predict_survival(model, x, t2, ws);
        CHECK(std::abs(integral - drop) < 1e-3);
    }
}

TEST_CASE("predict_survival") {
    SUBCASE("hazard head with very negative h at t = 0 gives survival near 1") {
        NetworkConfig config;
        config.covariate_dim = 1;
        config.cov_widths = {2};
        config.mixed_widths = {2};
        config.head = HeadKind::Hazard;
        Model model = init_model(config, 21);
        model.params.raw[static_cast<std::size_t>(model.layout.mixed.back().b)] = -50.0;
        model.params.refresh();
        const double s = predict_survival(model, {{0.3}}, 0.0);
        CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("survival is non-increasing in t and stays in [0, 1]") {
        Rng rng(77);
        Workspace ws;
        for (std::uint64_t seed = 100; seed < 110; ++seed) {
            Model model = random_model(seed, true);
            for (int k = 0; k < 1000; ++k) {
                const auto x = random_covariates(model, rng);
                double t1 = rng.uniform(0.0, 3.0);
                double t2 = rng.uniform(0.0, 3.0);
                if (t1 > t2) std::swap(t1, t2);
                const double s1 = predict_survival(model, x, t1, ws);
                const double s2 = predict_survival(model, x, t2, ws);
                REQUIRE(s2 <= s1 + 1e-12);
                REQUIRE(s1 >= 0.0);
                REQUIRE(s1 <= 1.0);
                REQUIRE(s2 >= 0.0);
                REQUIRE(s2 <= 1.0);
            }
        }
    }
    SUBCASE("covariate length mismatch") {
        Model model = random_model(1, false);
        std::vector<double> x(static_cast<std::size_t>(model.config.covariate_dim) + 1, 0.0);
        CHECK_THROWS_AS(predict_survival(model, x, 1.0), InputError);
    }
    SUBCASE("non-finite input") {
        Model model = random_model(1, false);
        std::vector<double> x(static_cast<std::size_t>(model.config.covariate_dim), 0.0);
        Workspace ws;
        CHECK_THROWS_AS(forward_eval(model, std::nan(""), x, ws), InputError);
    }
}

TEST_CASE("predict_curve") {
    Model model = random_model(55, false);
    Rng rng(3);
    const auto x = random_covariates(model, rng);
    SUBCASE("singleton grid matches predict_survival") {
        const auto curve = predict_curve(model, x, {{0.8}});
        CHECK(curve.size() == 1);
        CHECK(curve[0] == predict_survival(model, x, 0.8));
    }
    SUBCASE("output is non-increasing, duplicates give equal values") {
        const std::vector<double> grid{0.0, 0.5, 0.5, 1.0, 2.0, 2.0};
        const auto curve = predict_curve(model, x, grid);
        for (std::size_t i = 1; i < curve.size(); ++i) {
            CHECK(curve[i] <= curve[i - 1] + 1e-12);
        }
        CHECK(curve[1] == curve[2]);
        CHECK(curve[4] == curve[5]);
    }
    SUBCASE("unsorted grid is rejected") {
        CHECK_THROWS_AS(predict_curve(model, x, {{1.0, 0.5}}), InputError);
    }
}

TEST_CASE("universality flag derives from the mixed depth") {
    NetworkConfig config;
    config.covariate_dim = 1;
    config.cov_widths = {4};
    config.mixed_widths = {4};
    CHECK_FALSE(config.universal());
    config.mixed_widths = {4, 4};
    CHECK(config.universal());
}

TEST_CASE("model serialization round trip is value-exact") {
    Model model = random_model(404, true);
    model.prep.covariate_mean.assign(static_cast<std::size_t>(model.config.covariate_dim), 0.25);
    model.prep.covariate_sd.assign(static_cast<std::size_t>(model.config.covariate_dim), 1.75);
    model.prep.duration_scale = 123.456789012345678;

    const auto path = std::filesystem::temp_directory_path() / "monosurv_model_roundtrip.json";
    save_model(model, path.string());
    const Model loaded = load_model(path.string());
    std::filesystem::remove(path);

    REQUIRE(loaded.params.raw.size() == model.params.raw.size());
    for (std::size_t i = 0; i < model.params.raw.size(); ++i) {
        CHECK(loaded.params.raw[i] == model.params.raw[i]);
        CHECK(loaded.params.squared[i] == model.params.squared[i]);
        CHECK(loaded.params.decayable[i] == model.params.decayable[i]);
    }
    CHECK(loaded.prep.duration_scale == model.prep.duration_scale);
    CHECK(loaded.config.head == model.config.head);

    Workspace ws;
    Rng rng(6);
    const auto x = random_covariates(model, rng);
    const Dual a = forward_eval(model, 0.9, x, ws);
    const Dual b = forward_eval(loaded, 0.9, x, ws);
    CHECK(a.value == b.value);
    CHECK(a.tangent == b.tangent);
}
