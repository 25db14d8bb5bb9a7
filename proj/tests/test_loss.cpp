#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "monosurv/loss.hpp"
#include "monosurv/net.hpp"
#include "monosurv/rng.hpp"

using namespace monosurv;

namespace {

Model small_model(std::uint64_t seed, HeadKind head, int covariate_dim = 2) {
    NetworkConfig config;
    config.covariate_dim = covariate_dim;
    config.cov_widths = {6};
    config.mixed_widths = {8, 6};
    config.head = head;
    return init_model(config, seed);
}

CensoredBatch random_right_censored_batch(int n, int p, std::uint64_t seed) {
    Rng rng(seed);
    CensoredBatch batch;
    std::vector<double> x(static_cast<std::size_t>(p));
    for (int i = 0; i < n; ++i) {
        for (double& v : x) v = rng.uniform(-1.5, 1.5);
        const double z = rng.uniform(0.05, 1.5);
        batch.add(x, z, rng.bernoulli(0.6) ? CensorKind::Observed : CensorKind::Right);
    }
    return batch;
}

}  // namespace

TEST_CASE("per-record term formulas") {
    HeadOutput out;
    SUBCASE("observed record with density 0.1") {
        out.density = 0.1;
        CHECK(nll_term_survival_form(CensorKind::Observed, out) ==
              doctest::Approx(2.302585092994046).epsilon(1e-14));
    }
    SUBCASE("right-censored record with survival 1") {
        out.survival = 1.0;
        CHECK(nll_term_survival_form(CensorKind::Right, out) == 0.0);
    }
    SUBCASE("left-censored record with survival 0.25") {
        out.survival = 0.25;
        CHECK(nll_term_survival_form(CensorKind::Left, out) ==
              doctest::Approx(0.28768207245178085).epsilon(1e-14));
    }
    SUBCASE("interval record") {
        out.survival = 0.8;
        HeadOutput upper;
        upper.survival = 0.5;
        CHECK(nll_term_survival_form(CensorKind::Interval, out, &upper) ==
              doctest::Approx(-std::log(0.3)).epsilon(1e-14));
    }
    SUBCASE("floor keeps the term finite") {
        out.density = 0.0;
        CHECK(nll_term_survival_form(CensorKind::Observed, out) ==
              doctest::Approx(-std::log(1e-30)).epsilon(1e-14));
    }
}

TEST_CASE("hazard form and survival form agree on matched outputs") {
    SUBCASE("synthetic outputs") {
        Rng rng(404);
        for (int k = 0; k < 200; ++k) {
            HeadOutput out;
            out.survival = rng.uniform(0.01, 0.99);
            out.density = rng.uniform(1e-3, 5.0);
            out.cumulative_hazard = -std::log(out.survival);
            out.hazard_rate = out.density / out.survival;
            for (const CensorKind kind : {CensorKind::Observed, CensorKind::Right}) {
                const double sf = nll_term_survival_form(kind, out);
                const double hf = nll_term_hazard_form(kind, out);
                CHECK(std::abs(sf - hf) / (std::abs(sf) + std::abs(hf) + 1e-12) < 1e-10);
            }
        }
    }
    SUBCASE("network outputs from both heads") {
        Rng rng(11);
        Workspace ws;
        for (const HeadKind head : {HeadKind::Survival, HeadKind::Hazard}) {
            Model model = small_model(3, head);
            for (int k = 0; k < 100; ++k) {
                std::vector<double> x{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
                const Dual h = forward_eval(model, rng.uniform(0.05, 2.0), x, ws);
                const HeadOutput out = head_transform(h, head);
                if (out.density <= kProbFloor || out.survival <= kProbFloor) continue;
                for (const CensorKind kind : {CensorKind::Observed, CensorKind::Right}) {
                    const double sf = nll_term_survival_form(kind, out);
                    const double hf = nll_term_hazard_form(kind, out);
                    CHECK(std::abs(sf - hf) / (std::abs(sf) + std::abs(hf) + 1e-12) < 1e-10);
                }
            }
        }
    }
}

TEST_CASE("nll_right_censored matches the formula route record by record") {
    Workspace ws;
    for (const HeadKind head : {HeadKind::Survival, HeadKind::Hazard}) {
        Model model = small_model(8, head);
        const CensoredBatch batch = random_right_censored_batch(16, 2, 99);
        const LossResult result = nll_right_censored(model, batch);
        double expected = 0.0;
        for (int i = 0; i < batch.size(); ++i) {
            const Dual h = forward_eval(model, batch.z[static_cast<std::size_t>(i)], batch.covariates(i), ws);
            const HeadOutput out = head_transform(h, head);
            if (head == HeadKind::Survival) {
                expected += nll_term_survival_form(batch.kind[static_cast<std::size_t>(i)], out);
            } else {
                expected += nll_term_hazard_form(batch.kind[static_cast<std::size_t>(i)], out);
            }
        }
        expected /= batch.size();
        CHECK(result.value == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("parameter gradients match finite differences") {
    for (const HeadKind head : {HeadKind::Survival, HeadKind::Hazard}) {
        for (const std::uint64_t seed : {1u, 2u}) {
            Model model = small_model(seed, head);
            const CensoredBatch batch = random_right_censored_batch(8, 2, 7 * seed + 1);
            const auto fn = [&](const std::vector<double>& raw) {
                model.params.raw = raw;
                model.params.refresh();
                const LossResult r = nll_right_censored(model, batch);
                return std::make_pair(r.value, r.gradient);
            };
            const FiniteDiffReport report = finite_diff_check(fn, model.params.raw, 1e-5);
            CHECK(report.ok);
            CHECK(report.max_rel_error < 1e-4);
        }
    }
}

TEST_CASE("general censoring gradient matches finite differences") {
    Rng rng(2024);
    Model model = small_model(5, HeadKind::Survival);
    CensoredBatch batch;
    std::vector<double> x{0.0, 0.0};
    for (int i = 0; i < 8; ++i) {
        x[0] = rng.uniform(-1.0, 1.0);
        x[1] = rng.uniform(-1.0, 1.0);
        const double z = rng.uniform(0.1, 1.2);
        switch (i % 4) {
            case 0: batch.add(x, z, CensorKind::Observed); break;
            case 1: batch.add(x, z, CensorKind::Right); break;
            case 2: batch.add(x, z, CensorKind::Left); break;
            case 3: batch.add(x, z, CensorKind::Interval, z + rng.uniform(0.1, 0.5)); break;
        }
    }
    const auto fn = [&](const std::vector<double>& raw) {
        model.params.raw = raw;
        model.params.refresh();
        const LossResult r = nll_general_censoring(model, batch);
        return std::make_pair(r.value, r.gradient);
    };
    const FiniteDiffReport report = finite_diff_check(fn, model.params.raw, 1e-5);
    CHECK(report.ok);
    CHECK(report.max_rel_error < 1e-4);
}

TEST_CASE("general censoring on right-censored-only batches equals nll_right_censored") {
    Model model = small_model(31, HeadKind::Hazard);
    CensoredBatch batch = random_right_censored_batch(20, 2, 5);
    for (auto& kind : batch.kind) kind = CensorKind::Right;
    const LossResult a = nll_right_censored(model, batch);
    const LossResult b = nll_general_censoring(model, batch);
    CHECK(a.value == b.value);
    for (std::size_t i = 0; i < a.gradient.size(); ++i) {
        CHECK(a.gradient[i] == b.gradient[i]);
    }
}

TEST_CASE("interval terms are well-posed by monotonicity") {
    Model model = small_model(17, HeadKind::Survival);
    Workspace ws;
    Rng rng(8);
    for (int k = 0; k < 100; ++k) {
        const std::vector<double> x{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        const double z1 = rng.uniform(0.0, 1.0);
        const double z2 = z1 + rng.uniform(1e-3, 1.0);
        const double s1 = head_transform(forward_eval(model, z1, x, ws), HeadKind::Survival).survival;
        const double s2 = head_transform(forward_eval(model, z2, x, ws), HeadKind::Survival).survival;
        CHECK(s1 >= s2 - 1e-15);
    }
    SUBCASE("degenerate interval bounds are rejected") {
        CensoredBatch batch;
        const std::vector<double> x{0.0, 0.0};
        CHECK_THROWS_AS(batch.add(x, 1.0, CensorKind::Interval, 1.0), InputError);
        CHECK_THROWS_AS(batch.add(x, 1.0, CensorKind::Interval, 0.5), InputError);
    }
}

TEST_CASE("empty and malformed batches are rejected") {
    Model model = small_model(1, HeadKind::Survival);
    CensoredBatch empty;
    CHECK_THROWS_AS(nll_right_censored(model, empty), UsageError);

    CensoredBatch left_only;
    left_only.add(std::vector<double>{0.0, 0.0}, 0.5, CensorKind::Left);
    CHECK_THROWS_AS(nll_right_censored(model, left_only), UsageError);
    CHECK_NOTHROW(nll_general_censoring(model, left_only));
}

TEST_CASE("loss is permutation invariant and mean-scaled") {
    Model model = small_model(77, HeadKind::Survival);
    const CensoredBatch batch = random_right_censored_batch(12, 2, 3);
    const double base = nll_value(model, batch);

    CensoredBatch reversed;
    for (int i = batch.size() - 1; i >= 0; --i) {
        reversed.add(batch.covariates(i), batch.z[static_cast<std::size_t>(i)],
                     batch.kind[static_cast<std::size_t>(i)]);
    }
    CHECK(std::abs(nll_value(model, reversed) - base) < 1e-14);

    CensoredBatch doubled;
    for (int i = 0; i < batch.size(); ++i) {
        doubled.add(batch.covariates(i), batch.z[static_cast<std::size_t>(i)], batch.kind[static_cast<std::size_t>(i)]);
        doubled.add(batch.covariates(i), batch.z[static_cast<std::size_t>(i)], batch.kind[static_cast<std::size_t>(i)]);
    }
    CHECK(std::abs(nll_value(model, doubled) - base) < 1e-14);
}

TEST_CASE("gradient of the mean equals the mean of per-record gradients") {
    Model model = small_model(55, HeadKind::Hazard);
    const CensoredBatch batch = random_right_censored_batch(6, 2, 21);
    const LossResult whole = nll_right_censored(model, batch);

    std::vector<double> averaged(whole.gradient.size(), 0.0);
    for (int i = 0; i < batch.size(); ++i) {
        CensoredBatch single;
        single.add(batch.covariates(i), batch.z[static_cast<std::size_t>(i)], batch.kind[static_cast<std::size_t>(i)]);
        const LossResult one = nll_right_censored(model, single);
        for (std::size_t j = 0; j < averaged.size(); ++j) {
            averaged[j] += one.gradient[j] / batch.size();
        }
    }
    for (std::size_t j = 0; j < averaged.size(); ++j) {
        CHECK(whole.gradient[j] == doctest::Approx(averaged[j]).epsilon(1e-10));
    }
}

TEST_CASE("finite-difference density fallback") {
    SUBCASE("fd density tracks the exact-tangent density on smooth nets") {
        Workspace ws;
        Rng rng(61);
        for (const HeadKind head : {HeadKind::Survival, HeadKind::Hazard}) {
            Model exact = small_model(6, head);
            Model fd = exact;
            fd.config.density_finite_difference = true;
            std::vector<double> x{0.0, 0.0};
            for (int k = 0; k < 100; ++k) {
                x[0] = rng.uniform(-1.0, 1.0);
                x[1] = rng.uniform(-1.0, 1.0);
                const double t = rng.uniform(0.05, 1.5);
                const double f_exact = predict_head(exact, x, t, ws).density;
                const double f_fd = predict_head(fd, x, t, ws).density;
                CHECK(std::abs(f_fd - f_exact) <= 1e-3 * (std::abs(f_exact) + 1e-3));
                CHECK(f_fd >= 0.0);  // monotonicity makes the forward difference non-negative
            }
        }
    }
    SUBCASE("fd-mode loss value follows the fd density") {
        Model model = small_model(13, HeadKind::Survival);
        model.config.density_finite_difference = true;
        CensoredBatch batch = random_right_censored_batch(10, 2, 19);
        const LossResult result = nll_right_censored(model, batch);
        Workspace ws;
        double expected = 0.0;
        for (int i = 0; i < batch.size(); ++i) {
            Dual h = forward_eval(model, batch.z[static_cast<std::size_t>(i)], batch.covariates(i), ws);
            if (batch.kind[static_cast<std::size_t>(i)] == CensorKind::Observed) {
                h.tangent = density_slope(model, batch.z[static_cast<std::size_t>(i)], batch.covariates(i), h, ws);
            }
            const HeadOutput out = head_transform(h, HeadKind::Survival);
            expected += nll_term_survival_form(batch.kind[static_cast<std::size_t>(i)], out);
        }
        expected /= batch.size();
        CHECK(result.value == doctest::Approx(expected).epsilon(1e-12));
    }
    SUBCASE("fd-mode gradients match finite differences") {
        for (const HeadKind head : {HeadKind::Survival, HeadKind::Hazard}) {
            Model model = small_model(23, head);
            model.config.density_finite_difference = true;
            const CensoredBatch batch = random_right_censored_batch(8, 2, 29);
            const auto fn = [&](const std::vector<double>& raw) {
                model.params.raw = raw;
                model.params.refresh();
                const LossResult r = nll_right_censored(model, batch);
                return std::make_pair(r.value, r.gradient);
            };
            const FiniteDiffReport report = finite_diff_check(fn, model.params.raw, 1e-5);
            CHECK(report.ok);
            CHECK(report.max_rel_error < 1e-4);
        }
    }
}

TEST_CASE("non-finite loss reports the offending record") {
    Model model = small_model(2, HeadKind::Hazard);
    model.params.raw[static_cast<std::size_t>(model.layout.mixed.back().b)] =
        std::numeric_limits<double>::infinity();
    model.params.refresh();
    CensoredBatch batch;
    batch.add(std::vector<double>{0.1, 0.2}, 0.5, CensorKind::Right);
    try {
        nll_right_censored(model, batch);
        FAIL("expected TrainingError");
    } catch (const TrainingError& err) {
        CHECK(std::string(err.what()).find("record 0") != std::string::npos);
    }
}
