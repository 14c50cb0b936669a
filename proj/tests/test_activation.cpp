#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>

#include "apa/activation.hpp"
#include "apa/gradcheck.hpp"
#include "apa/rng.hpp"
#include "oracles.hpp"

using namespace apa;

namespace {
const ActivationParams kUnit{1.0, 1.0};

double logistic_cdf(double z) { return 1.0 / (1.0 + std::exp(-z)); }
}  // namespace

TEST_CASE("apa forward matches the logistic CDF at kappa=lambda=1") {
    CHECK(apa_forward(0.0, kUnit) == 0.5);
    CHECK(apa_forward(3.0, kUnit) == doctest::Approx(logistic_cdf(3.0)).epsilon(1e-12));
    CHECK(apa_forward(-4.2, kUnit) == doctest::Approx(logistic_cdf(-4.2)).epsilon(1e-12));
}

TEST_CASE("apa forward approaches the Gumbel activation as lambda -> 0") {
    const ActivationParams p{1.0, 1e-6};
    for (double z : {-2.0, 0.0, 2.0})
        CHECK(std::fabs(apa_forward(z, p) - std::exp(-std::exp(-z))) < 1e-5);
}

TEST_CASE("aglu forward basics") {
    CHECK(aglu_forward(0.0, kUnit) == 0.0);
    CHECK(aglu_forward(0.0, ActivationParams{-2.0, 17.0}) == 0.0);
    CHECK(aglu_forward(1.0, kUnit) == doctest::Approx(logistic_cdf(1.0)).epsilon(1e-12));

    const ActivationParams relu_like{50.0, 1.0};
    CHECK(std::fabs(aglu_forward(-2.0, relu_like)) < 1e-6);
    CHECK(std::fabs(aglu_forward(2.0, relu_like) - 2.0) < 1e-6);
}

TEST_CASE("aglu equals z times apa exactly") {
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        const double z = rng.uniform(-10.0, 10.0);
        const ActivationParams p{rng.uniform(-3.0, 3.0), std::exp(rng.uniform(-6.9, 6.9))};
        CHECK(aglu_forward(z, p) == z * apa_forward(z, p));
    }
}

TEST_CASE("gradient values at pinned points") {
    CHECK(aglu_grad_kappa(0.0, kUnit) == 0.0);
    CHECK(apa_grad_kappa(0.0, kUnit) == 0.0);
    CHECK(aglu_grad_lambda(0.0, kUnit) == 0.0);
    CHECK(aglu_grad_input(0.0, kUnit) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(apa_grad_input(0.0, kUnit) == doctest::Approx(0.25).epsilon(1e-14));

    // ReLU-limit slope on the positive side.
    CHECK(std::fabs(aglu_grad_input(2.0, ActivationParams{50.0, 1.0}) - 1.0) < 1e-4);
}

TEST_CASE("gradients match central finite differences at the pinned probes") {
    struct Probe {
        double z, kappa, lambda;
    };
    const Probe probes[] = {{1.3, 0.7, 2.0}, {-2.5, 1.702, 1.0}, {0.9, -0.5, 0.3},
                            {2.0, 1.0, 0.01}, {1.0, 1.0, 1.0}};
    for (const Probe& pr : probes) {
        const ActivationParams p{pr.kappa, pr.lambda};
        const double fd_kappa = central_difference(
            [&](double v) { return aglu_forward(pr.z, ActivationParams{v, pr.lambda}); }, pr.kappa);
        CHECK(gradient_rel_error(aglu_grad_kappa(pr.z, p), fd_kappa) < 1e-5);

        const double fd_lambda = central_difference(
            [&](double v) { return aglu_forward(pr.z, ActivationParams{pr.kappa, v}); }, pr.lambda);
        CHECK(gradient_rel_error(aglu_grad_lambda(pr.z, p), fd_lambda) < 1e-5);

        const double fd_input =
            central_difference([&](double v) { return aglu_forward(v, p); }, pr.z);
        CHECK(gradient_rel_error(aglu_grad_input(pr.z, p), fd_input) < 1e-5);

        const double fd_apa_lambda = central_difference(
            [&](double v) { return apa_forward(pr.z, ActivationParams{pr.kappa, v}); }, pr.lambda);
        CHECK(gradient_rel_error(apa_grad_lambda(pr.z, p), fd_apa_lambda) < 1e-5);
    }
}

TEST_CASE("lambda gradient sign at kappa=lambda=1 follows the complete derivative") {
    // The z-factor times eta*g(w) with g > 0, so the sign tracks sign(z).
    CHECK(aglu_grad_lambda(1.0, kUnit) > 0.0);
    CHECK(aglu_grad_lambda(-1.0, kUnit) < 0.0);
}

TEST_CASE("probe-grid gradient suite stays within 1e-5") {
    const auto report = run_scalar_grad_check(1000, 20240101);
    CHECK(report.all_finite);
    CHECK(report.max_rel_err < 1e-5);
    CHECK(report.ops.size() == 6);
}

TEST_CASE("apa is monotone in z and bounded in (0,1)") {
    Rng rng(5);
    for (int trial = 0; trial < 40; ++trial) {
        const double kappa = rng.uniform(-3.0, 3.0);
        const ActivationParams p{kappa, std::exp(rng.uniform(std::log(1e-3), std::log(1e3)))};
        double prev = apa_forward(-10.0, p);
        for (int i = 1; i <= 250; ++i) {
            const double z = -10.0 + 20.0 * i / 250.0;
            const double cur = apa_forward(z, p);
            CHECK(cur >= 0.0);
            CHECK(cur < 1.0);
            if (kappa > 0.0)
                CHECK(cur >= prev);
            else if (kappa < 0.0)
                CHECK(cur <= prev);
            prev = cur;
        }
        // Strictly inside (0,1) wherever the exponent cannot underflow.
        const double z = rng.uniform(-10.0, 10.0);
        const double x = p.kappa * z - std::log(p.lambda);
        if (softplus(-x) / p.lambda < 700.0) CHECK(apa_forward(z, p) > 0.0);
    }
}

TEST_CASE("stable form agrees with the naive form away from overflow") {
    Rng rng(77);
    for (int i = 0; i < 2000; ++i) {
        const double z = rng.uniform(-10.0, 10.0);
        const double kappa = rng.uniform(-3.0, 3.0);
        const double lambda = std::exp(rng.uniform(std::log(1e-3), std::log(1e3)));
        const double naive = testing::apa_naive(z, kappa, lambda);
        const double stable = apa_forward(z, ActivationParams{kappa, lambda});
        if (!std::isfinite(naive) || naive <= 0.0 ||
            !std::isfinite(std::exp(-kappa * z)))
            continue;
        CHECK(std::fabs(stable - naive) <= 1e-10 * std::max(stable, naive));
    }
}

TEST_CASE("stable form is finite at kappa*z = +-500 and survives naive overflow") {
    const ActivationParams p{100.0, 1.0};
    const double lo = apa_forward(-5.0, p);   // kappa*z = -500
    const double hi = apa_forward(5.0, p);    // kappa*z = +500
    CHECK(std::isfinite(lo));
    CHECK(std::isfinite(hi));
    CHECK(lo > 0.0);
    CHECK(lo == doctest::Approx(std::exp(-500.0)).epsilon(1e-12));
    CHECK(hi == 1.0);

    // Past kappa*z ~ -709.8 the naive intermediate exp overflows and the
    // tail is lost entirely; the stable form keeps the exact value.
    const ActivationParams deep{100.0, 2.0};
    CHECK(!std::isfinite(std::exp(750.0)));
    CHECK(testing::apa_naive(-7.5, 100.0, 2.0) == 0.0);
    const double stable = apa_forward(-7.5, deep);  // kappa*z = -750
    CHECK(stable > 0.0);
    CHECK(stable == doctest::Approx(std::exp(-(750.0 + std::log(2.0)) / 2.0)).epsilon(1e-10));
}

TEST_CASE("reference activations") {
    CHECK(reference_forward(ActivationKind::plain(ActivationTag::RELU), -3.0) == 0.0);
    CHECK(reference_forward(ActivationKind::plain(ActivationTag::MISH), 0.0) == 0.0);
    CHECK(reference_forward(ActivationKind::elu(1.0), -1.0) ==
          doctest::Approx(std::exp(-1.0) - 1.0).epsilon(1e-14));
    CHECK(reference_forward(ActivationKind::prelu(0.25), -2.0) == doctest::Approx(-0.5));
    CHECK(reference_forward(ActivationKind::plain(ActivationTag::GUMBEL), 0.0) ==
          doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(reference_forward(ActivationKind::plain(ActivationTag::SILU), 1.0) ==
          doctest::Approx(logistic_cdf(1.0)).epsilon(1e-12));
    CHECK(reference_forward(ActivationKind::plain(ActivationTag::GELU), 1.0) ==
          doctest::Approx(logistic_cdf(1.702)).epsilon(1e-12));
    CHECK(reference_forward(ActivationKind::plain(ActivationTag::IDENTITY), 3.25) == 3.25);
}

TEST_CASE("reference input gradients match finite differences") {
    Rng rng(31);
    const ActivationKind kinds[] = {
        ActivationKind::plain(ActivationTag::SIGMOID), ActivationKind::plain(ActivationTag::GUMBEL),
        ActivationKind::plain(ActivationTag::SILU),    ActivationKind::plain(ActivationTag::GELU),
        ActivationKind::plain(ActivationTag::MISH),    ActivationKind::elu(0.7),
        ActivationKind::prelu(0.25)};
    for (const auto& kind : kinds) {
        for (int i = 0; i < 50; ++i) {
            double z = rng.uniform(-4.0, 4.0);
            if (std::fabs(z) < 1e-3) z = 0.5;  // keep clear of relu-style kinks
            const double fd =
                central_difference([&](double v) { return reference_forward(kind, v); }, z);
            CHECK(gradient_rel_error(reference_grad_input(kind, z), fd) < 1e-4);
        }
    }
}

TEST_CASE("unification identities") {
    const auto report = limits_check(1e-5);
    CHECK(report.all_pass);
    REQUIRE(report.rows.size() == 7);
    for (const auto& row : report.rows) {
        INFO(row.name);
        if (row.name == "sigmoid" || row.name == "silu" || row.name == "gelu")
            CHECK(row.max_deviation == 0.0);
        else
            CHECK(row.max_deviation <= 1e-5);
    }
    CHECK(limits_check(1e-12).all_pass == false);
    CHECK_THROWS_AS(limits_check(0.0), std::invalid_argument);
}

TEST_CASE("domain errors") {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double inf = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(apa_forward(nan, kUnit), std::domain_error);
    CHECK_THROWS_AS(apa_forward(inf, kUnit), std::domain_error);
    CHECK_THROWS_AS(apa_forward(1.0, ActivationParams{1.0, 0.0}), std::domain_error);
    CHECK_THROWS_AS(apa_forward(1.0, ActivationParams{1.0, -2.0}), std::domain_error);
    CHECK_THROWS_AS(aglu_forward(nan, kUnit), std::domain_error);
    CHECK_THROWS_AS(reference_forward(ActivationKind::plain(ActivationTag::RELU), nan),
                    std::domain_error);
}

TEST_CASE("elementwise tensor application matches the scalar operations") {
    Tensor t(2, 3);
    t.data = {-2.0, -0.5, 0.0, 0.5, 1.0, 3.0};
    const auto relu = apply_activation(ActivationKind::plain(ActivationTag::RELU), t);
    CHECK(relu.data == std::vector<double>{0.0, 0.0, 0.0, 0.5, 1.0, 3.0});

    const ActivationParams p{1.3, 0.4};
    const auto glu = apply_activation(ActivationKind::aglu(p.kappa, p.lambda), t);
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(glu.data[i] == aglu_forward(t.data[i], p));
}

TEST_CASE("activation kind validation") {
    CHECK_THROWS_AS((ActivationKind{ActivationTag::APA, std::nullopt}.validate()),
                    std::invalid_argument);
    CHECK_THROWS_AS((ActivationKind{ActivationTag::RELU, ActivationParams{}}.validate()),
                    std::invalid_argument);
    CHECK_NOTHROW(ActivationKind::apa(1.0, 1.0).validate());
    CHECK_NOTHROW(ActivationKind::prelu(0.25).validate());
    CHECK_THROWS_AS(ActivationKind::apa(1.0, -1.0).validate(), std::invalid_argument);
    CHECK(activation_tag_from_string("aglu") == ActivationTag::AGLU);
    CHECK_THROWS_AS(activation_tag_from_string("swiglu"), std::invalid_argument);
}
