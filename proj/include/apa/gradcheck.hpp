#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "apa/nn.hpp"

namespace apa {

/// Two-point central finite difference with step h = 1e-4 * max(1, |x|).
/// Independent of every analytic-gradient path.
template <typename F>
double central_difference(F&& f, double x) {
    const double h = 1e-4 * std::max(1.0, std::fabs(x));
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Central difference over a halving ladder of steps, picking the level
/// whose consecutive-estimate gap plus rounding-noise model is smallest.
/// A single fixed step cannot cover this family: the small-lambda regimes
/// are exponentially steep (needing tiny steps) while elsewhere the
/// derivative is many orders below the function value (needing the largest
/// step the domain allows).
template <typename F>
double fd_ladder4(F&& f, double x, double h0, int levels = 16) {
    constexpr double eps = 2.220446049250313e-16;
    std::vector<double> est(static_cast<std::size_t>(levels)), fmax(static_cast<std::size_t>(levels));
    double h = h0;
    for (int m = 0; m < levels; ++m, h *= 0.5) {
        const double a = f(x + 2.0 * h), b = f(x + h), c = f(x - h), d = f(x - 2.0 * h);
        est[m] = (-a + 8.0 * b - 8.0 * c + d) / (12.0 * h);
        fmax[m] = std::max(std::max(std::fabs(a), std::fabs(b)),
                           std::max(std::fabs(c), std::fabs(d)));
    }
    double best = est[1], best_err = std::numeric_limits<double>::infinity();
    h = h0;
    for (int m = 0; m + 1 < levels; ++m, h *= 0.5) {
        const double err = std::fabs(est[m] - est[m + 1]) + 30.0 * eps * fmax[m] / (12.0 * h);
        if (err < best_err) {
            best_err = err;
            best = est[m + 1];
        }
    }
    return best;
}

/// Two-point variant for a strictly positive coordinate: starts at the
/// largest domain-safe step h0 = 0.9x so that derivatives far below the
/// function's magnitude stay above the rounding noise.
template <typename F>
double fd_ladder2_positive(F&& f, double x, int levels = 22) {
    constexpr double eps = 2.220446049250313e-16;
    std::vector<double> est(static_cast<std::size_t>(levels)), fmax(static_cast<std::size_t>(levels));
    double h = 0.9 * x;
    for (int m = 0; m < levels; ++m, h *= 0.5) {
        const double p = f(x + h), q = f(x - h);
        est[m] = (p - q) / (2.0 * h);
        fmax[m] = std::max(std::fabs(p), std::fabs(q));
    }
    double best = est[1], best_err = std::numeric_limits<double>::infinity();
    h = 0.9 * x;
    for (int m = 0; m + 1 < levels; ++m, h *= 0.5) {
        const double err = std::fabs(est[m] - est[m + 1]) + 2.0 * eps * fmax[m] / h;
        if (err < best_err) {
            best_err = err;
            best = est[m + 1];
        }
    }
    return best;
}

/// |a - b| / max(|a|, |b|, 1e-6): strict relative agreement for gradients of
/// real magnitude, absolute agreement below the 1e-6 floor where the finite
/// difference itself loses significance.
double gradient_rel_error(double analytic, double numeric);

struct ScalarGradCheck {
    struct OpResult {
        std::string name;
        double max_rel_err = 0.0;
        double worst_z = 0.0, worst_kappa = 0.0, worst_lambda = 0.0;
    };
    std::vector<OpResult> ops;
    double max_rel_err = 0.0;
    bool all_finite = true;
};

/// Checks the six analytic derivatives (AGLU and APA, w.r.t. input, kappa,
/// lambda) against central finite differences on random probes with
/// z in [-10,10], kappa in [-3,3], lambda log-uniform in [1e-3,1e3].
ScalarGradCheck run_scalar_grad_check(std::size_t probes, std::uint64_t seed);

/// Finite-difference check of the full backward pass: perturbs every
/// learnable parameter of the model and compares the loss slope against the
/// analytic gradient. Dropout must be disabled. Returns the max rel error.
double model_grad_check(Model& model, const Tensor& batch, const std::vector<int>& labels,
                        LossKind loss);

}  // namespace apa
