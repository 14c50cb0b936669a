#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace apa {

/// Learnable activation parameters: kappa is the gain, lambda the asymmetry.
/// lambda must stay strictly positive; the training loop clamps it after
/// every update, the math layer only validates.
struct ActivationParams {
    double kappa = 1.0;
    double lambda = 1.0;
    bool kappa_learnable = true;
    bool lambda_learnable = true;
};

enum class ActivationTag {
    APA,
    AGLU,
    RELU,
    SIGMOID,
    GUMBEL,
    SILU,
    GELU,
    PRELU,
    ELU,
    MISH,
    IDENTITY,
};

const char* to_string(ActivationTag tag);
ActivationTag activation_tag_from_string(const std::string& name);

/// An activation selector. APA/AGLU require params, the fixed-shape kinds
/// forbid them, PRELU/ELU carry a single kappa.
struct ActivationKind {
    ActivationTag tag = ActivationTag::IDENTITY;
    std::optional<ActivationParams> params;

    static ActivationKind apa(double kappa, double lambda) {
        return {ActivationTag::APA, ActivationParams{kappa, lambda}};
    }
    static ActivationKind aglu(double kappa, double lambda) {
        return {ActivationTag::AGLU, ActivationParams{kappa, lambda}};
    }
    static ActivationKind prelu(double kappa) {
        return {ActivationTag::PRELU, ActivationParams{kappa, 1.0, false, false}};
    }
    static ActivationKind elu(double kappa) {
        return {ActivationTag::ELU, ActivationParams{kappa, 1.0, false, false}};
    }
    static ActivationKind plain(ActivationTag tag) { return {tag, std::nullopt}; }

    void validate() const;
};

namespace detail {

inline void check_point(double z, const ActivationParams& p) {
    if (!std::isfinite(z)) throw std::domain_error("activation: non-finite input");
    if (!std::isfinite(p.kappa) || !std::isfinite(p.lambda))
        throw std::domain_error("activation: non-finite parameter");
    if (p.lambda <= 0.0) throw std::domain_error("activation: lambda must be positive");
}

}  // namespace detail

/// softplus(t) = ln(1 + e^t), evaluated without overflow on either tail.
inline double softplus(double t) {
    return std::fmax(t, 0.0) + std::log1p(std::exp(-std::fabs(t)));
}

/// Logistic sigmoid through the softplus route: exp(-softplus(-z)).
/// This is the same arithmetic apa_forward reduces to at kappa=lambda=1,
/// so the unification identities hold bit-for-bit.
inline double stable_logistic(double z) { return std::exp(-softplus(-z)); }

/// eta(z,kappa,lambda) = (lambda*exp(-kappa*z) + 1)^(-1/lambda), computed as
/// exp(-softplus(-(kappa*z - ln lambda))/lambda). Finite for |kappa*z| well
/// past the naive form's overflow point.
inline double apa_forward(double z, const ActivationParams& p) {
    detail::check_point(z, p);
    const double x = p.kappa * z - std::log(p.lambda);
    return std::exp(-softplus(-x) / p.lambda);
}

inline double aglu_forward(double z, const ActivationParams& p) {
    return z * apa_forward(z, p);
}

// Shared denominator lambda + exp(kappa*z); overflows to +inf harmlessly
// (the gradients then vanish, matching the true limits).
inline double apa_gate_denom(double z, const ActivationParams& p) {
    return p.lambda + std::exp(p.kappa * z);
}

/// d eta / d z = kappa * eta / (lambda + e^{kappa z})
inline double apa_grad_input(double z, const ActivationParams& p) {
    return p.kappa * apa_forward(z, p) / apa_gate_denom(z, p);
}

/// d eta / d kappa = z * eta / (lambda + e^{kappa z})
inline double apa_grad_kappa(double z, const ActivationParams& p) {
    return z * apa_forward(z, p) / apa_gate_denom(z, p);
}

/// d eta / d lambda = eta * [ ln(lambda e^{-kappa z} + 1)/lambda^2
///                            - 1/(lambda (lambda + e^{kappa z})) ].
/// Both factors are evaluated in overflow-safe form; the log term is
/// softplus(ln lambda - kappa z).
inline double apa_grad_lambda(double z, const ActivationParams& p) {
    const double eta = apa_forward(z, p);
    const double x = p.kappa * z - std::log(p.lambda);
    const double log_term = softplus(-x) / (p.lambda * p.lambda);
    const double tail_term = 1.0 / (p.lambda * apa_gate_denom(z, p));
    return eta * (log_term - tail_term);
}

/// d AGLU / d kappa = z^2 * eta / (lambda + e^{kappa z})
inline double aglu_grad_kappa(double z, const ActivationParams& p) {
    return z * z * apa_forward(z, p) / apa_gate_denom(z, p);
}

/// d AGLU / d lambda = z * d eta / d lambda. Note this is the complete
/// derivative including the contribution of the lambda-dependent exponent;
/// it is validated against central finite differences.
inline double aglu_grad_lambda(double z, const ActivationParams& p) {
    return z * apa_grad_lambda(z, p);
}

/// d AGLU / d z = kappa z * eta / (lambda + e^{kappa z}) + eta
inline double aglu_grad_input(double z, const ActivationParams& p) {
    const double eta = apa_forward(z, p);
    return p.kappa * z * eta / apa_gate_denom(z, p) + eta;
}

/// Fixed-shape activations (plus PRELU/ELU with their kappa).
double reference_forward(const ActivationKind& kind, double z);

/// Elementwise activation of a whole tensor, same semantics as the scalar
/// operations.
template <typename TensorLike>
TensorLike apply_activation(const ActivationKind& kind, TensorLike values) {
    kind.validate();
    if (kind.tag == ActivationTag::APA) {
        for (auto& v : values.data) v = apa_forward(v, *kind.params);
    } else if (kind.tag == ActivationTag::AGLU) {
        for (auto& v : values.data) v = aglu_forward(v, *kind.params);
    } else {
        for (auto& v : values.data) v = reference_forward(kind, v);
    }
    return values;
}

/// Input derivative for every supported kind; used by the layer backward
/// pass for the non-adaptive activations.
double reference_grad_input(const ActivationKind& kind, double z);

/// One row per unification identity checked on the probe grid.
struct LimitsReport {
    struct Row {
        std::string name;
        double max_deviation = 0.0;
        double worst_z = 0.0;
        double tolerance = 0.0;
        bool pass = false;
    };
    std::vector<Row> rows;
    bool all_pass = false;
};

/// Checks Sigmoid/Gumbel/SiLU/GELU/ReLU/Identity/smooth-PRELU identities on
/// z in {-5,-2,-0.5,0,0.5,2,5}. The kappa=lambda=1 identities must be exact
/// (deviation 0); the limit approximations must stay within `tolerance`.
LimitsReport limits_check(double tolerance);

}  // namespace apa
