#include "apa/activation.hpp"

#include <algorithm>
#include <array>

namespace apa {

const char* to_string(ActivationTag tag) {
    switch (tag) {
        case ActivationTag::APA: return "apa";
        case ActivationTag::AGLU: return "aglu";
        case ActivationTag::RELU: return "relu";
        case ActivationTag::SIGMOID: return "sigmoid";
        case ActivationTag::GUMBEL: return "gumbel";
        case ActivationTag::SILU: return "silu";
        case ActivationTag::GELU: return "gelu";
        case ActivationTag::PRELU: return "prelu";
        case ActivationTag::ELU: return "elu";
        case ActivationTag::MISH: return "mish";
        case ActivationTag::IDENTITY: return "identity";
    }
    return "?";
}

ActivationTag activation_tag_from_string(const std::string& name) {
    static const std::array<ActivationTag, 11> all = {
        ActivationTag::APA,    ActivationTag::AGLU, ActivationTag::RELU,
        ActivationTag::SIGMOID, ActivationTag::GUMBEL, ActivationTag::SILU,
        ActivationTag::GELU,   ActivationTag::PRELU, ActivationTag::ELU,
        ActivationTag::MISH,   ActivationTag::IDENTITY};
    for (ActivationTag t : all)
        if (name == to_string(t)) return t;
    throw std::invalid_argument("unknown activation kind: " + name);
}

void ActivationKind::validate() const {
    const bool adaptive = tag == ActivationTag::APA || tag == ActivationTag::AGLU;
    const bool single_kappa = tag == ActivationTag::PRELU || tag == ActivationTag::ELU;
    if (adaptive || single_kappa) {
        if (!params) throw std::invalid_argument(std::string(to_string(tag)) + " requires parameters");
        if (!std::isfinite(params->kappa) || !std::isfinite(params->lambda) || params->lambda <= 0.0)
            throw std::invalid_argument(std::string(to_string(tag)) + ": invalid parameters");
    } else if (params) {
        throw std::invalid_argument(std::string(to_string(tag)) + " does not take parameters");
    }
}

double reference_forward(const ActivationKind& kind, double z) {
    if (!std::isfinite(z)) throw std::domain_error("activation: non-finite input");
    switch (kind.tag) {
        case ActivationTag::RELU: return std::fmax(0.0, z);
        case ActivationTag::SIGMOID: return stable_logistic(z);
        case ActivationTag::GUMBEL: return std::exp(-std::exp(-z));
        case ActivationTag::SILU: return z * stable_logistic(z);
        case ActivationTag::GELU: return z * stable_logistic(1.702 * z);
        case ActivationTag::MISH: return z * std::tanh(softplus(z));
        case ActivationTag::IDENTITY: return z;
        case ActivationTag::PRELU: {
            const double k = kind.params ? kind.params->kappa : 0.25;
            return std::fmax(0.0, z) + k * std::fmin(0.0, z);
        }
        case ActivationTag::ELU: {
            const double k = kind.params ? kind.params->kappa : 1.0;
            return std::fmax(0.0, z) + k * (std::exp(std::fmin(0.0, z)) - 1.0);
        }
        case ActivationTag::APA:
        case ActivationTag::AGLU:
            throw std::invalid_argument("reference_forward: use apa_forward/aglu_forward");
    }
    throw std::invalid_argument("reference_forward: bad kind");
}

double reference_grad_input(const ActivationKind& kind, double z) {
    if (!std::isfinite(z)) throw std::domain_error("activation: non-finite input");
    switch (kind.tag) {
        case ActivationTag::RELU: return z > 0.0 ? 1.0 : 0.0;
        case ActivationTag::SIGMOID: {
            const double s = stable_logistic(z);
            return s * (1.0 - s);
        }
        case ActivationTag::GUMBEL: {
            const double e = std::exp(-z);
            return e * std::exp(-e);
        }
        case ActivationTag::SILU: {
            const double s = stable_logistic(z);
            return s + z * s * (1.0 - s);
        }
        case ActivationTag::GELU: {
            const double s = stable_logistic(1.702 * z);
            return s + 1.702 * z * s * (1.0 - s);
        }
        case ActivationTag::MISH: {
            const double sp = softplus(z);
            const double t = std::tanh(sp);
            return t + z * (1.0 - t * t) * stable_logistic(z);
        }
        case ActivationTag::IDENTITY: return 1.0;
        case ActivationTag::PRELU: {
            const double k = kind.params ? kind.params->kappa : 0.25;
            return z > 0.0 ? 1.0 : k;
        }
        case ActivationTag::ELU: {
            const double k = kind.params ? kind.params->kappa : 1.0;
            return z > 0.0 ? 1.0 : k * std::exp(z);
        }
        case ActivationTag::APA: return apa_grad_input(z, *kind.params);
        case ActivationTag::AGLU: return aglu_grad_input(z, *kind.params);
    }
    throw std::invalid_argument("reference_grad_input: bad kind");
}

namespace {

constexpr std::array<double, 7> kProbeGrid = {-5.0, -2.0, -0.5, 0.0, 0.5, 2.0, 5.0};

// lambda -> infinity surrogate; 1e8 keeps |AGLU(z) - z| below 1.2e-6 on the
// grid, which a smaller 1e6 cannot (the gap decays like ln(lambda)/lambda).
constexpr double kLambdaLarge = 1e8;
constexpr double kLambdaSmall = 1e-6;
constexpr double kKappaRelu = 100.0;

template <typename F, typename G>
LimitsReport::Row check_identity(const char* name, double tol, F&& ours, G&& target) {
    LimitsReport::Row row;
    row.name = name;
    row.tolerance = tol;
    for (double z : kProbeGrid) {
        const double dev = std::fabs(ours(z) - target(z));
        if (dev > row.max_deviation) {
            row.max_deviation = dev;
            row.worst_z = z;
        }
    }
    row.pass = row.max_deviation <= tol;
    return row;
}

}  // namespace

LimitsReport limits_check(double tolerance) {
    if (!(tolerance > 0.0)) throw std::invalid_argument("limits_check: tolerance must be > 0");
    const ActivationParams unit{1.0, 1.0};
    const ActivationParams gumbel_limit{1.0, kLambdaSmall};
    const ActivationParams gelu_like{1.702, 1.0};
    const ActivationParams relu_limit{kKappaRelu, 1.0};
    const ActivationParams identity_limit{1.0, kLambdaLarge};

    LimitsReport report;
    report.rows.push_back(check_identity(
        "sigmoid", 0.0, [&](double z) { return apa_forward(z, unit); },
        [](double z) { return reference_forward(ActivationKind::plain(ActivationTag::SIGMOID), z); }));
    report.rows.push_back(check_identity(
        "gumbel", tolerance, [&](double z) { return apa_forward(z, gumbel_limit); },
        [](double z) { return reference_forward(ActivationKind::plain(ActivationTag::GUMBEL), z); }));
    report.rows.push_back(check_identity(
        "silu", 0.0, [&](double z) { return aglu_forward(z, unit); },
        [](double z) { return reference_forward(ActivationKind::plain(ActivationTag::SILU), z); }));
    report.rows.push_back(check_identity(
        "gelu", 0.0, [&](double z) { return aglu_forward(z, gelu_like); },
        [](double z) { return reference_forward(ActivationKind::plain(ActivationTag::GELU), z); }));
    report.rows.push_back(check_identity(
        "relu", tolerance, [&](double z) { return aglu_forward(z, relu_limit); },
        [](double z) { return reference_forward(ActivationKind::plain(ActivationTag::RELU), z); }));
    report.rows.push_back(check_identity(
        "identity", tolerance, [&](double z) { return aglu_forward(z, identity_limit); },
        [](double z) { return z; }));
    report.rows.push_back(check_identity(
        "prelu_smooth", tolerance, [&](double z) { return aglu_forward(z, identity_limit); },
        [](double z) { return reference_forward(ActivationKind::prelu(1.0), z); }));

    report.all_pass = std::all_of(report.rows.begin(), report.rows.end(),
                                  [](const LimitsReport::Row& r) { return r.pass; });
    return report;
}

}  // namespace apa
