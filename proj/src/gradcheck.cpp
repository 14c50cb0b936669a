#include "apa/gradcheck.hpp"

#include <cmath>

#include "apa/activation.hpp"
#include "apa/rng.hpp"

namespace apa {

double gradient_rel_error(double analytic, double numeric) {
    const double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-6});
    return std::fabs(analytic - numeric) / denom;
}

namespace {

enum class Coord { Input, Kappa, Lambda };

struct OpSpec {
    const char* name;
    bool aglu;  // else APA
    Coord coord;
};

double op_forward(bool aglu, double z, const ActivationParams& p) {
    return aglu ? aglu_forward(z, p) : apa_forward(z, p);
}

double op_analytic(const OpSpec& spec, double z, const ActivationParams& p) {
    switch (spec.coord) {
        case Coord::Input: return spec.aglu ? aglu_grad_input(z, p) : apa_grad_input(z, p);
        case Coord::Kappa: return spec.aglu ? aglu_grad_kappa(z, p) : apa_grad_kappa(z, p);
        case Coord::Lambda: return spec.aglu ? aglu_grad_lambda(z, p) : apa_grad_lambda(z, p);
    }
    return 0.0;
}

double op_numeric(const OpSpec& spec, double z, const ActivationParams& p) {
    switch (spec.coord) {
        case Coord::Input:
            return fd_ladder4([&](double v) { return op_forward(spec.aglu, v, p); }, z,
                              std::max(1.0, std::fabs(z)));
        case Coord::Kappa:
            return fd_ladder4(
                [&](double v) {
                    ActivationParams q = p;
                    q.kappa = v;
                    return op_forward(spec.aglu, z, q);
                },
                p.kappa, std::max(1.0, std::fabs(p.kappa)));
        case Coord::Lambda:
            return fd_ladder2_positive(
                [&](double v) {
                    ActivationParams q = p;
                    q.lambda = v;
                    return op_forward(spec.aglu, z, q);
                },
                p.lambda);
    }
    return 0.0;
}

constexpr OpSpec kOps[6] = {
    {"aglu/d_input", true, Coord::Input},   {"aglu/d_kappa", true, Coord::Kappa},
    {"aglu/d_lambda", true, Coord::Lambda}, {"apa/d_input", false, Coord::Input},
    {"apa/d_kappa", false, Coord::Kappa},   {"apa/d_lambda", false, Coord::Lambda},
};

}  // namespace

ScalarGradCheck run_scalar_grad_check(std::size_t probes, std::uint64_t seed) {
    ScalarGradCheck report;
    report.ops.resize(6);
    for (std::size_t i = 0; i < 6; ++i) report.ops[i].name = kOps[i].name;

    Rng rng(seed);
    for (std::size_t k = 0; k < probes; ++k) {
        const double z = rng.uniform(-10.0, 10.0);
        ActivationParams p;
        p.kappa = rng.uniform(-3.0, 3.0);
        p.lambda = std::exp(rng.uniform(std::log(1e-3), std::log(1e3)));

        for (std::size_t i = 0; i < 6; ++i) {
            const double analytic = op_analytic(kOps[i], z, p);
            const double numeric = op_numeric(kOps[i], z, p);
            if (!std::isfinite(analytic) || !std::isfinite(numeric)) {
                report.all_finite = false;
                continue;
            }
            const double err = gradient_rel_error(analytic, numeric);
            if (err > report.ops[i].max_rel_err) {
                report.ops[i].max_rel_err = err;
                report.ops[i].worst_z = z;
                report.ops[i].worst_kappa = p.kappa;
                report.ops[i].worst_lambda = p.lambda;
            }
        }
    }
    for (const auto& op : report.ops) report.max_rel_err = std::max(report.max_rel_err, op.max_rel_err);
    return report;
}

double model_grad_check(Model& model, const Tensor& batch, const std::vector<int>& labels,
                        LossKind loss) {
    model.zero_grads();
    const Tensor logits = model.forward(batch, /*training=*/false, nullptr);
    const LossGrad lg = compute_loss(loss, logits, labels);
    model.backward(lg.dlogits);

    auto refs = model.params();
    std::vector<double> analytic(refs.size());
    for (std::size_t i = 0; i < refs.size(); ++i) analytic[i] = *refs[i].grad;

    double max_err = 0.0;
    for (std::size_t i = 0; i < refs.size(); ++i) {
        double* p = refs[i].value;
        const double saved = *p;
        const auto loss_at = [&](double v) {
            *p = v;
            const Tensor out = model.forward(batch, /*training=*/false, nullptr);
            return compute_loss(loss, out, labels).loss;
        };
        // Small initial step with a deep ladder: the bottleneck relu makes
        // the loss piecewise smooth, and the stencil must be able to settle
        // on the near side of any kink next to the probe point.
        const double numeric =
            refs[i].is_lambda
                ? fd_ladder2_positive(loss_at, saved, 14)
                : fd_ladder4(loss_at, saved, 1e-2 * std::max(1.0, std::fabs(saved)), 14);
        *p = saved;
        max_err = std::max(max_err, gradient_rel_error(analytic[i], numeric));
    }
    return max_err;
}

}  // namespace apa
