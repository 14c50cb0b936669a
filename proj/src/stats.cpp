#include "apa/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "apa/activation.hpp"
#include "apa/parallel.hpp"

namespace apa {

namespace {
constexpr double kPi = 3.141592653589793238462643;
constexpr double kEulerMascheroni = 0.5772156649015329;
constexpr double kGateClamp = 1e-7;
}  // namespace

const char* to_string(Group g) {
    switch (g) {
        case Group::Many: return "many";
        case Group::Medium: return "medium";
        case Group::Few: return "few";
    }
    return "?";
}

std::vector<Group> group_by_size(const std::vector<std::size_t>& class_sizes) {
    const std::size_t k = class_sizes.size();
    if (k == 0) throw std::invalid_argument("group_by_size: no classes");
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return class_sizes[a] > class_sizes[b];
    });
    const std::size_t band = std::max<std::size_t>(1, (k + 1) / 3);
    std::vector<Group> groups(k, Group::Medium);
    for (std::size_t rank = 0; rank < k; ++rank) {
        if (rank < band)
            groups[order[rank]] = Group::Many;
        else if (rank >= k - band)
            groups[order[rank]] = Group::Few;
    }
    return groups;
}

EmpiricalDistribution EmpiricalDistribution::from_samples(std::vector<double> xs) {
    for (double v : xs)
        if (!std::isfinite(v)) throw std::domain_error("empirical distribution: non-finite sample");
    std::sort(xs.begin(), xs.end());
    EmpiricalDistribution d;
    d.samples = std::move(xs);
    const std::size_t n = d.samples.size();
    if (n == 0) return d;
    double sum = 0.0;
    for (double v : d.samples) sum += v;
    d.mean = sum / static_cast<double>(n);
    double m2 = 0.0, m3 = 0.0;
    for (double v : d.samples) {
        const double c = v - d.mean;
        m2 += c * c;
        m3 += c * c * c;
    }
    m2 /= static_cast<double>(n);
    m3 /= static_cast<double>(n);
    d.stddev = std::sqrt(m2);
    d.skewness = m2 > 0.0 ? m3 / (m2 * d.stddev) : 0.0;
    return d;
}

const char* to_string(CdfFamily f) {
    return f == CdfFamily::Logistic ? "logistic" : "gumbel";
}

double FittedCDF::cdf(double x) const {
    const double t = (x - location) / scale;
    if (family == CdfFamily::Logistic) return stable_logistic(t);
    return std::exp(-std::exp(-t));
}

double FittedCDF::quantile(double u) const {
    if (!(u > 0.0 && u < 1.0)) throw std::domain_error("quantile: u must be in (0,1)");
    if (family == CdfFamily::Logistic) return location + scale * std::log(u / (1.0 - u));
    return location - scale * std::log(-std::log(u));
}

FittedCDF fit_cdf(const EmpiricalDistribution& dist, CdfFamily family) {
    if (dist.n() < 2) throw std::domain_error("fit_cdf: need at least 2 samples");
    if (!(dist.stddev > 0.0)) throw std::domain_error("fit_cdf: degenerate distribution (zero variance)");
    FittedCDF fit;
    fit.family = family;
    if (family == CdfFamily::Logistic) {
        fit.scale = dist.stddev * std::sqrt(3.0) / kPi;
        fit.location = dist.mean;
    } else {
        fit.scale = dist.stddev * std::sqrt(6.0) / kPi;
        fit.location = dist.mean - kEulerMascheroni * fit.scale;
    }
    return fit;
}

double ks_distance(const EmpiricalDistribution& dist, const FittedCDF& cdf) {
    const std::size_t n = dist.n();
    if (n < 2) throw std::domain_error("ks_distance: need at least 2 samples");
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = cdf.cdf(dist.samples[i]);
        const double hi = static_cast<double>(i + 1) / static_cast<double>(n) - f;
        const double lo = f - static_cast<double>(i) / static_cast<double>(n);
        d = std::max(d, std::max(hi, lo));
    }
    return d;
}

AlignmentReport logit_alignment_report(const ClassLogitTable& table) {
    const std::size_t k = table.classes.size();
    if (k == 0) throw std::invalid_argument("alignment report: empty table");

    AlignmentReport report;
    report.classes.resize(k);
    parallel_for(k, [&](std::size_t c) {
        const auto& entry = table.classes[c];
        ClassAlignment& out = report.classes[c];
        out.class_id = static_cast<int>(c);
        out.n = entry.logits.size();
        out.group = entry.group;
        if (entry.logits.size() < 2) {
            out.skipped = true;
            out.skip_reason = "fewer than 2 samples";
            return;
        }
        const auto dist = EmpiricalDistribution::from_samples(entry.logits);
        if (!(dist.stddev > 0.0)) {
            out.skipped = true;
            out.skip_reason = "zero variance";
            return;
        }
        out.skewness = dist.skewness;
        out.logistic_fit = fit_cdf(dist, CdfFamily::Logistic);
        out.gumbel_fit = fit_cdf(dist, CdfFamily::Gumbel);
        out.ks_logistic = ks_distance(dist, out.logistic_fit);
        out.ks_gumbel = ks_distance(dist, out.gumbel_fit);
        out.winner = out.ks_gumbel < out.ks_logistic ? CdfFamily::Gumbel : CdfFamily::Logistic;
    });

    for (const auto& c : report.classes) {
        if (c.skipped) continue;
        ++report.evaluated;
        if (c.winner == CdfFamily::Gumbel) ++report.gumbel_wins;
    }
    report.gumbel_fraction =
        report.evaluated > 0
            ? static_cast<double>(report.gumbel_wins) / static_cast<double>(report.evaluated)
            : 0.0;
    report.aggregate_winner =
        report.gumbel_fraction > 0.5 ? CdfFamily::Gumbel : CdfFamily::Logistic;
    return report;
}

double attention_entropy(const Tensor& gates, bool base2) {
    if (gates.size() == 0) throw std::domain_error("attention_entropy: empty tensor");
    double total = 0.0;
    for (double raw : gates.data) {
        if (!std::isfinite(raw)) throw std::domain_error("attention_entropy: non-finite gate");
        const double a = std::clamp(raw, kGateClamp, 1.0 - kGateClamp);
        if (base2)
            total += a * std::log2(a) + (1.0 - a) * std::log2(1.0 - a);
        else
            total += a * std::log(a) + (1.0 - a) * std::log(1.0 - a);
    }
    return -total / static_cast<double>(gates.size());
}

std::vector<double> attention_variance(const std::vector<Tensor>& gates_per_layer) {
    if (gates_per_layer.empty()) throw std::invalid_argument("attention_variance: no layers");
    std::vector<double> out;
    out.reserve(gates_per_layer.size());
    for (const auto& layer : gates_per_layer) {
        if (layer.size() == 0) throw std::invalid_argument("attention_variance: empty layer tensor");
        double mean = 0.0;
        for (double v : layer.data) mean += v;
        mean /= static_cast<double>(layer.size());
        double var = 0.0;
        for (double v : layer.data) var += (v - mean) * (v - mean);
        out.push_back(var / static_cast<double>(layer.size()));
    }
    return out;
}

}  // namespace apa
