#include "apa/collapse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace apa {

CovariancePair covariances(const Tensor& features, const std::vector<int>& labels) {
    const std::size_t n = features.rows;
    const std::size_t d = features.cols;
    if (n == 0 || d == 0) throw std::invalid_argument("covariances: empty feature matrix");
    if (labels.size() != n) throw std::invalid_argument("covariances: label count mismatch");

    int max_label = -1;
    for (int y : labels) {
        if (y < 0) throw std::domain_error("covariances: negative label");
        max_label = std::max(max_label, y);
    }
    const std::size_t k = static_cast<std::size_t>(max_label) + 1;

    std::vector<std::size_t> counts(k, 0);
    Tensor class_mean(k, d);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t y = static_cast<std::size_t>(labels[i]);
        ++counts[y];
        for (std::size_t j = 0; j < d; ++j) class_mean.at(y, j) += features.at(i, j);
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0)
            throw std::domain_error("covariances: class " + std::to_string(c) + " has no samples");
        for (std::size_t j = 0; j < d; ++j) class_mean.at(c, j) /= static_cast<double>(counts[c]);
    }

    std::vector<double> global_mean(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) global_mean[j] += features.at(i, j);
    for (std::size_t j = 0; j < d; ++j) global_mean[j] /= static_cast<double>(n);

    CovariancePair pair;
    pair.class_count = k;
    pair.dim = d;
    pair.sigma_w = Tensor(d, d);
    pair.sigma_b = Tensor(d, d);

    std::vector<double> dev(d);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t y = static_cast<std::size_t>(labels[i]);
        for (std::size_t j = 0; j < d; ++j) dev[j] = features.at(i, j) - class_mean.at(y, j);
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = 0; b < d; ++b) pair.sigma_w.at(a, b) += dev[a] * dev[b];
    }
    for (double& v : pair.sigma_w.data) v /= static_cast<double>(n);

    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t j = 0; j < d; ++j) dev[j] = class_mean.at(c, j) - global_mean[j];
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = 0; b < d; ++b) pair.sigma_b.at(a, b) += dev[a] * dev[b];
    }
    for (double& v : pair.sigma_b.data) v /= static_cast<double>(k);

    return pair;
}

SymmetricEigen eigh(const Tensor& symmetric) {
    const std::size_t d = symmetric.rows;
    if (d == 0 || symmetric.cols != d) throw std::invalid_argument("eigh: matrix must be square");
    double sym_residual = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            sym_residual = std::max(sym_residual, std::fabs(symmetric.at(i, j) - symmetric.at(j, i)));
            scale = std::max(scale, std::fabs(symmetric.at(i, j)));
        }
    if (sym_residual > 1e-8 * std::max(1.0, scale))
        throw std::invalid_argument("eigh: matrix is not symmetric");

    Tensor a = symmetric;
    Tensor v(d, d);
    for (std::size_t i = 0; i < d; ++i) v.at(i, i) = 1.0;

    const int max_sweeps = 100;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < d; ++p)
            for (std::size_t q = p + 1; q < d; ++q) off += a.at(p, q) * a.at(p, q);
        if (off <= 1e-30 * std::max(1.0, scale * scale)) break;

        for (std::size_t p = 0; p + 1 < d; ++p) {
            for (std::size_t q = p + 1; q < d; ++q) {
                const double apq = a.at(p, q);
                if (apq == 0.0) continue;
                const double app = a.at(p, p), aqq = a.at(q, q);
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (std::size_t i = 0; i < d; ++i) {
                    const double aip = a.at(i, p), aiq = a.at(i, q);
                    a.at(i, p) = c * aip - s * aiq;
                    a.at(i, q) = s * aip + c * aiq;
                }
                for (std::size_t i = 0; i < d; ++i) {
                    const double api = a.at(p, i), aqi = a.at(q, i);
                    a.at(p, i) = c * api - s * aqi;
                    a.at(q, i) = s * api + c * aqi;
                }
                for (std::size_t i = 0; i < d; ++i) {
                    const double vip = v.at(i, p), viq = v.at(i, q);
                    v.at(i, p) = c * vip - s * viq;
                    v.at(i, q) = s * vip + c * viq;
                }
            }
        }
    }

    SymmetricEigen out;
    out.values.resize(d);
    for (std::size_t i = 0; i < d; ++i) out.values[i] = a.at(i, i);

    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return out.values[x] < out.values[y]; });
    SymmetricEigen sorted;
    sorted.values.resize(d);
    sorted.vectors = Tensor(d, d);
    for (std::size_t c = 0; c < d; ++c) {
        sorted.values[c] = out.values[order[c]];
        for (std::size_t r = 0; r < d; ++r) sorted.vectors.at(r, c) = v.at(r, order[c]);
    }
    return sorted;
}

Tensor pinv_psd(const Tensor& symmetric) {
    const auto eig = eigh(symmetric);
    const std::size_t d = symmetric.rows;
    double max_eig = 0.0;
    for (double e : eig.values) max_eig = std::max(max_eig, e);
    const double threshold = 1e-10 * max_eig;

    Tensor out(d, d);
    for (std::size_t idx = 0; idx < d; ++idx) {
        const double e = eig.values[idx];
        if (!(e >= threshold) || e <= 0.0) continue;
        const double inv = 1.0 / e;
        for (std::size_t r = 0; r < d; ++r)
            for (std::size_t c = 0; c < d; ++c)
                out.at(r, c) += inv * eig.vectors.at(r, idx) * eig.vectors.at(c, idx);
    }
    return out;
}

double nc1(const CovariancePair& pair) {
    const std::size_t d = pair.dim;
    if (pair.sigma_w.rows != d || pair.sigma_b.rows != d || pair.class_count == 0)
        throw std::invalid_argument("nc1: invalid covariance pair");
    bool sigma_b_zero = true;
    for (double v : pair.sigma_b.data)
        if (v != 0.0) {
            sigma_b_zero = false;
            break;
        }
    if (sigma_b_zero)
        throw std::domain_error("nc1: between-class covariance is zero, collapse undefined");

    const Tensor pinv = pinv_psd(pair.sigma_b);
    double trace = 0.0;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) trace += pair.sigma_w.at(i, j) * pinv.at(j, i);
    return trace / static_cast<double>(pair.class_count);
}

}  // namespace apa
