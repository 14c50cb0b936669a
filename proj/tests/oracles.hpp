#pragma once

// Test-only reference implementations, kept independent of the library's
// production paths.

#include <cmath>
#include <cstddef>
#include <vector>

#include "apa/tensor.hpp"

namespace apa::testing {

/// Naive Richard's-curve evaluation (lambda*exp(-kappa z) + 1)^(-1/lambda).
/// The double exponent overflows where the production form must not; it
/// exists only as a comparison oracle.
inline double apa_naive(double z, double kappa, double lambda) {
    return std::pow(lambda * std::exp(-kappa * z) + 1.0, -1.0 / lambda);
}

/// Literal double-loop covariance sums, following the defining equations
/// index by index.
struct BruteCovariances {
    Tensor sigma_w, sigma_b;
};

inline BruteCovariances brute_covariances(const Tensor& features, const std::vector<int>& labels) {
    const std::size_t n = features.rows, d = features.cols;
    int max_label = 0;
    for (int y : labels) max_label = std::max(max_label, y);
    const std::size_t k = static_cast<std::size_t>(max_label) + 1;

    std::vector<std::vector<std::size_t>> members(k);
    for (std::size_t i = 0; i < n; ++i) members[static_cast<std::size_t>(labels[i])].push_back(i);

    std::vector<std::vector<double>> class_mean(k, std::vector<double>(d, 0.0));
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t i : members[c])
            for (std::size_t j = 0; j < d; ++j) class_mean[c][j] += features.at(i, j);
        for (std::size_t j = 0; j < d; ++j) class_mean[c][j] /= static_cast<double>(members[c].size());
    }
    std::vector<double> global(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) global[j] += features.at(i, j);
    for (std::size_t j = 0; j < d; ++j) global[j] /= static_cast<double>(n);

    BruteCovariances out;
    out.sigma_w = Tensor(d, d);
    out.sigma_b = Tensor(d, d);
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t i : members[c])
            for (std::size_t a = 0; a < d; ++a)
                for (std::size_t b = 0; b < d; ++b)
                    out.sigma_w.at(a, b) += (features.at(i, a) - class_mean[c][a]) *
                                            (features.at(i, b) - class_mean[c][b]);
    for (double& v : out.sigma_w.data) v /= static_cast<double>(n);
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = 0; b < d; ++b)
                out.sigma_b.at(a, b) += (class_mean[c][a] - global[a]) * (class_mean[c][b] - global[b]);
    for (double& v : out.sigma_b.data) v /= static_cast<double>(k);
    return out;
}

}  // namespace apa::testing
