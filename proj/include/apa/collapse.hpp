#pragma once

#include <cstddef>
#include <vector>

#include "apa/tensor.hpp"

namespace apa {

/// Within-class (sigma_w) and between-class (sigma_b) covariance matrices
/// of a labelled feature set.
struct CovariancePair {
    Tensor sigma_w;  // d x d, (1/n)  sum_k sum_j (f - mean_k)(f - mean_k)^T
    Tensor sigma_b;  // d x d, (1/K) sum_k (mean_k - global)(mean_k - global)^T
    std::size_t class_count = 0;
    std::size_t dim = 0;
};

/// Computes both covariance matrices. Every class in [0, K) must have at
/// least one sample; K is max(label)+1.
CovariancePair covariances(const Tensor& features, const std::vector<int>& labels);

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues ascending with matching eigenvector columns.
struct SymmetricEigen {
    std::vector<double> values;
    Tensor vectors;  // column i pairs with values[i]
};
SymmetricEigen eigh(const Tensor& symmetric);

/// Moore-Penrose pseudo-inverse of a symmetric PSD matrix; eigenvalues
/// below 1e-10 * max-eigenvalue are zeroed.
Tensor pinv_psd(const Tensor& symmetric);

/// Neural-collapse variability, (1/K) * trace(sigma_w * pinv(sigma_b)).
/// Throws if sigma_b is identically zero (collapse undefined).
double nc1(const CovariancePair& pair);

}  // namespace apa
