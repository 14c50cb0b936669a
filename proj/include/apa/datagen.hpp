#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "apa/stats.hpp"
#include "apa/tensor.hpp"

namespace apa {

/// Synthetic long-tailed dataset description: Gaussian clusters at unit-norm
/// random centers, class sizes following an exponential profile
/// n_k = round(n_max * IF^(-k/(K-1))).
struct LongTailSpec {
    std::size_t classes = 10;
    std::size_t dim = 8;
    std::size_t n_max = 100;
    double imbalance = 1.0;  // largest / smallest class size; 1 = balanced
    double spread = 0.35;    // isotropic cluster standard deviation
    std::uint64_t seed = 0;

    void validate() const;
};

struct SampledDataset {
    Tensor features;          // n x d, class-major row order
    std::vector<int> labels;  // in [0, K)
    std::vector<std::size_t> class_sizes;
    std::vector<Group> class_groups;  // by training-set size thirds
};

/// Deterministic per-class sizes for the exponential profile. Throws if any
/// class rounds to zero samples.
std::vector<std::size_t> longtail_class_sizes(const LongTailSpec& spec);

/// The imbalanced training set for a spec. Same seed, same bytes.
SampledDataset make_longtail(const LongTailSpec& spec);

/// A balanced evaluation set drawn around the same class centers from an
/// independent stream; class_groups still reflect the training-set sizes.
SampledDataset make_balanced_eval(const LongTailSpec& spec, std::size_t per_class);

/// Inverse-CDF sampling from a Logistic or Gumbel distribution.
EmpiricalDistribution sample_theoretical(CdfFamily family, double location, double scale,
                                         std::size_t n, std::uint64_t seed);

}  // namespace apa
