#include "apa/datagen.hpp"

#include <cmath>
#include <stdexcept>

#include "apa/rng.hpp"

namespace apa {

void LongTailSpec::validate() const {
    if (classes < 2) throw std::invalid_argument("longtail spec: need at least 2 classes");
    if (dim == 0) throw std::invalid_argument("longtail spec: dim must be >= 1");
    if (n_max == 0) throw std::invalid_argument("longtail spec: n_max must be >= 1");
    if (!(imbalance >= 1.0)) throw std::invalid_argument("longtail spec: imbalance must be >= 1");
    if (!(spread > 0.0)) throw std::invalid_argument("longtail spec: spread must be > 0");
}

std::vector<std::size_t> longtail_class_sizes(const LongTailSpec& spec) {
    spec.validate();
    std::vector<std::size_t> sizes(spec.classes);
    const double k_last = static_cast<double>(spec.classes - 1);
    for (std::size_t k = 0; k < spec.classes; ++k) {
        const double frac = static_cast<double>(k) / k_last;
        const double n = std::round(static_cast<double>(spec.n_max) * std::pow(spec.imbalance, -frac));
        if (n < 1.0)
            throw std::invalid_argument("longtail spec: class " + std::to_string(k) +
                                        " rounds to zero samples");
        sizes[k] = static_cast<std::size_t>(n);
    }
    return sizes;
}

namespace {

// Unit-norm class centers, shared by the training and eval sets.
Tensor class_centers(const LongTailSpec& spec) {
    Rng rng = Rng(spec.seed).derive(stream::centers);
    Tensor centers(spec.classes, spec.dim);
    for (std::size_t c = 0; c < spec.classes; ++c) {
        double norm2 = 0.0;
        for (std::size_t j = 0; j < spec.dim; ++j) {
            const double v = rng.normal();
            centers.at(c, j) = v;
            norm2 += v * v;
        }
        const double norm = std::sqrt(norm2);
        if (norm == 0.0) {
            centers.at(c, 0) = 1.0;  // measure-zero fallback
            continue;
        }
        for (std::size_t j = 0; j < spec.dim; ++j) centers.at(c, j) /= norm;
    }
    return centers;
}

SampledDataset sample_clusters(const LongTailSpec& spec, const std::vector<std::size_t>& sizes,
                               std::uint64_t feature_stream) {
    const Tensor centers = class_centers(spec);
    std::size_t total = 0;
    for (std::size_t s : sizes) total += s;

    SampledDataset out;
    out.features = Tensor(total, spec.dim);
    out.labels.reserve(total);
    out.class_sizes = longtail_class_sizes(spec);
    out.class_groups = group_by_size(out.class_sizes);

    Rng rng = Rng(spec.seed).derive(feature_stream);
    std::size_t row = 0;
    for (std::size_t c = 0; c < spec.classes; ++c) {
        for (std::size_t i = 0; i < sizes[c]; ++i, ++row) {
            for (std::size_t j = 0; j < spec.dim; ++j)
                out.features.at(row, j) = centers.at(c, j) + spec.spread * rng.normal();
            out.labels.push_back(static_cast<int>(c));
        }
    }
    return out;
}

}  // namespace

SampledDataset make_longtail(const LongTailSpec& spec) {
    return sample_clusters(spec, longtail_class_sizes(spec), stream::features);
}

SampledDataset make_balanced_eval(const LongTailSpec& spec, std::size_t per_class) {
    if (per_class == 0) throw std::invalid_argument("balanced eval: per_class must be >= 1");
    std::vector<std::size_t> sizes(spec.classes, per_class);
    return sample_clusters(spec, sizes, stream::eval_features);
}

EmpiricalDistribution sample_theoretical(CdfFamily family, double location, double scale,
                                         std::size_t n, std::uint64_t seed) {
    if (!(scale > 0.0)) throw std::invalid_argument("sample_theoretical: scale must be > 0");
    if (n < 2) throw std::invalid_argument("sample_theoretical: need n >= 2");
    const FittedCDF cdf{family, location, scale};
    std::vector<double> xs(n);
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) xs[i] = cdf.quantile(rng.uniform_open());
    return EmpiricalDistribution::from_samples(std::move(xs));
}

}  // namespace apa
