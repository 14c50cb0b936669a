#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace apa {

/// Dense row-major matrix of doubles. A vector is a one-column tensor.
struct Tensor {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Tensor() = default;
    Tensor(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    static Tensor from_rows(std::size_t r, std::size_t c, std::vector<double> values) {
        if (values.size() != r * c) throw std::invalid_argument("tensor: data/shape mismatch");
        Tensor t;
        t.rows = r;
        t.cols = c;
        t.data = std::move(values);
        return t;
    }

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::size_t size() const { return data.size(); }

    bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }

    /// Throws if any element is non-finite; NaN propagation is a hard failure.
    void require_finite(const char* what) const {
        if (!all_finite()) throw std::runtime_error(std::string("non-finite values in ") + what);
    }
};

/// y = A * x for a (m×n) matrix and length-n vector, plus bias (length m).
inline void affine(const Tensor& w, const double* x, const double* b, double* y) {
    for (std::size_t i = 0; i < w.rows; ++i) {
        double acc = b ? b[i] : 0.0;
        const double* row = w.data.data() + i * w.cols;
        for (std::size_t j = 0; j < w.cols; ++j) acc += row[j] * x[j];
        y[i] = acc;
    }
}

}  // namespace apa
