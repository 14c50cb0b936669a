#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "apa/tensor.hpp"

namespace apa {

/// Frequency groups used for per-group reporting. Classes are ranked by
/// training-set size; the top band is Many, the bottom band Few.
enum class Group { Many, Medium, Few };

const char* to_string(Group g);

/// Assigns groups by thirds of the size ranking (ties broken by class
/// index). Band width is max(1, (K+1)/3).
std::vector<Group> group_by_size(const std::vector<std::size_t>& class_sizes);

/// Sorted sample vector with cached population moments.
struct EmpiricalDistribution {
    std::vector<double> samples;  // ascending
    double mean = 0.0;
    double stddev = 0.0;    // population (1/n)
    double skewness = 0.0;  // standardized third moment; 0 when stddev == 0

    static EmpiricalDistribution from_samples(std::vector<double> xs);
    std::size_t n() const { return samples.size(); }
};

enum class CdfFamily { Logistic, Gumbel };

const char* to_string(CdfFamily f);

/// Location-scale CDF, Logistic or Gumbel.
struct FittedCDF {
    CdfFamily family = CdfFamily::Logistic;
    double location = 0.0;
    double scale = 1.0;

    double cdf(double x) const;
    /// Inverse CDF for u in (0,1): Logistic location + scale*ln(u/(1-u)),
    /// Gumbel location - scale*ln(-ln u).
    double quantile(double u) const;
};

/// Method-of-moments fit. Logistic: s = std*sqrt(3)/pi, mu = mean.
/// Gumbel: s = std*sqrt(6)/pi, mu = mean - gamma*s.
FittedCDF fit_cdf(const EmpiricalDistribution& dist, CdfFamily family);

/// Exact one-sample Kolmogorov-Smirnov statistic,
/// sup_i max(i/n - F(x_(i)), F(x_(i)) - (i-1)/n).
double ks_distance(const EmpiricalDistribution& dist, const FittedCDF& cdf);

/// Per-class logit samples plus a frequency group tag.
struct ClassLogitTable {
    struct Entry {
        std::vector<double> logits;
        Group group = Group::Medium;
    };
    std::vector<Entry> classes;
};

/// Per-class two-family KS comparison.
struct ClassAlignment {
    int class_id = 0;
    std::size_t n = 0;
    bool skipped = false;
    std::string skip_reason;
    Group group = Group::Medium;
    double skewness = 0.0;
    FittedCDF logistic_fit, gumbel_fit;
    double ks_logistic = 0.0;
    double ks_gumbel = 0.0;
    CdfFamily winner = CdfFamily::Logistic;
};

struct AlignmentReport {
    std::vector<ClassAlignment> classes;
    std::size_t evaluated = 0;
    std::size_t gumbel_wins = 0;
    double gumbel_fraction = 0.0;  // over evaluated classes
    CdfFamily aggregate_winner = CdfFamily::Logistic;
    // Fit convention, recorded in emitted reports.
    std::string fit_convention = "per-class location-scale fit, method of moments";
};

/// Fits both families per class and compares KS distances. Classes with
/// fewer than 2 samples or zero variance are marked skipped and excluded
/// from the aggregate. Per-class work may run concurrently; results are
/// merged in class order.
AlignmentReport logit_alignment_report(const ClassLogitTable& table);

/// Mean binary entropy of gate values, -(1/C) sum_c [a log a + (1-a) log(1-a)].
/// Gates are clamped to [1e-7, 1-1e-7] first. Base 2 by default so the
/// maximum is exactly 1; set base2=false for natural log.
double attention_entropy(const Tensor& gates, bool base2 = true);

/// Population variance of gate values, one entry per layer.
std::vector<double> attention_variance(const std::vector<Tensor>& gates_per_layer);

}  // namespace apa
