#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "apa/datagen.hpp"
#include "apa/stats.hpp"
#include "apa/tensor.hpp"

namespace apa {

/// Parse failure with 1-based line/column coordinates for diagnostics.
class CsvError : public std::runtime_error {
public:
    CsvError(std::string message, std::size_t line, std::size_t column)
        : std::runtime_error("line " + std::to_string(line) + ", column " +
                             std::to_string(column) + ": " + message),
          line_(line),
          column_(column) {}

    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::size_t line_, column_;
};

/// Rectangular numeric table whose last column is an integer label. Used for
/// both logit tables (value columns class_0..class_{K-1}) and feature tables
/// (feat_0..feat_{d-1}).
struct CsvTable {
    std::vector<std::string> value_columns;
    Tensor values;            // n x columns
    std::vector<int> labels;  // n
};

CsvTable read_csv_table(const std::string& path);

void write_csv_table(const std::string& path, const std::vector<std::string>& value_columns,
                     const Tensor& values, const std::vector<int>& labels);

std::vector<std::string> logit_column_names(std::size_t classes);
std::vector<std::string> feature_column_names(std::size_t dim);

/// Exports a sampled dataset in the feature-table format consumed by the
/// nc1 command.
void write_features_csv(const std::string& path, const SampledDataset& dataset);

/// Interprets a CSV table as per-class logit samples: class k's empirical
/// distribution is column k over all rows, group tags come from label
/// frequencies. Labels must lie in [0, K).
ClassLogitTable logit_table_from_csv(const CsvTable& table);

}  // namespace apa
