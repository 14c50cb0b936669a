#include "apa/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace apa {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string& field, std::size_t line, std::size_t column) {
    double value = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    const auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc() || res.ptr != end)
        throw CsvError("expected a number, got '" + field + "'", line, column);
    if (!std::isfinite(value))
        throw CsvError("non-finite value '" + field + "'", line, column);
    return value;
}

int parse_label(const std::string& field, std::size_t line, std::size_t column) {
    int value = 0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    const auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc() || res.ptr != end)
        throw CsvError("expected an integer label, got '" + field + "'", line, column);
    return value;
}

}  // namespace

CsvTable read_csv_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CsvError("cannot open " + path, 0, 0);

    std::string line;
    if (!std::getline(in, line)) throw CsvError("empty file", 1, 1);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = split_line(line);
    if (header.size() < 2) throw CsvError("need at least one value column and a label column", 1, 1);
    if (header.back() != "label")
        throw CsvError("last column must be named 'label', got '" + header.back() + "'", 1,
                       header.size());

    CsvTable table;
    table.value_columns.assign(header.begin(), header.end() - 1);
    const std::size_t width = table.value_columns.size();

    std::vector<double> values;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_line(line);
        if (fields.size() != header.size())
            throw CsvError("expected " + std::to_string(header.size()) + " fields, got " +
                               std::to_string(fields.size()),
                           line_no, fields.size());
        for (std::size_t c = 0; c < width; ++c)
            values.push_back(parse_double(fields[c], line_no, c + 1));
        table.labels.push_back(parse_label(fields[width], line_no, width + 1));
    }

    const std::size_t rows = table.labels.size();
    table.values = Tensor::from_rows(rows, width, std::move(values));
    return table;
}

namespace {

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace

void write_csv_table(const std::string& path, const std::vector<std::string>& value_columns,
                     const Tensor& values, const std::vector<int>& labels) {
    if (values.cols != value_columns.size() || values.rows != labels.size())
        throw std::invalid_argument("write_csv_table: shape mismatch");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const auto& c : value_columns) out << c << ',';
    out << "label\n";
    for (std::size_t r = 0; r < values.rows; ++r) {
        for (std::size_t c = 0; c < values.cols; ++c) out << format_double(values.at(r, c)) << ',';
        out << labels[r] << '\n';
    }
}

std::vector<std::string> logit_column_names(std::size_t classes) {
    std::vector<std::string> out;
    out.reserve(classes);
    for (std::size_t k = 0; k < classes; ++k) out.push_back("class_" + std::to_string(k));
    return out;
}

std::vector<std::string> feature_column_names(std::size_t dim) {
    std::vector<std::string> out;
    out.reserve(dim);
    for (std::size_t j = 0; j < dim; ++j) out.push_back("feat_" + std::to_string(j));
    return out;
}

void write_features_csv(const std::string& path, const SampledDataset& dataset) {
    write_csv_table(path, feature_column_names(dataset.features.cols), dataset.features,
                    dataset.labels);
}

ClassLogitTable logit_table_from_csv(const CsvTable& table) {
    const std::size_t k = table.value_columns.size();
    const std::size_t n = table.values.rows;

    std::vector<std::size_t> freq(k, 0);
    for (std::size_t r = 0; r < n; ++r) {
        const int y = table.labels[r];
        if (y < 0 || static_cast<std::size_t>(y) >= k)
            throw CsvError("label " + std::to_string(y) + " outside [0, " + std::to_string(k) + ")",
                           r + 2, k + 1);
        ++freq[static_cast<std::size_t>(y)];
    }

    ClassLogitTable out;
    out.classes.resize(k);
    const auto groups = group_by_size(freq);
    for (std::size_t c = 0; c < k; ++c) {
        out.classes[c].group = groups[c];
        out.classes[c].logits.reserve(n);
        for (std::size_t r = 0; r < n; ++r) out.classes[c].logits.push_back(table.values.at(r, c));
    }
    return out;
}

}  // namespace apa
