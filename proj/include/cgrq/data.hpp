#pragma once

#include "cgrq/matrix.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cgrq {

/// Feature matrix plus integer labels in {0..C-1}. `class_names[c]` is the
/// original label text that was encoded as c (first-appearance order).
struct Dataset {
    Matrix X;
    std::vector<int> y;
    std::vector<std::string> feature_names;
    std::vector<std::string> class_names;

    std::size_t num_rows() const { return X.rows(); }
    std::size_t num_features() const { return X.cols(); }
    std::size_t num_classes() const { return class_names.size(); }
    std::vector<std::size_t> class_counts() const;

    /// Rows in the given order; keeps the full class inventory.
    Dataset subset(std::span<const std::size_t> rows) const;

    /// Throws DataError when any Dataset invariant is violated.
    void validate() const;
};

/// Raw CSV contents: header plus string cells.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::optional<std::size_t> column_index(const std::string& name) const;
};

CsvTable read_csv(std::istream& in, const std::string& source = "<stream>");
CsvTable read_csv(const std::filesystem::path& path);

Dataset load_csv(const std::filesystem::path& path, const std::string& label_column);
Dataset dataset_from_table(const CsvTable& table, const std::string& label_column, const std::string& source);

/// Extracts `feature_names` (in that order) from a table as numbers. Errors name the
/// missing column or the offending row/column.
Matrix feature_matrix(const CsvTable& table, std::span<const std::string> feature_names, const std::string& source);

double parse_number(const std::string& cell, std::size_t row, const std::string& column, const std::string& source);

struct SplitFractions {
    double train = 0.5625;
    double val = 0.1875;
    double test = 0.25;
};

SplitFractions parse_split_fractions(const std::string& text);

/// Split sizes as two successive ceil-rounded holdouts: test first, then
/// validation out of the remainder.
std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitFractions& fractions);

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
};

SplitIndices stratified_split_indices(std::span<const int> y, std::size_t num_classes, const SplitFractions& fractions,
                                      std::uint64_t seed);

struct Splits {
    Dataset train;
    Dataset val;
    Dataset test;
    SplitIndices indices;
};

Splits stratified_split(const Dataset& ds, const SplitFractions& fractions, std::uint64_t seed);

/// Column standardizer with population (1/N) statistics. Zero-variance columns keep std = 1.
struct Scaler {
    std::vector<double> means;
    std::vector<double> stds;

    std::size_t dimension() const { return means.size(); }
    Matrix transform(const Matrix& X) const;
    std::vector<double> transform(std::span<const double> x) const;
    Matrix inverse_transform(const Matrix& X) const;
};

Scaler fit_scaler(const Matrix& X);

struct CorrelationModel {
    Matrix R;
    /// |corr(feature, label)|, labels taken as numbers.
    std::optional<std::vector<double>> target_corr;
};

/// Pearson correlation; 0 when either input has zero variance.
double pearson(std::span<const double> a, std::span<const double> b);

CorrelationModel correlation(const Dataset& ds, bool include_target);

}  // namespace cgrq
