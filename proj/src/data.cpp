#include "cgrq/data.hpp"

#include "cgrq/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace cgrq {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no, const std::string& source) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cell.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cell.push_back(ch);
            }
        } else if (ch == '"') {
            quoted = true;
            was_quoted = true;
        } else if (ch == ',') {
            cells.push_back(was_quoted ? cell : trim(cell));
            cell.clear();
            was_quoted = false;
        } else {
            cell.push_back(ch);
        }
    }
    if (quoted) throw DataError(source + ": unterminated quote on line " + std::to_string(line_no));
    cells.push_back(was_quoted ? cell : trim(cell));
    return cells;
}

}  // namespace

std::vector<std::size_t> Dataset::class_counts() const {
    std::vector<std::size_t> counts(num_classes(), 0);
    for (int label : y) ++counts.at(static_cast<std::size_t>(label));
    return counts;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
    Dataset out;
    out.X = X.select_rows(rows);
    out.y.reserve(rows.size());
    for (auto r : rows) out.y.push_back(y.at(r));
    out.feature_names = feature_names;
    out.class_names = class_names;
    return out;
}

void Dataset::validate() const {
    if (X.rows() != y.size()) throw DataError("dataset has " + std::to_string(X.rows()) + " rows but " +
                                              std::to_string(y.size()) + " labels");
    if (feature_names.size() != X.cols()) throw DataError("feature name count does not match column count");
    std::set<std::string> unique(feature_names.begin(), feature_names.end());
    if (unique.size() != feature_names.size()) throw DataError("duplicate feature names");
    for (int label : y) {
        if (label < 0 || static_cast<std::size_t>(label) >= num_classes()) {
            throw DataError("label " + std::to_string(label) + " outside class inventory");
        }
    }
}

std::optional<std::size_t> CsvTable::column_index(const std::string& name) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
}

CsvTable read_csv(std::istream& in, const std::string& source) {
    CsvTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
        if (trim(line).empty()) continue;
        auto cells = split_csv_line(line, line_no, source);
        if (table.header.empty()) {
            table.header = std::move(cells);
            continue;
        }
        if (cells.size() != table.header.size()) {
            throw DataError(source + ": line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                            " cells, header has " + std::to_string(table.header.size()));
        }
        table.rows.push_back(std::move(cells));
    }
    if (table.header.empty()) throw DataError(source + ": missing header row");
    return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open data file " + path.string());
    return read_csv(in, path.string());
}

double parse_number(const std::string& cell, std::size_t row, const std::string& column, const std::string& source) {
    double value = 0.0;
    const char* begin = cell.data();
    const char* end = cell.data() + cell.size();
    if (begin != end && *begin == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (cell.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
        throw DataError(source + ": non-numeric value '" + cell + "' at row " + std::to_string(row) + ", column '" +
                        column + "'");
    }
    return value;
}

Dataset dataset_from_table(const CsvTable& table, const std::string& label_column, const std::string& source) {
    const auto label_idx = table.column_index(label_column);
    if (!label_idx) throw DataError(source + ": label column '" + label_column + "' not found");
    if (table.rows.empty()) throw DataError(source + ": dataset has no rows");

    Dataset ds;
    for (std::size_t j = 0; j < table.header.size(); ++j) {
        if (j != *label_idx) ds.feature_names.push_back(table.header[j]);
    }
    ds.X = Matrix(table.rows.size(), ds.feature_names.size());
    std::map<std::string, int> encoding;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& cells = table.rows[i];
        std::size_t out_col = 0;
        for (std::size_t j = 0; j < cells.size(); ++j) {
            if (j == *label_idx) continue;
            // rows are reported 1-based, counting data rows only
            ds.X(i, out_col++) = parse_number(cells[j], i + 1, table.header[j], source);
        }
        const std::string& label = cells[*label_idx];
        if (label.empty()) throw DataError(source + ": empty label at row " + std::to_string(i + 1));
        auto [it, inserted] = encoding.try_emplace(label, static_cast<int>(ds.class_names.size()));
        if (inserted) ds.class_names.push_back(label);
        ds.y.push_back(it->second);
    }
    ds.validate();
    return ds;
}

Dataset load_csv(const std::filesystem::path& path, const std::string& label_column) {
    return dataset_from_table(read_csv(path), label_column, path.string());
}

Matrix feature_matrix(const CsvTable& table, std::span<const std::string> feature_names, const std::string& source) {
    std::vector<std::size_t> cols;
    for (const auto& name : feature_names) {
        auto idx = table.column_index(name);
        if (!idx) throw DataError(source + ": missing feature column '" + name + "'");
        cols.push_back(*idx);
    }
    Matrix X(table.rows.size(), cols.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            X(i, j) = parse_number(table.rows[i][cols[j]], i + 1, feature_names[j], source);
        }
    }
    return X;
}

SplitFractions parse_split_fractions(const std::string& text) {
    std::vector<double> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) parts.push_back(parse_number(trim(item), 0, "--split", "split fractions"));
    if (parts.size() != 3) throw DataError("split needs three comma-separated fractions, got '" + text + "'");
    const SplitFractions f{parts[0], parts[1], parts[2]};
    split_sizes(0, f);  // validates sign and sum
    return f;
}

std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitFractions& f) {
    if (f.train <= 0 || f.val <= 0 || f.test <= 0) throw DataError("split fractions must be positive");
    if (std::abs(f.train + f.val + f.test - 1.0) > 1e-9) throw DataError("split fractions must sum to 1");
    constexpr double tol = 1e-9;
    const auto ceil_tol = [](double v) { return static_cast<std::size_t>(std::ceil(v - tol)); };
    const std::size_t test = std::min(n, ceil_tol(static_cast<double>(n) * f.test));
    const std::size_t rest = n - test;
    const std::size_t val = std::min(rest, ceil_tol(static_cast<double>(rest) * f.val / (f.train + f.val)));
    return {rest - val, val, test};
}

SplitIndices stratified_split_indices(std::span<const int> y, std::size_t num_classes, const SplitFractions& fractions,
                                      std::uint64_t seed) {
    const std::size_t n = y.size();
    const auto sizes = split_sizes(n, fractions);
    std::vector<std::vector<std::size_t>> by_class(num_classes);
    for (std::size_t i = 0; i < n; ++i) by_class.at(static_cast<std::size_t>(y[i])).push_back(i);
    for (std::size_t c = 0; c < num_classes; ++c) {
        if (by_class[c].size() < sizes.size()) {
            throw DataError("class " + std::to_string(c) + " has " + std::to_string(by_class[c].size()) +
                            " rows, fewer than the 3 splits");
        }
    }

    // Controlled rounding of the class x split table n_c * S_j / N: start from floors,
    // then place the remaining units so every row and column total is exact
    // (Ryser fill: columns by descending deficit, rows by descending deficit
    // then fractional part).
    constexpr std::size_t J = 3;
    std::vector<std::array<std::size_t, J>> counts(num_classes);
    std::vector<std::array<double, J>> frac(num_classes);
    std::vector<std::size_t> row_deficit(num_classes);
    std::array<std::size_t, J> col_deficit = sizes;
    for (std::size_t c = 0; c < num_classes; ++c) {
        std::size_t assigned = 0;
        for (std::size_t j = 0; j < J; ++j) {
            const double exact = static_cast<double>(by_class[c].size()) * static_cast<double>(sizes[j]) /
                                 static_cast<double>(n);
            counts[c][j] = static_cast<std::size_t>(std::floor(exact));
            frac[c][j] = exact - std::floor(exact);
            assigned += counts[c][j];
            col_deficit[j] -= counts[c][j];
        }
        row_deficit[c] = by_class[c].size() - assigned;
    }
    std::array<std::size_t, J> col_order{0, 1, 2};
    std::stable_sort(col_order.begin(), col_order.end(),
                     [&](std::size_t a, std::size_t b) { return col_deficit[a] > col_deficit[b]; });
    for (std::size_t j : col_order) {
        std::vector<std::size_t> rows(num_classes);
        std::iota(rows.begin(), rows.end(), 0);
        std::stable_sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
            if (row_deficit[a] != row_deficit[b]) return row_deficit[a] > row_deficit[b];
            return frac[a][j] > frac[b][j];
        });
        for (std::size_t r = 0; r < col_deficit[j]; ++r) {
            const std::size_t c = rows.at(r);
            if (row_deficit[c] == 0) throw std::logic_error("stratified split: rounding failed");
            ++counts[c][j];
            --row_deficit[c];
        }
        col_deficit[j] = 0;
    }

    std::mt19937_64 rng(seed);
    SplitIndices out;
    for (std::size_t c = 0; c < num_classes; ++c) {
        auto& idx = by_class[c];
        std::shuffle(idx.begin(), idx.end(), rng);
        auto it = idx.begin();
        out.train.insert(out.train.end(), it, it + static_cast<std::ptrdiff_t>(counts[c][0]));
        it += static_cast<std::ptrdiff_t>(counts[c][0]);
        out.val.insert(out.val.end(), it, it + static_cast<std::ptrdiff_t>(counts[c][1]));
        it += static_cast<std::ptrdiff_t>(counts[c][1]);
        out.test.insert(out.test.end(), it, idx.end());
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.val.begin(), out.val.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

Splits stratified_split(const Dataset& ds, const SplitFractions& fractions, std::uint64_t seed) {
    Splits s;
    s.indices = stratified_split_indices(ds.y, ds.num_classes(), fractions, seed);
    s.train = ds.subset(s.indices.train);
    s.val = ds.subset(s.indices.val);
    s.test = ds.subset(s.indices.test);
    return s;
}

Scaler fit_scaler(const Matrix& X) {
    if (X.empty()) throw std::invalid_argument("fit_scaler: empty matrix");
    const std::size_t n = X.rows();
    Scaler s;
    s.means.assign(X.cols(), 0.0);
    s.stds.assign(X.cols(), 1.0);
    for (std::size_t j = 0; j < X.cols(); ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += X(i, j);
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) var += (X(i, j) - mean) * (X(i, j) - mean);
        var /= static_cast<double>(n);
        const double sd = std::sqrt(var);
        s.means[j] = mean;
        // relative threshold: columns that are constant up to rounding noise
        s.stds[j] = sd > 1e-12 * std::max(1.0, std::abs(mean)) ? sd : 1.0;
    }
    return s;
}

std::vector<double> Scaler::transform(std::span<const double> x) const {
    if (x.size() != means.size()) {
        throw std::invalid_argument("scaler expects " + std::to_string(means.size()) + " columns, got " +
                                    std::to_string(x.size()));
    }
    std::vector<double> out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - means[j]) / stds[j];
    return out;
}

Matrix Scaler::transform(const Matrix& X) const {
    if (X.cols() != means.size()) {
        throw std::invalid_argument("scaler expects " + std::to_string(means.size()) + " columns, got " +
                                    std::to_string(X.cols()));
    }
    Matrix out(X.rows(), X.cols());
    for (std::size_t i = 0; i < X.rows(); ++i) {
        for (std::size_t j = 0; j < X.cols(); ++j) out(i, j) = (X(i, j) - means[j]) / stds[j];
    }
    return out;
}

Matrix Scaler::inverse_transform(const Matrix& X) const {
    if (X.cols() != means.size()) throw std::invalid_argument("scaler dimension mismatch");
    Matrix out(X.rows(), X.cols());
    for (std::size_t i = 0; i < X.rows(); ++i) {
        for (std::size_t j = 0; j < X.cols(); ++j) out(i, j) = X(i, j) * stds[j] + means[j];
    }
    return out;
}

double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("pearson: length mismatch");
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa <= 0.0 || sbb <= 0.0) return 0.0;
    const double r = sab / std::sqrt(saa * sbb);
    if (!std::isfinite(r)) return 0.0;
    return std::clamp(r, -1.0, 1.0);
}

CorrelationModel correlation(const Dataset& ds, bool include_target) {
    if (ds.num_rows() < 2) throw DataError("correlation needs at least 2 rows");
    const std::size_t m = ds.num_features();
    std::vector<std::vector<double>> cols(m);
    std::vector<bool> constant(m);
    for (std::size_t j = 0; j < m; ++j) {
        cols[j] = ds.X.column(j);
        const auto [lo, hi] = std::minmax_element(cols[j].begin(), cols[j].end());
        constant[j] = *lo == *hi;
    }
    CorrelationModel model;
    model.R = Matrix(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        model.R(i, i) = constant[i] ? 0.0 : 1.0;
        for (std::size_t j = i + 1; j < m; ++j) {
            const double r = pearson(cols[i], cols[j]);
            model.R(i, j) = r;
            model.R(j, i) = r;
        }
    }
    if (include_target) {
        std::vector<double> target(ds.y.begin(), ds.y.end());
        std::vector<double> tc(m);
        for (std::size_t j = 0; j < m; ++j) tc[j] = std::abs(pearson(cols[j], target));
        model.target_corr = std::move(tc);
    }
    return model;
}

}  // namespace cgrq
