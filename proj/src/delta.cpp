#include "cgrq/delta.hpp"

#include "cgrq/error.hpp"

#include <fstream>
#include <limits>
#include <stdexcept>

namespace cgrq {

std::vector<double> delta_row(const FusedSample& sample, bool include_fused) {
    const std::size_t C = sample.score.size();
    if (C < 2) throw std::invalid_argument("delta features need at least two classes");
    std::size_t hi = 1, lo = 0;  // binary: class 1 minus class 0
    if (C > 2) {
        lo = argmin_index(sample.score);
        hi = lo == 0 ? 1 : 0;
        for (std::size_t c = 0; c < C; ++c) {
            if (c != lo && sample.score[c] < sample.score[hi]) hi = c;
        }
    }
    std::vector<double> row{sample.distance_norm[hi] - sample.distance_norm[lo],
                            sample.angle_norm[hi] - sample.angle_norm[lo]};
    if (include_fused) row.push_back(sample.score[hi] - sample.score[lo]);
    return row;
}

Matrix build_deltas(std::span<const FusedSample> channels, std::size_t num_classes, bool include_fused) {
    if (num_classes < 2) throw std::invalid_argument("delta features need at least two classes");
    Matrix Z(0, include_fused ? 3 : 2);
    for (const auto& sample : channels) {
        if (sample.score.size() != num_classes) throw std::invalid_argument("incomplete channels for a sample");
        Z.append_row(delta_row(sample, include_fused));
    }
    return Z;
}

std::vector<std::string> delta_column_names(bool include_fused) {
    std::vector<std::string> names{"delta_d", "delta_theta"};
    if (include_fused) names.emplace_back("delta_s");
    return names;
}

DeltaFeatures standardize_deltas(const Matrix& train, std::span<const Matrix> others) {
    if (train.empty()) throw std::invalid_argument("standardize_deltas: no training rows");
    DeltaFeatures out;
    out.scaler = fit_scaler(train);
    out.train = out.scaler.transform(train);
    for (const auto& m : others) out.others.push_back(out.scaler.transform(m));
    return out;
}

void write_delta_csv(const std::filesystem::path& path, const Matrix& deltas, std::span<const int> labels,
                     bool include_fused) {
    if (deltas.rows() != labels.size()) throw std::invalid_argument("write_delta_csv: label count mismatch");
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out.precision(std::numeric_limits<double>::max_digits10);
    for (const auto& name : delta_column_names(include_fused)) out << name << ',';
    out << "label\n";
    for (std::size_t i = 0; i < deltas.rows(); ++i) {
        for (double v : deltas.row(i)) out << v << ',';
        out << labels[i] << '\n';
    }
}

}  // namespace cgrq
