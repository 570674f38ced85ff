#pragma once

// Contrastive margin features built from the normalized fusion channels.

#include "cgrq/data.hpp"
#include "cgrq/fusion.hpp"
#include "cgrq/matrix.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace cgrq {

/// Binary: (D~1 - D~0, T~1 - T~0[, s1 - s0]). Multiclass: runner-up minus best,
/// with best / runner-up taken from the fused scores (ties to the lower class).
std::vector<double> delta_row(const FusedSample& sample, bool include_fused);

Matrix build_deltas(std::span<const FusedSample> channels, std::size_t num_classes, bool include_fused = false);

std::vector<std::string> delta_column_names(bool include_fused);

struct DeltaFeatures {
    Scaler scaler;  // fitted on training rows only
    Matrix train;
    std::vector<Matrix> others;
};

DeltaFeatures standardize_deltas(const Matrix& train, std::span<const Matrix> others);

/// Header: delta_d, delta_theta[, delta_s], label
void write_delta_csv(const std::filesystem::path& path, const Matrix& deltas, std::span<const int> labels,
                     bool include_fused);

}  // namespace cgrq
