#pragma once

// Correlation group structures: anchor-centred neighbourhoods of correlated
// features and the nonlinear group features built from them.

#include "cgrq/data.hpp"
#include "cgrq/matrix.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace cgrq {

struct Anchor {
    std::size_t feature = 0;
    /// Membership list, anchor first, then the top-m features by |R| (descending).
    std::vector<std::size_t> members;
    /// Correlation weight per member, aligned with `members`; weights[0] == 1.
    std::vector<double> weights;

    double weight_of(std::size_t f) const;  // throws std::out_of_range for non-members
    bool contains(std::size_t f) const;
};

struct AnchorModel {
    std::size_t num_features = 0;
    std::vector<Anchor> anchors;

    std::size_t size() const { return anchors.size(); }
    /// Position of the anchor built around `feature`, if any.
    std::optional<std::size_t> position_of(std::size_t feature) const;
};

/// Anchors ordered by target correlation (descending, ties by index) when the
/// model has target correlations, else by feature index. `max_anchors` keeps
/// the first K anchors of that order.
AnchorModel build_anchor_model(const CorrelationModel& corr, std::size_t m,
                               std::optional<std::size_t> max_anchors = std::nullopt);

/// Per-anchor subsets, aligned with AnchorModel::anchors. Each subset lists the anchor first.
struct CgrConfig {
    std::size_t k = 0;
    std::vector<std::vector<std::size_t>> subsets;

    bool operator==(const CgrConfig&) const = default;
};

/// Throws std::invalid_argument unless `config` fits `model` (anchor first, members only, no repeats).
void validate_config(const CgrConfig& config, const AnchorModel& model);

enum class Embedding { phi, z };

/// u(i) = sqrt(sum_f (rho_{a,f} x_{i,f})^2) over f in `subset`.
std::vector<double> anchor_feature_vector(const Matrix& X, const Anchor& anchor, std::span<const std::size_t> subset);

/// Single-record version of anchor_feature_vector.
double anchor_feature(std::span<const double> x, const Anchor& anchor, std::span<const std::size_t> subset);

/// N x K matrix, column j built from anchor j under config.subsets[j]. The z
/// embedding replaces the weighted norm by g * ||x_subset|| (group strength over the same subset).
Matrix build_feature_matrix(const Matrix& X, const AnchorModel& model, const CgrConfig& config,
                            Embedding embedding = Embedding::phi);

/// g_a = sqrt(sum over the membership of |rho|^2).
double group_strength(const Anchor& anchor);
double group_strength(const Anchor& anchor, std::span<const std::size_t> subset);

/// z_a(x) = g_a * ||x_{M_a}||, one value per row.
std::vector<double> multiplicative_feature(const Matrix& X, const Anchor& anchor);

}  // namespace cgrq
