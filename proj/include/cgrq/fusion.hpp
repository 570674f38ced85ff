#pragma once

// Fusion-score inference over compact SWAP-test channels, classification
// metrics, mixing-weight calibration and F-beta reporting sweeps.

#include "cgrq/matrix.hpp"
#include "cgrq/medoid.hpp"
#include "cgrq/quantum.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace cgrq {

inline constexpr double kDefaultEpsilon = 1e-12;

struct FusionParams {
    double alpha = 0.5;
    bool use_angular = true;
    double epsilon = kDefaultEpsilon;
    /// Per-class multipliers applied after fusion; empty means unweighted.
    std::vector<double> class_weights;

    void validate(std::size_t num_classes) const;
};

enum class ClassWeightMode { none, inv_sqrt };

/// inv_sqrt: w_c = sqrt(n_c / max n), so smaller classes get smaller (more
/// favourable under argmin) multipliers. `none` returns an empty vector.
std::vector<double> class_weights_from_counts(std::span<const std::size_t> counts, ClassWeightMode mode);

/// Exact statevector probabilities unless `shots` is set; per-pair shot seeds
/// are derived from `seed`.
struct QuantumOptions {
    std::optional<std::uint64_t> shots;
    std::uint64_t seed = 0;
};

/// geometry[i][c]: channels between sample i and the medoid of class c.
using GeometryTable = std::vector<std::vector<GeomPair>>;

GeometryTable compute_geometry(const Matrix& F, const MedoidSet& medoids, const QuantumOptions& quantum = {});

struct FusedSample {
    std::vector<double> distance_norm;  // D_c / (sum D + eps)
    std::vector<double> angle_norm;     // Theta_c / (sum Theta + eps)
    std::vector<double> score;          // fused (and weighted) score, lower is better
    int label = 0;
};

FusedSample fuse(std::span<const GeomPair> per_class, const FusionParams& params);

struct FusionResult {
    std::vector<int> labels;
    std::vector<FusedSample> channels;
};

FusionResult fuse_all(const GeometryTable& geometry, const FusionParams& params);

FusionResult fusion_infer(const Matrix& F, const MedoidSet& medoids, const FusionParams& params,
                          const QuantumOptions& quantum = {});

/// Index of the smallest value, lowest index on ties.
std::size_t argmin_index(std::span<const double> values);

enum class Averaging { macro, weighted };

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
    std::optional<double> fbeta;
};

struct MetricsReport {
    std::size_t total = 0;
    double accuracy = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    double weighted_precision = 0.0;
    double weighted_recall = 0.0;
    double weighted_f1 = 0.0;
    std::optional<double> beta;
    /// F-beta averaged according to the requested averaging mode.
    std::optional<double> fbeta;
    std::vector<ClassMetrics> per_class;
    /// confusion[true][pred]
    std::vector<std::vector<std::size_t>> confusion;
};

/// Precision / recall / F1 with zero-denominator cases mapped to 0.
MetricsReport evaluate(std::span<const int> y_true, std::span<const int> y_pred, std::size_t num_classes,
                       Averaging averaging = Averaging::macro, std::optional<double> beta = std::nullopt);

double fbeta_score(double precision, double recall, double beta);

std::vector<double> default_alpha_grid();
std::vector<double> default_beta_grid();

struct AlphaRecord {
    double alpha = 0.0;
    double macro_f1 = 0.0;
};

struct AlphaCalibration {
    double alpha_star = 1.0;
    std::vector<AlphaRecord> records;
};

/// Validation macro-F1 for every grid value; first maximiser wins. With the
/// angular channel disabled alpha* = 1 and no grid points are evaluated.
AlphaCalibration calibrate_alpha(const GeometryTable& val_geometry, std::span<const int> y_val,
                                 std::size_t num_classes, std::span<const double> grid, const FusionParams& params);

struct FbetaRow {
    double beta = 1.0;
    double macro_fbeta = 0.0;
};

std::vector<FbetaRow> fbeta_sweep(std::span<const int> y_true, std::span<const int> y_pred, std::size_t num_classes,
                                  std::span<const double> grid);

}  // namespace cgrq
