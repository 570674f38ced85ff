#pragma once

// Variational quantum classifier over delta features: angle encoding,
// re-uploading ansatz on the statevector simulator, SPSA training and
// stratified K-fold model selection with threshold tuning.

#include "cgrq/data.hpp"
#include "cgrq/fusion.hpp"
#include "cgrq/matrix.hpp"
#include "cgrq/quantum.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cgrq {

enum class Mapping { parity, direct };

std::string to_string(Mapping m);
Mapping mapping_from_string(const std::string& s);

struct VqcSpec {
    std::size_t n_qubits = 2;
    std::size_t reps = 1;
    bool reupload = true;
    Mapping mapping = Mapping::parity;
    std::size_t m_inputs = 2;
    double z_max = 3.0;
    /// Per-input angle multipliers; empty means all ones.
    std::vector<double> feature_scales;

    std::size_t num_params() const { return 2 * reps * n_qubits; }
    void validate(std::size_t num_classes) const;
};

/// n_qubits = max(2, m); parity for two classes, direct otherwise.
VqcSpec default_spec(std::size_t m_inputs, std::size_t num_classes, std::size_t reps = 1, bool reupload = true);

enum class GateKind { ry_input, ry_param, rz_param, cx, cz };

struct Gate {
    GateKind kind;
    std::size_t q0 = 0;
    std::size_t q1 = 0;     // second qubit for two-qubit gates
    std::size_t index = 0;  // input column or parameter index
};

struct Circuit {
    std::size_t n_qubits = 0;
    std::size_t num_params = 0;
    std::size_t m_inputs = 0;
    std::vector<Gate> gates;

    std::size_t count(GateKind kind) const;
};

/// Parameters are laid out (rep, qubit, [Ry, Rz]).
Circuit build_circuit(const VqcSpec& spec);

StateVector run_circuit(const Circuit& circuit, std::span<const double> theta, std::span<const double> angles);

/// Standardize, clip to [-z_max, z_max], scale by pi / z_max, then by lambda_j.
Matrix angle_map(const Matrix& Z, const Scaler& scaler, double z_max, std::span<const double> lambda = {});

/// Class probabilities from basis-state probabilities.
std::vector<double> decode_probabilities(std::span<const double> basis, std::size_t num_classes, Mapping mapping);

Matrix forward_probs(const Circuit& circuit, std::span<const double> theta, const Matrix& angles,
                     std::size_t num_classes, Mapping mapping);

inline constexpr double kProbabilityFloor = 1e-10;

/// Mean cross-entropy over `rows` (all rows when empty).
double cross_entropy(const Matrix& probs, std::span<const int> y, std::span<const std::size_t> rows = {});

struct SpsaConfig {
    std::size_t steps = 300;
    std::size_t batch = 64;
    double a = 0.2;
    double c = 0.15;
    double alpha = 0.602;
    double gamma = 0.101;
    double clip_norm = 1.0;
    std::size_t patience = 25;
    double tolerance = 1e-4;
    double init_sigma = 0.1;
    std::uint64_t seed = 0;

    void validate() const;
};

/// ((f+ - f-) / (2 c_t)) * delta, rescaled to norm at most g_max.
std::vector<double> spsa_gradient(double f_plus, double f_minus, double c_t, std::span<const double> delta,
                                  double g_max);

struct SpsaRecord {
    std::vector<double> batch_losses;  // (f+ + f-) / 2 per step
    double best_batch_loss = 0.0;
    std::size_t steps_run = 0;
    bool early_stopped = false;
    std::vector<std::string> warnings;
};

struct SpsaResult {
    std::vector<double> theta;
    SpsaRecord record;
};

/// Loss of `theta` on the rows in `batch`.
using BatchLoss = std::function<double(std::span<const double> theta, std::span<const std::size_t> batch)>;

SpsaResult spsa_minimize(const BatchLoss& loss, std::size_t num_rows, std::vector<double> theta0,
                         const SpsaConfig& cfg);

/// Draws theta0 from N(0, init_sigma) and minimizes cross-entropy.
SpsaResult spsa_train(const Matrix& angles, std::span<const int> y, std::size_t num_classes, const VqcSpec& spec,
                      const SpsaConfig& cfg);

/// Predicted-positive fraction.
double alert_rate(std::span<const int> predictions);

/// Binary: class 1 iff P1 >= tau. Otherwise argmax, lowest class on ties.
std::vector<int> predict_labels(const Matrix& probs, std::optional<double> tau);

enum class TargetMetric { macro_f1, accuracy, positive_f1, recall_at_alert };

std::string to_string(TargetMetric m);
TargetMetric target_metric_from_string(const std::string& s);

/// recall_at_alert: class-1 recall when the alert rate stays within the
/// budget, otherwise minus the alert rate.
double target_score(std::span<const int> y_true, std::span<const int> y_pred, std::size_t num_classes,
                    TargetMetric metric, double alert_budget);

std::vector<double> default_threshold_grid();

struct ThresholdChoice {
    double tau = 0.5;
    double score = 0.0;
};

/// First grid value maximizing the target metric.
ThresholdChoice tune_threshold(const Matrix& probs, std::span<const int> y, std::span<const double> grid,
                               TargetMetric metric, double alert_budget);

struct Fold {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
};

/// Per-class seeded shuffles dealt round-robin into K folds.
std::vector<Fold> stratified_kfold(std::span<const int> y, std::size_t num_classes, std::size_t K,
                                   std::uint64_t seed);

struct HyperParams {
    std::size_t reps = 1;
    bool reupload = true;

    bool operator==(const HyperParams&) const = default;
};

std::vector<HyperParams> default_hp_space();

struct VqcModel {
    VqcSpec spec;
    std::vector<double> theta;
    Scaler scaler;  // angle-map standardization, fit on training rows
    std::size_t num_classes = 2;
    std::optional<double> threshold;

    Matrix probabilities(const Matrix& Z) const;
    std::vector<int> predict(const Matrix& Z, std::optional<double> tau = std::nullopt) const;
};

struct FoldRecord {
    std::size_t fold = 0;
    double score = 0.0;
    std::optional<double> tau;
};

struct HpRecord {
    HyperParams hp;
    double mean_score = 0.0;
    std::vector<FoldRecord> folds;
};

struct VqcTrainOptions {
    std::vector<HyperParams> hp_space = default_hp_space();
    std::size_t folds = 5;
    std::vector<double> threshold_grid = default_threshold_grid();
    TargetMetric target_metric = TargetMetric::macro_f1;
    double alert_budget = 0.05;
    SpsaConfig spsa;
    double z_max = 3.0;
    std::vector<double> feature_scales;
    std::uint64_t seed = 0;
};

struct VqcTrainResult {
    VqcModel model;
    HyperParams best_hp;
    std::vector<HpRecord> hp_records;
    SpsaRecord training;
    double final_loss = 0.0;  // full training-split cross-entropy
    MetricsReport val_metrics;
    MetricsReport test_metrics;
    double val_alert_rate = 0.0;
    double test_alert_rate = 0.0;
};

/// Selects hyperparameters by mean fold score, retrains on the full training
/// split, tunes the binary threshold on validation and evaluates val/test.
VqcTrainResult kfold_train(const Matrix& Z_train, std::span<const int> y_train, const Matrix& Z_val,
                           std::span<const int> y_val, const Matrix& Z_test, std::span<const int> y_test,
                           std::size_t num_classes, const VqcTrainOptions& options);

}  // namespace cgrq
