#pragma once

// The fitted fusion classifier for one CGR configuration: raw features ->
// input scaling -> CGR features -> standardization -> SWAP-test channels
// against class medoids -> fused argmin.

#include "cgrq/cgr.hpp"
#include "cgrq/data.hpp"
#include "cgrq/fusion.hpp"
#include "cgrq/medoid.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cgrq {

/// Per-column preprocessing of raw inputs before the CGR stage.
enum class InputScaling { none, standard, minmax };

std::string to_string(InputScaling s);
InputScaling input_scaling_from_string(const std::string& s);
std::string to_string(Embedding e);
Embedding embedding_from_string(const std::string& s);
std::string to_string(ClassWeightMode m);
ClassWeightMode class_weight_mode_from_string(const std::string& s);

/// x' = (x - offset) / scale per column.
struct InputTransform {
    InputScaling kind = InputScaling::none;
    std::vector<double> offset;
    std::vector<double> scale;

    Matrix apply(const Matrix& X) const;
};

InputTransform fit_input_transform(const Matrix& X, InputScaling kind);

struct PipelineSettings {
    InputScaling input_scaling = InputScaling::minmax;
    Embedding embedding = Embedding::phi;
    /// alpha here is the search-time mixing weight; calibration replaces it.
    FusionParams fusion;
    ClassWeightMode weight_mode = ClassWeightMode::none;
    std::size_t medoid_cap = kDefaultSubsampleCap;
    std::uint64_t medoid_seed = 0;
    QuantumOptions quantum;
};

struct FusionModel {
    AnchorModel anchors;
    CgrConfig config;
    Embedding embedding = Embedding::phi;
    InputTransform input;
    Scaler scaler;
    MedoidSet medoids;
    FusionParams params;
    QuantumOptions quantum;

    std::size_t num_classes() const { return medoids.num_classes(); }
    /// Standardized CGR features for raw rows.
    Matrix features(const Matrix& X_raw) const;
    GeometryTable geometry(const Matrix& X_raw) const;
    FusionResult infer(const Matrix& X_raw) const;
};

/// Fits the input transform, CGR scaler, medoids and class weights on the training split.
FusionModel fit_fusion_model(const Dataset& train, const AnchorModel& anchors, const CgrConfig& config,
                             const PipelineSettings& settings);

}  // namespace cgrq
