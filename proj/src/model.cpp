#include "cgrq/model.hpp"

#include <algorithm>
#include <stdexcept>

namespace cgrq {

std::string to_string(InputScaling s) {
    switch (s) {
        case InputScaling::none: return "none";
        case InputScaling::standard: return "standard";
        case InputScaling::minmax: return "minmax";
    }
    return "none";
}

InputScaling input_scaling_from_string(const std::string& s) {
    if (s == "none") return InputScaling::none;
    if (s == "standard") return InputScaling::standard;
    if (s == "minmax") return InputScaling::minmax;
    throw std::invalid_argument("unknown input scaling '" + s + "'");
}

std::string to_string(Embedding e) { return e == Embedding::phi ? "phi" : "z"; }

Embedding embedding_from_string(const std::string& s) {
    if (s == "phi") return Embedding::phi;
    if (s == "z") return Embedding::z;
    throw std::invalid_argument("unknown embedding '" + s + "'");
}

std::string to_string(ClassWeightMode m) { return m == ClassWeightMode::none ? "none" : "inv_sqrt"; }

ClassWeightMode class_weight_mode_from_string(const std::string& s) {
    if (s == "none") return ClassWeightMode::none;
    if (s == "inv_sqrt") return ClassWeightMode::inv_sqrt;
    throw std::invalid_argument("unknown class weight mode '" + s + "'");
}

Matrix InputTransform::apply(const Matrix& X) const {
    if (kind == InputScaling::none) return X;
    if (X.cols() != offset.size()) throw std::invalid_argument("input transform dimension mismatch");
    Matrix out(X.rows(), X.cols());
    for (std::size_t i = 0; i < X.rows(); ++i) {
        for (std::size_t j = 0; j < X.cols(); ++j) out(i, j) = (X(i, j) - offset[j]) / scale[j];
    }
    return out;
}

InputTransform fit_input_transform(const Matrix& X, InputScaling kind) {
    InputTransform t;
    t.kind = kind;
    if (kind == InputScaling::none) return t;
    if (kind == InputScaling::standard) {
        auto s = fit_scaler(X);
        t.offset = std::move(s.means);
        t.scale = std::move(s.stds);
        return t;
    }
    if (X.empty()) throw std::invalid_argument("fit_input_transform: empty matrix");
    for (std::size_t j = 0; j < X.cols(); ++j) {
        double lo = X(0, j), hi = X(0, j);
        for (std::size_t i = 1; i < X.rows(); ++i) {
            lo = std::min(lo, X(i, j));
            hi = std::max(hi, X(i, j));
        }
        t.offset.push_back(lo);
        t.scale.push_back(hi > lo ? hi - lo : 1.0);
    }
    return t;
}

Matrix FusionModel::features(const Matrix& X_raw) const {
    return scaler.transform(build_feature_matrix(input.apply(X_raw), anchors, config, embedding));
}

GeometryTable FusionModel::geometry(const Matrix& X_raw) const {
    return compute_geometry(features(X_raw), medoids, quantum);
}

FusionResult FusionModel::infer(const Matrix& X_raw) const { return fuse_all(geometry(X_raw), params); }

FusionModel fit_fusion_model(const Dataset& train, const AnchorModel& anchors, const CgrConfig& config,
                             const PipelineSettings& settings) {
    FusionModel model;
    model.anchors = anchors;
    model.config = config;
    model.embedding = settings.embedding;
    model.quantum = settings.quantum;
    model.input = fit_input_transform(train.X, settings.input_scaling);
    const Matrix F = build_feature_matrix(model.input.apply(train.X), anchors, config, settings.embedding);
    model.scaler = fit_scaler(F);
    model.medoids = fit_class_medoids(model.scaler.transform(F), train.y, train.num_classes(), settings.medoid_cap,
                                      settings.medoid_seed);
    model.params = settings.fusion;
    model.params.class_weights = class_weights_from_counts(train.class_counts(), settings.weight_mode);
    model.params.validate(train.num_classes());
    return model;
}

}  // namespace cgrq
