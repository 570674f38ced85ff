#pragma once

// Persisted fusion and VQC bundles, top-r selection over k, and scoring of new
// records through a reloaded bundle.

#include "cgrq/data.hpp"
#include "cgrq/fusion.hpp"
#include "cgrq/model.hpp"
#include "cgrq/optimizer.hpp"
#include "cgrq/serialization.hpp"
#include "cgrq/vqc.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cgrq {

inline constexpr int kFormatVersion = 1;

struct Manifest {
    std::string tool = "cgrq";
    std::string version = CGRQ_VERSION;
    std::map<std::string, std::uint64_t> seeds;
};

void to_json(Json& j, const Manifest& m);
void from_json(const Json& j, Manifest& m);

/// Writes to a sibling temp file, then renames over `path`.
void write_json_atomic(const std::filesystem::path& path, const Json& doc);

/// Parses a JSON file; ArtifactError when unreadable or malformed.
Json read_json(const std::filesystem::path& path);

/// ArtifactError unless doc["format_version"] == kFormatVersion.
void check_format_version(const Json& doc, const std::string& source);

struct FusionArtifact {
    std::size_t k = 0;
    FusionModel model;  // model.params.alpha holds alpha*
    std::vector<std::string> feature_names;
    std::vector<std::string> class_names;
    std::vector<AlphaRecord> alpha_records;
    MetricsReport val_metrics;
    MetricsReport test_metrics;
    Manifest manifest;

    double alpha_star() const { return model.params.alpha; }
};

Json to_document(const FusionArtifact& a);
FusionArtifact fusion_artifact_from_document(const Json& doc, const std::string& source = "<json>");

void save_fusion_artifact(const std::filesystem::path& path, const FusionArtifact& a);
FusionArtifact load_fusion_artifact(const std::filesystem::path& path);

/// Refits on train under `config`, calibrates alpha on validation and
/// evaluates val / test.
FusionArtifact build_fusion_artifact(const Splits& splits, const AnchorModel& anchors, const CgrConfig& config,
                                     const PipelineSettings& settings, std::span<const double> alpha_grid);

/// k values ordered by validation macro-F1 (smaller k on ties), at most r.
std::vector<std::size_t> top_k_values(const SearchRecord& record, std::size_t r);

struct PersistedFusion {
    FusionArtifact artifact;
    std::filesystem::path path;
};

/// Writes fusion_k<k>.json for each selected k and best_alias.json for the first.
std::vector<PersistedFusion> persist_top_r(const SearchRecord& record, const Splits& splits,
                                           const AnchorModel& anchors, const PipelineSettings& settings,
                                           std::size_t r, const std::filesystem::path& dir, const Manifest& manifest,
                                           std::span<const double> alpha_grid);

std::string fusion_file_name(std::size_t k);
std::string vqc_file_name(std::size_t k);

struct BestAlias {
    std::string kind;  // "fusion" or "vqc"
    std::string file;
    std::size_t k = 0;
};

void write_best_alias(const std::filesystem::path& dir, const BestAlias& alias);
BestAlias read_best_alias(const std::filesystem::path& dir);

struct ScoredRecord {
    int label = 0;
    std::vector<double> scores;
    double margin = 0.0;  // runner-up score minus best score
};

ScoredRecord scored_from(const FusedSample& sample);

/// `x` holds the raw features in the artifact's feature order.
ScoredRecord score_record(const FusionArtifact& a, std::span<const double> x);
std::vector<ScoredRecord> score_matrix(const FusionArtifact& a, const Matrix& X);

/// Artifact feature columns pulled from a table by name; DataError names a missing column.
Matrix artifact_features(const CsvTable& table, const FusionArtifact& a, const std::string& source);

struct VqcArtifact {
    std::size_t k = 0;
    std::string fusion_file;  // relative to the artifact directory
    bool include_fused = false;
    std::vector<std::string> class_names;
    VqcModel model;
    HyperParams best_hp;
    std::vector<HpRecord> hp_records;
    TargetMetric target_metric = TargetMetric::macro_f1;
    MetricsReport val_metrics;
    MetricsReport test_metrics;
    double val_alert_rate = 0.0;
    double test_alert_rate = 0.0;
    double final_loss = 0.0;
    bool best_alias = false;
    Manifest manifest;
};

Json to_document(const VqcArtifact& a);
VqcArtifact vqc_artifact_from_document(const Json& doc, const std::string& source = "<json>");

void save_vqc_artifact(const std::filesystem::path& path, const VqcArtifact& a);
VqcArtifact load_vqc_artifact(const std::filesystem::path& path);

/// Delta features of raw rows through a fusion artifact.
Matrix artifact_deltas(const FusionArtifact& fusion, const Matrix& X, bool include_fused);

struct VqcPrediction {
    std::vector<int> labels;
    Matrix probabilities;
    double alert_rate = 0.0;
};

VqcPrediction score_vqc(const VqcArtifact& vqc, const FusionArtifact& fusion, const Matrix& X,
                        std::optional<double> tau = std::nullopt);

}  // namespace cgrq
