#include "cgrq/artifacts.hpp"

#include "cgrq/delta.hpp"
#include "cgrq/error.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <system_error>

namespace cgrq {

namespace fs = std::filesystem;

void to_json(Json& j, const Manifest& m) { j = Json{{"tool", m.tool}, {"version", m.version}, {"seeds", m.seeds}}; }

void from_json(const Json& j, Manifest& m) {
    j.at("tool").get_to(m.tool);
    j.at("version").get_to(m.version);
    j.at("seeds").get_to(m.seeds);
}

void write_json_atomic(const fs::path& path, const Json& doc) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw ArtifactError("cannot create " + path.parent_path().string() + ": " + ec.message());
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw ArtifactError("cannot write " + tmp.string());
        out << doc.dump(2) << '\n';
        out.flush();
        if (!out) throw ArtifactError("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw ArtifactError("cannot move artifact into place at " + path.string());
    }
}

Json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ArtifactError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw ArtifactError(path.string() + ": malformed JSON (" + e.what() + ")");
    }
}

void check_format_version(const Json& doc, const std::string& source) {
    if (!doc.is_object() || !doc.contains("format_version")) {
        throw ArtifactError(source + ": missing format_version");
    }
    const auto& v = doc.at("format_version");
    if (!v.is_number_integer() || v.get<int>() != kFormatVersion) {
        throw ArtifactError(source + ": unsupported format_version " + v.dump() + " (expected " +
                            std::to_string(kFormatVersion) + ")");
    }
}

namespace {

template <typename Fn>
auto guarded(const std::string& source, Fn&& fn) {
    try {
        return fn();
    } catch (const Json::exception& e) {
        throw ArtifactError(source + ": invalid artifact (" + e.what() + ")");
    } catch (const std::invalid_argument& e) {
        throw ArtifactError(source + ": invalid artifact (" + e.what() + ")");
    }
}

}  // namespace

Json to_document(const FusionArtifact& a) {
    return Json{{"format_version", kFormatVersion},
                {"kind", "fusion"},
                {"manifest", a.manifest},
                {"k", a.k},
                {"feature_names", a.feature_names},
                {"class_names", a.class_names},
                {"alpha_star", a.alpha_star()},
                {"alpha_records", a.alpha_records},
                {"model", a.model},
                {"metrics", {{"val", a.val_metrics}, {"test", a.test_metrics}}}};
}

FusionArtifact fusion_artifact_from_document(const Json& doc, const std::string& source) {
    check_format_version(doc, source);
    return guarded(source, [&] {
        if (doc.at("kind").get<std::string>() != "fusion") throw ArtifactError(source + ": not a fusion artifact");
        FusionArtifact a;
        doc.at("manifest").get_to(a.manifest);
        doc.at("k").get_to(a.k);
        doc.at("feature_names").get_to(a.feature_names);
        doc.at("class_names").get_to(a.class_names);
        doc.at("alpha_records").get_to(a.alpha_records);
        doc.at("model").get_to(a.model);
        doc.at("metrics").at("val").get_to(a.val_metrics);
        doc.at("metrics").at("test").get_to(a.test_metrics);
        if (a.model.anchors.num_features != a.feature_names.size()) {
            throw ArtifactError(source + ": anchor model covers " + std::to_string(a.model.anchors.num_features) +
                                " features, artifact lists " + std::to_string(a.feature_names.size()));
        }
        validate_config(a.model.config, a.model.anchors);
        if (a.model.medoids.num_classes() != a.class_names.size()) {
            throw ArtifactError(source + ": medoid count does not match class names");
        }
        a.model.params.validate(a.class_names.size());
        return a;
    });
}

void save_fusion_artifact(const fs::path& path, const FusionArtifact& a) { write_json_atomic(path, to_document(a)); }

FusionArtifact load_fusion_artifact(const fs::path& path) {
    return fusion_artifact_from_document(read_json(path), path.string());
}

FusionArtifact build_fusion_artifact(const Splits& splits, const AnchorModel& anchors, const CgrConfig& config,
                                     const PipelineSettings& settings, std::span<const double> alpha_grid) {
    const std::size_t C = splits.train.num_classes();
    FusionArtifact a;
    a.k = config.k;
    a.feature_names = splits.train.feature_names;
    a.class_names = splits.train.class_names;
    a.model = fit_fusion_model(splits.train, anchors, config, settings);

    const GeometryTable val_geometry = a.model.geometry(splits.val.X);
    const auto calibration = calibrate_alpha(val_geometry, splits.val.y, C, alpha_grid, a.model.params);
    a.model.params.alpha = calibration.alpha_star;
    a.alpha_records = calibration.records;

    a.val_metrics = evaluate(splits.val.y, fuse_all(val_geometry, a.model.params).labels, C);
    a.test_metrics = evaluate(splits.test.y, a.model.infer(splits.test.X).labels, C);
    return a;
}

std::vector<std::size_t> top_k_values(const SearchRecord& record, std::size_t r) {
    if (r == 0) throw std::invalid_argument("r must be >= 1");
    if (record.per_k.empty()) throw std::invalid_argument("empty search record");
    std::vector<const KRecord*> order;
    for (const auto& rec : record.per_k) order.push_back(&rec);
    std::stable_sort(order.begin(), order.end(), [](const KRecord* a, const KRecord* b) {
        if (a->best_f1 != b->best_f1) return a->best_f1 > b->best_f1;
        return a->k < b->k;
    });
    std::vector<std::size_t> ks;
    for (std::size_t i = 0; i < std::min(r, order.size()); ++i) ks.push_back(order[i]->k);
    return ks;
}

std::string fusion_file_name(std::size_t k) { return "fusion_k" + std::to_string(k) + ".json"; }
std::string vqc_file_name(std::size_t k) { return "vqc_k" + std::to_string(k) + ".json"; }

std::vector<PersistedFusion> persist_top_r(const SearchRecord& record, const Splits& splits,
                                           const AnchorModel& anchors, const PipelineSettings& settings,
                                           std::size_t r, const fs::path& dir, const Manifest& manifest,
                                           std::span<const double> alpha_grid) {
    std::vector<PersistedFusion> out;
    for (std::size_t k : top_k_values(record, r)) {
        PersistedFusion p;
        p.artifact = build_fusion_artifact(splits, anchors, record.at_k(k).best_config, settings, alpha_grid);
        p.artifact.manifest = manifest;
        p.path = dir / fusion_file_name(k);
        save_fusion_artifact(p.path, p.artifact);
        out.push_back(std::move(p));
    }
    write_best_alias(dir, {"fusion", fusion_file_name(out.front().artifact.k), out.front().artifact.k});
    return out;
}

void write_best_alias(const fs::path& dir, const BestAlias& alias) {
    write_json_atomic(dir / "best_alias.json",
                      Json{{"format_version", kFormatVersion}, {"kind", alias.kind}, {"file", alias.file}, {"k", alias.k}});
}

BestAlias read_best_alias(const fs::path& dir) {
    const fs::path path = dir / "best_alias.json";
    const Json doc = read_json(path);
    check_format_version(doc, path.string());
    return guarded(path.string(), [&] {
        return BestAlias{doc.at("kind").get<std::string>(), doc.at("file").get<std::string>(),
                         doc.at("k").get<std::size_t>()};
    });
}

ScoredRecord scored_from(const FusedSample& sample) {
    ScoredRecord r;
    r.label = sample.label;
    r.scores = sample.score;
    const auto best = static_cast<std::size_t>(sample.label);
    double runner_up = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < sample.score.size(); ++c) {
        if (c != best) runner_up = std::min(runner_up, sample.score[c]);
    }
    r.margin = runner_up - sample.score[best];
    return r;
}

ScoredRecord score_record(const FusionArtifact& a, std::span<const double> x) {
    if (x.size() != a.feature_names.size()) {
        throw DataError("record has " + std::to_string(x.size()) + " features, artifact expects " +
                        std::to_string(a.feature_names.size()));
    }
    Matrix X(0, x.size());
    X.append_row(x);
    return scored_from(a.model.infer(X).channels.front());
}

std::vector<ScoredRecord> score_matrix(const FusionArtifact& a, const Matrix& X) {
    if (X.cols() != a.feature_names.size()) {
        throw DataError("data has " + std::to_string(X.cols()) + " features, artifact expects " +
                        std::to_string(a.feature_names.size()));
    }
    std::vector<ScoredRecord> out;
    for (const auto& s : a.model.infer(X).channels) out.push_back(scored_from(s));
    return out;
}

Matrix artifact_features(const CsvTable& table, const FusionArtifact& a, const std::string& source) {
    return feature_matrix(table, a.feature_names, source);
}

Json to_document(const VqcArtifact& a) {
    return Json{{"format_version", kFormatVersion},
                {"kind", "vqc"},
                {"manifest", a.manifest},
                {"k", a.k},
                {"fusion_artifact", a.fusion_file},
                {"include_fused", a.include_fused},
                {"class_names", a.class_names},
                {"spec", a.model.spec},
                {"theta", a.model.theta},
                {"scaler", a.model.scaler},
                {"threshold", a.model.threshold ? Json(*a.model.threshold) : Json(nullptr)},
                {"best_hp", a.best_hp},
                {"hp_records", a.hp_records},
                {"target_metric", to_string(a.target_metric)},
                {"metrics", {{"val", a.val_metrics}, {"test", a.test_metrics}}},
                {"alert_rate", {{"val", a.val_alert_rate}, {"test", a.test_alert_rate}}},
                {"final_loss", a.final_loss},
                {"best_alias", a.best_alias}};
}

VqcArtifact vqc_artifact_from_document(const Json& doc, const std::string& source) {
    check_format_version(doc, source);
    return guarded(source, [&] {
        if (doc.at("kind").get<std::string>() != "vqc") throw ArtifactError(source + ": not a VQC artifact");
        VqcArtifact a;
        doc.at("manifest").get_to(a.manifest);
        doc.at("k").get_to(a.k);
        doc.at("fusion_artifact").get_to(a.fusion_file);
        doc.at("include_fused").get_to(a.include_fused);
        doc.at("class_names").get_to(a.class_names);
        doc.at("spec").get_to(a.model.spec);
        doc.at("theta").get_to(a.model.theta);
        doc.at("scaler").get_to(a.model.scaler);
        const auto& tau = doc.at("threshold");
        if (!tau.is_null()) a.model.threshold = tau.get<double>();
        doc.at("best_hp").get_to(a.best_hp);
        a.target_metric = target_metric_from_string(doc.at("target_metric").get<std::string>());
        doc.at("metrics").at("val").get_to(a.val_metrics);
        doc.at("metrics").at("test").get_to(a.test_metrics);
        doc.at("alert_rate").at("val").get_to(a.val_alert_rate);
        doc.at("alert_rate").at("test").get_to(a.test_alert_rate);
        doc.at("final_loss").get_to(a.final_loss);
        doc.at("best_alias").get_to(a.best_alias);
        a.model.num_classes = a.class_names.size();
        a.model.spec.validate(a.model.num_classes);
        if (a.model.theta.size() != a.model.spec.num_params()) {
            throw ArtifactError(source + ": theta length does not match the circuit");
        }
        if (a.model.scaler.dimension() != a.model.spec.m_inputs) {
            throw ArtifactError(source + ": scaler dimension does not match the circuit inputs");
        }
        return a;
    });
}

void save_vqc_artifact(const fs::path& path, const VqcArtifact& a) { write_json_atomic(path, to_document(a)); }

VqcArtifact load_vqc_artifact(const fs::path& path) {
    return vqc_artifact_from_document(read_json(path), path.string());
}

Matrix artifact_deltas(const FusionArtifact& fusion, const Matrix& X, bool include_fused) {
    const auto result = fusion.model.infer(X);
    return build_deltas(result.channels, fusion.class_names.size(), include_fused);
}

VqcPrediction score_vqc(const VqcArtifact& vqc, const FusionArtifact& fusion, const Matrix& X,
                        std::optional<double> tau) {
    if (vqc.class_names != fusion.class_names) throw ArtifactError("VQC and fusion artifacts disagree on classes");
    VqcPrediction out;
    out.probabilities = vqc.model.probabilities(artifact_deltas(fusion, X, vqc.include_fused));
    out.labels = predict_labels(out.probabilities, tau ? tau : vqc.model.threshold);
    out.alert_rate = alert_rate(out.labels);
    return out;
}

}  // namespace cgrq
