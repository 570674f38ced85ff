#include "cli.hpp"

#include "cgrq/artifacts.hpp"
#include "cgrq/cgr.hpp"
#include "cgrq/data.hpp"
#include "cgrq/delta.hpp"
#include "cgrq/error.hpp"
#include "cgrq/fusion.hpp"
#include "cgrq/model.hpp"
#include "cgrq/optimizer.hpp"
#include "cgrq/serialization.hpp"
#include "cgrq/vqc.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace cgrq::cli {

namespace fs = std::filesystem;

namespace {

/// Accepts JSON objects as well as key=value / INI files. Nested objects map
/// to subcommand sections.
class JsonOrIniConfig : public CLI::ConfigINI {
public:
    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        std::string text((std::istreambuf_iterator<char>(input)), std::istreambuf_iterator<char>());
        const auto first = text.find_first_not_of(" \t\r\n");
        if (first == std::string::npos || text[first] != '{') {
            std::istringstream in(text);
            return CLI::ConfigINI::from_config(in);
        }
        Json doc;
        try {
            doc = Json::parse(text);
        } catch (const Json::exception& e) {
            throw CLI::ConfigError(std::string("malformed JSON config: ") + e.what());
        }
        std::vector<CLI::ConfigItem> items;
        add_items(doc, {}, items);
        return items;
    }

private:
    static std::string scalar(const Json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

    static void add_items(const Json& obj, const std::vector<std::string>& parents,
                          std::vector<CLI::ConfigItem>& items) {
        for (const auto& [key, value] : obj.items()) {
            if (value.is_object()) {
                auto p = parents;
                p.push_back(key);
                add_items(value, p, items);
                continue;
            }
            CLI::ConfigItem item;
            item.parents = parents;
            item.name = key;
            if (value.is_array()) {
                for (const auto& v : value) item.inputs.push_back(scalar(v));
            } else {
                item.inputs.push_back(scalar(value));
            }
            items.push_back(std::move(item));
        }
    }
};

struct GlobalOptions {
    std::string data;
    std::string label;
    std::string split = "0.5625,0.1875,0.25";
    std::uint64_t seed = 0;
    std::size_t group_size = 6;
    std::optional<std::size_t> max_anchors;
    std::string embedding = "phi";
    std::string input_scaling = "minmax";
    std::string class_weights = "none";
    std::string shots = "exact";
    std::uint64_t qseed = 0;
    std::size_t medoid_cap = kDefaultSubsampleCap;
    double alpha = 0.5;
    std::string out_dir = "out";
};

std::optional<std::uint64_t> parse_shots(const std::string& text) {
    if (text == "exact") return std::nullopt;
    std::uint64_t v = 0;
    try {
        std::size_t used = 0;
        v = std::stoull(text, &used);
        if (used != text.size() || v == 0) throw std::invalid_argument("");
    } catch (const std::exception&) {
        throw std::invalid_argument("--shots expects a positive integer or 'exact', got '" + text + "'");
    }
    return v;
}

PipelineSettings settings_from(const GlobalOptions& g) {
    PipelineSettings s;
    s.input_scaling = input_scaling_from_string(g.input_scaling);
    s.embedding = embedding_from_string(g.embedding);
    s.weight_mode = class_weight_mode_from_string(g.class_weights);
    s.fusion.alpha = g.alpha;
    s.medoid_cap = g.medoid_cap;
    s.medoid_seed = g.seed;
    s.quantum.shots = parse_shots(g.shots);
    s.quantum.seed = g.qseed;
    return s;
}

Json settings_json(const GlobalOptions& g) {
    Json j{{"data", g.data},
           {"label", g.label},
           {"split", g.split},
           {"seed", g.seed},
           {"group_size", g.group_size},
           {"embedding", g.embedding},
           {"input_scaling", g.input_scaling},
           {"class_weights", g.class_weights},
           {"shots", g.shots},
           {"qseed", g.qseed},
           {"medoid_cap", g.medoid_cap},
           {"alpha", g.alpha}};
    j["max_anchors"] = g.max_anchors ? Json(*g.max_anchors) : Json(nullptr);
    return j;
}

Manifest manifest_from(const GlobalOptions& g, std::map<std::string, std::uint64_t> extra = {}) {
    Manifest m;
    m.seeds = std::move(extra);
    m.seeds["split"] = g.seed;
    m.seeds["medoid"] = g.seed;
    m.seeds["quantum"] = g.qseed;
    return m;
}

struct Prepared {
    Dataset dataset;
    Splits splits;
    CorrelationModel corr;
    AnchorModel anchors;
};

void require_data(const GlobalOptions& g) {
    if (g.data.empty()) throw std::invalid_argument("--data is required");
    if (g.label.empty()) throw std::invalid_argument("--label is required");
}

Prepared prepare_data(const GlobalOptions& g) {
    require_data(g);
    Prepared p;
    p.dataset = load_csv(g.data, g.label);
    p.splits = stratified_split(p.dataset, parse_split_fractions(g.split), g.seed);
    p.corr = correlation(p.splits.train, true);
    const std::size_t M = p.dataset.num_features();
    if (M < 2) throw DataError("at least two feature columns are required");
    p.anchors = build_anchor_model(p.corr, std::min(g.group_size, M - 1), g.max_anchors);
    return p;
}

void emit(std::ostream& out, const Json& report, const fs::path& path) {
    write_json_atomic(path, report);
    out << report.dump(2) << '\n';
}

std::pair<std::size_t, std::size_t> parse_k_range(const std::string& text) {
    const auto colon = text.find(':');
    try {
        if (colon == std::string::npos) {
            const auto k = static_cast<std::size_t>(std::stoul(text));
            return {k, k};
        }
        return {static_cast<std::size_t>(std::stoul(text.substr(0, colon))),
                static_cast<std::size_t>(std::stoul(text.substr(colon + 1)))};
    } catch (const std::exception&) {
        throw std::invalid_argument("--k expects 'a:b' or a single integer, got '" + text + "'");
    }
}

struct LoadedSearch {
    SearchRecord record;
    Json settings;
};

LoadedSearch load_search(const fs::path& path) {
    const Json doc = read_json(path);
    check_format_version(doc, path.string());
    try {
        return {doc.at("record").get<SearchRecord>(), doc.at("settings")};
    } catch (const Json::exception& e) {
        throw ArtifactError(path.string() + ": invalid search record (" + e.what() + ")");
    }
}

/// The search record was produced under specific data and pipeline settings;
/// refitting under different ones would persist configurations out of context.
void check_search_settings(const LoadedSearch& search, const GlobalOptions& g, const fs::path& path) {
    const Json now = settings_json(g);
    for (const char* key : {"label", "split", "seed", "group_size", "max_anchors", "embedding", "input_scaling",
                            "class_weights", "medoid_cap"}) {
        if (!search.settings.contains(key) || search.settings.at(key) != now.at(key)) {
            throw ArtifactError(path.string() + ": search was run with " + key + "=" +
                                (search.settings.contains(key) ? search.settings.at(key).dump() : "<missing>") +
                                ", current " + key + "=" + now.at(key).dump());
        }
    }
}

fs::path resolve_fusion_artifact(const std::string& given, const fs::path& out_dir) {
    if (!given.empty()) return given;
    const auto alias = read_best_alias(out_dir);
    return out_dir / alias.file;
}

Json split_summary(const Splits& s) {
    auto counts = [](const Dataset& d) { return d.class_counts(); };
    return Json{{"train", {{"rows", s.train.num_rows()}, {"class_counts", counts(s.train)}}},
                {"val", {{"rows", s.val.num_rows()}, {"class_counts", counts(s.val)}}},
                {"test", {{"rows", s.test.num_rows()}, {"class_counts", counts(s.test)}}}};
}

// ---- subcommands ----------------------------------------------------------

void cmd_prepare(const GlobalOptions& g, std::ostream& out) {
    const Prepared p = prepare_data(g);
    const fs::path dir = g.out_dir;
    Json splits{{"format_version", kFormatVersion},
                {"manifest", manifest_from(g)},
                {"settings", settings_json(g)},
                {"feature_names", p.dataset.feature_names},
                {"class_names", p.dataset.class_names},
                {"sizes", split_summary(p.splits)},
                {"indices", p.splits.indices}};
    write_json_atomic(dir / "splits.json", splits);

    Json target = Json::array();
    const auto& tc = *p.corr.target_corr;
    for (std::size_t f = 0; f < tc.size(); ++f) {
        target.push_back({{"feature", p.dataset.feature_names[f]}, {"abs_corr_with_label", tc[f]}});
    }
    Json corr{{"format_version", kFormatVersion},
              {"manifest", manifest_from(g)},
              {"target_correlation", target},
              {"anchor_model", p.anchors}};
    write_json_atomic(dir / "correlation.json", corr);

    Json report{{"command", "prepare"},
                {"manifest", manifest_from(g)},
                {"rows", p.dataset.num_rows()},
                {"features", p.dataset.num_features()},
                {"classes", p.dataset.class_names},
                {"splits", split_summary(p.splits)},
                {"anchors", p.anchors.size()},
                {"files", {(dir / "splits.json").string(), (dir / "correlation.json").string()}}};
    out << report.dump(2) << '\n';
}

struct SearchFlags {
    std::string k_range = "2:5";
    std::size_t passes = 3;
    std::size_t budget = 200;
};

void cmd_search(const GlobalOptions& g, const SearchFlags& f, std::ostream& out) {
    const Prepared p = prepare_data(g);
    SearchOptions opt;
    std::tie(opt.k_min, opt.k_max) = parse_k_range(f.k_range);
    opt.max_passes = f.passes;
    opt.budget = f.budget;
    opt.seed = g.seed;
    const SearchRecord record = coordinate_descent(p.splits.train, p.splits.val, p.anchors, opt, settings_from(g));
    Json doc{{"format_version", kFormatVersion},
             {"manifest", manifest_from(g, {{"search", opt.seed}})},
             {"settings", settings_json(g)},
             {"search", {{"k_min", opt.k_min}, {"k_max", opt.k_max}, {"passes", opt.max_passes}, {"budget", f.budget}}},
             {"feature_names", p.dataset.feature_names},
             {"record", record}};
    const fs::path path = fs::path(g.out_dir) / "search_record.json";
    write_json_atomic(path, doc);

    Json summary = Json::array();
    for (const auto& r : record.per_k) {
        summary.push_back({{"k", r.k}, {"val_macro_f1", r.best_f1}, {"evaluations", r.evaluations}});
    }
    out << Json{{"command", "search"}, {"best_k", record.best().k}, {"per_k", summary}, {"file", path.string()}}.dump(2)
        << '\n';
}

struct CalibrateFlags {
    std::string search_path;
    std::optional<std::size_t> k;
};

void cmd_calibrate(const GlobalOptions& g, const CalibrateFlags& f, std::ostream& out) {
    const fs::path search_path = f.search_path.empty() ? fs::path(g.out_dir) / "search_record.json" : fs::path(f.search_path);
    const auto search = load_search(search_path);
    check_search_settings(search, g, search_path);
    const Prepared p = prepare_data(g);
    const std::size_t k = f.k ? *f.k : search.record.best().k;
    const auto& rec = search.record.at_k(k);
    const std::size_t C = p.dataset.num_classes();

    const auto alpha_grid = default_alpha_grid();
    const FusionArtifact a = build_fusion_artifact(p.splits, p.anchors, rec.best_config, settings_from(g), alpha_grid);
    const auto beta_grid = default_beta_grid();
    const auto val_pred = a.model.infer(p.splits.val.X).labels;
    const auto test_pred = a.model.infer(p.splits.test.X).labels;

    Json report{{"format_version", kFormatVersion},
                {"command", "calibrate"},
                {"manifest", manifest_from(g)},
                {"k", k},
                {"alpha_star", a.alpha_star()},
                {"alpha_grid", a.alpha_records},
                {"fbeta", {{"val", fbeta_sweep(p.splits.val.y, val_pred, C, beta_grid)},
                           {"test", fbeta_sweep(p.splits.test.y, test_pred, C, beta_grid)}}},
                {"metrics", {{"val", a.val_metrics}, {"test", a.test_metrics}}}};
    emit(out, report, fs::path(g.out_dir) / ("calibration_k" + std::to_string(k) + ".json"));
}

struct FitFusionFlags {
    std::string search_path;
    std::size_t top_r = 2;
};

void cmd_fit_fusion(const GlobalOptions& g, const FitFusionFlags& f, std::ostream& out) {
    const fs::path search_path = f.search_path.empty() ? fs::path(g.out_dir) / "search_record.json" : fs::path(f.search_path);
    const auto search = load_search(search_path);
    check_search_settings(search, g, search_path);
    const Prepared p = prepare_data(g);
    const auto persisted = persist_top_r(search.record, p.splits, p.anchors, settings_from(g), f.top_r, g.out_dir,
                                         manifest_from(g), default_alpha_grid());
    Json files = Json::array();
    for (const auto& item : persisted) {
        files.push_back({{"k", item.artifact.k},
                         {"file", item.path.string()},
                         {"alpha_star", item.artifact.alpha_star()},
                         {"val_macro_f1", item.artifact.val_metrics.macro_f1},
                         {"test_accuracy", item.artifact.test_metrics.accuracy},
                         {"test_macro_f1", item.artifact.test_metrics.macro_f1}});
    }
    out << Json{{"command", "fit-fusion"}, {"manifest", manifest_from(g)}, {"artifacts", files}}.dump(2) << '\n';
}

struct DeltaFlags {
    std::string artifact;
    bool include_fused = false;
};

void cmd_build_delta(const GlobalOptions& g, const DeltaFlags& f, std::ostream& out) {
    const fs::path artifact_path = resolve_fusion_artifact(f.artifact, g.out_dir);
    const FusionArtifact fusion = load_fusion_artifact(artifact_path);
    const Prepared p = prepare_data(g);
    const Matrix Ztr = artifact_deltas(fusion, p.splits.train.X, f.include_fused);
    const std::vector<Matrix> others{artifact_deltas(fusion, p.splits.val.X, f.include_fused),
                                     artifact_deltas(fusion, p.splits.test.X, f.include_fused)};
    const DeltaFeatures std_deltas = standardize_deltas(Ztr, others);

    const fs::path dir = g.out_dir;
    const std::string stem = "delta_k" + std::to_string(fusion.k) + "_";
    write_delta_csv(dir / (stem + "train.csv"), std_deltas.train, p.splits.train.y, f.include_fused);
    write_delta_csv(dir / (stem + "val.csv"), std_deltas.others[0], p.splits.val.y, f.include_fused);
    write_delta_csv(dir / (stem + "test.csv"), std_deltas.others[1], p.splits.test.y, f.include_fused);

    Json report{{"format_version", kFormatVersion},
                {"command", "build-delta"},
                {"manifest", manifest_from(g)},
                {"fusion_artifact", artifact_path.string()},
                {"k", fusion.k},
                {"columns", delta_column_names(f.include_fused)},
                {"scaler", std_deltas.scaler},
                {"files",
                 {(dir / (stem + "train.csv")).string(), (dir / (stem + "val.csv")).string(),
                  (dir / (stem + "test.csv")).string()}}};
    emit(out, report, dir / (stem + "report.json"));
}

struct VqcFlags {
    std::string artifact;
    bool include_fused = false;
    std::size_t folds = 5;
    std::size_t steps = 300;
    std::size_t batch = 64;
    double a = 0.2, c = 0.15, alpha = 0.602, gamma = 0.101;
    double clip = 1.0;
    std::size_t patience = 25;
    double tolerance = 1e-4;
    double init_sigma = 0.1;
    double z_max = 3.0;
    std::string target_metric = "macro_f1";
    double alert_budget = 0.05;
    std::optional<double> tau;
    std::string profile = "default";
};

Json operating_point(const VqcModel& model, const Matrix& Z, std::span<const int> y, double tau) {
    const auto pred = model.predict(Z, tau);
    const auto m = evaluate(y, pred, model.num_classes);
    Json j{{"tau", tau}, {"alert_rate", alert_rate(pred)}, {"accuracy", m.accuracy}, {"macro_f1", m.macro_f1}};
    if (model.num_classes == 2) j["positive_recall"] = m.per_class[1].recall;
    return j;
}

void cmd_train_vqc(const GlobalOptions& g, const VqcFlags& f, std::ostream& out) {
    const fs::path artifact_path = resolve_fusion_artifact(f.artifact, g.out_dir);
    const FusionArtifact fusion = load_fusion_artifact(artifact_path);
    const Prepared p = prepare_data(g);
    if (p.dataset.class_names != fusion.class_names) throw ArtifactError("fusion artifact classes do not match data");

    VqcTrainOptions opt;
    opt.folds = f.folds;
    opt.spsa.steps = f.steps;
    opt.spsa.batch = f.batch;
    opt.spsa.a = f.a;
    opt.spsa.c = f.c;
    opt.spsa.alpha = f.alpha;
    opt.spsa.gamma = f.gamma;
    opt.spsa.clip_norm = f.clip;
    opt.spsa.patience = f.patience;
    opt.spsa.tolerance = f.tolerance;
    opt.spsa.init_sigma = f.init_sigma;
    opt.z_max = f.z_max;
    opt.target_metric = target_metric_from_string(f.target_metric);
    opt.alert_budget = f.alert_budget;
    opt.seed = g.seed;

    const Matrix Ztr = artifact_deltas(fusion, p.splits.train.X, f.include_fused);
    const Matrix Zva = artifact_deltas(fusion, p.splits.val.X, f.include_fused);
    const Matrix Zte = artifact_deltas(fusion, p.splits.test.X, f.include_fused);
    const std::size_t C = p.dataset.num_classes();
    const VqcTrainResult result =
        kfold_train(Ztr, p.splits.train.y, Zva, p.splits.val.y, Zte, p.splits.test.y, C, opt);

    VqcArtifact a;
    a.k = fusion.k;
    a.fusion_file = artifact_path.filename().string();
    a.include_fused = f.include_fused;
    a.class_names = fusion.class_names;
    a.model = result.model;
    a.best_hp = result.best_hp;
    a.hp_records = result.hp_records;
    a.target_metric = opt.target_metric;
    a.val_metrics = result.val_metrics;
    a.test_metrics = result.test_metrics;
    a.val_alert_rate = result.val_alert_rate;
    a.test_alert_rate = result.test_alert_rate;
    a.final_loss = result.final_loss;
    try {
        a.best_alias = read_best_alias(artifact_path.parent_path()).k == fusion.k;
    } catch (const ArtifactError&) {
        a.best_alias = false;
    }
    a.manifest = manifest_from(g, {{"vqc", opt.seed}});
    const fs::path vqc_path = artifact_path.parent_path() / vqc_file_name(fusion.k);
    save_vqc_artifact(vqc_path, a);

    Json report{{"format_version", kFormatVersion},
                {"command", "train-vqc"},
                {"manifest", a.manifest},
                {"artifact", vqc_path.string()},
                {"k", a.k},
                {"best_hp", a.best_hp},
                {"hp_records", a.hp_records},
                {"spsa", opt.spsa},
                {"training", result.training},
                {"final_loss", a.final_loss},
                {"tuned_threshold", a.model.threshold ? Json(*a.model.threshold) : Json(nullptr)},
                {"metrics", {{"val", a.val_metrics}, {"test", a.test_metrics}}},
                {"alert_rate", {{"val", a.val_alert_rate}, {"test", a.test_alert_rate}}}};

    std::optional<double> tau = f.tau;
    if (!tau && f.profile == "fraud") tau = 0.3;
    if (tau) {
        if (C != 2) throw std::invalid_argument("--tau applies to binary tasks only");
        report["operating_point"] = {{"val", operating_point(a.model, Zva, p.splits.val.y, *tau)},
                                     {"test", operating_point(a.model, Zte, p.splits.test.y, *tau)}};
    }
    emit(out, report, artifact_path.parent_path() / ("vqc_k" + std::to_string(a.k) + "_report.json"));
}

struct ScoreFlags {
    std::string artifact;
    std::string output;
    std::optional<double> tau;
};

std::string format_double(double v) {
    std::ostringstream s;
    s.precision(std::numeric_limits<double>::max_digits10);
    s << v;
    return s.str();
}

void cmd_score(const GlobalOptions& g, const ScoreFlags& f, std::ostream& out) {
    if (f.artifact.empty()) throw std::invalid_argument("--artifact is required");
    if (g.data.empty()) throw std::invalid_argument("--data is required");
    const fs::path artifact_path = f.artifact;
    const Json doc = read_json(artifact_path);
    check_format_version(doc, artifact_path.string());
    const std::string kind = doc.value("kind", "");
    const CsvTable table = read_csv(fs::path(g.data));

    std::ostringstream csv;
    Json summary{{"command", "score"}, {"artifact", artifact_path.string()}, {"kind", kind}};
    if (kind == "fusion") {
        const FusionArtifact a = fusion_artifact_from_document(doc, artifact_path.string());
        const auto scored = score_matrix(a, artifact_features(table, a, g.data));
        csv << "row_id,label,margin\n";
        for (std::size_t i = 0; i < scored.size(); ++i) {
            csv << i << ',' << a.class_names[static_cast<std::size_t>(scored[i].label)] << ','
                << format_double(scored[i].margin) << '\n';
        }
        summary["rows"] = scored.size();
        summary["manifest"] = a.manifest;
    } else if (kind == "vqc") {
        const VqcArtifact v = vqc_artifact_from_document(doc, artifact_path.string());
        const FusionArtifact a = load_fusion_artifact(artifact_path.parent_path() / v.fusion_file);
        const auto pred = score_vqc(v, a, artifact_features(table, a, g.data), f.tau);
        const std::optional<double> tau = f.tau ? f.tau : v.model.threshold;
        csv << "row_id,label,margin,p_positive\n";
        for (std::size_t i = 0; i < pred.labels.size(); ++i) {
            const auto row = pred.probabilities.row(i);
            double margin = 0.0, p_pos = 0.0;
            if (row.size() == 2 && tau) {
                p_pos = row[1];
                margin = row[1] - *tau;
            } else {
                std::vector<double> sorted(row.begin(), row.end());
                std::sort(sorted.rbegin(), sorted.rend());
                margin = sorted[0] - sorted[1];
                p_pos = row.size() == 2 ? row[1] : std::numeric_limits<double>::quiet_NaN();
            }
            csv << i << ',' << v.class_names[static_cast<std::size_t>(pred.labels[i])] << ',' << format_double(margin)
                << ',' << format_double(p_pos) << '\n';
        }
        summary["rows"] = pred.labels.size();
        summary["tau"] = tau ? Json(*tau) : Json(nullptr);
        summary["alert_rate"] = pred.alert_rate;
        summary["manifest"] = v.manifest;
    } else {
        throw ArtifactError(artifact_path.string() + ": unknown artifact kind '" + kind + "'");
    }

    if (f.output.empty()) {
        out << csv.str();
    } else {
        std::ofstream file(f.output);
        if (!file) throw DataError("cannot write " + f.output);
        file << csv.str();
        summary["predictions"] = f.output;
        out << summary.dump(2) << '\n';
    }
}

struct EvaluateFlags {
    std::string predictions;
    std::optional<double> beta;
    std::string output;
};

void cmd_evaluate(const GlobalOptions& g, const EvaluateFlags& f, std::ostream& out) {
    require_data(g);
    if (f.predictions.empty()) throw std::invalid_argument("--predictions is required");
    const CsvTable truth = read_csv(fs::path(g.data));
    const CsvTable preds = read_csv(fs::path(f.predictions));
    const auto label_col = truth.column_index(g.label);
    if (!label_col) throw DataError(g.data + ": missing label column '" + g.label + "'");
    const auto pred_col = preds.column_index("label");
    const auto id_col = preds.column_index("row_id");
    if (!pred_col || !id_col) throw DataError(f.predictions + ": expected columns row_id and label");

    std::vector<std::string> names;
    auto index_of = [&](const std::string& name) {
        auto it = std::find(names.begin(), names.end(), name);
        if (it != names.end()) return static_cast<int>(it - names.begin());
        names.push_back(name);
        return static_cast<int>(names.size() - 1);
    };
    std::vector<int> y_true;
    for (const auto& row : truth.rows) y_true.push_back(index_of(row[*label_col]));
    std::vector<int> y_pred(y_true.size(), -1);
    for (std::size_t r = 0; r < preds.rows.size(); ++r) {
        const double id = parse_number(preds.rows[r][*id_col], r + 1, "row_id", f.predictions);
        if (id < 0 || id >= static_cast<double>(y_true.size()) || id != static_cast<double>(static_cast<std::size_t>(id))) {
            throw DataError(f.predictions + ": row_id " + preds.rows[r][*id_col] + " out of range");
        }
        y_pred[static_cast<std::size_t>(id)] = index_of(preds.rows[r][*pred_col]);
    }
    if (std::find(y_pred.begin(), y_pred.end(), -1) != y_pred.end()) {
        throw DataError(f.predictions + ": predictions do not cover every data row");
    }
    const auto report = evaluate(y_true, y_pred, names.size(), Averaging::macro, f.beta);
    Json j{{"command", "evaluate"}, {"class_names", names}, {"metrics", report}};
    if (f.output.empty()) {
        out << j.dump(2) << '\n';
    } else {
        emit(out, j, f.output);
    }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Geometry-first classification: CGR features, SWAP-test fusion, delta features and a VQC"};
    app.set_version_flag("--version", std::string(CGRQ_VERSION));
    app.config_formatter(std::make_shared<JsonOrIniConfig>());
    app.set_config("--config", "", "key=value, INI or JSON file mirroring the flags; flags win on conflict");
    app.allow_config_extras(true);
    app.require_subcommand(1);

    GlobalOptions g;
    app.add_option("--data", g.data, "CSV input");
    app.add_option("--label", g.label, "label column");
    app.add_option("--split", g.split, "train,val,test fractions");
    app.add_option("--seed", g.seed, "master seed");
    app.add_option("--group-size", g.group_size, "members per correlation group besides the anchor");
    app.add_option("--max-anchors", g.max_anchors, "keep only the most label-correlated anchors");
    app.add_option("--embedding", g.embedding, "phi or z")->check(CLI::IsMember({"phi", "z"}));
    app.add_option("--input-scaling", g.input_scaling, "none, standard or minmax")
        ->check(CLI::IsMember({"none", "standard", "minmax"}));
    app.add_option("--class-weights", g.class_weights, "none or inv_sqrt")->check(CLI::IsMember({"none", "inv_sqrt"}));
    app.add_option("--shots", g.shots, "shot count or 'exact'");
    app.add_option("--qseed", g.qseed, "seed for shot sampling");
    app.add_option("--medoid-cap", g.medoid_cap, "medoid subsample cap");
    app.add_option("--alpha", g.alpha, "search-time mixing weight")->check(CLI::Range(0.0, 1.0));
    app.add_option("--out", g.out_dir, "output directory");

    auto* prepare = app.add_subcommand("prepare", "split the data and summarise correlations")->fallthrough();

    SearchFlags sf;
    auto* search = app.add_subcommand("search", "coordinate descent over subset configurations")->fallthrough();
    search->add_option("--k", sf.k_range, "k range a:b");
    search->add_option("--passes", sf.passes, "maximum passes per k")->check(CLI::PositiveNumber);
    search->add_option("--budget", sf.budget, "candidate subsets per anchor sweep")->check(CLI::PositiveNumber);

    CalibrateFlags cf;
    auto* calibrate = app.add_subcommand("calibrate", "alpha grid and F-beta sweep")->fallthrough();
    calibrate->add_option("--search", cf.search_path, "search_record.json");
    calibrate->add_option("--k", cf.k, "k to calibrate (default: best)");

    FitFusionFlags ff;
    auto* fit = app.add_subcommand("fit-fusion", "persist the top-r fusion models")->fallthrough();
    fit->add_option("--search", ff.search_path, "search_record.json");
    fit->add_option("--top-r", ff.top_r, "number of k values to persist")->check(CLI::PositiveNumber);

    DeltaFlags df;
    auto* delta = app.add_subcommand("build-delta", "export delta features")->fallthrough();
    delta->add_option("--artifact", df.artifact, "fusion artifact (default: best alias)");
    delta->add_flag("--include-fused", df.include_fused, "add the fused-score delta");

    VqcFlags vf;
    auto* vqc = app.add_subcommand("train-vqc", "K-fold VQC training on delta features")->fallthrough();
    vqc->add_option("--artifact", vf.artifact, "fusion artifact (default: best alias)");
    vqc->add_flag("--include-fused", vf.include_fused, "add the fused-score delta");
    vqc->add_option("--folds", vf.folds, "K")->check(CLI::Range(2, 100));
    vqc->add_option("--steps", vf.steps, "SPSA steps")->check(CLI::PositiveNumber);
    vqc->add_option("--batch", vf.batch, "minibatch size")->check(CLI::PositiveNumber);
    vqc->add_option("--spsa-a", vf.a, "SPSA gain a");
    vqc->add_option("--spsa-c", vf.c, "SPSA gain c");
    vqc->add_option("--spsa-alpha", vf.alpha, "SPSA exponent alpha");
    vqc->add_option("--spsa-gamma", vf.gamma, "SPSA exponent gamma");
    vqc->add_option("--clip-norm", vf.clip, "gradient clip norm");
    vqc->add_option("--patience", vf.patience, "early-stopping patience")->check(CLI::PositiveNumber);
    vqc->add_option("--tolerance", vf.tolerance, "early-stopping tolerance");
    vqc->add_option("--init-sigma", vf.init_sigma, "initial parameter spread");
    vqc->add_option("--z-max", vf.z_max, "angle-map clip")->check(CLI::PositiveNumber);
    vqc->add_option("--target-metric", vf.target_metric, "threshold / model selection metric")
        ->check(CLI::IsMember({"macro_f1", "accuracy", "positive_f1", "recall_at_alert"}));
    vqc->add_option("--alert-budget", vf.alert_budget, "alert-rate budget for recall_at_alert")
        ->check(CLI::Range(0.0, 1.0));
    vqc->add_option("--tau", vf.tau, "operating threshold to report")->check(CLI::Range(0.0, 1.0));
    vqc->add_option("--profile", vf.profile, "default or fraud (operating tau 0.3)")
        ->check(CLI::IsMember({"default", "fraud"}));

    ScoreFlags scf;
    auto* score = app.add_subcommand("score", "apply a fusion or VQC artifact to a CSV")->fallthrough();
    score->add_option("--artifact", scf.artifact, "artifact JSON");
    score->add_option("--output", scf.output, "predictions CSV (default: stdout)");
    score->add_option("--tau", scf.tau, "VQC threshold override")->check(CLI::Range(0.0, 1.0));

    EvaluateFlags ef;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "metrics from predictions and labels")->fallthrough();
    evaluate_cmd->add_option("--predictions", ef.predictions, "predictions CSV (row_id,label,...)");
    evaluate_cmd->add_option("--beta", ef.beta, "also report F-beta")->check(CLI::PositiveNumber);
    evaluate_cmd->add_option("--output", ef.output, "write the report here as well");

    auto error = [&](const char* kind, const std::string& message, int code) {
        err << Json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << '\n';
        return code;
    };

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForVersion&) {
        out << CGRQ_VERSION << '\n';
        return kExitOk;
    } catch (const CLI::Success&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        return error("usage", e.what(), kExitUsage);
    }

    try {
        if (prepare->parsed()) cmd_prepare(g, out);
        else if (search->parsed()) cmd_search(g, sf, out);
        else if (calibrate->parsed()) cmd_calibrate(g, cf, out);
        else if (fit->parsed()) cmd_fit_fusion(g, ff, out);
        else if (delta->parsed()) cmd_build_delta(g, df, out);
        else if (vqc->parsed()) cmd_train_vqc(g, vf, out);
        else if (score->parsed()) cmd_score(g, scf, out);
        else if (evaluate_cmd->parsed()) cmd_evaluate(g, ef, out);
    } catch (const DataError& e) {
        return error("data", e.what(), kExitData);
    } catch (const ArtifactError& e) {
        return error("artifact", e.what(), kExitArtifact);
    } catch (const std::invalid_argument& e) {
        return error("usage", e.what(), kExitUsage);
    } catch (const std::out_of_range& e) {
        return error("usage", e.what(), kExitUsage);
    } catch (const std::exception& e) {
        return error("internal", e.what(), 1);
    }
    return kExitOk;
}

}  // namespace cgrq::cli
