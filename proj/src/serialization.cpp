#include "cgrq/serialization.hpp"

#include <string>

namespace cgrq {

void to_json(Json& j, const Matrix& m) {
    j = Json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const auto r = m.row(i);
        j.push_back(std::vector<double>(r.begin(), r.end()));
    }
}

void from_json(const Json& j, Matrix& m) { m = Matrix::from_rows(j.get<std::vector<std::vector<double>>>()); }

void to_json(Json& j, const Scaler& s) { j = Json{{"means", s.means}, {"stds", s.stds}}; }

void from_json(const Json& j, Scaler& s) {
    j.at("means").get_to(s.means);
    j.at("stds").get_to(s.stds);
}

void to_json(Json& j, const SplitIndices& s) { j = Json{{"train", s.train}, {"val", s.val}, {"test", s.test}}; }

void from_json(const Json& j, SplitIndices& s) {
    j.at("train").get_to(s.train);
    j.at("val").get_to(s.val);
    j.at("test").get_to(s.test);
}

void to_json(Json& j, const AnchorModel& m) {
    Json anchors = Json::array(), membership = Json::object(), weights = Json::object();
    for (const auto& a : m.anchors) {
        anchors.push_back(a.feature);
        membership[std::to_string(a.feature)] = a.members;
        for (std::size_t i = 0; i < a.members.size(); ++i) {
            weights[std::to_string(a.feature) + "," + std::to_string(a.members[i])] = a.weights[i];
        }
    }
    j = Json{{"num_features", m.num_features}, {"anchors", anchors}, {"membership", membership}, {"weights", weights}};
}

void from_json(const Json& j, AnchorModel& m) {
    m = AnchorModel{};
    j.at("num_features").get_to(m.num_features);
    const auto& membership = j.at("membership");
    const auto& weights = j.at("weights");
    for (const auto& a : j.at("anchors")) {
        Anchor anchor;
        anchor.feature = a.get<std::size_t>();
        const std::string key = std::to_string(anchor.feature);
        membership.at(key).get_to(anchor.members);
        for (auto f : anchor.members) anchor.weights.push_back(weights.at(key + "," + std::to_string(f)).get<double>());
        m.anchors.push_back(std::move(anchor));
    }
}

void to_json(Json& j, const CgrConfig& c) { j = Json{{"k", c.k}, {"subsets", c.subsets}}; }

void from_json(const Json& j, CgrConfig& c) {
    j.at("k").get_to(c.k);
    j.at("subsets").get_to(c.subsets);
}

void to_json(Json& j, const MedoidSet& m) {
    Json by_class = Json::object();
    for (std::size_t c = 0; c < m.medoids.size(); ++c) by_class[std::to_string(c)] = m.medoids[c];
    j = Json{{"medoids", by_class}, {"subsample_cap", m.subsample_cap}, {"seed", m.seed}};
}

void from_json(const Json& j, MedoidSet& m) {
    const auto& by_class = j.at("medoids");
    m.medoids.assign(by_class.size(), {});
    for (std::size_t c = 0; c < by_class.size(); ++c) by_class.at(std::to_string(c)).get_to(m.medoids[c]);
    j.at("subsample_cap").get_to(m.subsample_cap);
    j.at("seed").get_to(m.seed);
}

void to_json(Json& j, const FusionParams& p) {
    j = Json{{"alpha", p.alpha},
             {"use_angular", p.use_angular},
             {"epsilon", p.epsilon},
             {"class_weights", p.class_weights}};
}

void from_json(const Json& j, FusionParams& p) {
    j.at("alpha").get_to(p.alpha);
    j.at("use_angular").get_to(p.use_angular);
    j.at("epsilon").get_to(p.epsilon);
    j.at("class_weights").get_to(p.class_weights);
}

void to_json(Json& j, const QuantumOptions& q) {
    j = Json{{"shots", q.shots ? Json(*q.shots) : Json(nullptr)}, {"seed", q.seed}};
}

void from_json(const Json& j, QuantumOptions& q) {
    const auto& shots = j.at("shots");
    q.shots = shots.is_null() ? std::nullopt : std::optional<std::uint64_t>(shots.get<std::uint64_t>());
    j.at("seed").get_to(q.seed);
}

void to_json(Json& j, const InputTransform& t) {
    j = Json{{"kind", to_string(t.kind)}, {"offset", t.offset}, {"scale", t.scale}};
}

void from_json(const Json& j, InputTransform& t) {
    t.kind = input_scaling_from_string(j.at("kind").get<std::string>());
    j.at("offset").get_to(t.offset);
    j.at("scale").get_to(t.scale);
}

void to_json(Json& j, const FusionModel& m) {
    j = Json{{"anchor_model", m.anchors}, {"config", m.config},   {"embedding", to_string(m.embedding)},
             {"input", m.input},          {"scaler", m.scaler},   {"medoids", m.medoids},
             {"fusion", m.params},        {"quantum", m.quantum}};
}

void from_json(const Json& j, FusionModel& m) {
    j.at("anchor_model").get_to(m.anchors);
    j.at("config").get_to(m.config);
    m.embedding = embedding_from_string(j.at("embedding").get<std::string>());
    j.at("input").get_to(m.input);
    j.at("scaler").get_to(m.scaler);
    j.at("medoids").get_to(m.medoids);
    j.at("fusion").get_to(m.params);
    j.at("quantum").get_to(m.quantum);
}

void to_json(Json& j, const ClassMetrics& m) {
    j = Json{{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support}};
    if (m.fbeta) j["fbeta"] = *m.fbeta;
}

void from_json(const Json& j, ClassMetrics& m) {
    j.at("precision").get_to(m.precision);
    j.at("recall").get_to(m.recall);
    j.at("f1").get_to(m.f1);
    j.at("support").get_to(m.support);
    if (j.contains("fbeta")) m.fbeta = j.at("fbeta").get<double>();
}

void to_json(Json& j, const MetricsReport& r) {
    j = Json{{"total", r.total},
             {"accuracy", r.accuracy},
             {"macro_precision", r.macro_precision},
             {"macro_recall", r.macro_recall},
             {"macro_f1", r.macro_f1},
             {"weighted_precision", r.weighted_precision},
             {"weighted_recall", r.weighted_recall},
             {"weighted_f1", r.weighted_f1},
             {"per_class", r.per_class},
             {"confusion", r.confusion}};
    if (r.beta) j["beta"] = *r.beta;
    if (r.fbeta) j["fbeta"] = *r.fbeta;
}

void from_json(const Json& j, MetricsReport& r) {
    j.at("total").get_to(r.total);
    j.at("accuracy").get_to(r.accuracy);
    j.at("macro_precision").get_to(r.macro_precision);
    j.at("macro_recall").get_to(r.macro_recall);
    j.at("macro_f1").get_to(r.macro_f1);
    j.at("weighted_precision").get_to(r.weighted_precision);
    j.at("weighted_recall").get_to(r.weighted_recall);
    j.at("weighted_f1").get_to(r.weighted_f1);
    j.at("per_class").get_to(r.per_class);
    j.at("confusion").get_to(r.confusion);
    if (j.contains("beta")) r.beta = j.at("beta").get<double>();
    if (j.contains("fbeta")) r.fbeta = j.at("fbeta").get<double>();
}

void to_json(Json& j, const AlphaRecord& r) { j = Json{{"alpha", r.alpha}, {"macro_f1", r.macro_f1}}; }

void from_json(const Json& j, AlphaRecord& r) {
    j.at("alpha").get_to(r.alpha);
    j.at("macro_f1").get_to(r.macro_f1);
}

void to_json(Json& j, const FbetaRow& r) { j = Json{{"beta", r.beta}, {"macro_fbeta", r.macro_fbeta}}; }

void to_json(Json& j, const KRecord& r) {
    j = Json{{"k", r.k},
             {"initial_config", r.initial_config},
             {"best_config", r.best_config},
             {"best_f1", r.best_f1},
             {"metrics", r.metrics},
             {"passes_used", r.passes_used},
             {"evaluations", r.evaluations},
             {"trace", r.trace}};
}

void from_json(const Json& j, KRecord& r) {
    j.at("k").get_to(r.k);
    j.at("initial_config").get_to(r.initial_config);
    j.at("best_config").get_to(r.best_config);
    j.at("best_f1").get_to(r.best_f1);
    j.at("metrics").get_to(r.metrics);
    j.at("passes_used").get_to(r.passes_used);
    j.at("evaluations").get_to(r.evaluations);
    j.at("trace").get_to(r.trace);
}

void to_json(Json& j, const SearchRecord& r) {
    j = Json{{"per_k", r.per_k}};
    if (!r.per_k.empty()) j["best_k"] = r.best().k;
}

void from_json(const Json& j, SearchRecord& r) { j.at("per_k").get_to(r.per_k); }

void to_json(Json& j, const VqcSpec& s) {
    j = Json{{"n", s.n_qubits},           {"L", s.reps},         {"reupload", s.reupload},
             {"mapping", to_string(s.mapping)}, {"m_inputs", s.m_inputs}, {"z_max", s.z_max},
             {"lambda", s.feature_scales}};
}

void from_json(const Json& j, VqcSpec& s) {
    j.at("n").get_to(s.n_qubits);
    j.at("L").get_to(s.reps);
    j.at("reupload").get_to(s.reupload);
    s.mapping = mapping_from_string(j.at("mapping").get<std::string>());
    j.at("m_inputs").get_to(s.m_inputs);
    j.at("z_max").get_to(s.z_max);
    j.at("lambda").get_to(s.feature_scales);
}

void to_json(Json& j, const SpsaConfig& c) {
    j = Json{{"steps", c.steps},         {"batch", c.batch},       {"a", c.a},
             {"c", c.c},                 {"alpha", c.alpha},       {"gamma", c.gamma},
             {"clip_norm", c.clip_norm}, {"patience", c.patience}, {"tolerance", c.tolerance},
             {"init_sigma", c.init_sigma}, {"seed", c.seed}};
}

void to_json(Json& j, const SpsaRecord& r) {
    j = Json{{"steps_run", r.steps_run},
             {"early_stopped", r.early_stopped},
             {"best_batch_loss", r.best_batch_loss},
             {"batch_losses", r.batch_losses},
             {"warnings", r.warnings}};
}

void to_json(Json& j, const HyperParams& h) { j = Json{{"L", h.reps}, {"reupload", h.reupload}}; }

void from_json(const Json& j, HyperParams& h) {
    j.at("L").get_to(h.reps);
    j.at("reupload").get_to(h.reupload);
}

void to_json(Json& j, const HpRecord& r) {
    Json folds = Json::array();
    for (const auto& f : r.folds) {
        Json fj{{"fold", f.fold}, {"score", f.score}};
        fj["tau"] = f.tau ? Json(*f.tau) : Json(nullptr);
        folds.push_back(fj);
    }
    j = Json{{"hp", r.hp}, {"mean_score", r.mean_score}, {"folds", folds}};
}

}  // namespace cgrq
