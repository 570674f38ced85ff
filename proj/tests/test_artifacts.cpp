#include "cgrq/artifacts.hpp"
#include "cgrq/error.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace cgrq;
namespace fs = std::filesystem;

namespace {

struct WineFixture : ::testing::Test {
    Dataset ds;
    Splits splits;
    AnchorModel anchors;
    PipelineSettings settings;
    fs::path dir;

    void SetUp() override {
        ds = load_csv(fs::path(TEST_DATA_DIR) / "wine.csv", "class");
        splits = stratified_split(ds, {}, 0);
        anchors = build_anchor_model(correlation(splits.train, true), 6);
        dir = fs::temp_directory_path() /
              ("cgrq_art_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }

    FusionArtifact build(std::size_t k) {
        const auto grid = default_alpha_grid();
        auto a = build_fusion_artifact(splits, anchors, default_config(anchors, k), settings, grid);
        a.k = k;
        return a;
    }
};

std::vector<int> labels_of(const std::vector<ScoredRecord>& rows) {
    std::vector<int> out;
    for (const auto& r : rows) out.push_back(r.label);
    return out;
}

}  // namespace

TEST_F(WineFixture, RoundTripIsBitExact) {
    const auto a = build(3);
    const auto path = dir / fusion_file_name(3);
    save_fusion_artifact(path, a);
    const auto b = load_fusion_artifact(path);
    EXPECT_EQ(b.alpha_star(), a.alpha_star());
    EXPECT_EQ(b.model.medoids.medoids, a.model.medoids.medoids);
    EXPECT_EQ(b.model.scaler.means, a.model.scaler.means);
    for (const auto* part : {&splits.train, &splits.val, &splits.test}) {
        const auto x = score_matrix(a, part->X), y = score_matrix(b, part->X);
        ASSERT_EQ(x.size(), y.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            EXPECT_EQ(x[i].label, y[i].label);
            EXPECT_EQ(x[i].scores, y[i].scores);
            EXPECT_EQ(x[i].margin, y[i].margin);
        }
    }
    const auto test_labels = labels_of(score_matrix(b, splits.test.X));
    const auto again = evaluate(splits.test.y, test_labels, 3);
    EXPECT_EQ(again.confusion, a.test_metrics.confusion);
    EXPECT_DOUBLE_EQ(again.accuracy, a.test_metrics.accuracy);
}

TEST_F(WineFixture, SingleRecordMatchesBatch) {
    const auto a = build(2);
    const auto batch = score_matrix(a, splits.train.X);
    for (std::size_t i = 0; i < splits.train.num_rows(); i += 7) {
        const auto r = score_record(a, splits.train.X.row(i));
        EXPECT_EQ(r.label, batch[i].label);
        EXPECT_EQ(r.scores, batch[i].scores);
        EXPECT_GE(r.margin, 0.0);
    }
}

TEST_F(WineFixture, MedoidPreimageWinsAtAlphaOne) {
    auto a = build(3);
    a.model.params.alpha = 1.0;
    const auto F = a.model.features(splits.train.X);
    for (std::size_t c = 0; c < a.model.num_classes(); ++c) {
        bool found = false;
        for (std::size_t i = 0; i < F.rows() && !found; ++i) {
            const auto row = F.row(i);
            if (std::vector<double>(row.begin(), row.end()) != a.model.medoids.medoids[c]) continue;
            found = true;
            EXPECT_EQ(score_record(a, splits.train.X.row(i)).label, static_cast<int>(c));
        }
        EXPECT_TRUE(found) << "class " << c;
    }
}

TEST_F(WineFixture, UnknownVersionFailsLoudly) {
    auto doc = to_document(build(2));
    doc["format_version"] = 99;
    const auto path = dir / "bad.json";
    write_json_atomic(path, doc);
    EXPECT_THROW(load_fusion_artifact(path), ArtifactError);
    doc.erase("format_version");
    write_json_atomic(path, doc);
    EXPECT_THROW(load_fusion_artifact(path), ArtifactError);
}

TEST_F(WineFixture, CorruptDocumentsRejected) {
    const auto good = to_document(build(2));
    auto doc = good;
    doc["model"]["medoids"]["medoids"].erase("0");
    EXPECT_THROW(fusion_artifact_from_document(doc), ArtifactError);
    doc = good;
    doc["kind"] = "vqc";
    EXPECT_THROW(fusion_artifact_from_document(doc), ArtifactError);
    const auto path = dir / "garbage.json";
    std::ofstream(path) << "{ not json";
    EXPECT_THROW(read_json(path), ArtifactError);
    EXPECT_THROW(load_fusion_artifact(dir / "missing.json"), ArtifactError);
}

TEST_F(WineFixture, MissingColumnNamed) {
    const auto a = build(2);
    std::istringstream in("alcohol,malic_acid\n1,2\n");
    const auto table = read_csv(in);
    try {
        artifact_features(table, a, "inline");
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("ash"), std::string::npos) << e.what();
    }
}

TEST_F(WineFixture, PersistTopRClampsAndWritesAlias) {
    SearchRecord record;
    for (std::size_t k : {2u, 3u}) {
        KRecord r;
        r.k = k;
        r.best_config = default_config(anchors, k);
        r.best_f1 = k == 3 ? 0.9 : 0.8;
        record.per_k.push_back(r);
    }
    const auto grid = default_alpha_grid();
    const auto persisted = persist_top_r(record, splits, anchors, settings, 5, dir, Manifest{}, grid);
    ASSERT_EQ(persisted.size(), 2u);
    EXPECT_EQ(persisted[0].artifact.k, 3u);
    EXPECT_TRUE(fs::exists(dir / "fusion_k2.json"));
    EXPECT_TRUE(fs::exists(dir / "fusion_k3.json"));
    const auto alias = read_best_alias(dir);
    EXPECT_EQ(alias.kind, "fusion");
    EXPECT_EQ(alias.file, "fusion_k3.json");
    EXPECT_EQ(alias.k, 3u);
    EXPECT_EQ(persist_top_r(record, splits, anchors, settings, 1, dir, Manifest{}, grid).size(), 1u);
}

TEST(TopK, OrderAndTies) {
    SearchRecord record;
    for (auto [k, f1] : std::vector<std::pair<std::size_t, double>>{{2, 0.7}, {3, 0.9}, {4, 0.9}, {5, 0.8}}) {
        KRecord r;
        r.k = k;
        r.best_f1 = f1;
        record.per_k.push_back(r);
    }
    EXPECT_EQ(top_k_values(record, 2), (std::vector<std::size_t>{3, 4}));
    EXPECT_EQ(top_k_values(record, 10), (std::vector<std::size_t>{3, 4, 5, 2}));
}

TEST(FileNames, Patterns) {
    EXPECT_EQ(fusion_file_name(3), "fusion_k3.json");
    EXPECT_EQ(vqc_file_name(4), "vqc_k4.json");
}

TEST(VqcArtifactDoc, RoundTrip) {
    VqcArtifact a;
    a.k = 3;
    a.fusion_file = "fusion_k3.json";
    a.class_names = {"0", "1"};
    a.model.spec = default_spec(2, 2, 2, false);
    a.model.theta = {0.1, -0.2, 0.3, 0.4, 0.5, -0.6, 0.7, 0.8};
    a.model.scaler = Scaler{{0.5, -0.1}, {1.5, 2.0}};
    a.model.threshold = 0.35;
    a.best_hp = HyperParams{2, false};
    a.target_metric = TargetMetric::recall_at_alert;
    const auto b = vqc_artifact_from_document(to_document(a));
    EXPECT_EQ(b.model.theta, a.model.theta);
    EXPECT_EQ(b.model.spec.reps, 2u);
    EXPECT_FALSE(b.model.spec.reupload);
    EXPECT_EQ(b.model.threshold, a.model.threshold);
    EXPECT_EQ(b.best_hp, a.best_hp);
    EXPECT_EQ(b.target_metric, a.target_metric);
    const Matrix Z = Matrix::from_rows({{0.3, -1.0}, {2.0, 0.1}});
    EXPECT_EQ(b.model.probabilities(Z), a.model.probabilities(Z));

    auto doc = to_document(a);
    doc["theta"].erase(0);
    EXPECT_THROW(vqc_artifact_from_document(doc), ArtifactError);
}
