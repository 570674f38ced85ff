#include "cgrq/delta.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

using namespace cgrq;

namespace {

FusedSample sample(std::vector<double> d, std::vector<double> t, std::vector<double> s) {
    FusedSample out;
    out.distance_norm = std::move(d);
    out.angle_norm = std::move(t);
    out.score = std::move(s);
    out.label = static_cast<int>(argmin_index(out.score));
    return out;
}

}  // namespace

TEST(Delta, BinaryDifferences) {
    const auto row = delta_row(sample({0.25, 0.75}, {0.6, 0.4}, {0.4, 0.6}), false);
    ASSERT_EQ(row.size(), 2u);
    EXPECT_NEAR(row[0], 0.5, 1e-12);
    EXPECT_NEAR(row[1], -0.2, 1e-12);
}

TEST(Delta, SymmetricChannelsGiveZero) {
    const auto row = delta_row(sample({0.5, 0.5}, {0.3, 0.7}, {0.4, 0.6}), false);
    EXPECT_DOUBLE_EQ(row[0], 0.0);
}

TEST(Delta, IncludeFusedAppendsScoreDifference) {
    const auto row = delta_row(sample({0.25, 0.75}, {0.6, 0.4}, {0.2, 0.7}), true);
    ASSERT_EQ(row.size(), 3u);
    EXPECT_NEAR(row[2], 0.5, 1e-12);
    EXPECT_EQ(delta_column_names(true), (std::vector<std::string>{"delta_d", "delta_theta", "delta_s"}));
}

TEST(Delta, MulticlassRunnerUpMinusBest) {
    const auto row = delta_row(sample({0.1, 0.5, 0.4}, {0.2, 0.3, 0.5}, {0.2, 0.5, 0.3}), false);
    EXPECT_NEAR(row[0], 0.4 - 0.1, 1e-12);
    EXPECT_NEAR(row[1], 0.5 - 0.2, 1e-12);
}

TEST(Delta, MulticlassTieTakesLowerIndex) {
    const auto row = delta_row(sample({0.2, 0.3, 0.5}, {0.1, 0.2, 0.7}, {0.1, 0.4, 0.4}), false);
    EXPECT_NEAR(row[0], 0.3 - 0.2, 1e-12);
}

TEST(Delta, LabelSwapNegates) {
    // Property: reversing the two classes negates every binary delta.
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0, 1);
    for (int t = 0; t < 100; ++t) {
        const double d = u(rng), th = u(rng), s = u(rng);
        const auto a = delta_row(sample({d, 1 - d}, {th, 1 - th}, {s, 1 - s}), true);
        const auto b = delta_row(sample({1 - d, d}, {1 - th, th}, {1 - s, s}), true);
        for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(a[j], -b[j], 1e-12);
    }
}

TEST(Delta, BuildMatrixShape) {
    const std::vector<FusedSample> rows{sample({0.25, 0.75}, {0.6, 0.4}, {0.4, 0.6}),
                                        sample({0.7, 0.3}, {0.5, 0.5}, {0.6, 0.4})};
    const auto M = build_deltas(rows, 2, false);
    EXPECT_EQ(M.rows(), 2u);
    EXPECT_EQ(M.cols(), 2u);
    EXPECT_NEAR(M(1, 0), -0.4, 1e-12);
    EXPECT_EQ(build_deltas(rows, 2, true).cols(), 3u);
}

TEST(Delta, StandardizeOnTrainOnly) {
    const auto train = Matrix::from_rows({{-1, 4}, {1, 4}});
    const auto other = Matrix::from_rows({{3, 5}});
    const std::vector<Matrix> others{other};
    const auto f = standardize_deltas(train, others);
    EXPECT_DOUBLE_EQ(f.train(0, 0), -1.0);
    EXPECT_DOUBLE_EQ(f.train(1, 0), 1.0);
    EXPECT_DOUBLE_EQ(f.train(0, 1), 0.0);
    EXPECT_DOUBLE_EQ(f.scaler.stds[1], 1.0);
    EXPECT_DOUBLE_EQ(f.others[0](0, 0), 3.0);
    EXPECT_DOUBLE_EQ(f.others[0](0, 1), 1.0);
}

TEST(Delta, CsvHeaderAndRows) {
    const auto path = std::filesystem::temp_directory_path() / "cgrq_delta_test.csv";
    const std::vector<int> labels{1, 0};
    write_delta_csv(path, Matrix::from_rows({{0.5, -0.25}, {0, 1}}), labels, false);
    std::ifstream in(path);
    std::string header, first;
    std::getline(in, header);
    std::getline(in, first);
    EXPECT_EQ(header, "delta_d,delta_theta,label");
    EXPECT_EQ(first.substr(first.rfind(',') + 1), "1");
    std::filesystem::remove(path);
}
