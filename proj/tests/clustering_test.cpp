#include <random>

#include <gtest/gtest.h>

#include "fishbone/clustering.hpp"
#include "fishbone/errors.hpp"
#include "test_support.hpp"
#include "upgma_oracle.hpp"

using namespace fishbone;
using fishbone::testing::brute_force_upgma;
using fishbone::testing::make_topology;

TEST(Covariance, SquareCorners) {
    const std::vector<Vec2> pts{{0, 0}, {2, 0}, {0, 2}, {2, 2}};
    const auto c = sample_covariance(pts);
    EXPECT_NEAR(c.sigma.xx, 4.0 / 3.0, 1e-12);
    EXPECT_NEAR(c.sigma.yy, 4.0 / 3.0, 1e-12);
    EXPECT_NEAR(c.sigma.xy, 0.0, 1e-12);
    EXPECT_FALSE(c.regularized);
}

TEST(Covariance, CollinearIsRegularized) {
    const std::vector<Vec2> pts{{0, 0}, {1, 0}, {5, 0}};
    const auto c = sample_covariance(pts);
    EXPECT_TRUE(c.regularized);
    EXPECT_NEAR(c.sigma.yy, 1e-6 * 7.0, 1e-15);
    EXPECT_GT(c.sigma.det(), 0.0);
}

TEST(Covariance, SymmetricCloudHasNoCorrelation) {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g(0.0, 10.0);
    std::vector<Vec2> pts;
    for (int i = 0; i < 20000; ++i) pts.push_back({g(rng), g(rng)});
    const auto c = sample_covariance(pts);
    EXPECT_LT(std::abs(c.sigma.xy) / c.sigma.xx, 0.03);
}

TEST(Mahalanobis, Examples) {
    EXPECT_DOUBLE_EQ(mahalanobis({3, 1}, {3, 1}, SymMat2::diag(2, 5)), 0.0);
    EXPECT_DOUBLE_EQ(mahalanobis({0, 0}, {3, 4}, SymMat2::identity()), 5.0);
    EXPECT_DOUBLE_EQ(mahalanobis({2, 0}, {0, 0}, SymMat2::diag(4, 1)), 1.0);
    EXPECT_THROW(mahalanobis({0, 0}, {1, 1}, SymMat2{1, 1, 1}), DegenerateError);
}

TEST(Upgma, TrivialCuts) {
    const std::vector<Vec2> pts{{0, 0}, {1, 0}, {10, 0}, {11, 3}};
    const auto m = DissimilarityMatrix::euclidean(pts);
    EXPECT_EQ(upgma(m, 4).labels, (std::vector<std::size_t>{0, 1, 2, 3}));
    EXPECT_EQ(upgma(m, 1).labels, (std::vector<std::size_t>{0, 0, 0, 0}));
    EXPECT_THROW(upgma(m, 5), InvalidArgument);
    EXPECT_THROW(upgma(m, 0), InvalidArgument);
}

TEST(Upgma, ThreePointsOnALine) {
    const std::vector<Vec2> pts{{0, 0}, {1, 0}, {10, 0}};
    const auto a = upgma(DissimilarityMatrix::euclidean(pts), 2);
    EXPECT_EQ(a.labels, (std::vector<std::size_t>{0, 0, 1}));
    ASSERT_EQ(a.merges.size(), 1u);
    EXPECT_EQ(a.merges[0], (Merge{0, 1, 1.0}));
}

TEST(Upgma, TiesGoToSmallestPair) {
    DissimilarityMatrix m(4);
    m.set(0, 1, 2);
    m.set(0, 2, 2);
    m.set(0, 3, 5);
    m.set(1, 2, 2);
    m.set(1, 3, 5);
    m.set(2, 3, 1);
    const auto a = upgma(m, 1);
    EXPECT_EQ(a.merges, brute_force_upgma(m, 1));
    EXPECT_EQ(a.merges[0], (Merge{2, 3, 1.0}));
    DissimilarityMatrix flat(4);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = i + 1; j < 4; ++j) flat.set(i, j, 7);
    const auto f = upgma(flat, 1);
    EXPECT_EQ(f.merges[0], (Merge{0, 1, 7.0}));
    EXPECT_EQ(f.merges, brute_force_upgma(flat, 1));
}

TEST(Upgma, MatchesBruteForceOnRandomInstances) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 2 + rng() % 7;
        const std::size_t k = 1 + rng() % n;
        DissimilarityMatrix m(n);
        std::uniform_real_distribution<double> u(0.0, 10.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) m.set(i, j, u(rng));
        const auto got = upgma(m, k).merges;
        const auto want = brute_force_upgma(m, k);
        ASSERT_EQ(got.size(), want.size());
        for (std::size_t s = 0; s < got.size(); ++s) {
            EXPECT_EQ(got[s].left, want[s].left) << "trial " << trial;
            EXPECT_EQ(got[s].right, want[s].right) << "trial " << trial;
            EXPECT_NEAR(got[s].height, want[s].height, 1e-9);
        }
    }
}

TEST(Upgma, HeightsNeverDecrease) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    std::vector<Vec2> pts;
    for (int i = 0; i < 60; ++i) pts.push_back({u(rng), u(rng)});
    const auto a = upgma(DissimilarityMatrix::euclidean(pts), 1);
    for (std::size_t s = 1; s < a.merges.size(); ++s) EXPECT_GE(a.merges[s].height, a.merges[s - 1].height - 1e-12);
}

TEST(ClusterTopology, TranslationInvariant) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g(0.0, 4.0);
    std::vector<Vec2> pts, shifted;
    for (Vec2 c : {Vec2{20, 20}, Vec2{70, 30}, Vec2{40, 80}})
        for (int i = 0; i < 15; ++i) pts.push_back({c.x + g(rng), c.y + g(rng)});
    for (auto& p : pts) {
        p.x = std::clamp(p.x, 0.0, 100.0);
        p.y = std::clamp(p.y, 0.0, 100.0);
        shifted.push_back({p.x + 50.0, p.y + 25.0});
    }
    const auto a = cluster_topology(make_topology(pts), 3);
    const auto b = cluster_topology(make_topology(shifted, {200, 200}), 3);
    EXPECT_EQ(a.labels, b.labels);
    EXPECT_EQ(a.members().size(), 3u);
    for (const auto& m : a.members()) EXPECT_EQ(m.size(), 15u);
}
