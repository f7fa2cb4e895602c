#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fishbone/errors.hpp"
#include "fishbone/gmm.hpp"

using namespace fishbone;

namespace {

std::vector<Vec2> blob(Vec2 centre, double sd, int n, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, sd);
    std::vector<Vec2> pts;
    for (int i = 0; i < n; ++i) pts.push_back({centre.x + g(rng), centre.y + g(rng)});
    return pts;
}

Vec2 mean_of(const std::vector<Vec2>& pts) {
    Vec2 m{};
    for (Vec2 p : pts) m = m + p;
    return m * (1.0 / static_cast<double>(pts.size()));
}

}  // namespace

TEST(LogGaussian, StandardNormalAtMean) {
    EXPECT_NEAR(log_gaussian({0, 0}, {0, 0}, SymMat2::identity()), -std::log(2 * kPi), 1e-12);
    EXPECT_NEAR(log_gaussian({1, 0}, {0, 0}, SymMat2::identity()), -std::log(2 * kPi) - 0.5, 1e-12);
}

TEST(EmFit, SingleComponentIsClosedForm) {
    std::mt19937_64 rng(1);
    const auto pts = blob({5, -3}, 2.0, 200, rng);
    const auto fit = em_fit(pts, 1);
    ASSERT_EQ(fit.components.size(), 1u);
    const Vec2 m = mean_of(pts);
    SymMat2 s{};
    for (Vec2 p : pts) {
        const Vec2 d = p - m;
        s.xx += d.x * d.x;
        s.xy += d.x * d.y;
        s.yy += d.y * d.y;
    }
    const double n = static_cast<double>(pts.size());
    const auto& c = fit.components[0];
    EXPECT_NEAR(c.mean.x, m.x, 1e-9);
    EXPECT_NEAR(c.mean.y, m.y, 1e-9);
    EXPECT_NEAR(c.cov.xx, s.xx / n, 1e-9);
    EXPECT_NEAR(c.cov.xy, s.xy / n, 1e-9);
    EXPECT_NEAR(c.cov.yy, s.yy / n, 1e-9);
    EXPECT_DOUBLE_EQ(c.weight, 1.0);
}

TEST(EmFit, TwoSeparatedBlobs) {
    std::mt19937_64 rng(2);
    const auto a = blob({0, 0}, 3.0, 150, rng);
    const auto b = blob({100, 0}, 3.0, 150, rng);
    std::vector<Vec2> pts = a;
    pts.insert(pts.end(), b.begin(), b.end());
    const auto fit = em_fit(pts, 2);
    const Vec2 ma = mean_of(a), mb = mean_of(b);
    const auto& c0 = fit.components[0];
    const auto& c1 = fit.components[1];
    const bool direct = distance(c0.mean, ma) < distance(c0.mean, mb);
    EXPECT_LT(distance(direct ? c0.mean : c1.mean, ma), 1.0);
    EXPECT_LT(distance(direct ? c1.mean : c0.mean, mb), 1.0);
    EXPECT_TRUE(fit.converged);
}

TEST(EmFit, LogLikelihoodNeverDecreases) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<Vec2> pts;
        const int blobs = 1 + static_cast<int>(rng() % 3);
        std::uniform_real_distribution<double> u(0.0, 50.0);
        for (int b = 0; b < blobs; ++b) {
            const auto part = blob({u(rng), u(rng)}, 1.0 + u(rng) / 10.0, 20 + static_cast<int>(rng() % 40), rng);
            pts.insert(pts.end(), part.begin(), part.end());
        }
        EmOptions opt;
        opt.seed = static_cast<std::uint64_t>(trial);
        const auto fit = em_fit(pts, 1 + rng() % 3, opt);
        for (std::size_t t = 1; t < fit.log_likelihood_trace.size(); ++t)
            ASSERT_GE(fit.log_likelihood_trace[t], fit.log_likelihood_trace[t - 1] - 1e-9) << "trial " << trial;
    }
}

TEST(EmFit, DeterministicForSeed) {
    std::mt19937_64 rng(4);
    const auto pts = blob({0, 0}, 5.0, 100, rng);
    EmOptions opt;
    opt.seed = 9;
    const auto a = em_fit(pts, 3, opt);
    const auto b = em_fit(pts, 3, opt);
    EXPECT_EQ(a.log_likelihood_trace, b.log_likelihood_trace);
}

TEST(EmFit, EmptyInitialComponentIsReseeded) {
    std::mt19937_64 rng(5);
    const auto pts = blob({0, 0}, 1.0, 40, rng);
    EmOptions opt;
    opt.initial_labels = std::vector<std::size_t>(pts.size(), 0);
    const auto fit = em_fit(pts, 2, opt);
    ASSERT_EQ(fit.components.size(), 2u);
    for (const auto& c : fit.components) {
        EXPECT_TRUE(std::isfinite(c.mean.x));
        EXPECT_GT(c.weight, 0.0);
    }
}

TEST(EmFit, RejectsBadInput) {
    const std::vector<Vec2> pts{{0, 0}};
    EXPECT_THROW(em_fit(pts, 2), InvalidArgument);
    EXPECT_THROW(em_fit(pts, 0), InvalidArgument);
}
