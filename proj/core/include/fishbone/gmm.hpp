#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fishbone/geometry.hpp"

namespace fishbone {

struct GaussianComponent {
    Vec2 mean;
    SymMat2 cov;
    double weight = 0.0;
};

struct GmmFit {
    std::vector<GaussianComponent> components;
    /// Log-likelihood of the initial parameters followed by one entry per EM iteration.
    std::vector<double> log_likelihood_trace;
    /// responsibilities[i][k]: posterior of component k for point i, under the final parameters.
    std::vector<std::vector<double>> responsibilities;
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<std::string> warnings;
};

struct EmOptions {
    double tol = 1e-8;
    std::size_t max_iter = 200;
    std::uint64_t seed = 0;
    /// Optional hard assignment (values < n_components) used for the initial
    /// parameters; when absent, an average-linkage clustering of the points is used.
    std::optional<std::vector<std::size_t>> initial_labels;
};

/// Log density of a bivariate normal.
double log_gaussian(Vec2 x, Vec2 mean, const SymMat2& cov);

/// Expectation-maximisation for a bivariate Gaussian mixture. Stops when the
/// log-likelihood changes by less than `tol` or after `max_iter` iterations.
/// A component whose soft count collapses is re-seeded at the worst-explained
/// point and a warning is recorded.
GmmFit em_fit(std::span<const Vec2> points, std::size_t n_components, const EmOptions& options = {});

}  // namespace fishbone
