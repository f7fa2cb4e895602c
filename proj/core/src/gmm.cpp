#include "fishbone/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "fishbone/clustering.hpp"
#include "fishbone/errors.hpp"

namespace fishbone {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

/// Clips the eigenvalues of a component covariance at a data-scaled floor.
/// This is the constrained maximiser of the M-step objective, so EM stays
/// monotone while no component can collapse onto a line or a point.
SymMat2 floor_covariance(SymMat2 c, double scale) {
    const double eps = 1e-6 * std::max(scale, 1.0);
    const Eigen2 e = eigen_decompose(c);
    if (e.lambda_minor >= eps) return c;
    const double a = std::max(e.lambda_major, eps);
    const double b = eps;
    const Vec2 u = e.major;
    const Vec2 v = e.minor;
    return {a * u.x * u.x + b * v.x * v.x, a * u.x * u.y + b * v.x * v.y, a * u.y * u.y + b * v.y * v.y};
}

struct EStep {
    double log_likelihood = 0.0;
    std::vector<double> point_log_density;  // log p(x_i) under the mixture
};

/// Fills resp (n x k) with posteriors and returns the mixture log-likelihood.
EStep expectation(std::span<const Vec2> pts, const std::vector<GaussianComponent>& comps,
                  std::vector<std::vector<double>>& resp) {
    const std::size_t k = comps.size();
    EStep out;
    out.point_log_density.resize(pts.size());
    resp.assign(pts.size(), std::vector<double>(k, 0.0));
    std::vector<double> logs(k);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        double top = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
            logs[c] = comps[c].weight > 0.0 ? std::log(comps[c].weight) + log_gaussian(pts[i], comps[c].mean, comps[c].cov)
                                            : -std::numeric_limits<double>::infinity();
            top = std::max(top, logs[c]);
        }
        double sum = 0.0;
        for (std::size_t c = 0; c < k; ++c) sum += std::exp(logs[c] - top);
        const double lse = top + std::log(sum);
        for (std::size_t c = 0; c < k; ++c) resp[i][c] = std::exp(logs[c] - lse);
        out.point_log_density[i] = lse;
        out.log_likelihood += lse;
    }
    return out;
}

}  // namespace

double log_gaussian(Vec2 x, Vec2 mean, const SymMat2& cov) {
    const double det = cov.det();
    if (!(det > 0.0)) return -std::numeric_limits<double>::infinity();
    const Vec2 d = x - mean;
    const double q = dot(d, cov.inverse().apply(d));
    return -kLog2Pi - 0.5 * std::log(det) - 0.5 * q;
}

GmmFit em_fit(std::span<const Vec2> points, std::size_t n_components, const EmOptions& options) {
    const std::size_t n = points.size();
    const std::size_t k = n_components;
    if (k < 1) throw InvalidArgument("em_fit: need at least one component");
    if (n < k) throw InvalidArgument("em_fit: fewer points than components");
    if (!(options.tol > 0.0)) throw InvalidArgument("em_fit: tol must be positive");

    // Global spread sets the scale of ridges and jitter.
    Vec2 gmean{};
    for (Vec2 p : points) gmean = gmean + p;
    gmean = gmean * (1.0 / static_cast<double>(n));
    SymMat2 gcov{};
    for (Vec2 p : points) {
        const Vec2 d = p - gmean;
        gcov.xx += d.x * d.x;
        gcov.xy += d.x * d.y;
        gcov.yy += d.y * d.y;
    }
    gcov = {gcov.xx / n, gcov.xy / n, gcov.yy / n};
    const double scale = std::max(gcov.xx, gcov.yy);

    // Initial hard labels.
    std::vector<std::size_t> labels;
    if (options.initial_labels) {
        labels = *options.initial_labels;
        if (labels.size() != n) throw InvalidArgument("em_fit: initial_labels size mismatch");
        for (auto l : labels)
            if (l >= k) throw InvalidArgument("em_fit: initial label out of range");
    } else if (k == 1) {
        labels.assign(n, 0);
    } else {
        const auto cov = sample_covariance(points);
        labels = upgma(DissimilarityMatrix::mahalanobis(points, cov.sigma), k).labels;
    }

    GmmFit fit;
    fit.components.resize(k);
    std::vector<double> counts(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        fit.components[labels[i]].mean = fit.components[labels[i]].mean + points[i];
        counts[labels[i]] += 1.0;
    }
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> jitter(0.0, 1e-3 * std::sqrt(std::max(scale, 1e-12)));
    for (std::size_t c = 0; c < k; ++c) {
        auto& comp = fit.components[c];
        if (counts[c] > 0.0) {
            comp.mean = comp.mean * (1.0 / counts[c]);
            SymMat2 s{};
            for (std::size_t i = 0; i < n; ++i) {
                if (labels[i] != c) continue;
                const Vec2 d = points[i] - comp.mean;
                s.xx += d.x * d.x;
                s.xy += d.x * d.y;
                s.yy += d.y * d.y;
            }
            comp.cov = counts[c] >= 2.0 ? SymMat2{s.xx / counts[c], s.xy / counts[c], s.yy / counts[c]} : gcov;
        } else {
            comp.mean = points[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)];
            comp.cov = gcov;
        }
        comp.cov = floor_covariance(comp.cov, scale);
        comp.weight = std::max(counts[c], 1.0);
    }
    double wsum = 0.0;
    for (auto& c : fit.components) wsum += c.weight;
    for (auto& c : fit.components) c.weight /= wsum;
    // Separate components that start on top of each other.
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < a; ++b)
            if (fit.components[a].mean == fit.components[b].mean)
                fit.components[a].mean = fit.components[a].mean + Vec2{jitter(rng), jitter(rng)};

    std::vector<std::vector<double>> resp;
    EStep e = expectation(points, fit.components, resp);
    fit.log_likelihood_trace.push_back(e.log_likelihood);

    for (std::size_t it = 0; it < options.max_iter; ++it) {
        // M-step.
        for (std::size_t c = 0; c < k; ++c) {
            double nk = 0.0;
            Vec2 mu{};
            for (std::size_t i = 0; i < n; ++i) {
                nk += resp[i][c];
                mu = mu + points[i] * resp[i][c];
            }
            auto& comp = fit.components[c];
            if (nk < 1e-10 * static_cast<double>(n)) {
                const auto worst = static_cast<std::size_t>(
                    std::min_element(e.point_log_density.begin(), e.point_log_density.end()) - e.point_log_density.begin());
                comp.mean = points[worst];
                comp.cov = floor_covariance(gcov, scale);
                comp.weight = 1.0 / static_cast<double>(n);
                fit.warnings.push_back("iteration " + std::to_string(it + 1) + ": component " + std::to_string(c) +
                                       " emptied; re-seeded at point " + std::to_string(worst));
                continue;
            }
            mu = mu * (1.0 / nk);
            SymMat2 s{};
            for (std::size_t i = 0; i < n; ++i) {
                const Vec2 d = points[i] - mu;
                const double r = resp[i][c];
                s.xx += r * d.x * d.x;
                s.xy += r * d.x * d.y;
                s.yy += r * d.y * d.y;
            }
            comp.mean = mu;
            comp.cov = floor_covariance({s.xx / nk, s.xy / nk, s.yy / nk}, scale);
            comp.weight = nk / static_cast<double>(n);
        }
        wsum = 0.0;
        for (auto& c : fit.components) wsum += c.weight;
        for (auto& c : fit.components) c.weight /= wsum;

        const double previous = e.log_likelihood;
        e = expectation(points, fit.components, resp);
        fit.log_likelihood_trace.push_back(e.log_likelihood);
        fit.iterations = it + 1;
        if (std::abs(e.log_likelihood - previous) < options.tol) {
            fit.converged = true;
            break;
        }
    }
    fit.responsibilities = std::move(resp);
    return fit;
}

}  // namespace fishbone
