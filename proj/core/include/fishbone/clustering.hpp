#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fishbone/geometry.hpp"
#include "fishbone/topology.hpp"

namespace fishbone {

struct CovarianceEstimate {
    SymMat2 sigma;
    bool regularized = false;  // a ridge was added because sigma was singular
};

/// Unbiased sample covariance; singular results get a ridge of
/// 1e-6 * max(largest variance, 1) on the diagonal.
CovarianceEstimate sample_covariance(std::span<const Vec2> points);
CovarianceEstimate sample_covariance(const PlanarTopology& topology);

/// sqrt((a - b) sigma^-1 (a - b)^T). Throws DegenerateError for a singular sigma.
double mahalanobis(Vec2 a, Vec2 b, const SymMat2& sigma);

/// Dense symmetric dissimilarity matrix with zero diagonal.
class DissimilarityMatrix {
public:
    explicit DissimilarityMatrix(std::size_t n) : n_(n), d_(n * n, 0.0) {}

    static DissimilarityMatrix mahalanobis(std::span<const Vec2> points, const SymMat2& sigma);
    static DissimilarityMatrix euclidean(std::span<const Vec2> points);

    std::size_t size() const { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }
    /// Sets both (i, j) and (j, i).
    void set(std::size_t i, std::size_t j, double v);

private:
    std::size_t n_;
    std::vector<double> d_;
};

/// One agglomeration step. Leaves are 0..n-1; the cluster formed at step s is
/// node n + s.
struct Merge {
    std::size_t left = 0;
    std::size_t right = 0;
    double height = 0.0;
    bool operator==(const Merge&) const = default;
};

struct ClusterAssignment {
    std::size_t k = 0;
    /// labels[i] is the cluster of point/device slot i. Clusters are numbered
    /// by their smallest member slot.
    std::vector<std::size_t> labels;
    std::vector<Merge> merges;
    bool covariance_regularized = false;

    std::vector<std::vector<std::size_t>> members() const;
};

/// Average-linkage agglomeration stopped once `k` clusters remain. Ties are
/// broken by the smallest (i, j) pair, where a cluster is identified by its
/// smallest member index.
ClusterAssignment upgma(const DissimilarityMatrix& matrix, std::size_t k);

/// Covariance -> Mahalanobis matrix -> UPGMA over all devices of a topology.
ClusterAssignment cluster_topology(const PlanarTopology& topology, std::size_t k);

std::string cluster_assignment_to_json(const ClusterAssignment& assignment, const PlanarTopology& topology);

}  // namespace fishbone
