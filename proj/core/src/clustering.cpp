#include "fishbone/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "fishbone/errors.hpp"

namespace fishbone {

CovarianceEstimate sample_covariance(std::span<const Vec2> points) {
    if (points.size() < 2) throw InvalidArgument("covariance needs at least two points");
    Vec2 mean{};
    for (Vec2 p : points) mean = mean + p;
    mean = mean * (1.0 / static_cast<double>(points.size()));

    SymMat2 s{};
    for (Vec2 p : points) {
        const Vec2 d = p - mean;
        s.xx += d.x * d.x;
        s.xy += d.x * d.y;
        s.yy += d.y * d.y;
    }
    const double denom = static_cast<double>(points.size() - 1);
    s = {s.xx / denom, s.xy / denom, s.yy / denom};

    CovarianceEstimate out{s, false};
    const double largest = std::max(s.xx, s.yy);
    // Relative singularity test: collinear input gives det ~ rounding noise.
    if (s.det() <= 1e-12 * std::max(largest * largest, 1e-300)) {
        const double eps = 1e-6 * std::max(largest, 1.0);
        out.sigma = {s.xx + eps, s.xy, s.yy + eps};
        out.regularized = true;
    }
    return out;
}

CovarianceEstimate sample_covariance(const PlanarTopology& topology) {
    std::vector<Vec2> pts;
    pts.reserve(topology.size());
    for (const auto& d : topology.devices()) pts.push_back(d.pos);
    return sample_covariance(pts);
}

double mahalanobis(Vec2 a, Vec2 b, const SymMat2& sigma) {
    const double det = sigma.det();
    if (!(std::abs(det) > 0.0) || !std::isfinite(det)) throw DegenerateError("covariance matrix is not invertible");
    const Vec2 d = a - b;
    const double q = dot(d, sigma.inverse().apply(d));
    return std::sqrt(std::max(q, 0.0));
}

void DissimilarityMatrix::set(std::size_t i, std::size_t j, double v) {
    d_[i * n_ + j] = v;
    d_[j * n_ + i] = v;
}

DissimilarityMatrix DissimilarityMatrix::mahalanobis(std::span<const Vec2> points, const SymMat2& sigma) {
    const double det = sigma.det();
    if (!(std::abs(det) > 0.0)) throw DegenerateError("covariance matrix is not invertible");
    const SymMat2 inv = sigma.inverse();
    DissimilarityMatrix m(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            const Vec2 d = points[i] - points[j];
            m.set(i, j, std::sqrt(std::max(dot(d, inv.apply(d)), 0.0)));
        }
    }
    return m;
}

DissimilarityMatrix DissimilarityMatrix::euclidean(std::span<const Vec2> points) {
    DissimilarityMatrix m(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j) m.set(i, j, distance(points[i], points[j]));
    return m;
}

std::vector<std::vector<std::size_t>> ClusterAssignment::members() const {
    std::vector<std::vector<std::size_t>> out(k);
    for (std::size_t i = 0; i < labels.size(); ++i) out[labels[i]].push_back(i);
    return out;
}

ClusterAssignment upgma(const DissimilarityMatrix& matrix, std::size_t k) {
    const std::size_t n = matrix.size();
    if (k < 1 || k > n) throw InvalidArgument("upgma: need 1 <= K <= n (K=" + std::to_string(k) + ", n=" + std::to_string(n) + ")");

    // Working copy; slot a always holds the cluster whose smallest member is a.
    std::vector<double> d(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) d[i * n + j] = matrix(i, j);
    auto at = [&](std::size_t i, std::size_t j) -> double& { return d[i * n + j]; };

    std::vector<char> active(n, 1);
    std::vector<std::size_t> size(n, 1);
    std::vector<std::size_t> node(n);  // dendrogram node id held by each slot
    std::vector<std::size_t> parent(n);
    for (std::size_t i = 0; i < n; ++i) node[i] = parent[i] = i;

    constexpr auto kNone = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> nn(n, kNone);
    auto refresh = [&](std::size_t i) {
        std::size_t best = kNone;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i || !active[j]) continue;
            if (best == kNone || at(i, j) < at(i, best)) best = j;
        }
        nn[i] = best;
    };
    for (std::size_t i = 0; i < n; ++i) refresh(i);

    ClusterAssignment out;
    out.k = k;
    for (std::size_t step = 0; step + k < n; ++step) {
        // Global minimum over rows, lexicographic on (distance, low, high).
        std::size_t a = kNone, b = kNone;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            if (!active[i] || nn[i] == kNone) continue;
            const double v = at(i, nn[i]);
            const std::size_t lo = std::min(i, nn[i]);
            const std::size_t hi = std::max(i, nn[i]);
            if (v < best || (v == best && (lo < a || (lo == a && hi < b)))) {
                best = v;
                a = lo;
                b = hi;
            }
        }

        out.merges.push_back({node[a], node[b], best});
        const double wa = static_cast<double>(size[a]);
        const double wb = static_cast<double>(size[b]);
        active[b] = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (!active[j] || j == a) continue;
            const double v = (wa * at(a, j) + wb * at(b, j)) / (wa + wb);
            at(a, j) = v;
            at(j, a) = v;
        }
        size[a] += size[b];
        node[a] = n + step;
        parent[b] = a;

        for (std::size_t j = 0; j < n; ++j) {
            if (!active[j]) continue;
            if (j == a || nn[j] == a || nn[j] == b) {
                refresh(j);
            } else if (at(j, a) < at(j, nn[j]) || (at(j, a) == at(j, nn[j]) && a < nn[j])) {
                nn[j] = a;
            }
        }
    }

    // Resolve each point to its surviving slot; number clusters by slot order.
    auto root = [&](std::size_t i) {
        while (parent[i] != i) i = parent[i];
        return i;
    };
    std::vector<std::size_t> label_of_slot(n, kNone);
    std::size_t next = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (active[i]) label_of_slot[i] = next++;
    out.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.labels[i] = label_of_slot[root(i)];
    return out;
}

ClusterAssignment cluster_topology(const PlanarTopology& topology, std::size_t k) {
    std::vector<Vec2> pts;
    pts.reserve(topology.size());
    for (const auto& d : topology.devices()) pts.push_back(d.pos);
    if (pts.size() == 1) {
        if (k != 1) throw InvalidArgument("upgma: need 1 <= K <= n");
        ClusterAssignment single;
        single.k = 1;
        single.labels = {0};
        return single;
    }
    const auto cov = sample_covariance(pts);
    auto out = upgma(DissimilarityMatrix::mahalanobis(pts, cov.sigma), k);
    out.covariance_regularized = cov.regularized;
    return out;
}

std::string cluster_assignment_to_json(const ClusterAssignment& assignment, const PlanarTopology& topology) {
    nlohmann::ordered_json j;
    j["format"] = "fishbone.clusters";
    j["version"] = 1;
    j["K"] = assignment.k;
    j["covariance_regularized"] = assignment.covariance_regularized;
    auto& labels = j["labels"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < assignment.labels.size(); ++i)
        labels.push_back({{"id", topology.at(i).id}, {"cluster", assignment.labels[i]}});
    auto& merges = j["merges"] = nlohmann::ordered_json::array();
    for (const auto& m : assignment.merges) merges.push_back({m.left, m.right, m.height});
    return j.dump(1);
}

}  // namespace fishbone
