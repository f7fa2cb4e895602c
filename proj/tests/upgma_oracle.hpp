#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include "fishbone/clustering.hpp"

namespace fishbone::testing {

// Exhaustive average linkage: every step recomputes all cluster-pair means
// from the original matrix. Ties go to the pair with the smallest
// (min member, min member).
inline std::vector<Merge> brute_force_upgma(const DissimilarityMatrix& m, std::size_t k) {
    const std::size_t n = m.size();
    struct Cluster {
        std::vector<std::size_t> members;
        std::size_t node;
    };
    std::vector<Cluster> clusters;
    for (std::size_t i = 0; i < n; ++i) clusters.push_back({{i}, i});
    std::vector<Merge> merges;
    while (clusters.size() > k) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 0;
        std::pair<std::size_t, std::size_t> key{n, n};
        for (std::size_t i = 0; i < clusters.size(); ++i)
            for (std::size_t j = i + 1; j < clusters.size(); ++j) {
                double sum = 0.0;
                for (auto a : clusters[i].members)
                    for (auto b : clusters[j].members) sum += m(a, b);
                const double avg = sum / static_cast<double>(clusters[i].members.size() * clusters[j].members.size());
                const std::size_t lo = std::min(clusters[i].members.front(), clusters[j].members.front());
                const std::size_t hi = std::max(clusters[i].members.front(), clusters[j].members.front());
                if (avg < best || (avg == best && std::pair{lo, hi} < key)) {
                    best = avg;
                    bi = i;
                    bj = j;
                    key = {lo, hi};
                }
            }
        Cluster& a = clusters[bi];
        Cluster& b = clusters[bj];
        const bool a_first = a.members.front() < b.members.front();
        merges.push_back({a_first ? a.node : b.node, a_first ? b.node : a.node, best});
        a.members.insert(a.members.end(), b.members.begin(), b.members.end());
        std::sort(a.members.begin(), a.members.end());
        a.node = n + merges.size() - 1;
        clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
    }
    return merges;
}

}  // namespace fishbone::testing
