#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "hgp/graph.hpp"
#include "hgp/matrix.hpp"
#include "hgp/rng.hpp"

namespace testutil {

inline hgp::Matrix random_matrix(std::size_t rows, std::size_t cols, hgp::Rng& rng, double lo = -1.0,
                                 double hi = 1.0) {
    hgp::Matrix m(rows, cols);
    for (double& v : m.data()) v = rng.uniform(lo, hi);
    return m;
}

inline hgp::Matrix random_symmetric_adjacency(std::size_t n, hgp::Rng& rng, double edge_prob = 0.5) {
    hgp::Matrix w(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (rng.uniform() < edge_prob) {
                const double v = rng.uniform(0.05, 1.0);
                w(i, j) = v;
                w(j, i) = v;
            }
        }
    }
    return w;
}

// Spanning tree plus random extras: always connected.
inline hgp::RoadTopology random_topology(std::size_t n, hgp::Rng& rng) {
    hgp::RoadTopology topo;
    topo.roads = n;
    for (std::size_t v = 1; v < n; ++v) topo.edges.emplace_back(rng.uniform_int(v), v);
    const std::size_t extra = rng.uniform_int(n);
    for (std::size_t k = 0; k < extra; ++k) {
        const std::size_t a = rng.uniform_int(n);
        const std::size_t b = rng.uniform_int(n);
        if (a != b) topo.edges.emplace_back(a, b);
    }
    topo.length_m.resize(n);
    for (double& len : topo.length_m) len = rng.uniform(50.0, 500.0);
    return topo;
}

// Independent all-pairs hop oracle.
inline std::vector<std::vector<int>> floyd_warshall_hops(const hgp::RoadTopology& topo) {
    const std::size_t n = topo.roads;
    constexpr int inf = std::numeric_limits<int>::max() / 4;
    std::vector<std::vector<int>> d(n, std::vector<int>(n, inf));
    for (std::size_t i = 0; i < n; ++i) d[i][i] = 0;
    for (const auto& [a, b] : topo.edges) {
        d[a][b] = 1;
        d[b][a] = 1;
    }
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
    return d;
}

// Exhaustive DTW: tries every monotone alignment path. Exponential, fine for
// sequences of length <= 6.
inline double dtw_enumerate(const std::vector<double>& a, const std::vector<double>& b, std::size_t i = 0,
                            std::size_t j = 0) {
    const double cost = std::abs(a[i] - b[j]);
    if (i + 1 == a.size() && j + 1 == b.size()) return cost;
    double best = std::numeric_limits<double>::infinity();
    if (i + 1 < a.size()) best = std::min(best, dtw_enumerate(a, b, i + 1, j));
    if (j + 1 < b.size()) best = std::min(best, dtw_enumerate(a, b, i, j + 1));
    if (i + 1 < a.size() && j + 1 < b.size()) best = std::min(best, dtw_enumerate(a, b, i + 1, j + 1));
    return cost + best;
}

inline std::vector<std::size_t> random_permutation(std::size_t n, hgp::Rng& rng) {
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = i;
    rng.shuffle(p);
    return p;
}

}  // namespace testutil
