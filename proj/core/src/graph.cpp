#include "hgp/graph.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <queue>
#include <thread>

#include "hgp/errors.hpp"

namespace hgp {

void RoadTopology::validate() const {
    if (roads == 0) throw InputError("topology has no roads");
    if (length_m.size() != roads) {
        throw InputError("topology has " + std::to_string(roads) + " roads but " +
                         std::to_string(length_m.size()) + " lengths");
    }
    for (std::size_t i = 0; i < roads; ++i) {
        if (!(length_m[i] > 0.0)) {
            throw InputError("road " + std::to_string(i) + " has non-positive length");
        }
    }
    for (const auto& [a, b] : edges) {
        if (a >= roads || b >= roads) {
            throw InputError("edge (" + std::to_string(a) + "," + std::to_string(b) +
                             ") references a road index >= " + std::to_string(roads));
        }
        if (a == b) throw InputError("self-edge on road " + std::to_string(a));
    }
}

std::vector<std::vector<std::size_t>> RoadTopology::adjacency_list() const {
    std::vector<std::vector<std::size_t>> adj(roads);
    for (const auto& [a, b] : edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    for (auto& nbrs : adj) {
        std::sort(nbrs.begin(), nbrs.end());
        nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
    }
    return adj;
}

std::string to_string(GraphKind kind) {
    switch (kind) {
        case GraphKind::Topo: return "topo";
        case GraphKind::Geo: return "geo";
        case GraphKind::HistPatt: return "histpatt";
        case GraphKind::Attr: return "attr";
    }
    return "?";
}

GraphKind graph_kind_from_string(const std::string& name) {
    if (name == "topo") return GraphKind::Topo;
    if (name == "geo") return GraphKind::Geo;
    if (name == "histpatt") return GraphKind::HistPatt;
    if (name == "attr") return GraphKind::Attr;
    throw ConfigError("unknown graph kind: '" + name + "' (expected topo|geo|histpatt|attr)");
}

namespace {

std::vector<int> bfs_hops(const std::vector<std::vector<std::size_t>>& adj, std::size_t source) {
    std::vector<int> dist(adj.size(), -1);
    std::queue<std::size_t> q;
    dist[source] = 0;
    q.push(source);
    while (!q.empty()) {
        const std::size_t u = q.front();
        q.pop();
        for (std::size_t v : adj[u]) {
            if (dist[v] < 0) {
                dist[v] = dist[u] + 1;
                q.push(v);
            }
        }
    }
    return dist;
}

void require_reachable(const std::vector<int>& dist, std::size_t source) {
    for (std::size_t v = 0; v < dist.size(); ++v) {
        if (dist[v] < 0) {
            throw InputError("roads " + std::to_string(source) + " and " + std::to_string(v) +
                             " are not connected");
        }
    }
}

// Run fn(i) for i in [0, n) across hardware threads; writes must be disjoint.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), n);
    if (workers <= 1 || n < 16) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::future<void>> futs;
    std::atomic<std::size_t> next{0};
    for (std::size_t w = 0; w < workers; ++w) {
        futs.push_back(std::async(std::launch::async, [&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        }));
    }
    for (auto& f : futs) f.get();
}

}  // namespace

std::vector<std::vector<int>> hop_distances(const RoadTopology& topo) {
    topo.validate();
    const auto adj = topo.adjacency_list();
    std::vector<std::vector<int>> hops(topo.roads);
    for (std::size_t i = 0; i < topo.roads; ++i) {
        hops[i] = bfs_hops(adj, i);
        require_reachable(hops[i], i);
    }
    return hops;
}

RoadGraph topo_graph(const RoadTopology& topo) {
    const auto hops = hop_distances(topo);
    Matrix w(topo.roads, topo.roads);
    for (std::size_t i = 0; i < topo.roads; ++i) {
        for (std::size_t j = i + 1; j < topo.roads; ++j) {
            const double val = 1.0 / static_cast<double>(hops[i][j]);
            w(i, j) = val;
            w(j, i) = val;
        }
    }
    return RoadGraph{GraphKind::Topo, std::move(w)};
}

RoadGraph geo_graph(const RoadTopology& topo) {
    topo.validate();
    const auto adj = topo.adjacency_list();
    Matrix w(topo.roads, topo.roads);
    for (std::size_t i = 0; i < topo.roads; ++i) {
        const std::vector<int> dist = bfs_hops(adj, i);
        require_reachable(dist, i);
        // Among min-hop paths, take the one whose covered roads (endpoints
        // included) have minimal total length.
        std::vector<double> best(topo.roads, std::numeric_limits<double>::infinity());
        best[i] = topo.length_m[i];
        // Process nodes level by level so predecessors are final.
        std::vector<std::size_t> order(topo.roads);
        for (std::size_t v = 0; v < topo.roads; ++v) order[v] = v;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
        for (std::size_t v : order) {
            if (v == i) continue;
            for (std::size_t u : adj[v]) {
                if (dist[u] == dist[v] - 1) best[v] = std::min(best[v], best[u] + topo.length_m[v]);
            }
        }
        for (std::size_t j = i + 1; j < topo.roads; ++j) {
            w(i, j) = (topo.length_m[i] + topo.length_m[j]) / best[j];
        }
    }
    // Mirror the upper triangle: the path set is direction-symmetric.
    for (std::size_t i = 0; i < topo.roads; ++i)
        for (std::size_t j = i + 1; j < topo.roads; ++j) w(j, i) = w(i, j);
    return RoadGraph{GraphKind::Geo, std::move(w)};
}

double dtw_distance(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw InputError("dtw_distance on empty sequence");
    const std::size_t n = a.size(), m = b.size();
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> prev(m + 1, inf), cur(m + 1, inf);
    prev[0] = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = inf;
        for (std::size_t j = 1; j <= m; ++j) {
            const double cost = std::abs(a[i - 1] - b[j - 1]);
            cur[j] = cost + std::min({prev[j], cur[j - 1], prev[j - 1]});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

RoadGraph pattern_graph(const TrafficTensor& tensor, int signal, double alpha, int window_hours) {
    if (alpha < 0.0) throw ConfigError("pattern_graph: alpha must be >= 0");
    if (window_hours <= 0) throw ConfigError("pattern_graph: window must be positive");
    const std::size_t win = static_cast<std::size_t>(window_hours);
    if (tensor.timestamps() < win) {
        throw InputError("pattern_graph: window of " + std::to_string(win) + "h exceeds series length " +
                         std::to_string(tensor.timestamps()));
    }
    const std::size_t n = tensor.roads();
    const std::size_t windows = tensor.timestamps() / win;
    Matrix w(n, n);
    // Pairwise DTW dominates; row sums are disjoint so rows go wide.
    parallel_for(n, [&](std::size_t i) {
        for (std::size_t k = 0; k < windows; ++k) {
            const std::vector<double> si = tensor.series(i, static_cast<std::size_t>(signal), k * win, win);
            for (std::size_t j = i + 1; j < n; ++j) {
                const std::vector<double> sj = tensor.series(j, static_cast<std::size_t>(signal), k * win, win);
                w(i, j) += std::exp(-alpha * dtw_distance(si, sj));
            }
        }
    });
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            w(i, j) /= static_cast<double>(windows);
            w(j, i) = w(i, j);
        }
    }
    w.check_finite("pattern_graph");
    RoadGraph g{GraphKind::HistPatt, std::move(w)};
    g.alpha = alpha;
    g.window_hours = window_hours;
    return g;
}

RoadGraph attribute_graph(const TrafficTensor& tensor, const RoadTopology& topo, double beta) {
    if (beta < 0.0) throw ConfigError("attribute_graph: beta must be >= 0");
    topo.validate();
    const std::size_t n = tensor.roads();
    if (n != topo.roads) {
        throw InputError("attribute_graph: tensor has " + std::to_string(n) + " roads, topology " +
                         std::to_string(topo.roads));
    }
    // [max flow, max speed, length] per road, then min-max over roads per dim.
    std::vector<std::array<double, 3>> attr(n);
    for (std::size_t r = 0; r < n; ++r) {
        double max_flow = 0.0, max_speed = 0.0;
        for (std::size_t t = 0; t < tensor.timestamps(); ++t) {
            max_flow = std::max(max_flow, tensor.at(t, r, TrafficTensor::Flow));
            max_speed = std::max(max_speed, tensor.at(t, r, TrafficTensor::Speed));
        }
        attr[r] = {max_flow, max_speed, topo.length_m[r]};
    }
    for (std::size_t d = 0; d < 3; ++d) {
        double lo = attr[0][d], hi = attr[0][d];
        for (std::size_t r = 1; r < n; ++r) {
            lo = std::min(lo, attr[r][d]);
            hi = std::max(hi, attr[r][d]);
        }
        for (std::size_t r = 0; r < n; ++r) {
            attr[r][d] = hi > lo ? (attr[r][d] - lo) / (hi - lo) : 0.0;
        }
    }
    Matrix w(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double sq = 0.0;
            for (std::size_t d = 0; d < 3; ++d) {
                const double diff = attr[i][d] - attr[j][d];
                sq += diff * diff;
            }
            w(i, j) = std::exp(-beta * std::sqrt(sq));
            w(j, i) = w(i, j);
        }
    }
    RoadGraph g{GraphKind::Attr, std::move(w)};
    g.beta = beta;
    return g;
}

Matrix normalize_adjacency(const Matrix& w) {
    if (w.rows() != w.cols()) {
        throw DimensionError("normalize_adjacency: matrix is " + w.shape_str() + ", not square");
    }
    const std::size_t n = w.rows();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (w(i, j) < 0.0) throw InputError("normalize_adjacency: negative weight at (" +
                                                std::to_string(i) + "," + std::to_string(j) + ")");
        }
    }
    std::vector<double> dinv_sqrt(n);
    for (std::size_t i = 0; i < n; ++i) {
        double deg = 1.0;  // self-loop
        for (std::size_t j = 0; j < n; ++j) deg += w(i, j);
        dinv_sqrt[i] = 1.0 / std::sqrt(deg);
    }
    Matrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double with_loop = w(i, j) + (i == j ? 1.0 : 0.0);
            out(i, j) = dinv_sqrt[i] * with_loop * dinv_sqrt[j];
        }
    }
    return out;
}

}  // namespace hgp
