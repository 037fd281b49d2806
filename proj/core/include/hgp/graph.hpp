#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hgp/matrix.hpp"
#include "hgp/tensor.hpp"

namespace hgp {

// Undirected road network: each node is a road, lengths in meters.
struct RoadTopology {
    std::size_t roads = 0;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::vector<double> length_m;

    // Bounds, self-edges, positive lengths. Connectivity is enforced by the
    // builders (BFS), which name the offending pair.
    void validate() const;
    std::vector<std::vector<std::size_t>> adjacency_list() const;
};

enum class GraphKind { Topo, Geo, HistPatt, Attr };

std::string to_string(GraphKind kind);
GraphKind graph_kind_from_string(const std::string& name);

// Symmetric weighted adjacency with zero diagonal, entries in [0, 1].
struct RoadGraph {
    GraphKind kind = GraphKind::Topo;
    Matrix adjacency;
    double alpha = 0.0;        // HistPatt gain
    double beta = 0.0;         // Attr gain
    int window_hours = 0;      // HistPatt DTW window
};

// BFS shortest-path hop counts for all pairs. Throws InputError naming the
// first disconnected pair.
std::vector<std::vector<int>> hop_distances(const RoadTopology& topo);

// w(i,j) = 1 / hops(i,j), zero diagonal.
RoadGraph topo_graph(const RoadTopology& topo);

// w(i,j) = (len_i + len_j) / total length of the min-hop path covering both
// endpoints; hop ties resolved by minimal total length.
RoadGraph geo_graph(const RoadTopology& topo);

// Classic dynamic time warping with absolute-difference local cost, no
// warping window.
double dtw_distance(std::span<const double> a, std::span<const double> b);

// Mean over consecutive non-overlapping windows of exp(-alpha * DTW distance)
// between the per-road series of the chosen signal.
RoadGraph pattern_graph(const TrafficTensor& tensor, int signal, double alpha, int window_hours);

// Per-road attribute vector [max flow, max speed, length], min-max normalized
// across roads; w(i,j) = exp(-beta * euclidean distance).
RoadGraph attribute_graph(const TrafficTensor& tensor, const RoadTopology& topo, double beta);

// D^{-1/2} (W + I) D^{-1/2} with D the row sums of W + I.
Matrix normalize_adjacency(const Matrix& w);

}  // namespace hgp
