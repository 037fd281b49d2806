#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "hgp/errors.hpp"
#include "hgp/graph.hpp"
#include "support/test_utils.hpp"

using namespace hgp;

namespace {

RoadTopology path3() {  // a - b - c with unit-ish lengths
    RoadTopology topo;
    topo.roads = 3;
    topo.edges = {{0, 1}, {1, 2}};
    topo.length_m = {100, 50, 100};
    return topo;
}

bool symmetric_zero_diag_unit(const Matrix& w) {
    for (std::size_t i = 0; i < w.rows(); ++i) {
        if (w(i, i) != 0.0) return false;
        for (std::size_t j = 0; j < w.cols(); ++j) {
            if (w(i, j) != w(j, i)) return false;
            if (w(i, j) < 0.0 || w(i, j) > 1.0) return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("hop_distances on paths, rings and disconnected input") {
    const auto hops = hop_distances(path3());
    CHECK(hops[0][1] == 1);
    CHECK(hops[0][2] == 2);
    CHECK(hops[1][1] == 0);

    RoadTopology ring;
    ring.roads = 5;
    ring.edges = {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}};
    ring.length_m.assign(5, 100.0);
    const auto ring_hops = hop_distances(ring);
    const auto oracle = testutil::floyd_warshall_hops(ring);
    int max_hop = 0;
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j) {
            CHECK(ring_hops[i][j] == oracle[i][j]);
            max_hop = std::max(max_hop, ring_hops[i][j]);
        }
    CHECK(max_hop == 2);

    RoadTopology disconnected;
    disconnected.roads = 4;
    disconnected.edges = {{0, 1}, {2, 3}};
    disconnected.length_m.assign(4, 100.0);
    CHECK_THROWS_WITH_AS(hop_distances(disconnected), "roads 0 and 2 are not connected", InputError);
}

TEST_CASE("topo_graph weights are reciprocal hops") {
    const RoadGraph g = topo_graph(path3());
    CHECK(g.kind == GraphKind::Topo);
    CHECK(g.adjacency(0, 1) == 1.0);
    CHECK(g.adjacency(0, 2) == 0.5);
    for (std::size_t i = 0; i < 3; ++i) CHECK(g.adjacency(i, i) == 0.0);
}

TEST_CASE("geo_graph covers endpoint lengths") {
    const RoadGraph g = geo_graph(path3());
    // adjacent roads: path covers only the endpoints
    CHECK(g.adjacency(0, 1) == doctest::Approx((100.0 + 50.0) / 150.0));
    // i-k-j with lengths 100,50,100
    CHECK(g.adjacency(0, 2) == doctest::Approx((100.0 + 100.0) / 250.0));
    CHECK(g.adjacency(0, 2) == doctest::Approx(0.8));
}

TEST_CASE("geo_graph picks the shortest-hop path with minimal total length") {
    // Two 2-hop routes from 0 to 3: via 1 (total 100+400+100) or via 2
    // (total 100+50+100). The lighter route wins.
    RoadTopology topo;
    topo.roads = 4;
    topo.edges = {{0, 1}, {1, 3}, {0, 2}, {2, 3}};
    topo.length_m = {100, 400, 50, 100};
    const RoadGraph g = geo_graph(topo);
    CHECK(g.adjacency(0, 3) == doctest::Approx(200.0 / 250.0));
}

TEST_CASE("dtw_distance basics and the exhaustive oracle") {
    const std::vector<double> x{1, 5, 2, 8};
    CHECK(dtw_distance(x, x) == 0.0);
    CHECK(dtw_distance(std::vector<double>{0.0}, std::vector<double>{5.0}) == 5.0);
    CHECK(dtw_distance(std::vector<double>{1, 2, 3}, std::vector<double>{1, 3}) == 1.0);
    CHECK_THROWS_AS(dtw_distance(std::vector<double>{}, x), InputError);

    Rng rng(23, "dtw");
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> a(1 + rng.uniform_int(6)), b(1 + rng.uniform_int(6));
        for (double& v : a) v = static_cast<double>(rng.uniform_int(21));
        for (double& v : b) v = static_cast<double>(rng.uniform_int(21));
        CHECK(dtw_distance(a, b) == testutil::dtw_enumerate(a, b));
        CHECK(dtw_distance(a, b) == dtw_distance(b, a));
    }
}

TEST_CASE("pattern_graph window transform and mean") {
    // Two roads, two 2h windows. Flow differs by 1 in the first window and
    // by 3 once in the second.
    TrafficTensor t(4, 2);
    const double road1_flow[4] = {1, 0, 3, 0};
    for (std::size_t k = 0; k < 4; ++k) t.at(k, 1, TrafficTensor::Flow) = road1_flow[k];
    const RoadGraph g = pattern_graph(t, TrafficTensor::Flow, 0.1, 2);
    const double expected = (std::exp(-0.1 * 1.0) + std::exp(-0.1 * 3.0)) / 2.0;
    CHECK(g.adjacency(0, 1) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(g.adjacency(0, 1) == doctest::Approx(0.8228).epsilon(1e-4));
    CHECK(g.adjacency(0, 0) == 0.0);

    // identical series => weight 1 regardless of alpha
    TrafficTensor same(6, 2);
    for (std::size_t k = 0; k < 6; ++k)
        for (std::size_t r = 0; r < 2; ++r) same.at(k, r, TrafficTensor::Flow) = std::sin(double(k));
    CHECK(pattern_graph(same, TrafficTensor::Flow, 0.7, 3).adjacency(0, 1) == doctest::Approx(1.0));

    // alpha = 0 collapses the exponent
    CHECK(pattern_graph(t, TrafficTensor::Flow, 0.0, 2).adjacency(0, 1) == 1.0);

    CHECK_THROWS_AS(pattern_graph(t, TrafficTensor::Flow, 0.1, 5), InputError);
}

TEST_CASE("attribute_graph normalization and distance transform") {
    // Road 1 dominates road 0 in every dimension, so the normalized vectors
    // are [0,0,0] and [1,1,1].
    TrafficTensor t(3, 2);
    for (std::size_t k = 0; k < 3; ++k) {
        t.at(k, 0, TrafficTensor::Flow) = 10;
        t.at(k, 0, TrafficTensor::Speed) = 40;
        t.at(k, 1, TrafficTensor::Flow) = 20 + static_cast<double>(k);
        t.at(k, 1, TrafficTensor::Speed) = 80;
    }
    RoadTopology topo;
    topo.roads = 2;
    topo.edges = {{0, 1}};
    topo.length_m = {100, 300};
    const RoadGraph g = attribute_graph(t, topo, 1.0);
    CHECK(g.adjacency(0, 1) == doctest::Approx(std::exp(-std::sqrt(3.0))).epsilon(1e-12));
    CHECK(g.adjacency(0, 1) == doctest::Approx(0.1769).epsilon(1e-3));

    // identical attributes => weight 1
    RoadTopology topo_same = topo;
    topo_same.length_m = {100, 100};
    TrafficTensor same(3, 2);
    for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t r = 0; r < 2; ++r) {
            same.at(k, r, TrafficTensor::Flow) = 10;
            same.at(k, r, TrafficTensor::Speed) = 50;
        }
    CHECK(attribute_graph(same, topo_same, 2.0).adjacency(0, 1) == doctest::Approx(1.0));

    // beta = 0 collapses the exponent
    CHECK(attribute_graph(t, topo, 0.0).adjacency(0, 1) == 1.0);
}

TEST_CASE("normalize_adjacency examples") {
    CHECK(normalize_adjacency(Matrix{{0}}) == Matrix{{1}});

    const Matrix two = normalize_adjacency(Matrix{{0, 1}, {1, 0}});
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) CHECK(two(i, j) == doctest::Approx(0.5));

    CHECK_THROWS_AS(normalize_adjacency(Matrix(2, 3)), DimensionError);
    CHECK_THROWS_AS(normalize_adjacency(Matrix{{0, -1}, {-1, 0}}), InputError);
}

TEST_CASE("normalize_adjacency is permutation-equivariant") {
    Rng rng(31, "normperm");
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + rng.uniform_int(8);
        const Matrix w = testutil::random_symmetric_adjacency(n, rng);
        const auto perm = testutil::random_permutation(n, rng);
        Matrix pw(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) pw(i, j) = w(perm[i], perm[j]);
        const Matrix norm = normalize_adjacency(w);
        const Matrix norm_pw = normalize_adjacency(pw);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                CHECK(norm_pw(i, j) == doctest::Approx(norm(perm[i], perm[j])).epsilon(1e-12));
    }
}

TEST_CASE("all four builders produce symmetric zero-diagonal [0,1] matrices") {
    Rng rng(37, "builders");
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 2 + rng.uniform_int(10);
        const RoadTopology topo = testutil::random_topology(n, rng);
        const std::size_t T = 8;
        TrafficTensor tensor(T, n);
        for (std::size_t t = 0; t < T; ++t)
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t s = 0; s < 3; ++s) tensor.at(t, r, s) = rng.uniform(0.0, 100.0);

        CHECK(symmetric_zero_diag_unit(topo_graph(topo).adjacency));
        CHECK(symmetric_zero_diag_unit(geo_graph(topo).adjacency));
        CHECK(symmetric_zero_diag_unit(pattern_graph(tensor, TrafficTensor::Flow, 0.3, 4).adjacency));
        CHECK(symmetric_zero_diag_unit(attribute_graph(tensor, topo, 0.8).adjacency));
    }
}

TEST_CASE("topo and geo graphs ignore edge-list ordering") {
    Rng rng(41, "edgeorder");
    RoadTopology topo = testutil::random_topology(9, rng);
    RoadTopology shuffled = topo;
    rng.shuffle(shuffled.edges);
    CHECK(topo_graph(topo).adjacency == topo_graph(shuffled).adjacency);
    CHECK(geo_graph(topo).adjacency == geo_graph(shuffled).adjacency);
}

TEST_CASE("pattern and attribute weights are non-increasing in their gains") {
    Rng rng(43, "gains");
    const std::size_t n = 5, T = 8;
    const RoadTopology topo = testutil::random_topology(n, rng);
    TrafficTensor tensor(T, n);
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t s = 0; s < 3; ++s) tensor.at(t, r, s) = rng.uniform(0.0, 50.0);

    const Matrix p1 = pattern_graph(tensor, TrafficTensor::Flow, 0.1, 4).adjacency;
    const Matrix p2 = pattern_graph(tensor, TrafficTensor::Flow, 0.5, 4).adjacency;
    const Matrix a1 = attribute_graph(tensor, topo, 0.5).adjacency;
    const Matrix a2 = attribute_graph(tensor, topo, 2.0).adjacency;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            CHECK(p2(i, j) <= p1(i, j) + 1e-15);
            CHECK(a2(i, j) <= a1(i, j) + 1e-15);
        }
    }
}
