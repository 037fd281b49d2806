#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "hgp/errors.hpp"
#include "hgp/rng.hpp"
#include "hgp/som.hpp"

using namespace hgp;

namespace {

std::vector<Sample3> cloud(const Sample3& center, double spread, std::size_t count, Rng& rng) {
    std::vector<Sample3> out(count);
    for (auto& s : out)
        for (std::size_t d = 0; d < 3; ++d)
            s[d] = std::clamp(center[d] + rng.uniform(-spread, spread), 0.0, 1.0);
    return out;
}

// Exhaustive nearest-prototype scan, independent of som_assign.
std::size_t nearest_scan(const GradeCodebook& cb, const Sample3& x) {
    std::size_t best = 0;
    double best_d = 1e300;
    for (std::size_t c = 0; c < cb.prototypes.size(); ++c) {
        double d = 0;
        for (std::size_t k = 0; k < 3; ++k) {
            const double diff = cb.prototypes[c][k] - x[k];
            d += diff * diff;
        }
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

}  // namespace

TEST_CASE("som_train converges to a single attractor") {
    std::vector<Sample3> samples(200, Sample3{0.3, 0.6, 0.8});
    const GradeCodebook cb = som_train(samples, {.grid_rows = 2, .grid_cols = 2, .epochs = 30}, 5);
    for (const auto& p : cb.prototypes) {
        for (std::size_t d = 0; d < 3; ++d) {
            CHECK(p[d] == doctest::Approx(samples[0][d]).epsilon(0.05));
        }
    }
}

TEST_CASE("som_train separates two clouds on a 1x2 grid") {
    Rng rng(9, "clouds");
    auto a = cloud({0.1, 0.1, 0.1}, 0.05, 150, rng);
    const auto b = cloud({0.9, 0.9, 0.9}, 0.05, 150, rng);
    a.insert(a.end(), b.begin(), b.end());
    const GradeCodebook cb = som_train(a, {.grid_rows = 1, .grid_cols = 2, .epochs = 40}, 5);
    // one prototype per cloud, order free
    const auto in_hull = [](const Sample3& p, double lo, double hi) {
        return p[0] >= lo && p[0] <= hi && p[1] >= lo && p[1] <= hi && p[2] >= lo && p[2] <= hi;
    };
    const bool split_ab = in_hull(cb.prototypes[0], 0.0, 0.2) && in_hull(cb.prototypes[1], 0.8, 1.0);
    const bool split_ba = in_hull(cb.prototypes[1], 0.0, 0.2) && in_hull(cb.prototypes[0], 0.8, 1.0);
    CHECK((split_ab || split_ba));
}

TEST_CASE("som_train with zero epochs returns the seeded initialization") {
    const std::vector<Sample3> samples(10, Sample3{0.5, 0.5, 0.5});
    const GradeCodebook a = som_train(samples, {.grid_rows = 3, .grid_cols = 3, .epochs = 0}, 42);
    const GradeCodebook b = som_train(samples, {.grid_rows = 3, .grid_cols = 3, .epochs = 0}, 42);
    CHECK(a.prototypes == b.prototypes);
    // prototypes untouched by data: they differ from the sample
    bool any_far = false;
    for (const auto& p : a.prototypes) any_far = any_far || std::abs(p[0] - 0.5) > 0.1;
    CHECK(any_far);
}

TEST_CASE("som_train is deterministic per seed and errors on empty input") {
    Rng rng(10, "det");
    const auto samples = cloud({0.4, 0.5, 0.6}, 0.3, 100, rng);
    const SomConfig cfg{.grid_rows = 3, .grid_cols = 3, .epochs = 5};
    CHECK(som_train(samples, cfg, 7) == som_train(samples, cfg, 7));
    CHECK(som_train(samples, cfg, 7).prototypes != som_train(samples, cfg, 8).prototypes);
    CHECK_THROWS_AS(som_train({}, cfg, 1), GradingError);
}

TEST_CASE("som_assign matches the exhaustive scan and breaks ties low") {
    Rng rng(11, "assign");
    GradeCodebook cb = som_train(cloud({0.5, 0.5, 0.5}, 0.5, 200, rng),
                                 {.grid_rows = 3, .grid_cols = 3, .epochs = 10}, 3);
    for (int trial = 0; trial < 200; ++trial) {
        const Sample3 x{rng.uniform(), rng.uniform(), rng.uniform()};
        CHECK(som_assign(cb, x) == nearest_scan(cb, x));
    }

    GradeCodebook tie;
    tie.grid_rows = 1;
    tie.grid_cols = 2;
    tie.prototypes = {{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}};
    CHECK(som_assign(tie, {0.0, 0.0, 0.0}) == 0);
    CHECK(som_assign(tie, {0.5, 0.0, 0.0}) == 0);  // exact midpoint -> lower index
    CHECK(som_assign(tie, {0.9, 0.0, 0.0}) == 1);
}

TEST_CASE("order_grades ranks by mean speed and partitions mass") {
    // Five tight speed levels, 3x3 grid, Class 5.
    Rng rng(12, "grades");
    std::vector<Sample3> samples;
    for (int level = 0; level < 5; ++level) {
        const double speed = 0.1 + 0.2 * level;
        const auto c = cloud({0.5, 0.5, speed}, 0.02, 120, rng);
        samples.insert(samples.end(), c.begin(), c.end());
    }
    GradeCodebook cb = som_train(samples, {.grid_rows = 3, .grid_cols = 3, .epochs = 30}, 5);
    order_grades(cb, samples, 5);
    CHECK(cb.classes == 5);
    CHECK(cb.grade_map.size() == 9);

    // every grade non-empty over the sample assignments
    std::set<int> seen;
    std::vector<double> speed_sum(6, 0.0);
    std::vector<std::size_t> count(6, 0);
    for (const auto& s : samples) {
        const int g = cb.grade_map[som_assign(cb, s)];
        CHECK(g >= 1);
        CHECK(g <= 5);
        seen.insert(g);
        speed_sum[static_cast<std::size_t>(g)] += s[2];
        ++count[static_cast<std::size_t>(g)];
    }
    CHECK(seen.size() == 5);
    // monotone: grade 1 fastest
    for (int g = 1; g < 5; ++g) {
        CHECK(speed_sum[g] / double(count[g]) > speed_sum[g + 1] / double(count[g + 1]));
    }
}

TEST_CASE("order_grades degenerate and error cases") {
    Rng rng(13, "deg");
    const auto samples = cloud({0.5, 0.5, 0.5}, 0.4, 100, rng);
    GradeCodebook cb = som_train(samples, {.grid_rows = 2, .grid_cols = 2, .epochs = 10}, 2);
    order_grades(cb, samples, 1);
    for (int g : cb.grade_map) CHECK(g == 1);

    // a single tight cluster cannot fill 4 grades
    std::vector<Sample3> tight(100, Sample3{0.5, 0.5, 0.5});
    GradeCodebook cb2 = som_train(tight, {.grid_rows = 2, .grid_cols = 2, .epochs = 20}, 3);
    CHECK_THROWS_AS(order_grades(cb2, tight, 4), GradingError);
}

TEST_CASE("grade_dataset reuses training normalization and is deterministic") {
    TrafficTensor t(30, 4);
    Rng rng(14, "tensor");
    for (std::size_t k = 0; k < 30; ++k) {
        for (std::size_t r = 0; r < 4; ++r) {
            t.at(k, r, TrafficTensor::Flow) = rng.uniform(50, 500);
            t.at(k, r, TrafficTensor::Occupancy) = rng.uniform(0.0, 0.9);
            t.at(k, r, TrafficTensor::Speed) = rng.uniform(10, 110);
        }
    }
    const GradeCodebook cb = train_grade_codebook(t, {.grid_rows = 3, .grid_cols = 3, .epochs = 15}, 3, 99);
    const GradeMatrix g1 = grade_dataset(t, cb);
    const GradeMatrix g2 = grade_dataset(t, cb);
    CHECK(g1.values == g2.values);
    for (int g : g1.values) {
        CHECK(g >= 1);
        CHECK(g <= 3);
    }

    // the free-flow corner of feature space grades fastest
    TrafficTensor corner(1, 4);
    for (std::size_t r = 0; r < 4; ++r) {
        corner.at(0, r, TrafficTensor::Flow) = 0.0;
        corner.at(0, r, TrafficTensor::Occupancy) = 0.0;
        corner.at(0, r, TrafficTensor::Speed) = 110.0;
    }
    const GradeMatrix fast = grade_dataset(corner, cb);
    for (int g : fast.values) CHECK(g == 1);

    CHECK(train_grade_codebook(t, {.grid_rows = 3, .grid_cols = 3, .epochs = 15}, 3, 99) == cb);
}

TEST_CASE("grade codebook rejects grids smaller than the grade count") {
    TrafficTensor t(5, 2);
    CHECK_THROWS_AS(train_grade_codebook(t, {.grid_rows = 1, .grid_cols = 2, .epochs = 1}, 5, 1),
                    GradingError);
}
