#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "hgp/tensor.hpp"

namespace hgp {

using Sample3 = std::array<double, 3>;  // normalized [flow, occupancy, speed]

struct SomConfig {
    std::size_t grid_rows = 3;
    std::size_t grid_cols = 3;
    std::size_t epochs = 20;
};

// Trained SOM grid plus the cluster -> ordinal grade map. Grade 1 is freest
// flow, grade `classes` the most congested.
struct GradeCodebook {
    std::size_t grid_rows = 0;
    std::size_t grid_cols = 0;
    std::vector<Sample3> prototypes;  // row-major over the grid
    Sample3 feat_min{0, 0, 0};
    Sample3 feat_max{0, 0, 0};
    std::vector<int> grade_map;  // per cluster, in 1..classes; empty before order_grades
    int classes = 0;
    std::uint64_t seed = 0;
    std::size_t epochs = 0;
    double final_learning_rate = 0.0;

    std::size_t cells() const { return grid_rows * grid_cols; }
    Sample3 normalize(const Sample3& raw) const;
    bool operator==(const GradeCodebook&) const = default;
};

// Kohonen training: per-sample BMU by Euclidean distance, Gaussian
// neighborhood over grid coordinates, radius decaying linearly from
// max(rows, cols)/2 to 0.5 and learning rate from 0.5 to 0.01 across all
// updates. Sample order is reshuffled every epoch from the seed.
GradeCodebook som_train(const std::vector<Sample3>& samples, const SomConfig& cfg, std::uint64_t seed);

// Nearest prototype by Euclidean distance; ties take the lowest index.
std::size_t som_assign(const GradeCodebook& codebook, const Sample3& sample);

// Ranks clusters by mean sample speed (descending) and partitions the ranking
// into `classes` contiguous groups of near-equal sample mass. Empty clusters
// inherit the grade of the nearest non-empty prototype.
void order_grades(GradeCodebook& codebook, const std::vector<Sample3>& samples, int classes);

// Full labeling pipeline over a raw tensor: min-max normalize all (road, t)
// samples, train, order grades.
GradeCodebook train_grade_codebook(const TrafficTensor& raw, const SomConfig& cfg, int classes,
                                   std::uint64_t seed);

// n x T grades in 1..classes. Row = road, column = timestamp.
struct GradeMatrix {
    std::size_t roads = 0;
    std::size_t timestamps = 0;
    std::vector<int> values;  // road-major

    int at(std::size_t road, std::size_t t) const { return values[road * timestamps + t]; }
    int& at(std::size_t road, std::size_t t) { return values[road * timestamps + t]; }
};

GradeMatrix grade_dataset(const TrafficTensor& raw, const GradeCodebook& codebook);

}  // namespace hgp
