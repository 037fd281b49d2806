#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "hgp/graph.hpp"
#include "hgp/som.hpp"
#include "hgp/tensor.hpp"

namespace hgp {

struct Dataset {
    TrafficTensor tensor;
    RoadTopology topology;
    std::vector<std::string> road_ids;  // index -> id, first-appearance order of the lengths file
    std::int64_t start_hour = 0;        // hours since 1970-01-01T00:00:00
};

// signals CSV: timestamp,sensor_id,flow,occupancy,speed (ISO-8601 hourly);
// topology CSV: road_a,road_b (0-based indices); lengths CSV: road_id,length_m.
// Gaps of at most 3 hours are linearly interpolated; anything longer, duplicate
// (timestamp, sensor) rows, unknown sensors and negative values are errors.
Dataset load_dataset(const std::filesystem::path& signals_csv, const std::filesystem::path& topology_csv,
                     const std::filesystem::path& lengths_csv);

struct NormalizationStats {
    std::array<double, 3> min{0, 0, 0};
    std::array<double, 3> max{0, 0, 0};
};

// Min-max per signal with statistics from the first `train_timestamps` hours
// only; values outside the training range (val/test) are clipped to [0, 1].
// A constant signal maps to 0.
std::pair<TrafficTensor, NormalizationStats> minmax_normalize(const TrafficTensor& tensor,
                                                              std::size_t train_timestamps);

enum class Split { Train, Val, Test, Excluded };

struct SplitFractions {
    double train = 0.7;
    double val = 0.1;
    double test = 0.2;
};

// One windowed sample: inputs cover hours [t_end-window+1, t_end], the label
// is the grade at t_end + horizon (all 0-based).
struct SampleSet {
    std::shared_ptr<const TrafficTensor> tensor;  // normalized features
    std::shared_ptr<const GradeMatrix> grades;
    std::size_t window = 24;
    int horizon = 1;

    struct Item {
        std::size_t t_end;
        Split split;
    };
    std::vector<Item> items;

    std::vector<std::size_t> indices_of(Split split) const;
    std::vector<int> labels(std::size_t item_index) const;  // grades 1..Class per road
};

// One sample per t_end in [window-1, T-1-horizon]; total count is
// T - window - horizon + 1. Chronological split: a sample belongs to a split
// only when its full span [t_end-window+1, t_end+horizon] lies inside that
// split's timestamp range; boundary-straddling samples are Excluded.
SampleSet make_samples(std::shared_ptr<const TrafficTensor> tensor,
                       std::shared_ptr<const GradeMatrix> grades, std::size_t window, int horizon,
                       const SplitFractions& fractions);

// Random connected topology (spanning tree plus extra edges) with per-road
// daily sinusoidal flow/speed profiles, road-specific phase and amplitude,
// seeded noise, and occupancy derived monotonically from flow and speed.
Dataset synth_dataset(std::size_t roads, std::size_t days, std::uint64_t seed);

// Writes a dataset in the load_dataset CSV schema.
void write_dataset_csv(const Dataset& dataset, const std::filesystem::path& signals_csv,
                       const std::filesystem::path& topology_csv, const std::filesystem::path& lengths_csv);

// ISO-8601 "YYYY-MM-DDTHH:00:00" <-> hours since the epoch.
std::int64_t parse_hour_timestamp(const std::string& iso);
std::string format_hour_timestamp(std::int64_t hours_since_epoch);

}  // namespace hgp
