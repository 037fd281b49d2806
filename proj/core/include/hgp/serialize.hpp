#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hgp/graph.hpp"
#include "hgp/matrix.hpp"
#include "hgp/param_store.hpp"
#include "hgp/pooling.hpp"
#include "hgp/som.hpp"

namespace hgp {

// Parameter blob: per parameter, name length (u32), name bytes, rows (u32),
// cols (u32), then rows*cols little-endian 64-bit floats. Map order of the
// store, so the layout is deterministic.
void save_params(const ParamStore& store, const std::filesystem::path& path);
void load_params(ParamStore& store, const std::filesystem::path& path);  // shapes must match

// Codebook JSON: grid, prototypes, feature min/max, grade_map, seed, epochs.
void save_codebook(const GradeCodebook& codebook, const std::filesystem::path& path);
GradeCodebook load_codebook(const std::filesystem::path& path);

// Adjacency as n rows of n comma-separated reals, plus a JSON sidecar
// {kind, alpha|beta, window} at <path>.json.
void save_road_graph(const RoadGraph& graph, const std::filesystem::path& csv_path);
RoadGraph load_road_graph(const std::filesystem::path& csv_path);

void write_grades_csv(const GradeMatrix& grades, const std::vector<std::string>& road_ids,
                      std::int64_t start_hour, const std::filesystem::path& path);

// Checkpoint = manifest.json (model config, seed, graph kind, horizon) plus
// params.bin in the directory.
void save_checkpoint(const PoolModel& model, const std::string& graph, int horizon,
                     const std::filesystem::path& dir);

struct Checkpoint {
    ModelConfig config;
    std::uint64_t seed = 0;
    std::string graph;
    int horizon = 1;
};

Checkpoint read_manifest(const std::filesystem::path& dir);
PoolModel load_checkpoint(const std::filesystem::path& dir, Checkpoint* meta = nullptr);

}  // namespace hgp
