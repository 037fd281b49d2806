#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hgp/metrics.hpp"

namespace hgp {

// One (method, graph kind, horizon) evaluation cell.
struct EvalReport {
    std::string model;
    std::string graph;
    int horizon = 1;
    std::uint64_t seed = 0;
    double acc = 0.0;
    double kappa = 0.0;
    double train_acc = 0.0;
    std::size_t sample_count = 0;
    ConfusionMatrix confusion;
    std::string error;  // non-empty => the cell failed and metrics are absent
    bool numeric_failure = false;
};

// Writes metrics.json (method -> graph -> horizon -> {acc, kappa, ...}),
// heatmap.csv (rows = method/graph, cols = horizons, cells = "acc|kappa"),
// and confusion_<model>_<graph>_h<horizon>.csv per successful cell.
void emit_report(const std::vector<EvalReport>& reports, const std::filesystem::path& out_dir);

// Reads cells back from a metrics.json produced by emit_report (confusion
// matrices are not part of that file and stay empty).
std::vector<EvalReport> load_metrics_json(const std::filesystem::path& path);

// Heatmap aggregation alone, for merging several runs.
void emit_heatmap(const std::vector<EvalReport>& reports, const std::filesystem::path& csv_path);

}  // namespace hgp
