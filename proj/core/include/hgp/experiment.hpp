#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hgp/config.hpp"
#include "hgp/dataset.hpp"
#include "hgp/pooling.hpp"
#include "hgp/report.hpp"

namespace hgp {

// Everything derived once per experiment and shared across cells.
struct ExperimentData {
    Dataset dataset;  // raw signals
    std::shared_ptr<TrafficTensor> normalized;
    NormalizationStats stats;
    std::size_t train_timestamps = 0;
    GradeCodebook codebook;
    std::shared_ptr<GradeMatrix> grades;
    std::map<std::string, RoadGraph> graphs;  // keyed by kind name
};

int signal_index(const std::string& name);  // flow|occupancy|speed

// Builds one adjacency; HistPatt/Attr see only the first train_timestamps
// hours so no evaluation-period information leaks into the graph.
RoadGraph build_graph(GraphKind kind, const Dataset& dataset, std::size_t train_timestamps,
                      const GraphParams& params);

// Load + SOM labeling + graph construction + normalization.
ExperimentData prepare_experiment(const ExperimentConfig& config);

ModelConfig make_model_config(const ExperimentConfig& config, ModelKind kind, std::size_t nodes);

// Argmax grade (1-based) per road for the window ending at t_end.
std::vector<int> predict_grades(const PoolModel& model, const TrafficTensor& tensor, std::size_t t_end,
                                std::size_t window, const RoadGraph& graph);

// Trains one (model, graph, horizon) cell and evaluates it on the test split.
// Throws on failure; run_experiment converts that into a recorded error.
EvalReport train_cell(const ExperimentConfig& config, const ExperimentData& data,
                      const std::string& model_name, const std::string& graph_name, int horizon,
                      std::unique_ptr<PoolModel>* trained = nullptr);

// The full grid: for each model x graph x horizon, train, evaluate, and
// optionally checkpoint to <checkpoint_dir>/<model>_<graph>_h<horizon>/.
// A failing cell records its error and the remaining cells proceed.
std::vector<EvalReport> run_experiment(const ExperimentConfig& config,
                                       const std::filesystem::path* checkpoint_dir = nullptr,
                                       const std::function<void(const std::string&)>& log = {});

// Re-evaluates a stored checkpoint against the config's dataset.
EvalReport evaluate_checkpoint(const ExperimentConfig& config, const ExperimentData& data,
                               const std::filesystem::path& checkpoint_dir);

}  // namespace hgp
