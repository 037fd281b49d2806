#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hgp/dataset.hpp"
#include "hgp/som.hpp"

namespace hgp {

// Defaults follow the DiffPool/SAGPool hyperparameter tables at full PeMS03
// scale; desk-scale runs override the widths.
struct GraphParams {
    double alpha = 0.1;             // HistPatt DTW attenuation
    double beta = 1.0;              // Attr attenuation
    std::string dtw_signal = "flow";
    int dtw_window = 24;            // hours per DTW comparison window
};

struct TrainingSettings {
    double learning_rate = 5e-4;
    double weight_decay = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::size_t batch_size = 24;
    std::size_t epochs = 500;
    bool early_stopping = true;  // patience on validation accuracy; false = fixed epochs
    std::size_t patience = 50;
};

struct DiffPoolSettings {
    std::size_t layers = 1;
    std::size_t node_embedding = 64;
    std::size_t hidden = 64;
    std::size_t mlp_hidden = 320;
    std::size_t blocks = 1;
    double pool_ratio = 0.5;
};

struct SagPoolSettings {
    std::size_t layers = 1;
    std::size_t hidden = 1790;
    std::size_t mlp_hidden = 1790;
    std::size_t blocks = 3;
    double keep_ratio = 0.5;
};

struct BaselineSettings {
    std::size_t layers = 3;
    std::size_t hidden = 64;
    std::size_t head_hidden = 1790;
};

struct ExperimentConfig {
    std::string signals_csv;
    std::string topology_csv;
    std::string lengths_csv;

    std::uint64_t seed = 1;
    int classes = 5;
    std::size_t window = 24;
    std::vector<int> horizons = {1};
    std::vector<std::string> graphs = {"topo", "geo", "histpatt", "attr"};
    std::vector<std::string> models = {"diffpool", "sagpool"};

    SplitFractions split;
    GraphParams graph_params;
    SomConfig som;
    TrainingSettings training;
    DiffPoolSettings diffpool;
    SagPoolSettings sagpool;
    BaselineSettings baseline;

    void validate() const;  // throws ConfigError
};

// Strict JSON parse: unknown keys anywhere are a ConfigError.
ExperimentConfig parse_config(const std::string& json_text);

// Loads the file, applies dotted-key overrides ("training.epochs=20",
// values parsed as JSON literals with plain-string fallback), then parses.
ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides = {});

std::string config_to_json(const ExperimentConfig& config);

}  // namespace hgp
