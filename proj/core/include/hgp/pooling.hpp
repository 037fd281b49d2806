#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "hgp/autodiff.hpp"
#include "hgp/graph.hpp"
#include "hgp/layers.hpp"
#include "hgp/matrix.hpp"
#include "hgp/param_store.hpp"
#include "hgp/tensor.hpp"

namespace hgp {

enum class ModelKind { DiffPool, SagPool, GcnBaseline, SageBaseline };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

struct ModelConfig {
    ModelKind kind = ModelKind::DiffPool;
    std::size_t nodes = 0;
    std::size_t input_dim = 0;
    std::size_t classes = 5;
    std::size_t layers = 1;          // L: layers per SAGE/GCN stack (baselines: 3)
    std::size_t node_embedding = 64; // width of the initial embedding stack (DiffPool)
    std::size_t hidden = 64;         // stack width
    std::size_t mlp_hidden = 320;    // head hidden width
    std::size_t blocks = 1;          // N pooling blocks
    double pool_ratio = 0.5;         // cluster ratio (DiffPool) / keep ratio (SAGPool)
    std::size_t head_hidden_layers = 2;  // 2 => 3 linear layers; baselines use 1
};

// Node clustering: S = row_softmax(assign_SAGE(W, X)), Z = embed_SAGE(W, X),
// coarse features = S^T Z, coarse adjacency = S^T W S. The assign and embed
// stacks have independent parameters.
class DiffPoolBlock {
  public:
    DiffPoolBlock() = default;
    DiffPoolBlock(ParamStore& store, const std::string& prefix, std::size_t in, std::size_t hidden,
                  std::size_t clusters, std::size_t layers, Rng& rng);

    struct Result {
        ad::Var coarse_adj;   // clusters x clusters, dense and differentiable
        ad::Var coarse_feat;  // clusters x hidden
        ad::Var assignment;   // n x clusters, row-stochastic
    };
    Result forward(const ad::Var& adj, const ad::Var& x) const;
    std::size_t clusters() const { return clusters_; }

  private:
    std::vector<SageLayer> embed_;
    std::vector<SageLayer> assign_;
    std::size_t clusters_ = 0;
};

// Indices of the ceil(ratio * n) highest scores, ties to the lower index,
// returned in descending-score order.
std::vector<std::size_t> topk_select(const Matrix& scores, double ratio);

// Node drop: H = GCN stack, scalar tanh-GCN attention scores, top-k retention,
// retained features scaled row-wise by their scores, adjacency sliced to the
// retained indices. Gradient flows through the score scaling only; the index
// choice itself is discrete.
class SagPoolBlock {
  public:
    SagPoolBlock() = default;
    SagPoolBlock(ParamStore& store, const std::string& prefix, std::size_t in, std::size_t hidden,
                 double keep_ratio, std::size_t layers, Rng& rng);

    struct Result {
        Matrix coarse_adj;              // kept x kept slice of the input adjacency
        ad::Var coarse_feat;            // kept x hidden, score-scaled
        std::vector<std::size_t> kept;  // descending-score order
        ad::Var kept_scores;            // kept x 1
    };
    Result forward(const Matrix& adj, const ad::Var& x) const;

  private:
    std::vector<GcnLayer> gcn_;
    GcnLayer scorer_;
    double keep_ratio_ = 0.5;
};

// Optional forward diagnostics for tests and shape checks.
struct ForwardTrace {
    std::vector<ad::Var> assignments;               // DiffPool S per block
    std::vector<std::vector<std::size_t>> kept;     // SAGPool indices per block
    std::vector<std::size_t> node_counts;           // nodes after each block
};

class PoolModel {
  public:
    PoolModel(const ModelConfig& config, std::uint64_t seed);

    const ModelConfig& config() const { return config_; }
    std::uint64_t seed() const { return seed_; }
    ParamStore& params() { return *store_; }
    const ParamStore& params() const { return *store_; }

    // features: nodes x input_dim, adjacency: raw symmetric weights.
    ad::Var forward(const Matrix& features, const Matrix& adjacency, ForwardTrace* trace = nullptr) const;

  private:
    ad::Var forward_diffpool(const Matrix& features, const Matrix& adjacency, ForwardTrace* trace) const;
    ad::Var forward_sagpool(const Matrix& features, const Matrix& adjacency, ForwardTrace* trace) const;
    ad::Var forward_baseline(const Matrix& features, const Matrix& adjacency) const;

    ModelConfig config_;
    std::uint64_t seed_ = 0;
    // Heap store keeps parameter addresses stable across moves; layers hold
    // a pointer to it.
    mutable std::unique_ptr<ParamStore> store_;

    std::vector<SageLayer> initial_embed_;
    std::vector<DiffPoolBlock> diff_blocks_;
    std::vector<std::vector<SageLayer>> extract_stacks_;
    std::vector<SagPoolBlock> sag_blocks_;
    std::vector<GcnLayer> gcn_baseline_;
    std::vector<SageLayer> sage_baseline_;
    MlpHead head_;
};

PoolModel assemble_model(const ModelConfig& config, std::uint64_t seed);

// Per-node feature matrix for the window ending at t_end (inclusive):
// nodes x (window * 3), oldest hour first, signals flow/occupancy/speed.
Matrix flatten_window(const TrafficTensor& tensor, std::size_t t_end, std::size_t window);

// Eq-style entry point: window -> features -> assembled forward.
ad::Var model_forward(const PoolModel& model, const TrafficTensor& tensor, std::size_t t_end,
                      std::size_t window, const RoadGraph& graph, ForwardTrace* trace = nullptr);

}  // namespace hgp
