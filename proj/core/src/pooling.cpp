#include "hgp/pooling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hgp/errors.hpp"

namespace hgp {

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::DiffPool: return "diffpool";
        case ModelKind::SagPool: return "sagpool";
        case ModelKind::GcnBaseline: return "gcn";
        case ModelKind::SageBaseline: return "sage";
    }
    return "?";
}

ModelKind model_kind_from_string(const std::string& name) {
    if (name == "diffpool") return ModelKind::DiffPool;
    if (name == "sagpool") return ModelKind::SagPool;
    if (name == "gcn") return ModelKind::GcnBaseline;
    if (name == "sage") return ModelKind::SageBaseline;
    throw ConfigError("unknown model kind: '" + name + "' (expected diffpool|sagpool|gcn|sage)");
}

namespace {

std::size_t ceil_ratio(double ratio, std::size_t n) {
    return static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(n)));
}

void validate_config(const ModelConfig& c) {
    if (c.nodes == 0 || c.input_dim == 0 || c.classes == 0) {
        throw ConfigError("model config: nodes, input_dim and classes must be positive");
    }
    if (c.layers == 0 || c.blocks == 0) throw ConfigError("model config: layers and blocks must be >= 1");
    if (!(c.pool_ratio > 0.0 && c.pool_ratio <= 1.0)) {
        throw ConfigError("model config: pool ratio must be in (0, 1]");
    }
    if (c.hidden == 0 || c.node_embedding == 0 || c.mlp_hidden == 0) {
        throw ConfigError("model config: layer widths must be positive");
    }
}

}  // namespace

DiffPoolBlock::DiffPoolBlock(ParamStore& store, const std::string& prefix, std::size_t in,
                             std::size_t hidden, std::size_t clusters, std::size_t layers, Rng& rng)
    : clusters_(clusters) {
    std::size_t width = in;
    for (std::size_t l = 0; l < layers; ++l) {
        embed_.emplace_back(store, prefix + ".embed" + std::to_string(l), width, hidden, Activation::Relu,
                            rng);
        width = hidden;
    }
    // Assign stack ends in raw logits; the softmax below row-normalizes them.
    width = in;
    for (std::size_t l = 0; l < layers; ++l) {
        const bool last = l + 1 == layers;
        assign_.emplace_back(store, prefix + ".assign" + std::to_string(l), width, last ? clusters : hidden,
                             last ? Activation::None : Activation::Relu, rng);
        width = hidden;
    }
}

DiffPoolBlock::Result DiffPoolBlock::forward(const ad::Var& adj, const ad::Var& x) const {
    const Matrix& support = adj.value();
    ad::Var embedded = x;
    for (const SageLayer& layer : embed_) embedded = layer.forward(support, embedded);
    ad::Var logits = x;
    for (const SageLayer& layer : assign_) logits = layer.forward(support, logits);
    const ad::Var assignment = ad::row_softmax(logits);
    const ad::Var assignment_t = ad::transpose(assignment);
    Result out;
    out.assignment = assignment;
    out.coarse_feat = ad::matmul(assignment_t, embedded);
    out.coarse_adj = ad::matmul(ad::matmul(assignment_t, adj), assignment);
    return out;
}

std::vector<std::size_t> topk_select(const Matrix& scores, double ratio) {
    if (scores.cols() != 1) throw DimensionError("topk_select: scores must be n x 1, got " + scores.shape_str());
    if (!(ratio > 0.0 && ratio <= 1.0)) throw ConfigError("topk_select: ratio must be in (0, 1]");
    const std::size_t n = scores.rows();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (scores(a, 0) != scores(b, 0)) return scores(a, 0) > scores(b, 0);
        return a < b;
    });
    idx.resize(ceil_ratio(ratio, n));
    return idx;
}

SagPoolBlock::SagPoolBlock(ParamStore& store, const std::string& prefix, std::size_t in,
                           std::size_t hidden, double keep_ratio, std::size_t layers, Rng& rng)
    : keep_ratio_(keep_ratio) {
    std::size_t width = in;
    for (std::size_t l = 0; l < layers; ++l) {
        gcn_.emplace_back(store, prefix + ".gcn" + std::to_string(l), width, hidden, Activation::Relu, rng);
        width = hidden;
    }
    scorer_ = GcnLayer(store, prefix + ".score", width, 1, Activation::Tanh, rng);
}

SagPoolBlock::Result SagPoolBlock::forward(const Matrix& adj, const ad::Var& x) const {
    const ad::Var norm = ad::constant(normalize_adjacency(adj));
    ad::Var h = x;
    for (const GcnLayer& layer : gcn_) h = layer.forward(norm, h);
    const ad::Var scores = scorer_.forward(norm, h);

    Result out;
    out.kept = topk_select(scores.value(), keep_ratio_);
    out.kept_scores = ad::gather_rows(scores, out.kept);
    out.coarse_feat = ad::row_scale(ad::gather_rows(h, out.kept), out.kept_scores);
    out.coarse_adj = Matrix(out.kept.size(), out.kept.size());
    for (std::size_t i = 0; i < out.kept.size(); ++i)
        for (std::size_t j = 0; j < out.kept.size(); ++j) out.coarse_adj(i, j) = adj(out.kept[i], out.kept[j]);
    return out;
}

PoolModel::PoolModel(const ModelConfig& config, std::uint64_t seed)
    : config_(config), seed_(seed), store_(std::make_unique<ParamStore>()) {
    validate_config(config_);
    Rng rng(seed, "model/" + to_string(config_.kind));
    ParamStore& store = *store_;

    switch (config_.kind) {
        case ModelKind::DiffPool: {
            std::size_t width = config_.input_dim;
            for (std::size_t l = 0; l < config_.layers; ++l) {
                initial_embed_.emplace_back(store, "embed" + std::to_string(l), width,
                                            config_.node_embedding, Activation::Relu, rng);
                width = config_.node_embedding;
            }
            std::size_t n = config_.nodes;
            for (std::size_t b = 0; b < config_.blocks; ++b) {
                const std::size_t clusters = ceil_ratio(config_.pool_ratio, n);
                diff_blocks_.emplace_back(store, "block" + std::to_string(b), width, config_.hidden,
                                          clusters, config_.layers, rng);
                width = config_.hidden;
                auto& stack = extract_stacks_.emplace_back();
                for (std::size_t l = 0; l < config_.layers; ++l) {
                    stack.emplace_back(store,
                                       "block" + std::to_string(b) + ".extract" + std::to_string(l), width,
                                       config_.hidden, Activation::Relu, rng);
                    width = config_.hidden;
                }
                n = clusters;
            }
            head_ = MlpHead(store, "head", 2 * config_.hidden, config_.mlp_hidden, config_.nodes,
                            config_.classes, config_.head_hidden_layers, rng);
            break;
        }
        case ModelKind::SagPool: {
            std::size_t width = config_.input_dim;
            for (std::size_t b = 0; b < config_.blocks; ++b) {
                sag_blocks_.emplace_back(store, "block" + std::to_string(b), width, config_.hidden,
                                         config_.pool_ratio, config_.layers, rng);
                width = config_.hidden;
            }
            head_ = MlpHead(store, "head", 2 * config_.hidden * config_.blocks, config_.mlp_hidden,
                            config_.nodes, config_.classes, config_.head_hidden_layers, rng);
            break;
        }
        case ModelKind::GcnBaseline: {
            std::size_t width = config_.input_dim;
            for (std::size_t l = 0; l < config_.layers; ++l) {
                gcn_baseline_.emplace_back(store, "gcn" + std::to_string(l), width, config_.hidden,
                                           Activation::Relu, rng);
                width = config_.hidden;
            }
            head_ = MlpHead(store, "head", 2 * config_.hidden, config_.mlp_hidden, config_.nodes,
                            config_.classes, config_.head_hidden_layers, rng);
            break;
        }
        case ModelKind::SageBaseline: {
            std::size_t width = config_.input_dim;
            for (std::size_t l = 0; l < config_.layers; ++l) {
                sage_baseline_.emplace_back(store, "sage" + std::to_string(l), width, config_.hidden,
                                            Activation::Relu, rng);
                width = config_.hidden;
            }
            head_ = MlpHead(store, "head", 2 * config_.hidden, config_.mlp_hidden, config_.nodes,
                            config_.classes, config_.head_hidden_layers, rng);
            break;
        }
    }
}

ad::Var PoolModel::forward(const Matrix& features, const Matrix& adjacency, ForwardTrace* trace) const {
    if (features.rows() != config_.nodes || features.cols() != config_.input_dim) {
        throw DimensionError("model forward: features are " + features.shape_str() + ", expected " +
                             std::to_string(config_.nodes) + "x" + std::to_string(config_.input_dim));
    }
    if (adjacency.rows() != config_.nodes || adjacency.cols() != config_.nodes) {
        throw DimensionError("model forward: adjacency is " + adjacency.shape_str() + " for " +
                             std::to_string(config_.nodes) + " nodes");
    }
    switch (config_.kind) {
        case ModelKind::DiffPool: return forward_diffpool(features, adjacency, trace);
        case ModelKind::SagPool: return forward_sagpool(features, adjacency, trace);
        default: return forward_baseline(features, adjacency);
    }
}

ad::Var PoolModel::forward_diffpool(const Matrix& features, const Matrix& adjacency,
                                    ForwardTrace* trace) const {
    ad::Var x = ad::constant(features);
    ad::Var adj = ad::constant(adjacency);
    for (const SageLayer& layer : initial_embed_) x = layer.forward(adj.value(), x);
    for (std::size_t b = 0; b < diff_blocks_.size(); ++b) {
        DiffPoolBlock::Result res = diff_blocks_[b].forward(adj, x);
        x = res.coarse_feat;
        adj = res.coarse_adj;
        if (trace != nullptr) {
            trace->assignments.push_back(res.assignment);
            trace->node_counts.push_back(diff_blocks_[b].clusters());
        }
        for (const SageLayer& layer : extract_stacks_[b]) x = layer.forward(adj.value(), x);
    }
    return head_.forward(readout(x));
}

ad::Var PoolModel::forward_sagpool(const Matrix& features, const Matrix& adjacency,
                                   ForwardTrace* trace) const {
    ad::Var x = ad::constant(features);
    Matrix adj = adjacency;
    std::vector<ad::Var> readouts;
    for (const SagPoolBlock& block : sag_blocks_) {
        SagPoolBlock::Result res = block.forward(adj, x);
        x = res.coarse_feat;
        adj = std::move(res.coarse_adj);
        readouts.push_back(readout(x));
        if (trace != nullptr) {
            trace->kept.push_back(res.kept);
            trace->node_counts.push_back(res.kept.size());
        }
    }
    return head_.forward(ad::concat_cols(readouts));
}

ad::Var PoolModel::forward_baseline(const Matrix& features, const Matrix& adjacency) const {
    ad::Var x = ad::constant(features);
    if (config_.kind == ModelKind::GcnBaseline) {
        const ad::Var norm = ad::constant(normalize_adjacency(adjacency));
        for (const GcnLayer& layer : gcn_baseline_) x = layer.forward(norm, x);
    } else {
        for (const SageLayer& layer : sage_baseline_) x = layer.forward(adjacency, x);
    }
    return head_.forward(readout(x));
}

PoolModel assemble_model(const ModelConfig& config, std::uint64_t seed) { return PoolModel(config, seed); }

Matrix flatten_window(const TrafficTensor& tensor, std::size_t t_end, std::size_t window) {
    if (window == 0 || t_end + 1 < window || t_end >= tensor.timestamps()) {
        throw DimensionError("flatten_window: window of " + std::to_string(window) + " ending at t=" +
                             std::to_string(t_end) + " out of range for T=" +
                             std::to_string(tensor.timestamps()));
    }
    const std::size_t n = tensor.roads();
    Matrix out(n, window * TrafficTensor::kSignals);
    const std::size_t t0 = t_end + 1 - window;
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t k = 0; k < window; ++k)
            for (std::size_t s = 0; s < TrafficTensor::kSignals; ++s)
                out(r, k * TrafficTensor::kSignals + s) = tensor.at(t0 + k, r, s);
    return out;
}

ad::Var model_forward(const PoolModel& model, const TrafficTensor& tensor, std::size_t t_end,
                      std::size_t window, const RoadGraph& graph, ForwardTrace* trace) {
    return model.forward(flatten_window(tensor, t_end, window), graph.adjacency, trace);
}

}  // namespace hgp
