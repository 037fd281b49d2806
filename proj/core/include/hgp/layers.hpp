#pragma once

#include <string>

#include "hgp/autodiff.hpp"
#include "hgp/matrix.hpp"
#include "hgp/param_store.hpp"
#include "hgp/rng.hpp"

namespace hgp {

enum class Activation { None, Relu, Tanh, Sigmoid };

ad::Var apply_activation(const ad::Var& x, Activation act);

// x W + b. Parameters are registered as <prefix>.weight / <prefix>.bias.
class Linear {
  public:
    Linear() = default;
    Linear(ParamStore& store, const std::string& prefix, std::size_t in, std::size_t out, Rng& rng);
    ad::Var forward(const ad::Var& x) const;
    std::size_t in_dim() const { return in_; }
    std::size_t out_dim() const { return out_; }

  private:
    ParamStore* store_ = nullptr;
    std::string weight_, bias_;
    std::size_t in_ = 0, out_ = 0;
};

// act(norm_adj H theta). norm_adj is expected to already carry the
// self-loop-normalized weights (see normalize_adjacency); no bias term.
class GcnLayer {
  public:
    GcnLayer() = default;
    GcnLayer(ParamStore& store, const std::string& prefix, std::size_t in, std::size_t out,
             Activation act, Rng& rng);
    ad::Var forward(const ad::Var& norm_adj, const ad::Var& h) const;
    std::size_t out_dim() const { return out_; }

  private:
    ParamStore* store_ = nullptr;
    std::string theta_;
    Activation act_ = Activation::Relu;
    std::size_t out_ = 0;
};

// GraphSAGE with mean-pool aggregation: per node, the aggregate is the
// unweighted mean of sigmoid(W_pool h_u + b) over neighbors u (positive
// entries of the support matrix); an isolated node aggregates over itself.
// Output = act(Linear(concat(h_v, aggregate_v))).
class SageLayer {
  public:
    SageLayer() = default;
    SageLayer(ParamStore& store, const std::string& prefix, std::size_t in, std::size_t out,
              Activation act, Rng& rng);
    ad::Var forward(const Matrix& support, const ad::Var& h) const;
    std::size_t out_dim() const { return out_; }

  private:
    ParamStore* store_ = nullptr;
    std::string pool_weight_, pool_bias_;
    Linear combine_;
    Activation act_ = Activation::Relu;
    std::size_t out_ = 0;
};

// Row-normalized neighbor-averaging operator of a support matrix.
Matrix neighbor_mean_matrix(const Matrix& support);

// [column-mean(H), column-max(H)] as a 1 x 2d graph-level vector.
ad::Var readout(const ad::Var& h);

// Fully connected head: `hidden_layers` ReLU layers of width `hidden`, then a
// linear map to nodes*classes, reshaped to nodes x classes and row-softmaxed.
class MlpHead {
  public:
    MlpHead() = default;
    MlpHead(ParamStore& store, const std::string& prefix, std::size_t in, std::size_t hidden,
            std::size_t nodes, std::size_t classes, std::size_t hidden_layers, Rng& rng);
    ad::Var forward(const ad::Var& pooled) const;

  private:
    std::vector<Linear> layers_;
    std::size_t nodes_ = 0, classes_ = 0;
};

}  // namespace hgp
