#include "hgp/layers.hpp"

#include "hgp/errors.hpp"

namespace hgp {

ad::Var apply_activation(const ad::Var& x, Activation act) {
    switch (act) {
        case Activation::None: return x;
        case Activation::Relu: return ad::relu(x);
        case Activation::Tanh: return ad::tanh(x);
        case Activation::Sigmoid: return ad::sigmoid(x);
    }
    throw ConfigError("unknown activation");
}

Linear::Linear(ParamStore& store, const std::string& prefix, std::size_t in, std::size_t out, Rng& rng)
    : store_(&store), weight_(prefix + ".weight"), bias_(prefix + ".bias"), in_(in), out_(out) {
    store.create_glorot(weight_, in, out, rng);
    store.create(bias_, 1, out);
}

ad::Var Linear::forward(const ad::Var& x) const {
    return ad::add_row(ad::matmul(x, ad::param(*store_, weight_)), ad::param(*store_, bias_));
}

GcnLayer::GcnLayer(ParamStore& store, const std::string& prefix, std::size_t in, std::size_t out,
                   Activation act, Rng& rng)
    : store_(&store), theta_(prefix + ".theta"), act_(act), out_(out) {
    store.create_glorot(theta_, in, out, rng);
}

ad::Var GcnLayer::forward(const ad::Var& norm_adj, const ad::Var& h) const {
    return apply_activation(ad::matmul(ad::matmul(norm_adj, h), ad::param(*store_, theta_)), act_);
}

SageLayer::SageLayer(ParamStore& store, const std::string& prefix, std::size_t in, std::size_t out,
                     Activation act, Rng& rng)
    : store_(&store),
      pool_weight_(prefix + ".pool.weight"),
      pool_bias_(prefix + ".pool.bias"),
      act_(act),
      out_(out) {
    store.create_glorot(pool_weight_, in, out, rng);
    store.create(pool_bias_, 1, out);
    combine_ = Linear(store, prefix + ".combine", in + out, out, rng);
}

Matrix neighbor_mean_matrix(const Matrix& support) {
    if (support.rows() != support.cols()) {
        throw DimensionError("neighbor_mean_matrix: support is " + support.shape_str());
    }
    const std::size_t n = support.rows();
    Matrix mean(n, n);
    for (std::size_t v = 0; v < n; ++v) {
        std::size_t degree = 0;
        for (std::size_t u = 0; u < n; ++u)
            if (support(v, u) > 0.0) ++degree;
        if (degree == 0) {
            mean(v, v) = 1.0;  // isolated node aggregates over itself
        } else {
            const double inv = 1.0 / static_cast<double>(degree);
            for (std::size_t u = 0; u < n; ++u)
                if (support(v, u) > 0.0) mean(v, u) = inv;
        }
    }
    return mean;
}

ad::Var SageLayer::forward(const Matrix& support, const ad::Var& h) const {
    if (support.rows() != h.rows()) {
        throw DimensionError("sage_layer: support " + support.shape_str() + " vs features " +
                             h.value().shape_str());
    }
    const ad::Var pooled = ad::sigmoid(
        ad::add_row(ad::matmul(h, ad::param(*store_, pool_weight_)), ad::param(*store_, pool_bias_)));
    const ad::Var aggregate = ad::matmul(ad::constant(neighbor_mean_matrix(support)), pooled);
    return apply_activation(combine_.forward(ad::concat_cols({h, aggregate})), act_);
}

ad::Var readout(const ad::Var& h) {
    return ad::concat_cols({ad::reduce(h, ad::Axis::Rows, ad::Reduce::Mean),
                            ad::reduce(h, ad::Axis::Rows, ad::Reduce::Max)});
}

MlpHead::MlpHead(ParamStore& store, const std::string& prefix, std::size_t in, std::size_t hidden,
                 std::size_t nodes, std::size_t classes, std::size_t hidden_layers, Rng& rng)
    : nodes_(nodes), classes_(classes) {
    std::size_t width = in;
    for (std::size_t l = 0; l < hidden_layers; ++l) {
        layers_.emplace_back(store, prefix + ".fc" + std::to_string(l), width, hidden, rng);
        width = hidden;
    }
    layers_.emplace_back(store, prefix + ".out", width, nodes * classes, rng);
}

ad::Var MlpHead::forward(const ad::Var& pooled) const {
    ad::Var x = pooled;
    for (std::size_t l = 0; l + 1 < layers_.size(); ++l) x = ad::relu(layers_[l].forward(x));
    x = layers_.back().forward(x);
    return ad::row_softmax(ad::reshape(x, nodes_, classes_));
}

}  // namespace hgp
