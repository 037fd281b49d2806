#include "hgp/gradcheck_suite.hpp"

#include <memory>

#include "hgp/autodiff.hpp"
#include "hgp/gradcheck.hpp"
#include "hgp/graph.hpp"
#include "hgp/layers.hpp"
#include "hgp/pooling.hpp"
#include "hgp/rng.hpp"

namespace hgp {

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Matrix m(rows, cols);
    for (double& v : m.data()) v = rng.uniform(lo, hi);
    return m;
}

Matrix random_adjacency(std::size_t n, Rng& rng) {
    Matrix w(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (rng.uniform() < 0.6) {
                const double v = rng.uniform(0.1, 1.0);
                w(i, j) = v;
                w(j, i) = v;
            }
        }
    }
    return w;
}

// Scalar probe that keeps every output entry in play.
ad::Var probe(const ad::Var& out, const Matrix& weights) {
    return ad::sum_all(ad::hadamard(out, ad::constant(weights)));
}

// Identity forward with a deliberately scaled backward rule.
ad::Var corrupt_gradient(const ad::Var& x) {
    auto node = std::make_shared<ad::Node>();
    node->op = "corrupt";
    node->value = x.value();
    node->inputs = {x.node()};
    node->pull = [](ad::Node& self) {
        auto dst = self.inputs[0]->grad.data();
        auto src = self.grad.data();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += 1.25 * src[i];
    };
    return ad::Var(std::move(node));
}

std::vector<int> random_targets(std::size_t n, std::size_t classes, Rng& rng) {
    std::vector<int> t(n);
    for (int& v : t) v = static_cast<int>(rng.uniform_int(classes));
    return t;
}

}  // namespace

std::vector<GradCheckEntry> gradcheck_suite(double tolerance, bool sabotage) {
    std::vector<GradCheckEntry> entries;
    const auto run = [&](const std::string& component, ParamStore& store,
                         const std::function<ad::Var()>& f) {
        GradCheckEntry e;
        e.component = component;
        auto wrapped = sabotage ? std::function<ad::Var()>([&f] { return corrupt_gradient(f()); }) : f;
        e.max_rel_error = grad_check(wrapped, store);
        e.pass = e.max_rel_error < tolerance;
        entries.push_back(e);
    };

    {  // GCN layer, gradient w.r.t. both the features and theta
        Rng rng(11, "gradcheck/gcn");
        ParamStore store;
        GcnLayer layer(store, "gcn", 4, 3, Activation::Relu, rng);
        store.get("gcn.theta").value = random_matrix(4, 3, rng);
        Param& input = store.create("input", 5, 4);
        input.value = random_matrix(5, 4, rng);
        const Matrix norm = normalize_adjacency(random_adjacency(5, rng));
        const Matrix w = random_matrix(5, 3, rng);
        run("gcn_layer", store, [&] { return probe(layer.forward(ad::constant(norm), ad::param(store, "input")), w); });
    }
    {  // SAGE layer
        Rng rng(12, "gradcheck/sage");
        ParamStore store;
        SageLayer layer(store, "sage", 4, 3, Activation::Relu, rng);
        Param& input = store.create("input", 5, 4);
        input.value = random_matrix(5, 4, rng);
        const Matrix adj = random_adjacency(5, rng);
        const Matrix w = random_matrix(5, 3, rng);
        run("sage_layer", store, [&] { return probe(layer.forward(adj, ad::param(store, "input")), w); });
    }
    {  // readout
        Rng rng(13, "gradcheck/readout");
        ParamStore store;
        Param& input = store.create("input", 6, 4);
        input.value = random_matrix(6, 4, rng);
        const Matrix w = random_matrix(1, 8, rng);
        run("readout", store, [&] { return probe(readout(ad::param(store, "input")), w); });
    }
    {  // MLP head with a cross-entropy probe
        Rng rng(14, "gradcheck/head");
        ParamStore store;
        MlpHead head(store, "head", 6, 8, 4, 3, 2, rng);
        Param& input = store.create("input", 1, 6);
        input.value = random_matrix(1, 6, rng);
        const std::vector<int> targets = random_targets(4, 3, rng);
        run("mlp_head", store,
            [&] { return ad::cross_entropy(head.forward(ad::param(store, "input")), targets); });
    }
    {  // DiffPool block: probe features, coarse adjacency and the assignment
        Rng rng(15, "gradcheck/diffblock");
        ParamStore store;
        DiffPoolBlock block(store, "block", 4, 3, 3, 1, rng);
        Param& input = store.create("input", 6, 4);
        input.value = random_matrix(6, 4, rng);
        const Matrix adj = random_adjacency(6, rng);
        const Matrix wf = random_matrix(3, 3, rng);
        const Matrix wa = random_matrix(3, 3, rng);
        const Matrix ws = random_matrix(6, 3, rng);
        run("diffpool_block", store, [&] {
            auto res = block.forward(ad::constant(adj), ad::param(store, "input"));
            return ad::add(ad::add(probe(res.coarse_feat, wf), probe(res.coarse_adj, wa)),
                           probe(res.assignment, ws));
        });
    }
    {  // SAGPool block (fixed top-k selection at these seeds)
        Rng rng(16, "gradcheck/sagblock");
        ParamStore store;
        SagPoolBlock block(store, "block", 4, 3, 0.5, 1, rng);
        Param& input = store.create("input", 6, 4);
        input.value = random_matrix(6, 4, rng);
        const Matrix adj = random_adjacency(6, rng);
        const Matrix wf = random_matrix(3, 3, rng);
        run("sagpool_block", store, [&] {
            auto res = block.forward(adj, ad::param(store, "input"));
            return probe(res.coarse_feat, wf);
        });
    }

    const auto run_model = [&](const std::string& component, ModelKind kind, std::size_t blocks,
                               std::size_t layers, std::uint64_t seed) {
        ModelConfig mc;
        mc.kind = kind;
        mc.nodes = 6;
        mc.input_dim = 5;
        mc.classes = 3;
        mc.layers = layers;
        mc.node_embedding = 4;
        mc.hidden = 4;
        mc.mlp_hidden = 8;
        mc.blocks = blocks;
        mc.pool_ratio = 0.5;
        mc.head_hidden_layers = kind == ModelKind::GcnBaseline || kind == ModelKind::SageBaseline ? 1 : 2;
        PoolModel model(mc, seed);
        Rng rng(seed, "gradcheck/model-data");
        const Matrix features = random_matrix(6, 5, rng, 0.0, 1.0);
        const Matrix adj = random_adjacency(6, rng);
        const std::vector<int> targets = random_targets(6, 3, rng);
        run(component, model.params(),
            [&] { return ad::cross_entropy(model.forward(features, adj), targets); });
    };
    run_model("diffpool_model", ModelKind::DiffPool, 1, 1, 21);
    run_model("sagpool_model", ModelKind::SagPool, 2, 1, 28);
    run_model("gcn_baseline", ModelKind::GcnBaseline, 1, 2, 23);
    run_model("sage_baseline", ModelKind::SageBaseline, 1, 2, 24);

    return entries;
}

}  // namespace hgp
