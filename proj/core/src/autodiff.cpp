#include "hgp/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <unordered_set>

#include "hgp/errors.hpp"

namespace hgp::ad {

namespace {

NodePtr make_node(const char* op, Matrix value, std::vector<NodePtr> inputs,
                  std::function<void(Node&)> pull) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->value = std::move(value);
    n->inputs = std::move(inputs);
    n->pull = std::move(pull);
    n->value.check_finite(op);
    return n;
}

void require_same_shape(const char* op, const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) {
        throw DimensionError(std::string(op) + " shape mismatch: " + a.shape_str() + " vs " + b.shape_str());
    }
}

void add_into(Matrix& dst, const Matrix& src) {
    auto d = dst.data();
    auto s = src.data();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
}

}  // namespace

Var constant(Matrix value) {
    return Var(make_node("constant", std::move(value), {}, nullptr));
}

Var param(ParamStore& store, const std::string& name) {
    Param& p = store.get(name);
    auto n = make_node("param", p.value, {}, nullptr);
    n->param = &p;
    return Var(n);
}

Var matmul(const Var& a, const Var& b) {
    Matrix out = hgp::matmul(a.value(), b.value());
    return Var(make_node("matmul", std::move(out), {a.node(), b.node()}, [](Node& self) {
        const Matrix& g = self.grad;
        add_into(self.inputs[0]->grad, hgp::matmul(g, hgp::transpose(self.inputs[1]->value)));
        add_into(self.inputs[1]->grad, hgp::matmul(hgp::transpose(self.inputs[0]->value), g));
    }));
}

Var transpose(const Var& a) {
    return Var(make_node("transpose", hgp::transpose(a.value()), {a.node()}, [](Node& self) {
        add_into(self.inputs[0]->grad, hgp::transpose(self.grad));
    }));
}

Var add(const Var& a, const Var& b) {
    require_same_shape("add", a.value(), b.value());
    Matrix out = a.value();
    add_into(out, b.value());
    return Var(make_node("add", std::move(out), {a.node(), b.node()}, [](Node& self) {
        add_into(self.inputs[0]->grad, self.grad);
        add_into(self.inputs[1]->grad, self.grad);
    }));
}

Var sub(const Var& a, const Var& b) {
    require_same_shape("sub", a.value(), b.value());
    Matrix out = a.value();
    {
        auto d = out.data();
        auto s = b.value().data();
        for (std::size_t i = 0; i < d.size(); ++i) d[i] -= s[i];
    }
    return Var(make_node("sub", std::move(out), {a.node(), b.node()}, [](Node& self) {
        add_into(self.inputs[0]->grad, self.grad);
        auto d = self.inputs[1]->grad.data();
        auto g = self.grad.data();
        for (std::size_t i = 0; i < d.size(); ++i) d[i] -= g[i];
    }));
}

Var hadamard(const Var& a, const Var& b) {
    require_same_shape("hadamard", a.value(), b.value());
    Matrix out = a.value();
    {
        auto d = out.data();
        auto s = b.value().data();
        for (std::size_t i = 0; i < d.size(); ++i) d[i] *= s[i];
    }
    return Var(make_node("hadamard", std::move(out), {a.node(), b.node()}, [](Node& self) {
        auto g = self.grad.data();
        auto ga = self.inputs[0]->grad.data();
        auto gb = self.inputs[1]->grad.data();
        auto va = self.inputs[0]->value.data();
        auto vb = self.inputs[1]->value.data();
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga[i] += g[i] * vb[i];
            gb[i] += g[i] * va[i];
        }
    }));
}

Var scale(const Var& a, double factor) {
    Matrix out = a.value();
    for (double& v : out.data()) v *= factor;
    return Var(make_node("scale", std::move(out), {a.node()}, [factor](Node& self) {
        auto g = self.grad.data();
        auto ga = self.inputs[0]->grad.data();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += factor * g[i];
    }));
}

Var add_row(const Var& a, const Var& row) {
    if (row.rows() != 1 || row.cols() != a.cols()) {
        throw DimensionError("add_row shape mismatch: " + a.value().shape_str() + " vs " +
                             row.value().shape_str());
    }
    Matrix out = a.value();
    for (std::size_t i = 0; i < out.rows(); ++i)
        for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += row.value()(0, j);
    return Var(make_node("add_row", std::move(out), {a.node(), row.node()}, [](Node& self) {
        add_into(self.inputs[0]->grad, self.grad);
        Matrix& gr = self.inputs[1]->grad;
        for (std::size_t i = 0; i < self.grad.rows(); ++i)
            for (std::size_t j = 0; j < self.grad.cols(); ++j) gr(0, j) += self.grad(i, j);
    }));
}

Var relu(const Var& a) {
    Matrix out = a.value();
    for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
    return Var(make_node("relu", std::move(out), {a.node()}, [](Node& self) {
        auto g = self.grad.data();
        auto ga = self.inputs[0]->grad.data();
        auto va = self.inputs[0]->value.data();
        for (std::size_t i = 0; i < g.size(); ++i)
            if (va[i] > 0.0) ga[i] += g[i];
    }));
}

Var sigmoid(const Var& a) {
    Matrix out = a.value();
    for (double& v : out.data()) {
        v = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
    }
    return Var(make_node("sigmoid", std::move(out), {a.node()}, [](Node& self) {
        auto g = self.grad.data();
        auto ga = self.inputs[0]->grad.data();
        auto s = self.value.data();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * s[i] * (1.0 - s[i]);
    }));
}

Var tanh(const Var& a) {
    Matrix out = a.value();
    for (double& v : out.data()) v = std::tanh(v);
    return Var(make_node("tanh", std::move(out), {a.node()}, [](Node& self) {
        auto g = self.grad.data();
        auto ga = self.inputs[0]->grad.data();
        auto t = self.value.data();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * (1.0 - t[i] * t[i]);
    }));
}

Var row_softmax(const Var& a) {
    Matrix out = a.value();
    for (std::size_t i = 0; i < out.rows(); ++i) {
        double mx = out(i, 0);
        for (std::size_t j = 1; j < out.cols(); ++j) mx = std::max(mx, out(i, j));
        double sum = 0.0;
        for (std::size_t j = 0; j < out.cols(); ++j) {
            out(i, j) = std::exp(out(i, j) - mx);
            sum += out(i, j);
        }
        for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) /= sum;
    }
    return Var(make_node("row_softmax", std::move(out), {a.node()}, [](Node& self) {
        // dx_j = s_j * (g_j - sum_k g_k s_k) per row
        Matrix& ga = self.inputs[0]->grad;
        for (std::size_t i = 0; i < self.grad.rows(); ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j < self.grad.cols(); ++j) dot += self.grad(i, j) * self.value(i, j);
            for (std::size_t j = 0; j < self.grad.cols(); ++j)
                ga(i, j) += self.value(i, j) * (self.grad(i, j) - dot);
        }
    }));
}

Var reduce(const Var& a, Axis axis, Reduce kind) {
    const Matrix& v = a.value();
    if (v.rows() == 0 || v.cols() == 0) {
        throw DimensionError("reduce over empty axis of " + v.shape_str() + " matrix");
    }
    const bool over_rows = axis == Axis::Rows;  // collapse rows -> 1 x cols
    const std::size_t out_r = over_rows ? 1 : v.rows();
    const std::size_t out_c = over_rows ? v.cols() : 1;
    const std::size_t slices = over_rows ? v.cols() : v.rows();
    const std::size_t span = over_rows ? v.rows() : v.cols();

    auto cell = [&](std::size_t slice, std::size_t k) -> double {
        return over_rows ? v(k, slice) : v(slice, k);
    };

    Matrix out(out_r, out_c);
    std::vector<std::size_t> argmax(kind == Reduce::Max ? slices : 0);
    for (std::size_t s = 0; s < slices; ++s) {
        double acc;
        if (kind == Reduce::Max) {
            acc = cell(s, 0);
            std::size_t best = 0;
            for (std::size_t k = 1; k < span; ++k) {
                if (cell(s, k) > acc) {  // strict: ties keep the lowest index
                    acc = cell(s, k);
                    best = k;
                }
            }
            argmax[s] = best;
        } else {
            acc = 0.0;
            for (std::size_t k = 0; k < span; ++k) acc += cell(s, k);
            if (kind == Reduce::Mean) acc /= static_cast<double>(span);
        }
        out.data()[s] = acc;
    }

    return Var(make_node("reduce", std::move(out), {a.node()},
                         [over_rows, kind, span, argmax = std::move(argmax)](Node& self) {
        Matrix& ga = self.inputs[0]->grad;
        const std::size_t slices = self.grad.size();
        for (std::size_t s = 0; s < slices; ++s) {
            const double g = self.grad.data()[s];
            auto bump = [&](std::size_t k, double val) {
                if (over_rows)
                    ga(k, s) += val;
                else
                    ga(s, k) += val;
            };
            switch (kind) {
                case Reduce::Sum:
                    for (std::size_t k = 0; k < span; ++k) bump(k, g);
                    break;
                case Reduce::Mean:
                    for (std::size_t k = 0; k < span; ++k) bump(k, g / static_cast<double>(span));
                    break;
                case Reduce::Max:
                    bump(argmax[s], g);
                    break;
            }
        }
    }));
}

Var concat_cols(const std::vector<Var>& parts) {
    if (parts.empty()) throw DimensionError("concat_cols of zero parts");
    const std::size_t rows = parts.front().rows();
    std::size_t cols = 0;
    for (const Var& p : parts) {
        if (p.rows() != rows) {
            throw DimensionError("concat_cols row mismatch: " + parts.front().value().shape_str() +
                                 " vs " + p.value().shape_str());
        }
        cols += p.cols();
    }
    Matrix out(rows, cols);
    std::size_t offset = 0;
    std::vector<NodePtr> inputs;
    std::vector<std::size_t> offsets;
    for (const Var& p : parts) {
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < p.cols(); ++j) out(i, offset + j) = p.value()(i, j);
        inputs.push_back(p.node());
        offsets.push_back(offset);
        offset += p.cols();
    }
    return Var(make_node("concat_cols", std::move(out), std::move(inputs),
                         [offsets = std::move(offsets)](Node& self) {
        for (std::size_t k = 0; k < self.inputs.size(); ++k) {
            Matrix& ga = self.inputs[k]->grad;
            for (std::size_t i = 0; i < ga.rows(); ++i)
                for (std::size_t j = 0; j < ga.cols(); ++j) ga(i, j) += self.grad(i, offsets[k] + j);
        }
    }));
}

Var gather_rows(const Var& a, std::vector<std::size_t> indices) {
    const Matrix& v = a.value();
    Matrix out(indices.size(), v.cols());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= v.rows()) {
            throw DimensionError("gather_rows index " + std::to_string(indices[i]) + " out of range for " +
                                 v.shape_str());
        }
        for (std::size_t j = 0; j < v.cols(); ++j) out(i, j) = v(indices[i], j);
    }
    return Var(make_node("gather_rows", std::move(out), {a.node()},
                         [indices = std::move(indices)](Node& self) {
        Matrix& ga = self.inputs[0]->grad;
        for (std::size_t i = 0; i < indices.size(); ++i)
            for (std::size_t j = 0; j < ga.cols(); ++j) ga(indices[i], j) += self.grad(i, j);
    }));
}

Var row_scale(const Var& a, const Var& s) {
    if (s.cols() != 1 || s.rows() != a.rows()) {
        throw DimensionError("row_scale shape mismatch: " + a.value().shape_str() + " vs " +
                             s.value().shape_str());
    }
    Matrix out = a.value();
    for (std::size_t i = 0; i < out.rows(); ++i)
        for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) *= s.value()(i, 0);
    return Var(make_node("row_scale", std::move(out), {a.node(), s.node()}, [](Node& self) {
        Matrix& ga = self.inputs[0]->grad;
        Matrix& gs = self.inputs[1]->grad;
        const Matrix& va = self.inputs[0]->value;
        const Matrix& vs = self.inputs[1]->value;
        for (std::size_t i = 0; i < self.grad.rows(); ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j < self.grad.cols(); ++j) {
                ga(i, j) += self.grad(i, j) * vs(i, 0);
                dot += self.grad(i, j) * va(i, j);
            }
            gs(i, 0) += dot;
        }
    }));
}

Var reshape(const Var& a, std::size_t rows, std::size_t cols) {
    const Matrix& v = a.value();
    if (rows * cols != v.size()) {
        throw DimensionError("reshape " + v.shape_str() + " to " + std::to_string(rows) + "x" +
                             std::to_string(cols));
    }
    Matrix out(rows, cols, std::vector<double>(v.data().begin(), v.data().end()));
    return Var(make_node("reshape", std::move(out), {a.node()}, [](Node& self) {
        auto ga = self.inputs[0]->grad.data();
        auto g = self.grad.data();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }));
}

Var cross_entropy(const Var& probs, const std::vector<int>& targets) {
    const Matrix& p = probs.value();
    if (targets.size() != p.rows()) {
        throw DimensionError("cross_entropy: " + std::to_string(targets.size()) + " targets for " +
                             p.shape_str() + " probabilities");
    }
    double loss = 0.0;
    for (std::size_t i = 0; i < p.rows(); ++i) {
        const int c = targets[i];
        if (c < 0 || static_cast<std::size_t>(c) >= p.cols()) {
            throw DimensionError("cross_entropy target " + std::to_string(c) + " out of range for " +
                                 p.shape_str());
        }
        loss -= std::log(p(i, static_cast<std::size_t>(c)));
    }
    loss /= static_cast<double>(p.rows());
    Matrix out(1, 1, {loss});
    return Var(make_node("cross_entropy", std::move(out), {probs.node()}, [targets](Node& self) {
        Matrix& gp = self.inputs[0]->grad;
        const Matrix& p = self.inputs[0]->value;
        const double g = self.grad(0, 0);
        const double inv_n = 1.0 / static_cast<double>(p.rows());
        for (std::size_t i = 0; i < p.rows(); ++i) {
            const auto c = static_cast<std::size_t>(targets[i]);
            gp(i, c) -= g * inv_n / p(i, c);
        }
    }));
}

Var sum_all(const Var& a) {
    return reduce(reduce(a, Axis::Rows, Reduce::Sum), Axis::Cols, Reduce::Sum);
}

namespace {

// Post-order over the dependency DAG; reversed it yields consumers first.
std::vector<Node*> topo_order(Node* root) {
    std::vector<Node*> order;
    std::unordered_set<Node*> seen;
    std::vector<std::pair<Node*, std::size_t>> stack{{root, 0}};
    seen.insert(root);
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->inputs.size()) {
            Node* in = node->inputs[next++].get();
            if (seen.insert(in).second) stack.emplace_back(in, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
    return order;
}

void run_backward(const Var& root, ParamStore* store) {
    if (!root.valid()) throw Error("backward on empty variable");
    if (root.rows() != 1 || root.cols() != 1) {
        throw DimensionError("backward root must be 1x1, got " + root.value().shape_str());
    }
    std::vector<Node*> order = topo_order(root.node().get());
    for (Node* n : order) n->grad = Matrix(n->value.rows(), n->value.cols());
    if (store != nullptr) store->zero_grads();
    root.node()->grad(0, 0) = 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (n->pull) n->pull(*n);
        if (n->param != nullptr && store != nullptr) {
            auto dst = n->param->grad.data();
            auto src = n->grad.data();
            for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
        }
    }
    if (store != nullptr) {
        for (auto& [name, p] : *store) p->grad_ready = true;
    }
}

}  // namespace

void backward(const Var& root, ParamStore& store) { run_backward(root, &store); }

void backward(const Var& root) { run_backward(root, nullptr); }

}  // namespace hgp::ad
