#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hgp/matrix.hpp"
#include "hgp/param_store.hpp"

namespace hgp::ad {

// Reverse-mode differentiation over dense matrices. Every op builds a node
// holding its forward value plus a pull closure that routes the node's
// gradient into its inputs. The graph is acyclic by construction (ops only
// reference already-built nodes).
struct Node {
    const char* op;
    Matrix value;
    Matrix grad;  // sized by backward()
    std::vector<std::shared_ptr<Node>> inputs;
    std::function<void(Node&)> pull;
    Param* param = nullptr;
};

using NodePtr = std::shared_ptr<Node>;

class Var {
  public:
    Var() = default;
    explicit Var(NodePtr node) : node_(std::move(node)) {}

    const Matrix& value() const { return node_->value; }
    const Matrix& grad() const { return node_->grad; }
    std::size_t rows() const { return node_->value.rows(); }
    std::size_t cols() const { return node_->value.cols(); }
    const NodePtr& node() const { return node_; }
    bool valid() const { return node_ != nullptr; }

  private:
    NodePtr node_;
};

enum class Axis { Rows, Cols };
enum class Reduce { Mean, Max, Sum };

Var constant(Matrix value);
Var param(ParamStore& store, const std::string& name);

Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var hadamard(const Var& a, const Var& b);
Var scale(const Var& a, double factor);
// a (n x d) plus a 1 x d row vector broadcast over rows.
Var add_row(const Var& a, const Var& row);

Var relu(const Var& a);
Var sigmoid(const Var& a);
Var tanh(const Var& a);

// Row-stabilized softmax: subtracts the row max before exponentiation.
Var row_softmax(const Var& a);

// Axis::Rows collapses the row dimension (1 x cols result of column stats);
// Axis::Cols collapses columns (rows x 1). Max routes gradient to the lowest
// argmax index per reduced slice.
Var reduce(const Var& a, Axis axis, Reduce kind);

Var concat_cols(const std::vector<Var>& parts);
Var gather_rows(const Var& a, std::vector<std::size_t> indices);
// out[i, j] = a[i, j] * s[i, 0]; s must be rows x 1.
Var row_scale(const Var& a, const Var& s);
Var reshape(const Var& a, std::size_t rows, std::size_t cols);

// Mean negative log-likelihood of the target class per row: probs is
// n x Class (rows already normalized), targets holds 0-based classes.
Var cross_entropy(const Var& probs, const std::vector<int>& targets);

Var sum_all(const Var& a);

// Accumulates d(root)/d(p) into every parameter of the store. Gradients of
// the reachable graph and of all store parameters are reset first, so
// repeated calls without a new forward are idempotent. root must be 1x1.
void backward(const Var& root, ParamStore& store);

// Node-gradient-only variant for op-level tests.
void backward(const Var& root);

}  // namespace hgp::ad
