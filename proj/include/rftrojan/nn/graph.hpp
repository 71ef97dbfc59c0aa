// Tape-based reverse-mode differentiation. Every op appends a node holding
// its value and a closure that pushes the node's gradient to its inputs;
// nodes are created in topological order, so backward() walks the tape in
// reverse.
#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rftrojan/nn/tensor.hpp"
#include "rftrojan/rng.hpp"

namespace rft::nn {

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;
};

struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

template <typename T>
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var input(Tensor<T> value, bool requires_grad = false);
  /// References `p.value`; backward() accumulates into `p.grad` when `trainable`.
  Var parameter(Parameter<T>& p, bool trainable = true);

  const Tensor<T>& value(Var v) const;
  /// Gradient buffer, allocated as zeros on first access.
  Tensor<T>& grad(Var v);
  bool has_grad(Var v) const { return !nodes_[idx(v)].grad.data.empty(); }
  bool requires_grad(Var v) const { return nodes_[idx(v)].requires_grad; }

  /// Seeds d(loss)/d(loss) = 1 and runs every recorded backward closure.
  void backward(Var loss);

  /// Used by op implementations.
  Var record(Tensor<T> value, bool requires_grad, std::function<void()> backward_fn);
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor<T> own;
    const Tensor<T>* external = nullptr;
    Tensor<T> grad;
    Parameter<T>* param = nullptr;
    bool requires_grad = false;
    std::function<void()> backward;
  };
  std::size_t idx(Var v) const {
    if (v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size()) throw std::out_of_range("invalid graph variable");
    return static_cast<std::size_t>(v.id);
  }
  std::vector<Node> nodes_;
};

// 2-D convolution, stride 1, symmetric zero padding.
// x [B,C,H,W], w [F,C,kh,kw], b [F] -> [B,F,H+2ph-kh+1,W+2pw-kw+1].
template <typename T>
Var conv2d(Graph<T>& g, Var x, Var w, Var b, int pad_h, int pad_w);

// x [B,...] flattened to [B,K]; w [U,K]; b [U] -> [B,U].
template <typename T>
Var dense(Graph<T>& g, Var x, Var w, Var b);

template <typename T>
Var relu(Graph<T>& g, Var x);

template <typename T>
Var sigmoid(Graph<T>& g, Var x);

/// Inverted dropout; identity when !training or rate == 0.
template <typename T>
Var dropout(Graph<T>& g, Var x, double rate, bool training, Rng& rng);

template <typename T>
Var reshape(Graph<T>& g, Var x, std::vector<int> dims);

template <typename T>
Var add(Graph<T>& g, Var a, Var b);

template <typename T>
Var scale(Graph<T>& g, Var a, T s);

/// (1 - m) * x + m * p, with m and p broadcast over the batch axis of x.
template <typename T>
Var mask_blend(Graph<T>& g, Var x, Var m, Var p);

/// Sum of absolute values -> [1].
template <typename T>
Var sum_abs(Graph<T>& g, Var x);

/// Mean softmax cross-entropy over the batch -> [1].
template <typename T>
Var softmax_cross_entropy(Graph<T>& g, Var logits, std::span<const int> labels);

/// Mean squared error over every element -> [1].
template <typename T>
Var mse(Graph<T>& g, Var pred, const Tensor<T>& target);

/// Row-wise softmax of [B,O] logits (no graph).
template <typename T>
Tensor<T> softmax(const Tensor<T>& logits);

}  // namespace rft::nn
