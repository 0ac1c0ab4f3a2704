#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <utility>
#include <vector>

#include "truckmorl/autodiff/parameters.hpp"
#include "truckmorl/autodiff/types.hpp"
#include "truckmorl/errors.hpp"

namespace truckmorl::ad {

template <typename Scalar>
class Tape;

/// Handle to a node recorded on a Tape. Cheap to copy; only valid while the tape lives.
template <typename Scalar>
struct Var {
  Tape<Scalar>* tape = nullptr;
  std::size_t id = 0;

  const Matrix<Scalar>& value() const { return tape->value(id); }
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
};

/// Reverse-mode recorder over dense matrices.
///
/// Every op pushes one node holding its forward value and a closure that maps the
/// node's output gradient onto its inputs. `backward` replays the closures in reverse
/// order and finally adds leaf gradients into the bound ParameterBlock grad slots.
/// A tape can be differentiated once.
template <typename Scalar>
class Tape {
 public:
  using Mat = Matrix<Scalar>;
  using Backprop = std::function<void(Tape&, const Mat&)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var<Scalar> constant(Mat value) { return push(std::move(value), false, nullptr); }

  Var<Scalar> parameter(ParameterBlock<Scalar>& block) {
    Var<Scalar> v = push(block.value, true, nullptr);
    nodes_[v.id].param = &block;
    return v;
  }

  /// Used by op implementations.
  Var<Scalar> push(Mat value, bool requires_grad, Backprop backprop) {
    if (consumed_) throw UsageError("Tape: recording after backward()");
    nodes_.push_back(Node{std::move(value), Mat(), std::move(backprop), nullptr, requires_grad});
    return Var<Scalar>{this, nodes_.size() - 1};
  }

  const Mat& value(std::size_t id) const { return nodes_.at(id).value; }
  bool requires_grad(std::size_t id) const { return nodes_.at(id).requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  /// Adds `g` to the gradient of node `id` (no-op for constants).
  template <typename Derived>
  void accumulate(std::size_t id, const Eigen::MatrixBase<Derived>& g) {
    Node& n = nodes_[id];
    if (!n.requires_grad) return;
    if (n.grad.size() == 0)
      n.grad = g;
    else
      n.grad += g;
  }

  /// Gradient of node `id` after backward(); zero-sized when nothing flowed into it.
  const Mat& grad(std::size_t id) const { return nodes_.at(id).grad; }

  void backward(Var<Scalar> loss) {
    if (loss.tape != this || loss.id >= nodes_.size())
      throw UsageError("Tape: backward() on a value that was not recorded on this tape");
    if (consumed_) throw UsageError("Tape: backward() called twice");
    if (nodes_[loss.id].value.size() != 1) throw UsageError("Tape: backward() needs a 1x1 loss");
    consumed_ = true;
    if (!nodes_[loss.id].requires_grad) return;
    nodes_[loss.id].grad = Mat::Ones(1, 1);
    for (std::size_t i = loss.id + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (!n.requires_grad || n.grad.size() == 0) continue;
      if (n.backprop) n.backprop(*this, n.grad);
      if (n.param) n.param->grad += n.grad;
    }
  }

 private:
  struct Node {
    Mat value;
    Mat grad;
    Backprop backprop;
    ParameterBlock<Scalar>* param;
    bool requires_grad;
  };

  std::deque<Node> nodes_;  // stable references across push()
  bool consumed_ = false;
};

}  // namespace truckmorl::ad
