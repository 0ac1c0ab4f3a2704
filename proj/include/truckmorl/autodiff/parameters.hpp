#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "truckmorl/autodiff/types.hpp"
#include "truckmorl/errors.hpp"

namespace truckmorl::ad {

template <typename Scalar>
struct ParameterBlock {
  std::string name;
  Matrix<Scalar> value;
  Matrix<Scalar> grad;
};

/// Named dense parameter blocks, each with a gradient slot of the same shape.
/// Blocks can only be added before `freeze()`.
template <typename Scalar>
class ParameterSet {
 public:
  std::size_t add(std::string name, Matrix<Scalar> value) {
    if (frozen_) throw UsageError("ParameterSet: cannot add '" + name + "' after freeze()");
    for (const auto& b : blocks_)
      if (b.name == name) throw UsageError("ParameterSet: duplicate block '" + name + "'");
    Matrix<Scalar> grad = Matrix<Scalar>::Zero(value.rows(), value.cols());
    blocks_.push_back({std::move(name), std::move(value), std::move(grad)});
    return blocks_.size() - 1;
  }

  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

  std::size_t size() const { return blocks_.size(); }
  ParameterBlock<Scalar>& operator[](std::size_t i) { return blocks_.at(i); }
  const ParameterBlock<Scalar>& operator[](std::size_t i) const { return blocks_.at(i); }
  auto begin() { return blocks_.begin(); }
  auto end() { return blocks_.end(); }
  auto begin() const { return blocks_.begin(); }
  auto end() const { return blocks_.end(); }

  std::size_t index_of(std::string_view name) const {
    for (std::size_t i = 0; i < blocks_.size(); ++i)
      if (blocks_[i].name == name) return i;
    throw UsageError("ParameterSet: no block named '" + std::string(name) + "'");
  }

  Eigen::Index count() const {
    Eigen::Index n = 0;
    for (const auto& b : blocks_) n += b.value.size();
    return n;
  }

  void zero_grad() {
    for (auto& b : blocks_) b.grad.setZero();
  }

  Vector<Scalar> flat_values() const { return flatten([](const auto& b) -> const auto& { return b.value; }); }
  Vector<Scalar> flat_grads() const { return flatten([](const auto& b) -> const auto& { return b.grad; }); }

  void set_flat_values(const Vector<Scalar>& flat) {
    if (flat.size() != count()) throw UsageError("ParameterSet: flat size mismatch");
    Eigen::Index offset = 0;
    for (auto& b : blocks_) {
      b.value = Eigen::Map<const Matrix<Scalar>>(flat.data() + offset, b.value.rows(), b.value.cols());
      offset += b.value.size();
    }
  }

  template <typename Other>
  ParameterSet<Other> cast() const {
    ParameterSet<Other> out;
    for (const auto& b : blocks_) out.add(b.name, b.value.template cast<Other>());
    if (frozen_) out.freeze();
    return out;
  }

 private:
  template <typename Get>
  Vector<Scalar> flatten(Get get) const {
    Vector<Scalar> flat(count());
    Eigen::Index offset = 0;
    for (const auto& b : blocks_) {
      const auto& m = get(b);
      flat.segment(offset, m.size()) = Eigen::Map<const Vector<Scalar>>(m.data(), m.size());
      offset += m.size();
    }
    return flat;
  }

  std::vector<ParameterBlock<Scalar>> blocks_;
  bool frozen_ = false;
};

}  // namespace truckmorl::ad
