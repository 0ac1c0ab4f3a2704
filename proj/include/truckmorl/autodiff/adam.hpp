#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "truckmorl/autodiff/parameters.hpp"
#include "truckmorl/errors.hpp"

namespace truckmorl::ad {

struct AdamConfig {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename Scalar>
struct AdamState {
  AdamConfig config;
  std::vector<Matrix<Scalar>> first_moment;
  std::vector<Matrix<Scalar>> second_moment;
  std::int64_t step = 0;
};

template <typename Scalar>
AdamState<Scalar> make_adam_state(const ParameterSet<Scalar>& params, const AdamConfig& config) {
  AdamState<Scalar> s;
  s.config = config;
  for (const auto& b : params) {
    s.first_moment.push_back(Matrix<Scalar>::Zero(b.value.rows(), b.value.cols()));
    s.second_moment.push_back(Matrix<Scalar>::Zero(b.value.rows(), b.value.cols()));
  }
  return s;
}

/// One bias-corrected Adam update using the gradients stored in `params`.
/// Throws NumericalError naming the first block whose gradient is not finite; no
/// parameter is modified in that case.
template <typename Scalar>
void adam_step(ParameterSet<Scalar>& params, AdamState<Scalar>& state) {
  if (state.first_moment.size() != params.size()) throw UsageError("adam_step: state does not match parameters");
  for (const auto& b : params)
    if (!b.grad.allFinite()) throw NumericalError("adam_step: non-finite gradient in parameter block '" + b.name + "'");

  ++state.step;
  const AdamConfig& c = state.config;
  const double t = static_cast<double>(state.step);
  const Scalar correction1 = static_cast<Scalar>(1.0 - std::pow(c.beta1, t));
  const Scalar correction2 = static_cast<Scalar>(1.0 - std::pow(c.beta2, t));
  const Scalar b1 = static_cast<Scalar>(c.beta1), b2 = static_cast<Scalar>(c.beta2);
  const Scalar lr = static_cast<Scalar>(c.learning_rate), eps = static_cast<Scalar>(c.epsilon);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& b = params[i];
    if (state.first_moment[i].rows() != b.value.rows() || state.first_moment[i].cols() != b.value.cols())
      throw UsageError("adam_step: moment shape mismatch for '" + b.name + "'");
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    m = b1 * m + (Scalar(1) - b1) * b.grad;
    v = b2 * v + (Scalar(1) - b2) * b.grad.cwiseProduct(b.grad);
    b.value.array() -= lr * (m.array() / correction1) / ((v.array() / correction2).sqrt() + eps);
  }
}

/// Rescales all gradients so their joint L2 norm is at most max_norm. Returns the norm before scaling.
template <typename Scalar>
double clip_grad_norm(ParameterSet<Scalar>& params, double max_norm) {
  double sq = 0.0;
  for (const auto& b : params) sq += static_cast<double>(b.grad.squaredNorm());
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const Scalar s = static_cast<Scalar>(max_norm / (norm + 1e-6));
    for (auto& b : params) b.grad *= s;
  }
  return norm;
}

}  // namespace truckmorl::ad
