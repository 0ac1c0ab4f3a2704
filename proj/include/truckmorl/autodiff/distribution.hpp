#pragma once

#include <cmath>

#include "truckmorl/autodiff/types.hpp"
#include "truckmorl/errors.hpp"

namespace truckmorl::ad {

/// Softmax over `logits` after replacing masked entries with kMaskedLogit.
template <typename Derived>
Eigen::VectorXd masked_softmax(const Eigen::MatrixBase<Derived>& logits, const MaskVector& mask) {
  if (mask.size() != logits.size()) throw ConfigError("masked_softmax: mask size mismatch");
  if (!mask.any()) throw InvalidMaskError("masked_softmax: every action is masked");
  const Eigen::VectorXd z = logits.template cast<double>();
  const Eigen::VectorXd masked = mask.select(z, Eigen::VectorXd::Constant(z.size(), kMaskedLogit));
  const double m = masked.maxCoeff();
  Eigen::VectorXd p = (masked.array() - m).exp().matrix();
  return p / p.sum();
}

/// log of masked_softmax, computed stably.
template <typename Derived>
Eigen::VectorXd masked_log_softmax(const Eigen::MatrixBase<Derived>& logits, const MaskVector& mask) {
  if (mask.size() != logits.size()) throw ConfigError("masked_log_softmax: mask size mismatch");
  if (!mask.any()) throw InvalidMaskError("masked_log_softmax: every action is masked");
  const Eigen::VectorXd z = logits.template cast<double>();
  const Eigen::VectorXd masked = mask.select(z, Eigen::VectorXd::Constant(z.size(), kMaskedLogit));
  const double m = masked.maxCoeff();
  const double lse = m + std::log((masked.array() - m).exp().sum());
  return (masked.array() - lse).matrix();
}

/// Index of the largest unmasked entry; lowest index wins ties.
template <typename Derived>
int masked_argmax(const Eigen::MatrixBase<Derived>& scores, const MaskVector& mask) {
  if (mask.size() != scores.size()) throw ConfigError("masked_argmax: mask size mismatch");
  int best = -1;
  for (Eigen::Index a = 0; a < scores.size(); ++a) {
    if (!mask(a)) continue;
    if (best < 0 || scores(a) > scores(best)) best = static_cast<int>(a);
  }
  if (best < 0) throw InvalidMaskError("masked_argmax: every action is masked");
  return best;
}

}  // namespace truckmorl::ad
