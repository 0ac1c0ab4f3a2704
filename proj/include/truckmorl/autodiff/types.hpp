#pragma once

#include <Eigen/Dense>

namespace truckmorl::ad {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Column-major boolean mask; `true` marks a valid entry.
using MaskMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;
using MaskVector = Eigen::Array<bool, Eigen::Dynamic, 1>;

/// Value substituted for masked logits before normalization.
inline constexpr double kMaskedLogit = -1e8;

}  // namespace truckmorl::ad
