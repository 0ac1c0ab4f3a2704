#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace truckmorl::moppo {

/// Preference weight on the probability simplex (non-negative, summing to one).
class WeightVector {
 public:
  static constexpr double kTolerance = 1e-9;

  /// Throws ConfigError unless `w` lies on the simplex within kTolerance.
  explicit WeightVector(Eigen::VectorXd w);

  static WeightVector basis(int size, int index);
  /// Clips entries in [-kTolerance, 0) to zero and rescales to sum one before validating.
  static WeightVector normalized(Eigen::VectorXd w);

  int size() const { return static_cast<int>(w_.size()); }
  double operator[](int i) const { return w_(i); }
  const Eigen::VectorXd& values() const { return w_; }
  double dot(const Eigen::VectorXd& v) const;

  /// Component-wise equality within `tol`.
  bool near(const WeightVector& other, double tol) const;
  std::string to_string() const;

  friend bool operator==(const WeightVector& a, const WeightVector& b) { return a.w_ == b.w_; }
  /// Lexicographic on components.
  friend bool operator<(const WeightVector& a, const WeightVector& b);

 private:
  Eigen::VectorXd w_;
};

/// Drops weights within `tol` (component-wise) of an earlier entry, keeping first occurrences.
std::vector<WeightVector> unique_weights(const std::vector<WeightVector>& ws, double tol);

bool contains_weight(const std::vector<WeightVector>& ws, const WeightVector& w, double tol);

/// Stacks weights as columns of a d x n matrix.
Eigen::MatrixXd weight_matrix(const std::vector<WeightVector>& ws);

}  // namespace truckmorl::moppo
