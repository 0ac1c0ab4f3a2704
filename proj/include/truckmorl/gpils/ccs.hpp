#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "truckmorl/moppo/weights.hpp"

namespace truckmorl::gpils {

using moppo::WeightVector;

/// Uniform lattice on the (d-1)-simplex: every w = k / divisions with integer k summing to divisions.
/// Ordered lexicographically on k.
std::vector<WeightVector> simplex_lattice(int dimension, int divisions);

/// Smallest lattice resolution whose point count is at least `min_points`.
int lattice_divisions_for(int dimension, int min_points);

struct CornerOptions {
  double dedup_tolerance = 1e-6;
};

/// Vertices of the polyhedron {(w, u) : w on the simplex, u >= w^T v for every v} projected onto w,
/// together with the simplex extreme points; sorted lexicographically.
std::vector<WeightVector> corner_weights(const std::vector<Eigen::VectorXd>& values, const CornerOptions& options = {});

struct CcsEntry {
  WeightVector weight;    // conditioning weight the policy was registered under
  Eigen::VectorXd value;  // discounted value vector
  int snapshot = 0;       // parameter snapshot id (training iteration)
  Eigen::VectorXd standard_error;  // of `value` over the evaluation episodes; empty if unknown
};

struct CcsState {
  std::vector<WeightVector> visited;  // M
  std::vector<CcsEntry> entries;      // V
  int iteration = 0;

  std::vector<Eigen::VectorXd> values() const;
  /// max over entries of w^T v; -inf when empty.
  double best_scalarized(const WeightVector& w) const;
};

/// Indices of value vectors that attain max_v w^T v (within a relative 1e-9) at some point of the
/// 0.01 simplex lattice or at a corner weight of the set. The corners make the pruning exact.
std::vector<std::size_t> undominated_indices(const std::vector<Eigen::VectorXd>& values);

/// Drops dominated entries, then drops visited weights left without a registered entry.
void remove_dominated(CcsState& ccs);

/// Tolerance used when comparing weights for set membership in M.
inline constexpr double kWeightTolerance = 1e-6;

}  // namespace truckmorl::gpils
