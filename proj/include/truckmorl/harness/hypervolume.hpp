#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace truckmorl::harness {

/// Area dominated by `points` (maximization) and bounded below by `ref`, by a sorted sweep.
/// Points that do not strictly dominate `ref` are skipped; a note is appended to `warnings` if given.
double hypervolume(const std::vector<Eigen::Vector2d>& points, const Eigen::Vector2d& ref,
                   std::vector<std::string>* warnings = nullptr);

}  // namespace truckmorl::harness
