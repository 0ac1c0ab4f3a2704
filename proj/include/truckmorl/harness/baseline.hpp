#pragma once

#include <vector>

#include "truckmorl/env/config.hpp"

namespace truckmorl::harness {

struct BaselineSample {
  double speed = 0.0;          // m/s
  double cost_per_meter = 0.0; // EUR/m
  double total_cost = 0.0;     // EUR over the road length

  bool operator==(const BaselineSample&) const = default;
};

struct BaselineResult {
  double optimal_speed = 0.0;  // closed form
  double golden_speed = 0.0;   // numerical minimizer, cross-check
  double min_cost = 0.0;       // EUR over road_length at optimal_speed
  double road_length = 0.0;
  std::vector<BaselineSample> curve;
};

/// Driver plus traction-energy cost per metre at constant speed `v`. Throws UsageError for v <= 0.
double analytic_cost_per_meter(double v, const env::RewardParams& reward, const env::VehicleParams& vehicle);

/// Closed-form optimal cruising speed (independent of the constant rolling and grade terms).
double analytic_optimal_speed(const env::RewardParams& reward, const env::VehicleParams& vehicle);

/// Golden-section minimizer of analytic_cost_per_meter on [lo, hi].
double golden_section_speed(const env::RewardParams& reward, const env::VehicleParams& vehicle, double lo = 1.0,
                            double hi = 60.0, double tol = 1e-9);

/// Optimum plus the cost curve sampled on [lo, hi] at `step`.
BaselineResult analytic_optimum(const env::SimConfig& sim, double lo = 5.0, double hi = 25.0, double step = 0.01);

}  // namespace truckmorl::harness
