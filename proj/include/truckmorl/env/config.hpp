#pragma once

#include <cstdint>

#include "truckmorl/safety/safety_filter.hpp"

namespace truckmorl::env {

/// Intelligent Driver Model constants for the ego's longitudinal controller.
struct IdmParams {
  double standstill_gap = 2.0;  // s0, m
  double exponent = 4.0;        // delta
  double comfortable_decel = 2.0;  // b, m/s^2
};

/// Krauss car-following constants for one vehicle class.
struct KraussParams {
  double accel = 1.5;         // m/s^2
  double decel = 2.0;         // b, m/s^2
  double reaction_time = 1.0; // tau, s
  double sigma = 0.2;         // dawdling
  double min_gap = 2.5;       // subtracted from the net gap, m
};

struct RewardParams {
  double target_reward = 4.41;        // R_tar
  double collision_penalty = 1000.0;  // P_c
  double driver_cost_per_hour = 50.0; // C_dr, EUR/h
  double energy_cost_per_kwh = 0.5;   // C_el, EUR/kWh
};

/// Longitudinal-dynamics constants of the ego truck.
struct VehicleParams {
  double mass = 44000.0;        // kg
  double drag_coefficient = 0.6;
  double frontal_area = 10.0;   // m^2
  double air_density = 1.2;     // kg/m^3
  double gravity = 9.81;        // m/s^2
  double rolling_resistance = 0.006;
  double slope_percent = 0.0;
};

struct VehicleGeometry {
  double length;
  double width;
};

struct SpeedDistribution {
  double mean;
  double stddev;
};

struct SimConfig {
  double road_length = 3000.0;
  double window_length = 400.0;
  int lane_count = 3;
  double lane_width = 3.2;
  double density = 0.0;  // vehicles per metre
  double truck_fraction = 0.2;
  SpeedDistribution car_speed{23.0, 3.8};
  SpeedDistribution truck_speed{20.0, 0.8};
  double min_spawn_speed = 5.0;

  double ego_max_speed = 25.0;
  double ego_max_accel = 1.0;  // m/s^2; see README
  double ego_max_decel = 6.0;
  double ego_start_speed = 20.0;
  double ego_start_desired_speed = 20.0;
  double ego_start_time_gap = 2.0;
  double ego_lateral_speed = 0.8;
  int max_steps = 200;
  double substep = 0.1;
  double longitudinal_step = 1.0;

  VehicleGeometry ego_geometry{16.5, 2.55};
  VehicleGeometry car_geometry{5.0, 1.8};
  VehicleGeometry truck_geometry{12.0, 2.5};

  IdmParams idm{};
  KraussParams car_krauss{1.5, 2.0, 1.0, 0.2, 2.5};
  KraussParams truck_krauss{0.8, 1.5, 1.0, 0.2, 2.5};
  double traffic_lateral_speed = 1.0;
  double lane_change_cooldown = 4.0;
  double lane_change_incentive = 2.0;

  safety::SafetyParams safety{};
  RewardParams reward{};
  VehicleParams vehicle{};

  int sensed_slots = 15;
  std::uint64_t seed = 0;

  /// Number of surrounding vehicles kept in the moving window.
  int traffic_count() const;
  int truck_count() const;
  double lateral_duration() const { return lane_width / ego_lateral_speed; }

  void validate() const;
};

}  // namespace truckmorl::env
