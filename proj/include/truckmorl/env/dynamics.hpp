#pragma once

#include <optional>

#include <Eigen/Dense>

#include "truckmorl/env/config.hpp"

namespace truckmorl::env {

enum class Event { none, collision, target };

/// IDM acceleration a(1 - (v/v0)^delta - (s*/s)^2), s* = s0 + vT + v dv / (2 sqrt(ab)),
/// clamped to [-max_decel, max_accel]. `gap` is the net distance to the leader (use +inf
/// for free road), `dv` the closing speed v - v_leader.
double idm_accel(double v, double v0, double time_gap, double gap, double dv, double max_accel, double comfortable_decel,
                 double standstill_gap, double exponent, double max_decel = 6.0);

/// Krauss safe-speed update. `leader_speed` empty means no leader. `gap` is the net
/// distance to the leader after subtracting the min gap; `eta` is the dawdling draw in [0, 1).
double krauss_speed(double v, std::optional<double> leader_speed, double gap, double max_speed,
                    const KraussParams& params, double dt, double eta);

/// Traction energy in kWh over dt; negative traction force yields zero (no recuperation).
double energy_step(double mass, double accel, double speed, double dt, const VehicleParams& params);

/// Reward vector [safety, driver, energy].
Eigen::Vector3d reward_vector(Event event, double dt, double energy_kwh, const RewardParams& params);

}  // namespace truckmorl::env
