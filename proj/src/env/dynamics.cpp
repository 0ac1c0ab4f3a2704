#include "truckmorl/env/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "truckmorl/errors.hpp"

namespace truckmorl::env {

double idm_accel(double v, double v0, double time_gap, double gap, double dv, double max_accel,
                 double comfortable_decel, double standstill_gap, double exponent, double max_decel) {
  if (!(v0 > 0.0)) throw ConfigError("idm_accel: desired speed must be positive");
  if (!(gap > 0.0)) throw UsageError("idm_accel: non-positive gap (collision)");
  const double desired_gap = standstill_gap + v * time_gap + v * dv / (2.0 * std::sqrt(max_accel * comfortable_decel));
  const double interaction = std::isinf(gap) ? 0.0 : (desired_gap / gap) * (desired_gap / gap);
  const double a = max_accel * (1.0 - std::pow(v / v0, exponent) - interaction);
  return std::clamp(a, -max_decel, max_accel);
}

double krauss_speed(double v, std::optional<double> leader_speed, double gap, double max_speed,
                    const KraussParams& p, double dt, double eta) {
  if (!(dt > 0.0)) throw ConfigError("krauss_speed: dt must be positive");
  double v_safe = std::numeric_limits<double>::infinity();
  if (leader_speed) {
    const double vl = *leader_speed;
    v_safe = vl + (gap - vl * p.reaction_time) / ((v + vl) / (2.0 * p.decel) + p.reaction_time);
  }
  const double v_des = std::min({v + p.accel * dt, v_safe, max_speed});
  return std::max(0.0, v_des - p.sigma * eta * p.accel * dt);
}

double energy_step(double mass, double accel, double speed, double dt, const VehicleParams& p) {
  const double force = mass * accel + 0.5 * p.drag_coefficient * p.frontal_area * p.air_density * speed * speed +
                       mass * p.gravity * p.rolling_resistance +
                       mass * p.gravity * std::sin(std::atan(p.slope_percent / 100.0));
  const double joules = std::max(0.0, force * speed * dt);
  return joules / 3.6e6;
}

Eigen::Vector3d reward_vector(Event event, double dt, double energy_kwh, const RewardParams& p) {
  if (energy_kwh < 0.0) throw UsageError("reward_vector: negative energy");
  double safety = 0.0;
  if (event == Event::target) safety = p.target_reward;
  if (event == Event::collision) safety = -p.collision_penalty;
  return {safety, -p.driver_cost_per_hour * dt / 3600.0, -p.energy_cost_per_kwh * energy_kwh};
}

}  // namespace truckmorl::env
