#include "truckmorl/env/config.hpp"

#include <cmath>

#include "truckmorl/errors.hpp"

namespace truckmorl::env {

int SimConfig::traffic_count() const {
  if (density <= 0.0) return 0;
  // Fencepost count over the window: one vehicle per 1/density metres, both ends included.
  return static_cast<int>(std::floor(density * window_length + 1e-9)) + 1;
}

int SimConfig::truck_count() const {
  return static_cast<int>(std::floor(truck_fraction * traffic_count() + 1e-9));
}

void SimConfig::validate() const {
  if (lane_count < 2) throw ConfigError("sim: lane_count must be at least 2");
  if (!(road_length > 0 && window_length > 0 && window_length <= road_length))
    throw ConfigError("sim: need 0 < window_length <= road_length");
  if (!(lane_width > 0)) throw ConfigError("sim: lane_width must be positive");
  if (density < 0) throw ConfigError("sim: density must be non-negative");
  if (truck_fraction < 0 || truck_fraction > 1) throw ConfigError("sim: truck_fraction must be in [0, 1]");
  if (!(ego_max_speed > 0 && ego_max_accel > 0 && ego_max_decel > 0))
    throw ConfigError("sim: ego speed/acceleration limits must be positive");
  if (ego_start_speed < 0 || ego_start_speed > ego_max_speed) throw ConfigError("sim: ego_start_speed out of range");
  if (ego_start_desired_speed < 0 || ego_start_desired_speed > ego_max_speed)
    throw ConfigError("sim: ego_start_desired_speed out of range");
  if (ego_start_time_gap != 1.0 && ego_start_time_gap != 2.0 && ego_start_time_gap != 3.0)
    throw ConfigError("sim: ego_start_time_gap must be 1, 2 or 3");
  if (!(ego_lateral_speed > 0 && traffic_lateral_speed > 0)) throw ConfigError("sim: lateral speeds must be positive");
  if (max_steps < 1) throw ConfigError("sim: max_steps must be at least 1");
  if (!(substep > 0)) throw ConfigError("sim: substep must be positive");
  const double ratio = longitudinal_step / substep;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 || ratio < 1)
    throw ConfigError("sim: longitudinal_step must be a whole number of substeps");
  const double lat = lateral_duration() / substep;
  if (std::abs(lat - std::round(lat)) > 1e-6)
    throw ConfigError("sim: lane_width / ego_lateral_speed must be a whole number of substeps");
  if (ego_geometry.width >= 2 * lane_width) throw ConfigError("sim: ego wider than two lanes");
  if (sensed_slots < 0) throw ConfigError("sim: sensed_slots must be non-negative");
  if (car_speed.stddev < 0 || truck_speed.stddev < 0) throw ConfigError("sim: speed stddev must be non-negative");
  safety.validate();
}

}  // namespace truckmorl::env
