#include "truckmorl/safety/safety_filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "truckmorl/errors.hpp"

namespace truckmorl::safety {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void SafetyParams::validate() const {
  if (!(standstill_gap > 0 && time_headway > 0 && max_accel > 0 && comfortable_decel > 0 && epsilon > 0 &&
        lane_width > 0 && lateral_speed > 0))
    throw ConfigError("SafetyParams: every parameter must be strictly positive");
}

std::string SafetyVerdict::failed_conditions() const {
  std::string out;
  for (std::size_t i = 0; i < passed.size(); ++i) {
    if (passed[i]) continue;
    if (!out.empty()) out += ',';
    out += std::to_string(i + 1);
  }
  return out;
}

LaneChangeTimes lane_change_times(double lane_width, double ego_width, double lateral_speed) {
  if (!(lane_width > 0 && ego_width > 0 && lateral_speed > 0))
    throw ConfigError("lane_change_times: inputs must be positive");
  if (ego_width >= 2.0 * lane_width) throw ConfigError("lane_change_times: vehicle wider than two lanes");
  return {lane_width / lateral_speed, (lane_width - ego_width) / (2.0 * lateral_speed),
          (lane_width + ego_width) / (2.0 * lateral_speed)};
}

double min_gap(double v, double dv, const SafetyParams& p) {
  const double dynamic = p.time_headway * v + v * dv / (2.0 * std::sqrt(p.max_accel * p.comfortable_decel));
  return p.standstill_gap + std::max(0.0, dynamic);
}

double required_deceleration(double v_rear, double v_ego, double rear_gap, double t_enter, double epsilon) {
  if (!(v_rear > v_ego)) throw UsageError("required_deceleration: rear vehicle must be faster than the ego");
  const double closing = v_rear - v_ego;
  const double ttc = rear_gap / closing;
  return closing / std::max(ttc - t_enter, epsilon);
}

SafetyVerdict lane_change_safe(const GapObservation& g, const SafetyParams& p) {
  const LaneChangeTimes times = lane_change_times(p.lane_width, g.ego_width, p.lateral_speed);
  const double v = g.ego_speed;
  SafetyVerdict out;
  out.margin.fill(kInf);

  // 1: leader in the current lane until the ego has fully left it.
  if (g.front_current) {
    const double dv = v - g.front_current->speed;
    out.margin[0] = g.front_current->gap - dv * times.exit - min_gap(v, dv, p);
  }
  // 2: leader in the target lane, at entry and at the end of the maneuver.
  if (g.front_target) {
    const double dv = v - g.front_target->speed;
    const double need = min_gap(v, dv, p);
    out.margin[1] = std::min(g.front_target->gap - dv * times.enter, g.front_target->gap - dv * times.duration) - need;
  }
  // 3 and 4: follower in the target lane.
  if (g.rear_target) {
    const double vr = g.rear_target->speed;
    const double closing = vr - v;
    out.margin[2] = g.rear_target->gap - closing * times.enter - min_gap(vr, closing, p);
    if (closing > 0.0) {
      const double ttc = g.rear_target->gap / closing;
      if (ttc < times.duration)
        out.margin[3] = p.comfortable_decel - required_deceleration(vr, v, g.rear_target->gap, times.enter, p.epsilon);
    }
  }
  for (std::size_t i = 0; i < 4; ++i) {
    out.passed[i] = out.margin[i] >= 0.0;
    out.admissible = out.admissible && out.passed[i];
  }
  return out;
}

}  // namespace truckmorl::safety
