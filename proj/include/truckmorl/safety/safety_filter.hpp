#pragma once

#include <array>
#include <optional>
#include <string>

namespace truckmorl::safety {

struct SafetyParams {
  double standstill_gap = 2.0;       // s0, m
  double time_headway = 1.0;         // T_safe, s
  double max_accel = 1.0;            // a_max, m/s^2
  double comfortable_decel = 3.0;    // b_safe, m/s^2
  double epsilon = 1e-3;             // s
  double lane_width = 3.2;           // m
  double lateral_speed = 0.8;        // m/s

  void validate() const;
};

struct LaneChangeTimes {
  double duration;  // time to move one lane width
  double enter;     // ego's side first crosses into the target lane
  double exit;      // ego's other side leaves the current lane
};

/// Neighbor seen from the ego. `gap` is the net bumper-to-bumper distance (>= 0).
struct Neighbor {
  double gap;
  double speed;
};

/// Nearest neighbors relevant to one candidate lane change. Absent neighbors are +inf gaps.
struct GapObservation {
  std::optional<Neighbor> front_current;
  std::optional<Neighbor> front_target;
  std::optional<Neighbor> rear_target;
  double ego_speed = 0.0;
  double ego_width = 2.55;
};

/// Per-condition outcome. Margins are left-hand side minus required value (positive = slack);
/// vacuous conditions report +inf.
struct SafetyVerdict {
  bool admissible = true;
  std::array<bool, 4> passed{true, true, true, true};
  std::array<double, 4> margin{};

  /// 1-based indices of failed conditions, e.g. "1,4"; empty when admissible.
  std::string failed_conditions() const;
};

LaneChangeTimes lane_change_times(double lane_width, double ego_width, double lateral_speed);

/// IDM-style minimum gap to a leader for follower speed v and closing speed dv.
double min_gap(double v, double dv, const SafetyParams& params);

/// Deceleration the faster rear vehicle needs to avoid the merging ego.
double required_deceleration(double v_rear, double v_ego, double rear_gap, double t_enter, double epsilon);

SafetyVerdict lane_change_safe(const GapObservation& gaps, const SafetyParams& params);

}  // namespace truckmorl::safety
