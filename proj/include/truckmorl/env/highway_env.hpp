#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "truckmorl/env/config.hpp"
#include "truckmorl/env/dynamics.hpp"
#include "truckmorl/env/mo_env.hpp"
#include "truckmorl/safety/safety_filter.hpp"

namespace truckmorl::env {

enum class VehicleKind { ego, car, truck };
enum class LaneChange { none, left, right };

/// Tactical actions of the ego truck, in network output order.
enum class Action : int {
  short_gap = 0,
  medium_gap = 1,
  long_gap = 2,
  speed_up = 3,
  slow_down = 4,
  maintain = 5,
  lane_left = 6,
  lane_right = 7,
};
inline constexpr int kActionCount = 8;
inline constexpr int kFeaturesPerVehicle = 9;
inline constexpr int kEgoFeatures = 9;

const char* action_name(int action);

struct VehicleState {
  int id = 0;
  VehicleKind kind = VehicleKind::car;
  double x = 0.0;  // front bumper, m
  double y = 0.0;  // lateral centre, m (lane k spans [k w, (k+1) w], lane 0 is rightmost)
  int lane = 0;
  double speed = 0.0;
  double accel = 0.0;  // last applied acceleration
  double length = 5.0;
  double width = 1.8;
  double max_speed = 0.0;
  LaneChange maneuver = LaneChange::none;
  int target_lane = -1;
  double maneuver_elapsed = 0.0;
  double since_lane_change = 1e9;  // seconds since the last maneuver finished

  double rear() const { return x - length; }
  bool indicator_left() const { return maneuver == LaneChange::left; }
  bool indicator_right() const { return maneuver == LaneChange::right; }
};

struct EgoCommand {
  double desired_speed = 20.0;
  double time_gap = 2.0;
};

/// One row of a substep trace.
struct TraceRow {
  double t;
  int id;
  int lane;
  double x;
  double v;
  double a;
};

/// Three-lane highway around an ego truck with a moving window of surrounding traffic.
///
/// The ego is driven by IDM with a commanded desired speed and time gap; every
/// decision runs 1 s of 0.1 s substeps (4 s for a lane change). Surrounding vehicles
/// follow Krauss and change lanes by a simple incentive rule gated by the same safety
/// filter that masks the ego's lane changes. Vehicles leaving the window around the ego
/// re-enter at the opposite boundary, so the population stays constant.
class HighwayEnv : public MoEnv {
 public:
  explicit HighwayEnv(SimConfig config);

  Observation reset(std::uint64_t seed) override;
  StepResult step(int action) override;
  int observation_size() const override { return kEgoFeatures + (kFeaturesPerVehicle + 1) * config_.sensed_slots; }
  int action_count() const override { return kActionCount; }
  int reward_size() const override { return 3; }

  const SimConfig& config() const { return config_; }
  const VehicleState& ego() const { return ego_; }
  const std::vector<VehicleState>& traffic() const { return traffic_; }
  /// Scenario construction hooks for tests and replays.
  std::vector<VehicleState>& mutable_traffic() { return traffic_; }
  VehicleState& mutable_ego() { return ego_; }
  EgoCommand& mutable_command() { return command_; }

  const EgoCommand& command() const { return command_; }
  int pending_spawns() const { return static_cast<int>(pending_.size()); }
  int steps() const { return steps_; }
  double time() const { return time_; }
  double start_position() const { return start_x_; }
  bool done() const { return done_; }

  ActionMask action_mask() const;
  Observation observe() const;

  /// Gaps around the ego for a lane change in `direction` (+1 left, -1 right).
  safety::GapObservation ego_gaps(int direction) const;
  /// Safety-filter verdict for an ego lane change; nullopt when the lane does not exist.
  std::optional<safety::SafetyVerdict> ego_lane_change_verdict(int direction) const;

  /// Removes vehicles outside the window and inserts pending ones where safe.
  void respawn_window();

  /// Appends one row per vehicle per substep to `sink` (nullptr disables tracing).
  void set_trace(std::vector<TraceRow>* sink) { trace_ = sink; }

 private:
  enum class Side { front, rear };
  struct Pending {
    int id;
    VehicleKind kind;
    Side side;
  };

  struct Follow {
    const VehicleState* leader = nullptr;
    double gap = 0.0;  // net bumper-to-bumper
  };

  // Lanes touched by the vehicle's footprint, plus its target lane when maneuvering.
  unsigned spanned_lanes(const VehicleState& v) const;
  unsigned occupied_lanes(const VehicleState& v) const;
  Follow leader_of(const VehicleState& v) const;
  safety::GapObservation gaps_for(const VehicleState& v, int target_lane) const;
  safety::SafetyParams safety_params_for(const VehicleState& v) const;

  double ego_acceleration() const;
  void advance_lateral(VehicleState& v, double lateral_speed, double dt) const;
  void traffic_lane_decisions();
  CollisionKind detect_collision() const;
  void populate();
  bool try_insert(const Pending& p);
  double sample_max_speed(VehicleKind kind);
  VehicleState make_vehicle(int id, VehicleKind kind);
  const KraussParams& krauss(const VehicleState& v) const;
  double lane_center(int lane) const { return (lane + 0.5) * config_.lane_width; }
  int lane_of(double y) const;
  void record_trace();

  struct SubstepResult {
    CollisionKind collision = CollisionKind::none;
    double energy_kwh = 0.0;
  };
  SubstepResult substep();

  SimConfig config_;
  std::mt19937_64 rng_;
  VehicleState ego_;
  EgoCommand command_;
  std::vector<VehicleState> traffic_;
  std::vector<Pending> pending_;
  double time_ = 0.0;
  double start_x_ = 0.0;
  int steps_ = 0;
  bool done_ = true;
  std::vector<TraceRow>* trace_ = nullptr;
};

}  // namespace truckmorl::env
