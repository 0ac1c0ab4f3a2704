#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include <Eigen/Dense>

#include "truckmorl/autodiff/types.hpp"

namespace truckmorl::env {

using ActionMask = ad::MaskVector;

struct Observation {
  Eigen::VectorXd features;
  ActionMask mask;
};

enum class CollisionKind { none, ego_rear_ended, ego_hit_leader, side };

struct StepInfo {
  double dt = 0.0;            // nominal decision duration charged to the driver
  double elapsed = 0.0;       // simulated seconds before the step ended
  double energy_kwh = 0.0;
  double distance = 0.0;      // ego distance covered during the step
  bool lateral = false;       // step executed a lane change
  bool target_reached = false;
  CollisionKind collision = CollisionKind::none;
  std::string diagnostics;    // safety-filter rejections for the next decision
};

struct StepResult {
  Observation observation;
  Eigen::VectorXd reward;
  bool terminated = false;
  bool truncated = false;
  StepInfo info;
};

/// Episodic environment with a vector reward and a masked discrete action set.
class MoEnv {
 public:
  virtual ~MoEnv() = default;
  virtual Observation reset(std::uint64_t seed) = 0;
  virtual StepResult step(int action) = 0;
  virtual int observation_size() const = 0;
  virtual int action_count() const = 0;
  virtual int reward_size() const = 0;
};

using EnvFactory = std::function<std::unique_ptr<MoEnv>()>;

}  // namespace truckmorl::env
