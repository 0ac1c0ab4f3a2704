#include "truckmorl/env/highway_env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "truckmorl/errors.hpp"

namespace truckmorl::env {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLengthScale = 20.0;

int direction_of(LaneChange m) {
  if (m == LaneChange::left) return 1;
  if (m == LaneChange::right) return -1;
  return 0;
}

}  // namespace

const char* action_name(int action) {
  static const char* const names[kActionCount] = {"short_gap", "medium_gap", "long_gap", "speed_up",
                                                  "slow_down", "maintain",   "lane_left", "lane_right"};
  if (action < 0 || action >= kActionCount) return "invalid";
  return names[action];
}

HighwayEnv::HighwayEnv(SimConfig config) : config_(std::move(config)) {
  config_.validate();
  config_.safety.lane_width = config_.lane_width;
}

int HighwayEnv::lane_of(double y) const {
  const int lane = static_cast<int>(std::floor(y / config_.lane_width));
  return std::clamp(lane, 0, config_.lane_count - 1);
}

unsigned HighwayEnv::spanned_lanes(const VehicleState& v) const {
  const double lo = v.y - 0.5 * v.width;
  const double hi = v.y + 0.5 * v.width;
  unsigned bits = 0;
  for (int k = 0; k < config_.lane_count; ++k) {
    const double a = k * config_.lane_width;
    const double b = a + config_.lane_width;
    if (b > lo + 1e-9 && a < hi - 1e-9) bits |= 1u << k;
  }
  return bits;
}

unsigned HighwayEnv::occupied_lanes(const VehicleState& v) const {
  unsigned bits = spanned_lanes(v);
  if (v.maneuver != LaneChange::none) bits |= 1u << v.target_lane;
  return bits;
}

const KraussParams& HighwayEnv::krauss(const VehicleState& v) const {
  return v.kind == VehicleKind::truck ? config_.truck_krauss : config_.car_krauss;
}

HighwayEnv::Follow HighwayEnv::leader_of(const VehicleState& v) const {
  const unsigned lanes = occupied_lanes(v);
  Follow out;
  auto consider = [&](const VehicleState& g) {
    if (g.id == v.id || g.x <= v.x || !(spanned_lanes(g) & lanes)) return;
    if (!out.leader || g.x < out.leader->x) out.leader = &g;
  };
  consider(ego_);
  for (const VehicleState& g : traffic_) consider(g);
  if (out.leader) out.gap = out.leader->rear() - v.x;
  return out;
}

safety::GapObservation HighwayEnv::gaps_for(const VehicleState& v, int target_lane) const {
  safety::GapObservation obs;
  obs.ego_speed = v.speed;
  obs.ego_width = v.width;
  const unsigned current = 1u << v.lane;
  const unsigned target = 1u << target_lane;
  const VehicleState* front_current = nullptr;
  const VehicleState* front_target = nullptr;
  const VehicleState* rear_target = nullptr;
  auto consider = [&](const VehicleState& g) {
    if (g.id == v.id) return;
    const unsigned occ = occupied_lanes(g);
    if (g.x > v.x) {
      if ((occ & current) && (!front_current || g.x < front_current->x)) front_current = &g;
      if ((occ & target) && (!front_target || g.x < front_target->x)) front_target = &g;
    } else if ((occ & target) && (!rear_target || g.x > rear_target->x)) {
      rear_target = &g;
    }
  };
  consider(ego_);
  for (const VehicleState& g : traffic_) consider(g);
  if (front_current) obs.front_current = safety::Neighbor{std::max(0.0, front_current->rear() - v.x), front_current->speed};
  if (front_target) obs.front_target = safety::Neighbor{std::max(0.0, front_target->rear() - v.x), front_target->speed};
  if (rear_target) obs.rear_target = safety::Neighbor{std::max(0.0, v.rear() - rear_target->x), rear_target->speed};
  return obs;
}

safety::SafetyParams HighwayEnv::safety_params_for(const VehicleState& v) const {
  safety::SafetyParams p = config_.safety;
  p.lane_width = config_.lane_width;
  p.lateral_speed = v.kind == VehicleKind::ego ? config_.ego_lateral_speed : config_.traffic_lateral_speed;
  return p;
}

safety::GapObservation HighwayEnv::ego_gaps(int direction) const {
  const int target = ego_.lane + direction;
  if (direction != 1 && direction != -1) throw UsageError("ego_gaps: direction must be +1 or -1");
  if (target < 0 || target >= config_.lane_count) throw UsageError("ego_gaps: target lane does not exist");
  return gaps_for(ego_, target);
}

std::optional<safety::SafetyVerdict> HighwayEnv::ego_lane_change_verdict(int direction) const {
  const int target = ego_.lane + direction;
  if (target < 0 || target >= config_.lane_count) return std::nullopt;
  return safety::lane_change_safe(gaps_for(ego_, target), safety_params_for(ego_));
}

ActionMask HighwayEnv::action_mask() const {
  ActionMask mask = ActionMask::Constant(kActionCount, true);
  mask(static_cast<int>(Action::speed_up)) = command_.desired_speed + 1.0 <= config_.ego_max_speed + 1e-9;
  mask(static_cast<int>(Action::slow_down)) = command_.desired_speed - 1.0 >= -1e-9;
  for (int dir : {1, -1}) {
    const auto verdict = ego_lane_change_verdict(dir);
    const int bit = static_cast<int>(dir == 1 ? Action::lane_left : Action::lane_right);
    mask(bit) = verdict.has_value() && verdict->admissible;
  }
  return mask;
}

Observation HighwayEnv::observe() const {
  const double half = 0.5 * config_.window_length;
  const double lane_norm = config_.lane_count > 1 ? config_.lane_count - 1 : 1;
  const double speed_scale = config_.ego_max_speed;
  Observation obs;
  obs.features = Eigen::VectorXd::Zero(observation_size());
  auto& f = obs.features;

  const Follow lead = leader_of(ego_);
  f(0) = (ego_.x - start_x_) / config_.road_length;
  f(1) = ego_.speed / speed_scale;
  f(2) = direction_of(ego_.maneuver);
  f(3) = ego_.indicator_left() ? 1.0 : 0.0;
  f(4) = ego_.indicator_right() ? 1.0 : 0.0;
  f(5) = ego_.lane / lane_norm;
  f(6) = ego_.length / kLengthScale;
  f(7) = ego_.width / config_.lane_width;
  f(8) = lead.leader ? std::clamp(lead.gap / half, -1.0, 1.0) : 1.0;

  std::vector<const VehicleState*> sorted;
  sorted.reserve(traffic_.size());
  for (const VehicleState& v : traffic_) sorted.push_back(&v);
  std::sort(sorted.begin(), sorted.end(), [&](const VehicleState* a, const VehicleState* b) {
    const double da = std::abs(a->x - ego_.x);
    const double db = std::abs(b->x - ego_.x);
    return da != db ? da < db : a->id < b->id;
  });
  const int slots = config_.sensed_slots;
  const int n = std::min<int>(slots, static_cast<int>(sorted.size()));
  const int presence = kEgoFeatures + kFeaturesPerVehicle * slots;
  for (int i = 0; i < n; ++i) {
    const VehicleState& v = *sorted[i];
    const int o = kEgoFeatures + kFeaturesPerVehicle * i;
    f(o + 0) = std::clamp((v.x - ego_.x) / half, -1.0, 1.0);
    f(o + 1) = (v.y - ego_.y) / (config_.lane_count * config_.lane_width);
    f(o + 2) = (v.speed - ego_.speed) / speed_scale;
    f(o + 3) = direction_of(v.maneuver);
    f(o + 4) = v.lane / lane_norm;
    f(o + 5) = v.indicator_left() ? 1.0 : 0.0;
    f(o + 6) = v.indicator_right() ? 1.0 : 0.0;
    f(o + 7) = v.length / kLengthScale;
    f(o + 8) = v.width / config_.lane_width;
    f(presence + i) = 1.0;
  }
  obs.mask = action_mask();
  return obs;
}

double HighwayEnv::sample_max_speed(VehicleKind kind) {
  const SpeedDistribution d = kind == VehicleKind::truck ? config_.truck_speed : config_.car_speed;
  if (d.stddev == 0.0) return std::max(d.mean, config_.min_spawn_speed);
  std::normal_distribution<double> normal(d.mean, d.stddev);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const double s = normal(rng_);
    if (std::abs(s - d.mean) <= 3.0 * d.stddev && s >= config_.min_spawn_speed) return s;
  }
  return std::max(d.mean, config_.min_spawn_speed);
}

VehicleState HighwayEnv::make_vehicle(int id, VehicleKind kind) {
  const VehicleGeometry g = kind == VehicleKind::truck ? config_.truck_geometry : config_.car_geometry;
  VehicleState v;
  v.id = id;
  v.kind = kind;
  v.length = g.length;
  v.width = g.width;
  v.max_speed = sample_max_speed(kind);
  v.speed = v.max_speed;
  return v;
}

bool HighwayEnv::try_insert(const Pending& p) {
  const double half = 0.5 * config_.window_length;
  VehicleState v = make_vehicle(p.id, p.kind);
  v.x = p.side == Side::front ? ego_.x + half : ego_.x - half + v.length;

  std::vector<int> lanes(config_.lane_count);
  std::iota(lanes.begin(), lanes.end(), 0);
  std::shuffle(lanes.begin(), lanes.end(), rng_);

  for (int lane : lanes) {
    v.lane = lane;
    v.y = lane_center(lane);
    const unsigned bit = 1u << lane;
    const VehicleState* leader = nullptr;
    const VehicleState* follower = nullptr;
    auto consider = [&](const VehicleState& g) {
      if (!(occupied_lanes(g) & bit)) return;
      if (g.x >= v.x) {
        if (!leader || g.x < leader->x) leader = &g;
      } else if (!follower || g.x > follower->x) {
        follower = &g;
      }
    };
    consider(ego_);
    for (const VehicleState& g : traffic_) consider(g);

    double speed = v.max_speed;
    if (leader) {
      const double gap = leader->rear() - v.x - krauss(v).min_gap;
      if (gap <= 0) continue;
      if (gap < safety::min_gap(speed, speed - leader->speed, config_.safety)) speed = std::min(speed, leader->speed);
      if (gap < safety::min_gap(speed, speed - leader->speed, config_.safety)) continue;
    }
    if (follower) {
      const double extra = follower->kind == VehicleKind::ego ? 0.0 : krauss(*follower).min_gap;
      const double gap = v.rear() - follower->x - extra;
      if (gap <= 0 || gap < safety::min_gap(follower->speed, follower->speed - speed, config_.safety)) continue;
    }
    v.speed = speed;
    traffic_.push_back(v);
    return true;
  }
  return false;
}

void HighwayEnv::respawn_window() {
  const double half = 0.5 * config_.window_length;
  for (auto it = traffic_.begin(); it != traffic_.end();) {
    if (it->x < ego_.x - half) {
      pending_.push_back({it->id, it->kind, Side::front});
      it = traffic_.erase(it);
    } else if (it->x > ego_.x + half) {
      pending_.push_back({it->id, it->kind, Side::rear});
      it = traffic_.erase(it);
    } else {
      ++it;
    }
  }
  for (auto it = pending_.begin(); it != pending_.end();) {
    if (try_insert(*it))
      it = pending_.erase(it);
    else
      ++it;
  }
}

void HighwayEnv::populate() {
  const int total = config_.traffic_count();
  const int trucks = config_.truck_count();
  const double half = 0.5 * config_.window_length;
  std::uniform_int_distribution<int> lane_dist(0, config_.lane_count - 1);
  for (int i = 0; i < total; ++i) {
    const VehicleKind kind = i < trucks ? VehicleKind::truck : VehicleKind::car;
    VehicleState v = make_vehicle(i + 1, kind);
    std::uniform_real_distribution<double> x_dist(ego_.x - half + v.length, ego_.x + half);
    bool placed = false;
    for (int attempt = 0; attempt < 2000 && !placed; ++attempt) {
      v.lane = lane_dist(rng_);
      v.y = lane_center(v.lane);
      v.x = x_dist(rng_);
      const VehicleState* leader = nullptr;
      const VehicleState* follower = nullptr;
      const unsigned bit = 1u << v.lane;
      auto consider = [&](const VehicleState& g) {
        if (!(spanned_lanes(g) & bit)) return;
        if (g.x >= v.x) {
          if (!leader || g.x < leader->x) leader = &g;
        } else if (!follower || g.x > follower->x) {
          follower = &g;
        }
      };
      consider(ego_);
      for (const VehicleState& g : traffic_) consider(g);
      v.speed = v.max_speed;
      if (leader) {
        const double gap = leader->rear() - v.x - krauss(v).min_gap;
        if (gap <= 0) continue;
        if (gap < safety::min_gap(v.speed, v.speed - leader->speed, config_.safety))
          v.speed = std::min(v.speed, leader->speed);
        if (gap < safety::min_gap(v.speed, v.speed - leader->speed, config_.safety)) continue;
      }
      if (follower) {
        const double extra = follower->kind == VehicleKind::ego ? 0.0 : krauss(*follower).min_gap;
        const double gap = v.rear() - follower->x - extra;
        if (gap <= 0 || gap < safety::min_gap(follower->speed, follower->speed - v.speed, config_.safety)) continue;
      }
      placed = true;
    }
    if (!placed) throw ConfigError("reset: traffic density too high to place vehicles without overlap");
    traffic_.push_back(v);
  }
}

Observation HighwayEnv::reset(std::uint64_t seed) {
  rng_.seed(seed);
  ego_ = VehicleState{};
  ego_.id = 0;
  ego_.kind = VehicleKind::ego;
  ego_.x = 0.0;
  ego_.lane = 0;
  ego_.y = lane_center(0);
  ego_.speed = config_.ego_start_speed;
  ego_.length = config_.ego_geometry.length;
  ego_.width = config_.ego_geometry.width;
  ego_.max_speed = config_.ego_max_speed;
  command_ = EgoCommand{config_.ego_start_desired_speed, config_.ego_start_time_gap};
  traffic_.clear();
  pending_.clear();
  time_ = 0.0;
  start_x_ = ego_.x;
  steps_ = 0;
  done_ = false;
  populate();
  return observe();
}

double HighwayEnv::ego_acceleration() const {
  const double dt = config_.substep;
  if (command_.desired_speed <= 0.0) return -std::min(config_.idm.comfortable_decel, ego_.speed / dt);
  const Follow lead = leader_of(ego_);
  double gap = kInf;
  double dv = 0.0;
  if (lead.leader) {
    gap = std::max(lead.gap, 1e-3);
    dv = ego_.speed - lead.leader->speed;
  }
  return idm_accel(ego_.speed, command_.desired_speed, command_.time_gap, gap, dv, config_.ego_max_accel,
                   config_.idm.comfortable_decel, config_.idm.standstill_gap, config_.idm.exponent,
                   config_.ego_max_decel);
}

void HighwayEnv::advance_lateral(VehicleState& v, double lateral_speed, double dt) const {
  if (v.maneuver == LaneChange::none) {
    v.since_lane_change += dt;
    return;
  }
  const int dir = direction_of(v.maneuver);
  const int origin = v.target_lane - dir;
  const double duration = config_.lane_width / lateral_speed;
  v.maneuver_elapsed += dt;
  if (v.maneuver_elapsed >= duration - 1e-9) {
    v.y = lane_center(v.target_lane);
    v.lane = v.target_lane;
    v.maneuver = LaneChange::none;
    v.target_lane = -1;
    v.maneuver_elapsed = 0.0;
    v.since_lane_change = 0.0;
    return;
  }
  v.y = lane_center(origin) + dir * lateral_speed * v.maneuver_elapsed;
  v.lane = lane_of(v.y);
}

void HighwayEnv::traffic_lane_decisions() {
  for (VehicleState& v : traffic_) {
    if (v.maneuver != LaneChange::none || v.since_lane_change < config_.lane_change_cooldown - 1e-9) continue;
    const Follow lead = leader_of(v);
    if (!lead.leader || !(lead.leader->speed < v.max_speed - config_.lane_change_incentive)) continue;
    const double leader_speed = lead.leader->speed;
    for (int dir : {1, -1}) {
      const int target = v.lane + dir;
      if (target < 0 || target >= config_.lane_count) continue;
      const safety::GapObservation gaps = gaps_for(v, target);
      if (gaps.front_target && gaps.front_target->speed <= leader_speed) continue;
      if (!safety::lane_change_safe(gaps, safety_params_for(v)).admissible) continue;
      v.maneuver = dir == 1 ? LaneChange::left : LaneChange::right;
      v.target_lane = target;
      v.maneuver_elapsed = 0.0;
      break;
    }
  }
}

CollisionKind HighwayEnv::detect_collision() const {
  for (const VehicleState& g : traffic_) {
    const bool longitudinal = g.rear() < ego_.x - 1e-9 && ego_.rear() < g.x - 1e-9;
    const bool lateral = std::abs(g.y - ego_.y) < 0.5 * (g.width + ego_.width) - 1e-9;
    if (!(longitudinal && lateral)) continue;
    if (ego_.maneuver != LaneChange::none || g.maneuver != LaneChange::none) return CollisionKind::side;
    return g.x > ego_.x ? CollisionKind::ego_hit_leader : CollisionKind::ego_rear_ended;
  }
  return CollisionKind::none;
}

HighwayEnv::SubstepResult HighwayEnv::substep() {
  const double dt = config_.substep;
  SubstepResult out;

  const double a_ego = ego_acceleration();
  std::vector<double> next_speed(traffic_.size());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < traffic_.size(); ++i) {
    const VehicleState& v = traffic_[i];
    const Follow lead = leader_of(v);
    std::optional<double> leader_speed;
    double gap = kInf;
    if (lead.leader) {
      leader_speed = lead.leader->speed;
      gap = lead.gap - krauss(v).min_gap;
    }
    next_speed[i] = std::min(krauss_speed(v.speed, leader_speed, gap, v.max_speed, krauss(v), dt, unit(rng_)), v.max_speed);
  }

  traffic_lane_decisions();

  const double v_ego = std::clamp(ego_.speed + a_ego * dt, 0.0, config_.ego_max_speed);
  const double ego_mean = 0.5 * (ego_.speed + v_ego);
  ego_.accel = (v_ego - ego_.speed) / dt;
  ego_.x += ego_mean * dt;
  out.energy_kwh = energy_step(config_.vehicle.mass, ego_.accel, ego_mean, dt, config_.vehicle);
  ego_.speed = v_ego;
  advance_lateral(ego_, config_.ego_lateral_speed, dt);

  for (std::size_t i = 0; i < traffic_.size(); ++i) {
    VehicleState& v = traffic_[i];
    v.accel = (next_speed[i] - v.speed) / dt;
    v.x += 0.5 * (v.speed + next_speed[i]) * dt;
    v.speed = next_speed[i];
    advance_lateral(v, config_.traffic_lateral_speed, dt);
  }

  time_ += dt;
  out.collision = detect_collision();
  respawn_window();
  record_trace();
  return out;
}

void HighwayEnv::record_trace() {
  if (!trace_) return;
  trace_->push_back({time_, ego_.id, ego_.lane, ego_.x, ego_.speed, ego_.accel});
  for (const VehicleState& v : traffic_) trace_->push_back({time_, v.id, v.lane, v.x, v.speed, v.accel});
}

StepResult HighwayEnv::step(int action) {
  if (done_) throw UsageError("step: episode is over, call reset()");
  if (action < 0 || action >= kActionCount) throw UsageError("step: action index out of range");
  const ActionMask mask = action_mask();
  if (!mask(action)) throw UsageError(std::string("step: action '") + action_name(action) + "' is masked");

  bool lateral = false;
  switch (static_cast<Action>(action)) {
    case Action::short_gap: command_.time_gap = 1.0; break;
    case Action::medium_gap: command_.time_gap = 2.0; break;
    case Action::long_gap: command_.time_gap = 3.0; break;
    case Action::speed_up: command_.desired_speed = std::min(command_.desired_speed + 1.0, config_.ego_max_speed); break;
    case Action::slow_down: command_.desired_speed = std::max(command_.desired_speed - 1.0, 0.0); break;
    case Action::maintain: break;
    case Action::lane_left:
    case Action::lane_right: {
      const int dir = action == static_cast<int>(Action::lane_left) ? 1 : -1;
      ego_.maneuver = dir == 1 ? LaneChange::left : LaneChange::right;
      ego_.target_lane = ego_.lane + dir;
      ego_.maneuver_elapsed = 0.0;
      lateral = true;
      break;
    }
  }

  const double nominal = lateral ? config_.lateral_duration() : config_.longitudinal_step;
  const int substeps = static_cast<int>(std::lround(nominal / config_.substep));
  const double x_before = ego_.x;

  StepResult result;
  Event event = Event::none;
  for (int k = 0; k < substeps; ++k) {
    const SubstepResult r = substep();
    result.info.energy_kwh += r.energy_kwh;
    result.info.elapsed += config_.substep;
    if (r.collision != CollisionKind::none) {
      event = Event::collision;
      result.info.collision = r.collision;
      break;
    }
    if (ego_.x - start_x_ >= config_.road_length) {
      event = Event::target;
      result.info.target_reached = true;
      break;
    }
  }

  ++steps_;
  result.info.dt = nominal;
  result.info.distance = ego_.x - x_before;
  result.info.lateral = lateral;
  result.reward = reward_vector(event, nominal, result.info.energy_kwh, config_.reward);
  result.terminated = event != Event::none;
  result.truncated = !result.terminated && steps_ >= config_.max_steps;
  done_ = result.terminated || result.truncated;
  result.observation = observe();

  std::ostringstream diag;
  for (int dir : {1, -1}) {
    const auto verdict = ego_lane_change_verdict(dir);
    if (!verdict || verdict->admissible) continue;
    if (diag.tellp() > 0) diag << "; ";
    diag << (dir == 1 ? "left" : "right") << " rejected by " << verdict->failed_conditions() << " (margins";
    for (double m : verdict->margin) diag << ' ' << m;
    diag << ')';
  }
  result.info.diagnostics = diag.str();
  return result;
}

}  // namespace truckmorl::env
