#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "truckmorl/env/dynamics.hpp"
#include "truckmorl/errors.hpp"
#include "truckmorl/env/highway_env.hpp"
#include "truckmorl/gpils/ccs.hpp"
#include "truckmorl/harness/baseline.hpp"
#include "truckmorl/seeding.hpp"
#include "truckmorl/verification/suites.hpp"

namespace truckmorl::verification {

namespace {

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

SuiteResult finish(std::string name, bool passed, const std::string& detail, const Timer& timer) {
  return {std::move(name), passed, detail, timer.seconds()};
}

std::string num(double x, int digits = 6) {
  std::ostringstream s;
  s.precision(digits);
  s << x;
  return s.str();
}

std::vector<Eigen::VectorXd> random_values(std::mt19937_64& rng, int d, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Eigen::VectorXd> values;
  for (int i = 0; i < n; ++i) values.push_back(Eigen::VectorXd::NullaryExpr(d, [&] { return u(rng); }));
  return values;
}

}  // namespace

SuiteResult baseline_suite() {
  const Timer timer;
  const env::SimConfig sim;
  const harness::BaselineResult b = harness::analytic_optimum(sim);
  auto min_row = b.curve.front();
  for (const auto& row : b.curve)
    if (row.total_cost < min_row.total_cost) min_row = row;
  const bool ok = std::abs(b.optimal_speed - 24.04) <= 0.01 && std::abs(b.min_cost - 3.68) <= 0.01 &&
                  std::abs(b.golden_speed - b.optimal_speed) <= 1e-6 && std::abs(min_row.speed - 24.04) <= 0.01 &&
                  std::abs(min_row.total_cost - 3.68) <= 0.01 && timer.seconds() < 1.0;
  return finish("analytical baseline", ok,
                "v*=" + num(b.optimal_speed) + " m/s (golden " + num(b.golden_speed) + "), cost=" + num(b.min_cost) +
                    " EUR, curve minimum row (" + num(min_row.speed) + ", " + num(min_row.total_cost, 4) + ")",
                timer);
}

SuiteResult cost_model_suite() {
  const Timer timer;
  const env::SimConfig sim;
  const double c20 = harness::analytic_cost_per_meter(20.0, sim.reward, sim.vehicle);
  // hand evaluation: 50/72000 + 0.5/3.6e6 * (0.5*0.6*10*1.2*400 + 44000*9.81*0.006)
  const double c20_hand = 50.0 / 72000.0 + 0.5 / 3.6e6 * (1440.0 + 2589.84);
  const double e = env::energy_step(44000.0, 0.0, 20.0, 1.0, sim.vehicle);
  const double e_hand = 4029.84 * 20.0 / 3.6e6;
  const bool ok = std::abs(c20 - 0.0012541) <= 1e-6 && std::abs(c20 - c20_hand) <= 1e-12 &&
                  std::abs(e - 0.022388) <= 1e-6 && std::abs(e - e_hand) <= 1e-12 && timer.seconds() < 1.0;
  return finish("cost-model oracle", ok, "cost(20)=" + num(c20, 8) + " EUR/m, energy_step=" + num(e, 8) + " kWh", timer);
}

SuiteResult corner_suite(int sets, std::uint64_t seed) {
  const Timer timer;
  std::mt19937_64 rng(seed);
  int missed = 0, spurious = 0, failing_sets = 0;
  for (int s = 0; s < sets; ++s) {
    const int d = s % 2 == 0 ? 2 : 3;
    const int n = std::uniform_int_distribution<int>(2, 6)(rng);
    const std::vector<Eigen::VectorXd> values = random_values(rng, d, n);
    std::vector<Eigen::VectorXd> computed;
    for (const auto& w : gpils::corner_weights(values)) computed.push_back(w.values());
    const std::vector<Eigen::VectorXd> oracle = grid_corner_oracle(values, 1000);
    const CornerComparison c = compare_corners(computed, oracle, 1e-2);
    missed += c.missed;
    spurious += c.spurious;
    if (c.missed || c.spurious) ++failing_sets;
  }
  const bool ok = missed == 0 && spurious == 0 && timer.seconds() < 60.0;
  return finish("corner-weight oracle", ok,
                std::to_string(sets) + " sets, missed=" + std::to_string(missed) +
                    ", spurious=" + std::to_string(spurious) + ", failing sets=" + std::to_string(failing_sets),
                timer);
}

SuiteResult gae_suite(int episodes, std::uint64_t seed) {
  const Timer timer;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int e = 0; e < episodes; ++e) {
    const int length = std::uniform_int_distribution<int>(1, 10)(rng);
    const double gamma = unit(rng), lambda = unit(rng);
    const std::vector<moppo::Transition> ts = random_episode(length, 3, rng());
    const moppo::GaeResult r = moppo::compute_gae(std::span<const moppo::Transition>(ts), gamma, lambda);
    const std::vector<Eigen::VectorXd> oracle = brute_force_advantages(ts, gamma, lambda);
    for (std::size_t t = 0; t < ts.size(); ++t) {
      worst = std::max(worst, (r.advantages[t] - oracle[t]).cwiseAbs().maxCoeff());
      worst = std::max(worst, (r.returns[t] - (oracle[t] + ts[t].value)).cwiseAbs().maxCoeff());
    }
  }
  const bool ok = worst <= 1e-10 && timer.seconds() < 10.0;
  return finish("GAE oracle", ok, std::to_string(episodes) + " episodes, max abs error " + num(worst, 3), timer);
}

SuiteResult gradient_suite(int seeds) {
  const Timer timer;
  double worst = 0.0;
  Eigen::Index params = 0;
  for (int s = 0; s < seeds; ++s) {
    const GradientCheck g = check_loss_gradient(static_cast<std::uint64_t>(1000 + s));
    worst = std::max(worst, g.max_relative_error);
    params = g.parameters;
  }
  const bool ok = worst < 1e-4 && timer.seconds() < 60.0;
  return finish("loss gradient check", ok,
                std::to_string(seeds) + " seeds, " + std::to_string(params) + " parameters, max relative error " +
                    num(worst, 3),
                timer);
}

SuiteResult pruning_suite(int sets, std::uint64_t seed) {
  const Timer timer;
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  int removed = 0;
  for (int s = 0; s < sets; ++s) {
    const int d = s % 2 == 0 ? 2 : 3;
    const int n = std::uniform_int_distribution<int>(2, 8)(rng);
    gpils::CcsState ccs;
    for (const auto& v : random_values(rng, d, n)) ccs.entries.push_back({moppo::WeightVector::basis(d, 0), v, 0, {}});
    const gpils::CcsState before = ccs;
    gpils::remove_dominated(ccs);
    removed += static_cast<int>(before.entries.size() - ccs.entries.size());
    for (const auto& w : gpils::simplex_lattice(d, d == 2 ? 1000 : 200))
      worst = std::max(worst, std::abs(before.best_scalarized(w) - ccs.best_scalarized(w)));
  }
  const bool ok = worst <= 1e-12 && timer.seconds() < 60.0;
  return finish("pruning soundness", ok,
                std::to_string(sets) + " sets, " + std::to_string(removed) + " vectors removed, max change " +
                    num(worst, 3),
                timer);
}

SuiteResult safety_suite(int fuzz_cases, std::uint64_t seed) {
  const Timer timer;
  const safety::SafetyParams p;
  std::vector<std::string> failures;
  auto expect = [&](bool cond, const std::string& what) {
    if (!cond) failures.push_back(what);
  };
  auto near = [](double a, double b, double tol) { return std::abs(a - b) <= tol; };

  const safety::LaneChangeTimes t = safety::lane_change_times(3.2, 2.55, 0.8);
  expect(near(t.duration, 4.0, 1e-12), "T_lc = 4 s");
  expect(near(t.enter, 0.40625, 1e-12), "t_enter = 0.40625 s");
  expect(near(t.exit, 3.59375, 1e-12), "t_exit = 3.59375 s");
  expect(near(safety::min_gap(0.0, 5.0, p), 2.0, 1e-12), "min_gap(0) = s0");
  expect(near(safety::min_gap(20.0, 0.0, p), 22.0, 1e-12), "min_gap(20, 0) = 22 m");
  expect(near(safety::min_gap(20.0, -100.0, p), 2.0, 1e-12), "min_gap clamps to s0");

  safety::GapObservation empty;
  empty.ego_speed = 20.0;
  expect(safety::lane_change_safe(empty, p).admissible, "no vehicles -> admissible");

  safety::GapObservation rear = empty;
  rear.rear_target = safety::Neighbor{6.0, 25.0};
  const safety::SafetyVerdict rv = safety::lane_change_safe(rear, p);
  const double a_req = safety::required_deceleration(25.0, 20.0, 6.0, 0.40625, p.epsilon);
  expect(near(a_req, 5.0 / 0.79375, 1e-9) && near(a_req, 6.30, 0.005), "a_req = 6.30");
  expect(!rv.admissible && !rv.passed[3] && near(rv.margin[3], 3.0 - a_req, 1e-9), "a_req > b_safe -> reject");

  safety::GapObservation front = empty;
  front.front_target = safety::Neighbor{30.0, 20.0};
  const safety::SafetyVerdict fv = safety::lane_change_safe(front, p);
  expect(fv.passed[1] && near(fv.margin[1], 8.0, 1e-9), "target leader at 30 m passes condition 2 with 8 m");

  expect(near(safety::required_deceleration(25.0, 20.0, 15.0, 0.40625, p.epsilon), 5.0 / 2.59375, 1e-9),
         "a_req = 1.928");
  expect(near(safety::required_deceleration(25.0, 20.0, 1.0, 0.40625, p.epsilon), 5.0 / p.epsilon, 1e-6),
         "epsilon floor");
  const double small = safety::required_deceleration(20.5, 20.0, 100.0, 0.40625, p.epsilon);
  expect(near(small, 0.25 / 100.0, 0.01 * 0.25 / 100.0), "a_req ~ dv^2 / s for large TTC");
  bool threw = false;
  try {
    safety::required_deceleration(20.0, 20.0, 10.0, 0.4, p.epsilon);
  } catch (const UsageError&) {
    threw = true;
  }
  expect(threw, "v_rear <= v_ego is a contract violation");

  safety::GapObservation close = empty;
  close.rear_target = safety::Neighbor{p.standstill_gap, 21.0};
  expect(!safety::lane_change_safe(close, p).admissible, "rear vehicle at s0 and faster -> reject");

  // monotonicity fuzz
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> grow(0.0, 50.0);
  int flips = 0;
  for (int i = 0; i < fuzz_cases; ++i) {
    const safety::GapObservation g = random_gaps(rng);
    safety::GapObservation bigger = g;
    const int which = std::uniform_int_distribution<int>(0, 3)(rng);
    if ((which == 0 || which == 3) && bigger.front_current) bigger.front_current->gap += grow(rng);
    if ((which == 1 || which == 3) && bigger.front_target) bigger.front_target->gap += grow(rng);
    if ((which == 2 || which == 3) && bigger.rear_target) bigger.rear_target->gap += grow(rng);
    if (safety::lane_change_safe(g, p).admissible && !safety::lane_change_safe(bigger, p).admissible) ++flips;
  }
  expect(flips == 0, "monotonicity fuzz");

  std::string detail = std::to_string(fuzz_cases) + " fuzz cases, " + std::to_string(flips) + " flips";
  for (const auto& f : failures) detail += "; failed: " + f;
  return finish("safety filter", failures.empty() && timer.seconds() < 10.0, detail, timer);
}

SuiteResult zero_collision_suite(int episodes, std::uint64_t seed) {
  const Timer timer;
  env::SimConfig sim;
  sim.density = 0.015;
  env::HighwayEnv env(sim);
  std::mt19937_64 rng(seed);
  int lane_change_collisions = 0, other_collisions = 0, lane_changes = 0, steps = 0;
  for (int e = 0; e < episodes; ++e) {
    env::Observation obs = env.reset(derive_seed(seed, static_cast<std::uint64_t>(e), SeedPurpose::evaluation));
    while (!env.done()) {
      std::vector<int> allowed;
      for (int a = 0; a < env::kActionCount; ++a)
        if (obs.mask(a)) allowed.push_back(a);
      const int action = allowed[std::uniform_int_distribution<std::size_t>(0, allowed.size() - 1)(rng)];
      const env::StepResult r = env.step(action);
      ++steps;
      if (r.info.lateral) ++lane_changes;
      if (r.info.collision != env::CollisionKind::none) (r.info.lateral ? lane_change_collisions : other_collisions)++;
      obs = r.observation;
    }
  }
  const bool ok = lane_change_collisions == 0 && timer.seconds() < 300.0;
  return finish("zero lane-change collisions", ok,
                std::to_string(episodes) + " episodes, " + std::to_string(steps) + " steps, " +
                    std::to_string(lane_changes) + " lane changes, " + std::to_string(lane_change_collisions) +
                    " lane-change collisions, " + std::to_string(other_collisions) + " other collisions",
                timer);
}

std::vector<SuiteResult> oracle_suites() {
  return {baseline_suite(), cost_model_suite(), corner_suite(), gae_suite(),
          gradient_suite(), pruning_suite(),    safety_suite()};
}

}  // namespace truckmorl::verification
