#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>

#include "truckmorl/harness/artifacts.hpp"
#include "truckmorl/harness/baseline.hpp"
#include "truckmorl/harness/config.hpp"
#include "truckmorl/harness/hypervolume.hpp"
#include "truckmorl/harness/pareto.hpp"
#include "truckmorl/harness/session.hpp"

using namespace truckmorl;
using namespace truckmorl::harness;

namespace {

bool message_has(const std::exception& e, const std::string& needle) {
  return std::string(e.what()).find(needle) != std::string::npos;
}

template <typename F>
std::string config_error(F&& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

ParetoRecord record(double driver, double energy, double success) {
  ParetoRecord r;
  r.weight = moppo::WeightVector::basis(3, 0);
  r.driver_cost = driver;
  r.energy_cost = energy;
  r.success_rate = success;
  return r;
}

}  // namespace

TEST_CASE("analytic cost per metre") {
  const env::RewardParams reward;
  const env::VehicleParams vehicle;
  CHECK(analytic_cost_per_meter(20, reward, vehicle) == doctest::Approx(50.0 / 72000 + 0.5 / 3.6e6 * 4029.84).epsilon(1e-12));
  CHECK(analytic_cost_per_meter(20, reward, vehicle) == doctest::Approx(0.0012541).epsilon(1e-4));
  CHECK(analytic_cost_per_meter(24.04, reward, vehicle) == doctest::Approx(0.0012264).epsilon(1e-4));
  CHECK(analytic_cost_per_meter(200, reward, vehicle) > analytic_cost_per_meter(50, reward, vehicle));
  CHECK_THROWS_AS(analytic_cost_per_meter(0, reward, vehicle), UsageError);
  CHECK_THROWS_AS(analytic_cost_per_meter(-1, reward, vehicle), UsageError);
}

TEST_CASE("analytic optimum") {
  const env::SimConfig sim;
  const BaselineResult b = analytic_optimum(sim);
  CHECK(b.optimal_speed == doctest::Approx(24.04).epsilon(0.01 / 24.04));
  CHECK(b.golden_speed == doctest::Approx(b.optimal_speed).epsilon(1e-7));
  CHECK(b.min_cost == doctest::Approx(3.68).epsilon(0.01 / 3.68));
  CHECK(b.curve.size() == 2001);
  CHECK(b.curve.front().speed == doctest::Approx(5.0));
  CHECK(b.curve.back().speed == doctest::Approx(25.0));

  const auto min_row = std::min_element(b.curve.begin(), b.curve.end(), [](const auto& x, const auto& y) {
    return x.total_cost < y.total_cost;
  });
  CHECK(min_row->speed == doctest::Approx(24.04));
  CHECK(min_row->total_cost == doctest::Approx(3.68).epsilon(0.01 / 3.68));

  for (std::size_t i = 1; i + 1 < b.curve.size(); ++i)
    CHECK(b.curve[i - 1].cost_per_meter + b.curve[i + 1].cost_per_meter - 2 * b.curve[i].cost_per_meter > 0.0);

  env::RewardParams doubled;
  doubled.driver_cost_per_hour *= 2;
  const env::VehicleParams vehicle;
  const double ratio = analytic_optimal_speed(doubled, vehicle) / analytic_optimal_speed(env::RewardParams{}, vehicle);
  CHECK(ratio == doctest::Approx(std::cbrt(2.0)).epsilon(1e-12));
  CHECK(golden_section_speed(doubled, vehicle) == doctest::Approx(analytic_optimal_speed(doubled, vehicle)).epsilon(1e-7));
}

TEST_CASE("hypervolume examples") {
  const Eigen::Vector2d origin(0, 0);
  CHECK(hypervolume({Eigen::Vector2d(1, 1)}, origin) == doctest::Approx(1.0));
  CHECK(hypervolume({Eigen::Vector2d(2, 1), Eigen::Vector2d(1, 2)}, origin) == doctest::Approx(3.0));
  CHECK(hypervolume({Eigen::Vector2d(2, 1), Eigen::Vector2d(1, 2), Eigen::Vector2d(0.5, 0.5)}, origin) ==
        doctest::Approx(3.0));
  std::vector<std::string> warnings;
  CHECK(hypervolume({Eigen::Vector2d(1, 1), Eigen::Vector2d(-1, 3)}, origin, &warnings) == doctest::Approx(1.0));
  CHECK(warnings.size() == 1);
  CHECK(hypervolume({}, origin) == 0.0);
}

TEST_CASE("episode aggregation identities") {
  moppo::EpisodeOutcome ok, crash, slow;
  ok.undiscounted = Eigen::Vector3d(4.41, -2.0, -1.5);
  ok.success = true;
  ok.distance = 3000;
  ok.seconds = 150;
  crash.undiscounted = Eigen::Vector3d(-1000, -0.5, -0.2);
  crash.collision = true;
  crash.distance = 400;
  crash.seconds = 30;
  slow.undiscounted = Eigen::Vector3d(0, -2.78, -1.0);
  slow.truncated = true;
  slow.distance = 2000;
  slow.seconds = 200;
  const ParetoRecord r = aggregate_record(moppo::WeightVector::basis(3, 1), 7, {ok, crash, slow});
  CHECK(r.success_rate + r.failure_rate + r.max_step_rate == doctest::Approx(100.0));
  CHECK(r.success_rate == doctest::Approx(100.0 / 3));
  CHECK(r.driver_cost == doctest::Approx((2.0 + 0.5 + 2.78) / 3));
  CHECK(r.energy_cost == doctest::Approx((1.5 + 0.2 + 1.0) / 3));
  CHECK(std::abs(r.tcop - (r.energy_cost + r.driver_cost)) < 1e-9);
  CHECK(std::abs(r.tcop_per_m - r.tcop / r.distance) < 1e-9);
  CHECK(r.average_speed == doctest::Approx(5400.0 / 380.0));
  CHECK(r.policy == 7);
  CHECK_THROWS_AS(aggregate_record(moppo::WeightVector::basis(3, 1), 0, {}), UsageError);
}

TEST_CASE("a policy that never moves pays the driver for the full step budget") {
  env::SimConfig sim;
  sim.ego_start_speed = 0.0;
  sim.ego_start_desired_speed = 0.0;
  env::HighwayEnv env(sim);
  const moppo::Actor stay = [](const env::Observation&) { return static_cast<int>(env::Action::maintain); };
  const moppo::Evaluation ev = moppo::evaluate_actor(env, stay, moppo::evaluation_seeds(1, 2), 0.99);
  const ParetoRecord r = aggregate_record(moppo::WeightVector::basis(3, 0), 1, ev.episodes);
  CHECK(r.success_rate == 0.0);
  CHECK(r.max_step_rate == 100.0);
  CHECK(r.driver_cost == doctest::Approx(50.0 * 200 / 3600));
  CHECK(r.driver_cost == doctest::Approx(2.78).epsilon(0.01));
  CHECK(r.energy_cost == 0.0);
  CHECK(r.distance == 0.0);
}

TEST_CASE("non-dominated filter") {
  const std::vector<ParetoRecord> in{record(2, 1, 100), record(1, 2, 100), record(2, 2, 100), record(1, 1, 0),
                                     record(2, 1, 100), record(3, 3, 100)};
  const auto out = non_dominated(in);
  REQUIRE(out.size() == 3);
  CHECK(out[0].driver_cost == 2);
  CHECK(out[1].driver_cost == 1);
  CHECK(out[2].success_rate == 0);
  for (const auto& a : out)
    for (const auto& b : out)
      CHECK_FALSE((a.driver_cost <= b.driver_cost && a.energy_cost <= b.energy_cost && a.success_rate >= b.success_rate &&
                   (a.driver_cost < b.driver_cost || a.energy_cost < b.energy_cost || a.success_rate > b.success_rate)));
}

TEST_CASE("GPI policy selection over the CCS") {
  gpils::CcsState ccs;
  CHECK_THROWS_AS(select_entry(ccs, moppo::WeightVector::basis(3, 0)), UsageError);
  ccs.entries.push_back({moppo::WeightVector::basis(3, 0), Eigen::Vector3d(4, -3, -3), 1, {}});
  ccs.entries.push_back({moppo::WeightVector::basis(3, 1), Eigen::Vector3d(0, -1, -3), 2, {}});
  ccs.entries.push_back({moppo::WeightVector::basis(3, 2), Eigen::Vector3d(0, -3, -1), 3, {}});
  CHECK(select_entry(ccs, moppo::WeightVector::basis(3, 0)) == 0);
  CHECK(select_entry(ccs, moppo::WeightVector::basis(3, 1)) == 1);
  CHECK(select_entry(ccs, moppo::WeightVector::basis(3, 2)) == 2);
  CHECK(evaluation_weights(3, 500).size() >= 500);
}

TEST_CASE("pareto evaluation on a small highway") {
  env::SimConfig sim;
  sim.density = 0.015;
  sim.road_length = 500.0;
  sim.max_steps = 40;
  ad::NetworkSpec spec;
  spec.observation_size = observation_size_for(sim);
  spec.observation_layers = {16};
  spec.weight_layers = {16};
  gpils::CcsState ccs;
  gpils::SnapshotMap<float> snaps;
  CHECK_THROWS_AS(pareto_eval(ccs, snaps, highway_factory(sim), ParetoOptions{}), UsageError);

  spec.seed = 1;
  snaps[1] = std::make_shared<const ad::ActorCritic<float>>(ad::make_actor_critic<float>(spec));
  spec.seed = 2;
  snaps[2] = std::make_shared<const ad::ActorCritic<float>>(ad::make_actor_critic<float>(spec));
  ccs.entries.push_back({moppo::WeightVector::basis(3, 0), Eigen::Vector3d(1, -2, -1), 1, {}});
  ccs.entries.push_back({moppo::WeightVector::basis(3, 1), Eigen::Vector3d(0, -1, -2), 2, {}});
  ccs.entries.push_back({moppo::WeightVector::basis(3, 2), Eigen::Vector3d(0, -2, -0.5), 3, {}});
  ParetoOptions opt;
  opt.weight_count = 12;
  opt.episodes = 2;
  opt.threads = 3;
  CHECK_THROWS_AS(pareto_eval(ccs, snaps, highway_factory(sim), opt), CheckpointError);
  ccs.entries.pop_back();

  const auto weights = evaluation_weights(3, opt.weight_count);
  const auto all = evaluate_weights(ccs, snaps, highway_factory(sim), weights, opt);
  opt.threads = 1;
  const auto serial = evaluate_weights(ccs, snaps, highway_factory(sim), weights, opt);
  REQUIRE(all.size() == weights.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    CHECK(all[i] == serial[i]);
    CHECK(all[i].success_rate + all[i].failure_rate + all[i].max_step_rate == doctest::Approx(100.0));
    CHECK(std::abs(all[i].tcop - (all[i].energy_cost + all[i].driver_cost)) < 1e-9);
    if (all[i].distance > 0) CHECK(std::abs(all[i].tcop_per_m - all[i].tcop / all[i].distance) < 1e-9);
  }
  const auto front = pareto_eval(ccs, snaps, highway_factory(sim), opt);
  CHECK(!front.empty());
  CHECK(front.size() <= all.size());
}

TEST_CASE("csv round trips") {
  ParetoRecord r = record(1.0 / 3.0, 2.5e-7, 80);
  r.weight = moppo::WeightVector(Eigen::Vector3d(0.1, 0.2, 0.7));
  r.policy = 12;
  r.failure_rate = 20;
  r.distance = 2999.123456789;
  r.tcop = r.driver_cost + r.energy_cost;
  r.tcop_per_m = r.tcop / r.distance;
  const auto back = parse_pareto_csv(pareto_csv({r, record(2, 3, 100)}));
  REQUIRE(back.size() == 2);
  CHECK(back[0] == r);

  const BaselineResult b = analytic_optimum(env::SimConfig{});
  CHECK(parse_baseline_csv(baseline_csv(b.curve)) == b.curve);

  const std::vector<env::TraceRow> trace{{0.1, 0, 0, 2.0000000001, 20, 0}, {0.1, 3, 2, -57.25, 22.5, -0.125}};
  const auto t = parse_trace_csv(trace_csv(trace));
  REQUIRE(t.size() == 2);
  CHECK(t[1].x == trace[1].x);
  CHECK(t[1].lane == 2);

  CHECK_THROWS_AS(parse_pareto_csv("nonsense\n1,2\n"), UsageError);
  CHECK_THROWS_AS(parse_baseline_csv("speed,cost_per_m,total_cost\n1,abc,3\n"), UsageError);

  CHECK(pareto_svg({r}).find("<svg") != std::string::npos);
  CHECK(baseline_svg(b).find("<polyline") != std::string::npos);
}

TEST_CASE("ini parsing and configuration errors carry line numbers") {
  const std::string good =
      "# run\n[sim]\ndensity = 0.015\nlane_count = 3\n\n[moppo]\nsteps_per_iteration = 500\n"
      "[network]\nobservation_layers = 32, 32\nweight_layers = 32,32\nprecision = double\n[run]\nseed = 9\nname = x\n";
  const RunConfig c = run_config_from_ini(parse_ini(good, "good.ini"), "good.ini");
  CHECK(c.sim.density == 0.015);
  CHECK(c.moppo.steps_per_iteration == 500);
  CHECK(c.network.observation_layers == std::vector<int>{32, 32});
  CHECK(c.network.observation_size == observation_size_for(c.sim));
  CHECK(c.precision == Precision::double_);
  CHECK(c.seed == 9);
  CHECK(c.gpils.seed == 9);

  CHECK(message_has(std::runtime_error(config_error([] { parse_ini("[sim]\ndensity = 1\nnot a pair\n", "a.ini"); })),
                    "a.ini:3"));
  CHECK(message_has(std::runtime_error(config_error([] { parse_ini("[sim]\nx = 1\nx = 2\n", "b.ini"); })), "b.ini:3"));
  CHECK(message_has(std::runtime_error(config_error([] { parse_ini("[sim\n", "c.ini"); })), "c.ini:1"));
  auto from = [](const std::string& text) {
    return config_error([&] { run_config_from_ini(parse_ini(text, "f.ini"), "f.ini"); });
  };
  CHECK(message_has(std::runtime_error(from("[sim]\n\ndensity = abc\n")), "f.ini:3"));
  CHECK(message_has(std::runtime_error(from("[sim]\nbogus_key = 1\n")), "f.ini:2"));
  CHECK(message_has(std::runtime_error(from("[nope]\n\nb = 1\na = 1\n")), "f.ini:3"));
  CHECK(message_has(std::runtime_error(from("[network]\nactivation = relu\n")), "f.ini:2"));
  CHECK(message_has(std::runtime_error(from("[network]\nobservation_layers = 32\nweight_layers = 16\n")), "f.ini"));
  CHECK_FALSE(from("[moppo]\ngamma = 1.5\n").empty());
  CHECK_THROWS_AS(load_run_config("/nonexistent/truckmorl.ini"), ConfigError);
}

TEST_CASE("output directory resolution") {
  RunConfig c;
  c.name = "exp";
  c.output_dir = "runs";
  ::unsetenv(kOutputRootVariable);
  CHECK(resolve_output_dir(c, {}) == std::filesystem::path("runs") / "exp");
  CHECK(resolve_output_dir(c, "elsewhere") == std::filesystem::path("elsewhere"));
  ::setenv(kOutputRootVariable, "/tmp/root", 1);
  CHECK(resolve_output_dir(c, {}) == std::filesystem::path("/tmp/root/runs/exp"));
  CHECK(resolve_output_dir(c, "/abs") == std::filesystem::path("/abs"));
  ::unsetenv(kOutputRootVariable);
}

TEST_CASE("replay is deterministic and rejects unavailable actions") {
  const std::string text = "[sim]\ndensity = 0.015\n[replay]\nseed = 4\nsteps = 5\npolicy = random\n";
  const auto a = replay(parse_ini(text, "r.ini"), "r.ini");
  const auto b = replay(parse_ini(text, "r.ini"), "r.ini");
  REQUIRE(a.size() == b.size());
  CHECK(!a.empty());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].x == b[i].x);

  const std::string bad = "[replay]\nseed = 1\nactions = maintain, lane_right\n";
  const std::string msg = config_error([&] { replay(parse_ini(bad, "bad.ini"), "bad.ini"); });
  CHECK(msg.find("bad.ini:3") != std::string::npos);
}

TEST_CASE("evaluating a missing checkpoint is a checkpoint error") {
  const auto dir = std::filesystem::temp_directory_path() / "truckmorl_test_empty_ckpt";
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(evaluate_checkpoint(dir, 10, 1), CheckpointError);
  std::filesystem::create_directories(dir);
  CHECK_THROWS_AS(evaluate_checkpoint(dir, 10, 1), CheckpointError);
  std::filesystem::remove_all(dir);
}
