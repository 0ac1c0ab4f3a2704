#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <memory>

#include "truckmorl/gpils/run.hpp"
#include "truckmorl/verification/suites.hpp"

using namespace truckmorl;
using namespace truckmorl::gpils;

namespace {

WeightVector w2(double a, double b) { return WeightVector(Eigen::Vector2d(a, b)); }
WeightVector w3(double a, double b, double c) { return WeightVector(Eigen::Vector3d(a, b, c)); }
Eigen::VectorXd v2(double a, double b) { return Eigen::Vector2d(a, b); }

bool has_weight(const std::vector<WeightVector>& ws, const WeightVector& w) {
  return moppo::contains_weight(ws, w, 1e-9);
}

// One-step episodes: action 0 pays on objective 0, action 1 on objective 1.
class ChoiceEnv : public env::MoEnv {
 public:
  env::Observation reset(std::uint64_t) override { return observe(); }
  env::StepResult step(int action) override {
    env::StepResult r;
    r.reward = Eigen::Vector3d(action == 0 ? 1.0 : 0.0, action == 1 ? 1.0 : 0.0, action == 2 ? 1.0 : 0.0);
    r.terminated = true;
    r.info.target_reached = true;
    r.observation = observe();
    return r;
  }
  int observation_size() const override { return 2; }
  int action_count() const override { return 3; }
  int reward_size() const override { return 3; }

 private:
  static env::Observation observe() {
    env::Observation o;
    o.features = Eigen::Vector2d(1.0, 0.0);
    o.mask = ad::MaskVector::Constant(3, true);
    return o;
  }
};

ad::NetworkSpec choice_spec() {
  ad::NetworkSpec s;
  s.observation_size = 2;
  s.weight_size = 3;
  s.action_count = 3;
  s.observation_layers = {8};
  s.weight_layers = {8};
  s.actor_head_gain = 1.0;
  s.seed = 2;
  return s;
}

moppo::MoppoConfig choice_moppo() {
  moppo::MoppoConfig c;
  c.steps_per_iteration = 64;
  c.minibatch_size = 16;
  c.epochs = 2;
  c.learning_rate = 1e-2;
  return c;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("simplex lattice") {
  const auto l = simplex_lattice(3, 2);
  CHECK(l.size() == 6);
  for (const auto& w : l) CHECK(w.values().sum() == doctest::Approx(1.0));
  CHECK(simplex_lattice(2, 100).size() == 101);
  CHECK(lattice_divisions_for(3, 500) == 31);
  CHECK(simplex_lattice(3, lattice_divisions_for(3, 500)).size() >= 500);
}

TEST_CASE("corner weights examples") {
  const auto single = corner_weights({v2(1, 2)});
  CHECK(single.size() == 2);
  CHECK(has_weight(single, w2(1, 0)));
  CHECK(has_weight(single, w2(0, 1)));

  const auto pair = corner_weights({v2(1, 0), v2(0, 1)});
  CHECK(pair.size() == 3);
  CHECK(has_weight(pair, w2(0.5, 0.5)));

  const auto three = corner_weights({v2(1, 0), v2(0, 1), v2(0.6, 0.6)});
  CHECK(three.size() == 4);
  CHECK(has_weight(three, w2(0.6, 0.4)));
  CHECK(has_weight(three, w2(0.4, 0.6)));
  CHECK_FALSE(has_weight(three, w2(0.5, 0.5)));

  const auto d3 = corner_weights({Eigen::Vector3d(1, 0, 0)});
  CHECK(d3.size() == 3);
}

TEST_CASE("corner weights agree with the grid oracle") {
  const verification::SuiteResult r = verification::corner_suite(40, 17);
  CHECK_MESSAGE(r.passed, r.detail);
}

TEST_CASE("gpi action examples") {
  Eigen::MatrixXd p1(2, 1), p2(2, 1);
  p1 << 3, 0;
  p2 << 0, 5;
  const WeightVector one(Eigen::VectorXd::Constant(1, 1.0));
  const ad::MaskVector all = ad::MaskVector::Constant(2, true);
  CHECK(gpi_action_from_tables({p1, p2}, one, all) == 1);
  CHECK(gpi_action_from_tables({p1}, one, all) == 0);
  CHECK(gpi_action_from_tables({p1, p1}, one, all) == 0);
  ad::MaskVector second_masked = all;
  second_masked(1) = false;
  CHECK(gpi_action_from_tables({p1, p2}, one, second_masked) == 0);
  CHECK_THROWS_AS(gpi_action_from_tables({p1}, one, ad::MaskVector::Constant(2, false)), InvalidMaskError);
}

TEST_CASE("gpi over one network equals its greedy action") {
  const auto net = ad::make_actor_critic<double>(choice_spec());
  const WeightVector w = w3(0.2, 0.5, 0.3);
  const std::vector<GpiMember<double>> members{{&net, w}};
  const Eigen::Vector2d obs(1.0, 0.0);
  const ad::MaskVector all = ad::MaskVector::Constant(3, true);
  CHECK(gpi_action(obs, all, w, members) == moppo::greedy_action(net, obs, w, all));
  const std::vector<GpiMember<double>> twice{{&net, w}, {&net, w}};
  CHECK(gpi_action(obs, all, w, twice) == gpi_action(obs, all, w, members));
  CHECK_THROWS_AS(gpi_action<double>(obs, all, w, {}), UsageError);

  ChoiceEnv env;
  const auto seeds = moppo::evaluation_seeds(1, 3);
  const double gpi = estimate_gpi_value(w, members, env, seeds, 1.0);
  CHECK(gpi == doctest::Approx(w.dot(moppo::evaluate_policy(net, w, env, seeds, 1.0).value)));
}

TEST_CASE("remove_dominated examples") {
  auto prune = [](std::vector<Eigen::VectorXd> values) {
    CcsState s;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const WeightVector w = w2(static_cast<double>(i) / values.size(), 1.0 - static_cast<double>(i) / values.size());
      s.visited.push_back(w);
      s.entries.push_back({w, values[i], 1, {}});
    }
    remove_dominated(s);
    return s;
  };
  CcsState a = prune({v2(2, 2), v2(1, 1)});
  REQUIRE(a.entries.size() == 1);
  CHECK(a.entries[0].value == v2(2, 2));
  CHECK(a.visited.size() == 1);

  CHECK(prune({v2(1, 0), v2(0, 1)}).entries.size() == 2);

  const CcsState c = prune({v2(1, 0), v2(0, 1), v2(0.4, 0.4)});
  CHECK(c.entries.size() == 2);
  for (const auto& e : c.entries) CHECK(e.value != v2(0.4, 0.4));

  CHECK(undominated_indices({v2(1, 0), v2(0, 1), v2(0.6, 0.6)}).size() == 3);
}

TEST_CASE("pruning never changes the scalarized optimum") {
  const verification::SuiteResult r = verification::pruning_suite(30, 23);
  CHECK_MESSAGE(r.passed, r.detail);
}

TEST_CASE("select_weight ranks by improvement and breaks ties lexicographically") {
  CcsState ccs;
  ccs.entries.push_back({w2(1, 0), v2(1, 0), 1, {}});
  ccs.entries.push_back({w2(0, 1), v2(0, 1), 1, {}});
  ccs.visited = {w2(1, 0), w2(0, 1)};

  const std::vector<WeightVector> corners{w2(0, 1), w2(0.3, 0.7), w2(0.5, 0.5), w2(1, 0)};
  const auto flat = [&](const WeightVector& w) { return ccs.best_scalarized(w); };
  const auto tie = select_weight(corners, ccs, flat);
  REQUIRE(tie);
  CHECK(tie->weight == w2(0.3, 0.7));

  // a third policy worth (0.7, 0.7) only helps near the middle of the simplex
  const auto peaked = [&](const WeightVector& w) { return std::max(ccs.best_scalarized(w), w.dot(v2(0.7, 0.7))); };
  const auto best = select_weight(corners, ccs, peaked);
  REQUIRE(best);
  CHECK(best->weight == w2(0.5, 0.5));
  CHECK(best->improvement == doctest::Approx(0.2));

  const auto only = select_weight({w2(0.3, 0.7)}, ccs, [](const WeightVector&) { return -100.0; });
  REQUIRE(only);
  CHECK(only->weight == w2(0.3, 0.7));

  CHECK_FALSE(select_weight({w2(1, 0), w2(0, 1)}, ccs, flat).has_value());
}

TEST_CASE("ccs store round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "truckmorl_test_store";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const CheckpointStore store(dir);
  CHECK_FALSE(store.has_progress());
  CHECK_THROWS_AS(store.read_ccs(3, 1), CheckpointError);

  CcsState s;
  s.iteration = 4;
  s.visited = {w3(1, 0, 0), w3(0.1, 0.2, 0.7)};
  s.entries.push_back({w3(1, 0, 0), Eigen::Vector3d(4.41, -1.0 / 3.0, -0.125), 1, Eigen::Vector3d(0, 0.01, 0.02)});
  s.entries.push_back({w3(0.1, 0.2, 0.7), Eigen::Vector3d(0.1, -2, -3), 4, Eigen::Vector3d(0.5, 0.25, 1e-9)});
  store.write_ccs(s);
  const CcsState back = store.read_ccs(3, 4);
  REQUIRE(back.entries.size() == 2);
  CHECK(back.iteration == 4);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back.entries[i].weight == s.entries[i].weight);
    CHECK(back.entries[i].value == s.entries[i].value);
    CHECK(back.entries[i].snapshot == s.entries[i].snapshot);
    CHECK(back.entries[i].standard_error == s.entries[i].standard_error);
  }
  CHECK(back.visited.size() == 2);

  Progress p;
  p.iteration = 4;
  p.weight_size = 3;
  p.training_log_rows = 4;
  p.history_rows = 4;
  store.write_progress(p);
  CHECK(store.read_progress().iteration == 4);
  std::filesystem::remove_all(dir);
}

TEST_CASE("hypervolume tolerance grows with the standard errors") {
  CcsState s;
  s.entries.push_back({w3(1, 0, 0), Eigen::Vector3d(0, -1, -2), 1, Eigen::Vector3d(0, 0.1, 0.2)});
  // width 4, height 3: 3 * (0.1 * 3 + 0.2 * 4)
  CHECK(ccs_hypervolume(s) == doctest::Approx(12.0));
  CHECK(ccs_hypervolume_tolerance(s) == doctest::Approx(3.3));
}

TEST_CASE("a single iteration trains the bootstrap policy at e1") {
  const env::EnvFactory factory = [] { return std::make_unique<ChoiceEnv>(); };
  GpilsConfig g;
  g.iterations = 1;
  g.eval_episodes = 2;
  g.gpi_rollouts = 2;
  const GpilsResult<double> r = run_gpils<double>(factory, choice_spec(), choice_moppo(), g, {});
  REQUIRE(r.history.size() == 1);
  CHECK(r.history[0].selected == WeightVector::basis(3, 0));
  REQUIRE(r.ccs.visited.size() == 1);
  CHECK(r.ccs.visited[0] == WeightVector::basis(3, 0));
  CHECK(r.ccs.entries.size() == 1);
  CHECK(r.finished);
}

TEST_CASE("invalid outer-loop configuration is rejected") {
  GpilsConfig g;
  g.iterations = 0;
  CHECK_THROWS_AS(g.validate(), ConfigError);
  g = GpilsConfig{};
  g.top_k = 0;
  CHECK_THROWS_AS(g.validate(), ConfigError);
  g = GpilsConfig{};
  g.eval_episodes = 0;
  CHECK_THROWS_AS(g.validate(), ConfigError);
}

TEST_CASE("an interrupted run resumes to the same result") {
  const env::EnvFactory factory = [] { return std::make_unique<ChoiceEnv>(); };
  GpilsConfig g;
  g.iterations = 4;
  g.eval_episodes = 2;
  g.gpi_rollouts = 2;
  g.seed = 5;
  const auto root = std::filesystem::temp_directory_path() / "truckmorl_test_resume";
  std::filesystem::remove_all(root);
  RunOptions full;
  full.checkpoint_dir = root / "full";
  full.training_log = root / "full" / "log.csv";
  RunOptions part;
  part.checkpoint_dir = root / "part";
  part.training_log = root / "part" / "log.csv";
  run_gpils<double>(factory, choice_spec(), choice_moppo(), g, full);
  part.stop_after = 2;
  const auto first = run_gpils<double>(factory, choice_spec(), choice_moppo(), g, part);
  CHECK_FALSE(first.resumed);
  part.stop_after = 0;
  const auto second = run_gpils<double>(factory, choice_spec(), choice_moppo(), g, part);
  CHECK(second.resumed);
  for (const char* f : {"log.csv", "ccs.csv", "visited.csv", "m_history.csv", "progress.txt"})
    CHECK_MESSAGE(read_file(root / "full" / f) == read_file(root / "part" / f), f);
  const auto loaded = load_gpils_checkpoint<double>(root / "full");
  CHECK(!loaded.ccs.entries.empty());
  CHECK_THROWS_AS(load_gpils_checkpoint<double>(root / "missing"), CheckpointError);
  std::filesystem::remove_all(root);
}
