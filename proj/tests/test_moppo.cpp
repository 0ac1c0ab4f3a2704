#include <doctest.h>

#include <cmath>
#include <memory>

#include "truckmorl/env/highway_env.hpp"
#include "truckmorl/moppo/loss.hpp"
#include "truckmorl/moppo/trainer.hpp"
#include "truckmorl/verification/suites.hpp"

using namespace truckmorl;
using namespace truckmorl::moppo;

namespace {

// Episodes of one to three steps with a fixed reward per step.
class ToyEnv : public env::MoEnv {
 public:
  env::Observation reset(std::uint64_t seed) override {
    length_ = 1 + static_cast<int>(seed % 3);
    t_ = 0;
    return observe();
  }
  env::StepResult step(int action) override {
    ++t_;
    env::StepResult r;
    r.reward = Eigen::Vector3d(action == 0 ? 1.0 : 0.0, -0.1, -0.05 * action);
    r.terminated = t_ >= length_;
    r.info.target_reached = r.terminated;
    r.info.dt = 1.0;
    r.observation = observe();
    return r;
  }
  int observation_size() const override { return 4; }
  int action_count() const override { return 8; }
  int reward_size() const override { return 3; }

 private:
  env::Observation observe() const {
    env::Observation o;
    o.features = Eigen::Vector4d(t_ * 0.3, length_ * 0.2, 1.0, -0.5);
    o.mask = ad::MaskVector::Constant(8, true);
    o.mask(7) = false;
    return o;
  }
  int length_ = 1;
  int t_ = 0;
};

ad::NetworkSpec toy_spec() {
  ad::NetworkSpec s;
  s.observation_size = 4;
  s.weight_size = 3;
  s.action_count = 8;
  s.observation_layers = {8};
  s.weight_layers = {8};
  s.actor_head_gain = 1.0;
  s.seed = 4;
  return s;
}

WeightVector w3(double a, double b, double c) { return WeightVector(Eigen::Vector3d(a, b, c)); }

Transition make_transition(double r, double v, bool terminated, double bootstrap = NAN) {
  Transition t;
  t.reward = Eigen::VectorXd::Constant(1, r);
  t.value = Eigen::VectorXd::Constant(1, v);
  t.terminated = terminated;
  if (!std::isnan(bootstrap)) t.bootstrap = Eigen::VectorXd::Constant(1, bootstrap);
  return t;
}

}  // namespace

TEST_CASE("weight vectors live on the simplex") {
  CHECK_NOTHROW(w3(0.2, 0.3, 0.5));
  CHECK_THROWS_AS(w3(0.5, 0.5, 0.5), ConfigError);
  CHECK_THROWS_AS(w3(1.2, -0.2, 0.0), ConfigError);
  CHECK(WeightVector::basis(3, 1)[1] == 1.0);
  const auto u = unique_weights({w3(1, 0, 0), w3(0, 1, 0), w3(1, 0, 0)}, 1e-9);
  CHECK(u.size() == 2);
  CHECK(w3(0, 1, 0) < w3(1, 0, 0));
}

TEST_CASE("gae on a single terminal transition is r - V") {
  const std::vector<Transition> ts{make_transition(2.0, 0.5, true)};
  const GaeResult g = compute_gae(ts, 0.99, 0.95);
  CHECK(g.advantages[0](0) == doctest::Approx(1.5));
  CHECK(g.returns[0](0) == doctest::Approx(2.0));
}

TEST_CASE("gae with gamma = lambda = 1 is the Monte-Carlo return minus V") {
  const std::vector<Transition> ts{make_transition(1, 0.3, false), make_transition(2, 0.1, false),
                                   make_transition(3, -0.2, true)};
  const GaeResult g = compute_gae(ts, 1.0, 1.0);
  CHECK(g.advantages[0](0) == doctest::Approx(6 - 0.3));
  CHECK(g.advantages[1](0) == doctest::Approx(5 - 0.1));
  CHECK(g.advantages[2](0) == doctest::Approx(3 + 0.2));
}

TEST_CASE("gae bootstraps at a truncation") {
  const std::vector<Transition> ts{make_transition(1, 0.0, false, 10.0)};
  const GaeResult g = compute_gae(ts, 0.9, 0.8);
  CHECK(g.advantages[0](0) == doctest::Approx(1 + 0.9 * 10));
}

TEST_CASE("gae matches the brute-force double sum") {
  // 3-step episode, gamma 0.9, lambda 0.8
  const std::vector<Transition> ts{make_transition(1, 0.5, false), make_transition(-1, 0.2, false),
                                   make_transition(2, 1.0, true)};
  const GaeResult g = compute_gae(ts, 0.9, 0.8);
  const double d0 = 1 + 0.9 * 0.2 - 0.5, d1 = -1 + 0.9 * 1.0 - 0.2, d2 = 2 - 1.0;
  CHECK(g.advantages[0](0) == doctest::Approx(d0 + 0.72 * d1 + 0.72 * 0.72 * d2).epsilon(1e-12));
  CHECK(g.advantages[1](0) == doctest::Approx(d1 + 0.72 * d2).epsilon(1e-12));
  CHECK(g.advantages[2](0) == doctest::Approx(d2).epsilon(1e-12));

  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto episode = verification::random_episode(1 + static_cast<int>(seed % 10), 3, seed);
    const GaeResult fast = compute_gae(episode, 0.97, 0.9);
    const auto slow = verification::brute_force_advantages(episode, 0.97, 0.9);
    for (std::size_t t = 0; t < episode.size(); ++t) CHECK((fast.advantages[t] - slow[t]).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("action distribution scalarization examples") {
  Eigen::MatrixXd z(2, 2);
  z << 1, 0, 0, 1;
  const ActionDistribution d = distribution_from_logits(z, WeightVector(Eigen::Vector2d(0.5, 0.5)),
                                                        ad::MaskVector::Constant(2, true));
  CHECK(d.probabilities(0) == doctest::Approx(0.5));
  CHECK(d.probabilities(1) == doctest::Approx(0.5));

  Eigen::MatrixXd table(3, 3);
  table << 1, 5, -2, 0, 7, 3, 2, -1, 0;
  const ad::MaskVector all = ad::MaskVector::Constant(3, true);
  const ActionDistribution e1 = distribution_from_logits(table, WeightVector::basis(3, 0), all);
  CHECK((e1.probabilities - ad::masked_softmax(table.col(0), all)).cwiseAbs().maxCoeff() < 1e-15);

  Eigen::MatrixXd same(3, 3);
  same.col(0) << 1, 2, 3;
  same.col(1) = same.col(0);
  same.col(2) = same.col(0);
  const auto a = distribution_from_logits(same, w3(0.2, 0.3, 0.5), all).probabilities;
  const auto b = distribution_from_logits(same, w3(1, 0, 0), all).probabilities;
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);

  ad::MaskVector none = ad::MaskVector::Constant(3, false);
  CHECK_THROWS_AS(distribution_from_logits(table, w3(1, 0, 0), none), InvalidMaskError);
}

TEST_CASE("rollout buffer length, stored log-probs and degenerate pool") {
  ToyEnv env;
  const auto net = ad::make_actor_critic<double>(toy_spec());
  MoppoConfig c;
  c.steps_per_iteration = 101;
  const WeightVector w = w3(0.2, 0.3, 0.5);
  const RolloutBuffer buf = collect_rollout(env, net, w, {w}, c, 9);
  CHECK(buf.size() == 101);
  for (const auto& t : buf.transitions) {
    CHECK(t.weight == w);
    const ActionDistribution d = action_distribution(net, t.observation, t.weight, t.mask);
    CHECK(std::abs(d.log_probabilities(t.action) - t.log_prob) < 1e-6);
    CHECK(t.mask(t.action));
    CHECK(d.probabilities.sum() == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK(buf.transitions.back().ends_segment());
  CHECK_THROWS_AS(collect_rollout(env, net, w, {}, c, 9), ConfigError);
}

TEST_CASE("episodes follow the selected-weight sampling law") {
  ToyEnv env;
  const auto net = ad::make_actor_critic<double>(toy_spec());
  MoppoConfig c;
  c.steps_per_iteration = 1200;
  const WeightVector sel = w3(1, 0, 0);
  const std::vector<WeightVector> pool{sel, w3(0, 1, 0), w3(0, 0, 1), w3(0.2, 0.3, 0.5)};
  const RolloutBuffer buf = collect_rollout(env, net, sel, pool, c, 123);
  REQUIRE(buf.episodes.size() >= 201);
  CHECK(buf.episodes.front().selected);
  int hits = 0;
  const int n = static_cast<int>(buf.episodes.size()) - 1;
  for (std::size_t i = 1; i < buf.episodes.size(); ++i) hits += buf.episodes[i].selected;
  const double p = 0.5 + 0.5 / pool.size();
  const double sigma = std::sqrt(p * (1 - p) / n);
  CHECK(std::abs(static_cast<double>(hits) / n - p) < 3 * sigma);
}

TEST_CASE("clipped surrogate arithmetic") {
  ad::Tape<double> tape;
  const auto ratio = tape.constant(ad::Matrix<double>::Constant(1, 1, 2.0));
  const ad::Matrix<double> adv = ad::Matrix<double>::Constant(1, 1, 1.0);
  const auto s = ad::minimum(ad::cmul(ratio, adv), ad::cmul(ad::clip(ratio, 0.8, 1.2), adv));
  CHECK(s.value()(0, 0) == doctest::Approx(1.2));

  ad::Tape<double> tape2;
  ad::Matrix<double> r(1, 3);
  r << 0.9, 1.0, 1.15;
  const auto ratio2 = tape2.constant(r);
  const ad::Matrix<double> pos = ad::Matrix<double>::Constant(1, 3, 0.7);
  const auto clipped = ad::cmul(ad::clip(ratio2, 0.8, 1.2), pos);
  const auto raw = ad::cmul(ratio2, pos);
  CHECK((ad::minimum(raw, clipped).value() - raw.value()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("surrogate equals the mean advantage before any update") {
  ToyEnv env;
  auto net = ad::make_actor_critic<double>(toy_spec());
  MoppoConfig c;
  c.steps_per_iteration = 32;
  RolloutBuffer buf = collect_rollout(env, net, w3(0.2, 0.3, 0.5), {w3(0.2, 0.3, 0.5), w3(1, 0, 0)}, c, 3);
  compute_gae(buf, c.gamma, c.lambda);
  std::vector<std::size_t> idx(buf.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  for (bool normalize : {true, false}) {
    const Minibatch<double> mb = make_minibatch<double>(buf, idx, normalize);
    ad::Tape<double> tape;
    const RecordedLoss<double> loss = record_ppo_loss(tape, net, mb, c);
    CHECK(loss.report.clip_objective == doctest::Approx(mb.advantages.mean()).epsilon(1e-9));
    CHECK(loss.report.clip_fraction == 0.0);
    CHECK(std::abs(loss.report.approx_kl) < 1e-12);
  }
}

TEST_CASE("scalarized advantages are linear in the weight") {
  ToyEnv env;
  const auto net = ad::make_actor_critic<double>(toy_spec());
  MoppoConfig c;
  c.steps_per_iteration = 20;
  RolloutBuffer buf = collect_rollout(env, net, w3(1, 0, 0), {w3(1, 0, 0)}, c, 5);
  compute_gae(buf, c.gamma, c.lambda);
  std::vector<std::size_t> idx(buf.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  const WeightVector a = w3(0.7, 0.2, 0.1), b = w3(0.0, 0.4, 0.6);
  const double alpha = 0.3;
  auto with_weight = [&](const WeightVector& w) {
    RolloutBuffer copy = buf;
    for (auto& t : copy.transitions) t.weight = w;
    return scalarized_advantages(copy, idx, false);
  };
  const Eigen::VectorXd mixed =
      with_weight(WeightVector::normalized(alpha * a.values() + (1 - alpha) * b.values()));
  const Eigen::VectorXd combined = alpha * with_weight(a) + (1 - alpha) * with_weight(b);
  CHECK((mixed - combined).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("zero epochs leave the policy and its value unchanged") {
  ToyEnv env;
  MoppoConfig c;
  c.steps_per_iteration = 40;
  c.epochs = 0;
  Trainer<double> trainer(toy_spec(), c);
  const auto before = trainer.network().params.flat_values();
  const auto seeds = evaluation_seeds(1, 3);
  const WeightVector w = w3(0.5, 0.25, 0.25);
  const Eigen::VectorXd v0 = evaluate_policy(trainer.network(), w, env, seeds, c.gamma).value;
  const IterationResult r = train_iteration(trainer, env, w, {w}, 1, 2, seeds);
  CHECK(trainer.network().params.flat_values() == before);
  CHECK(r.value == v0);
  CHECK(r.update.loss.total == 0.0);
}

TEST_CASE("updates are deterministic for fixed seeds and improve a toy objective") {
  auto run = [] {
    ToyEnv env;
    MoppoConfig c;
    c.steps_per_iteration = 128;
    c.minibatch_size = 32;
    c.epochs = 4;
    c.learning_rate = 3e-3;
    Trainer<double> trainer(toy_spec(), c);
    std::vector<double> losses;
    for (int it = 0; it < 6; ++it)
      losses.push_back(trainer.update(env, w3(1, 0, 0), {w3(1, 0, 0)}, 10 + it, 20 + it).loss.total);
    return std::make_pair(losses, trainer.network().params.flat_values());
  };
  const auto a = run();
  const auto b = run();
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
}

TEST_CASE("training at e1 on an empty road reaches the target") {
  env::SimConfig sim;
  sim.density = 0.0;
  sim.road_length = 1000.0;
  env::HighwayEnv env(sim);
  ad::NetworkSpec spec;
  spec.observation_size = env.observation_size();
  spec.observation_layers = {32};
  spec.weight_layers = {32};
  spec.seed = 1;
  MoppoConfig c;
  c.steps_per_iteration = 400;
  Trainer<double> trainer(spec, c);
  const auto seeds = evaluation_seeds(3, 3);
  IterationResult r;
  for (int it = 0; it < 3; ++it) r = train_iteration(trainer, env, WeightVector::basis(3, 0), {WeightVector::basis(3, 0)}, it, 100 + it, seeds);
  const Evaluation ev = evaluate_policy(trainer.network(), WeightVector::basis(3, 0), env, seeds, c.gamma);
  for (const auto& e : ev.episodes) CHECK(e.success);
  CHECK(r.value(0) > 0.0);
}

TEST_CASE("standard error of the evaluation mean") {
  Evaluation ev;
  ev.value = Eigen::Vector3d::Zero();
  EpisodeOutcome a, b;
  a.discounted = Eigen::Vector3d(1, 0, 2);
  b.discounted = Eigen::Vector3d(3, 0, 2);
  ev.episodes = {a};
  CHECK(standard_error(ev).isZero());
  ev.episodes = {a, b};
  CHECK(standard_error(ev)(0) == doctest::Approx(1.0));
  CHECK(standard_error(ev)(1) == 0.0);
}
