#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "truckmorl/autodiff/network.hpp"
#include "truckmorl/env/highway_env.hpp"
#include "truckmorl/errors.hpp"
#include "truckmorl/moppo/loss.hpp"
#include "truckmorl/verification/suites.hpp"

namespace truckmorl::verification {

namespace {

int argmax_label(const std::vector<Eigen::VectorXd>& values, const Eigen::VectorXd& w) {
  int best = 0;
  double best_u = w.dot(values[0]);
  for (std::size_t i = 1; i < values.size(); ++i) {
    const double u = w.dot(values[i]);
    if (u > best_u) {
      best_u = u;
      best = static_cast<int>(i);
    }
  }
  return best;
}

}  // namespace

std::vector<Eigen::VectorXd> grid_corner_oracle(const std::vector<Eigen::VectorXd>& values, int divisions) {
  if (values.empty()) throw UsageError("grid_corner_oracle: empty value set");
  const int d = static_cast<int>(values.front().size());
  const double h = 1.0 / divisions;
  std::vector<Eigen::VectorXd> out;
  for (int k = 0; k < d; ++k) out.push_back(Eigen::VectorXd::Unit(d, k));

  if (d == 2) {
    int prev = argmax_label(values, Eigen::Vector2d(0.0, 1.0));
    for (int i = 1; i <= divisions; ++i) {
      const double t = i * h;
      const int label = argmax_label(values, Eigen::Vector2d(t, 1.0 - t));
      if (label != prev) out.push_back(Eigen::Vector2d(t - 0.5 * h, 1.0 - t + 0.5 * h));
      prev = label;
    }
    return out;
  }
  if (d != 3) throw UsageError("grid_corner_oracle: only d = 2 and d = 3 are supported");

  // label[i][j] at w = (i h, j h, 1 - (i + j) h)
  const int n = divisions;
  std::vector<int> label(static_cast<std::size_t>((n + 1) * (n + 1)), -1);
  auto at = [&](int i, int j) -> int& { return label[static_cast<std::size_t>(i * (n + 1) + j)]; };
  auto point = [&](double i, double j) { return Eigen::Vector3d(i * h, j * h, 1.0 - (i + j) * h); };
  for (int i = 0; i <= n; ++i)
    for (int j = 0; i + j <= n; ++j) at(i, j) = argmax_label(values, point(i, j));

  // edges: j = 0 (w1 = 0), i = 0 (w0 = 0), i + j = n (w2 = 0)
  for (int s = 1; s <= n; ++s) {
    if (at(s, 0) != at(s - 1, 0)) out.push_back(point(s - 0.5, 0));
    if (at(0, s) != at(0, s - 1)) out.push_back(point(0, s - 0.5));
    if (at(s, n - s) != at(s - 1, n - s + 1)) out.push_back(point(s - 0.5, n - s + 0.5));
  }
  // cells
  auto three = [](int a, int b, int c) { return a != b && b != c && a != c; };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; i + j < n; ++j) {
      if (three(at(i, j), at(i + 1, j), at(i, j + 1))) out.push_back(point(i + 1.0 / 3, j + 1.0 / 3));
      if (i + j + 2 <= n && three(at(i + 1, j), at(i, j + 1), at(i + 1, j + 1)))
        out.push_back(point(i + 2.0 / 3, j + 2.0 / 3));
    }
  }
  return out;
}

CornerComparison compare_corners(const std::vector<Eigen::VectorXd>& computed, const std::vector<Eigen::VectorXd>& oracle,
                                 double tolerance) {
  auto covered = [tolerance](const Eigen::VectorXd& p, const std::vector<Eigen::VectorXd>& set) {
    return std::any_of(set.begin(), set.end(), [&](const Eigen::VectorXd& q) { return (p - q).norm() <= tolerance; });
  };
  CornerComparison c;
  for (const auto& p : oracle)
    if (!covered(p, computed)) ++c.missed;
  for (const auto& p : computed)
    if (!covered(p, oracle)) ++c.spurious;
  return c;
}

std::vector<Eigen::VectorXd> brute_force_advantages(const std::vector<moppo::Transition>& ts, double gamma, double lambda) {
  const std::size_t n = ts.size();
  auto next_value = [&](std::size_t k) -> Eigen::VectorXd {
    if (ts[k].terminated) return Eigen::VectorXd::Zero(ts[k].value.size());
    if (ts[k].bootstrap.size() > 0) return ts[k].bootstrap;
    return ts[k + 1].value;
  };
  std::vector<Eigen::VectorXd> out(n);
  for (std::size_t t = 0; t < n; ++t) {
    std::size_t end = t;
    while (!ts[end].ends_segment()) ++end;
    Eigen::VectorXd a = Eigen::VectorXd::Zero(ts[t].value.size());
    for (std::size_t k = t; k <= end; ++k) {
      const Eigen::VectorXd delta = ts[k].reward + gamma * next_value(k) - ts[k].value;
      a += std::pow(gamma * lambda, static_cast<double>(k - t)) * delta;
    }
    out[t] = a;
  }
  return out;
}

std::vector<moppo::Transition> random_episode(int length, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  auto vec = [&] {
    Eigen::VectorXd v(d);
    for (int i = 0; i < d; ++i) v(i) = normal(rng);
    return v;
  };
  std::vector<moppo::Transition> out;
  const bool terminates = coin(rng);
  for (int t = 0; t < length; ++t) {
    moppo::Transition tr;
    tr.reward = vec();
    tr.value = vec();
    tr.weight = moppo::WeightVector::basis(d, 0);
    const bool last = t + 1 == length;
    if (last && terminates) tr.terminated = true;
    if (last && !terminates) {
      tr.truncated = true;
      tr.bootstrap = vec();
    }
    out.push_back(std::move(tr));
  }
  return out;
}

GradientCheck check_loss_gradient(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  constexpr int kObs = 6, kD = 3, kA = env::kActionCount, kB = 4;

  ad::NetworkSpec spec;
  spec.observation_size = kObs;
  spec.weight_size = kD;
  spec.action_count = kA;
  spec.observation_layers = {5, 4};
  spec.weight_layers = {4};
  spec.actor_head_gain = 0.5;
  spec.seed = seed;
  ad::ActorCritic<double> net = ad::make_actor_critic<double>(spec);

  moppo::MoppoConfig config;
  moppo::RolloutBuffer buffer;
  for (int b = 0; b < kB; ++b) {
    moppo::Transition t;
    t.observation = Eigen::VectorXd::NullaryExpr(kObs, [&] { return normal(rng); });
    Eigen::VectorXd w = Eigen::VectorXd::NullaryExpr(kD, [&] { return unit(rng) + 0.05; });
    t.weight = moppo::WeightVector(w / w.sum());
    t.mask = ad::MaskVector::Ones(kA);
    for (int a = 0; a < kA; ++a) t.mask(a) = unit(rng) < 0.7;
    t.mask(std::uniform_int_distribution<int>(0, kA - 1)(rng)) = true;
    std::vector<int> allowed;
    for (int a = 0; a < kA; ++a)
      if (t.mask(a)) allowed.push_back(a);
    t.action = allowed[std::uniform_int_distribution<std::size_t>(0, allowed.size() - 1)(rng)];
    const moppo::ActionDistribution dist = moppo::action_distribution(net, t.observation, t.weight, t.mask);
    // old policy offsets keep ratios both inside and outside the clip range, away from its kinks
    static constexpr double kOffsets[] = {0.05, -0.08, 0.6, -0.5};
    t.log_prob = dist.log_probabilities(t.action) + kOffsets[b];
    t.reward = Eigen::VectorXd::Zero(kD);
    t.value = Eigen::VectorXd::Zero(kD);
    t.terminated = b + 1 == kB;
    buffer.transitions.push_back(t);
    buffer.advantages.push_back(Eigen::VectorXd::NullaryExpr(kD, [&] { return normal(rng); }));
    buffer.returns.push_back(Eigen::VectorXd::NullaryExpr(kD, [&] { return normal(rng); }));
  }
  const std::vector<std::size_t> idx{0, 1, 2, 3};
  const moppo::Minibatch<double> mb = moppo::make_minibatch<double>(buffer, idx);

  auto loss_at = [&](ad::ActorCritic<double>& n) {
    ad::Tape<double> tape;
    return moppo::record_ppo_loss(tape, n, mb, config).report.total;
  };
  {
    ad::Tape<double> tape;
    net.params.zero_grad();
    const auto loss = moppo::record_ppo_loss(tape, net, mb, config);
    tape.backward(loss.total);
  }
  const ad::Vector<double> analytic = net.params.flat_grads();
  const ad::Vector<double> theta = net.params.flat_values();
  GradientCheck out;
  out.parameters = theta.size();
  constexpr double kStep = 1e-5;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    ad::Vector<double> p = theta;
    p(i) += kStep;
    net.params.set_flat_values(p);
    const double up = loss_at(net);
    p(i) = theta(i) - kStep;
    net.params.set_flat_values(p);
    const double down = loss_at(net);
    const double numeric = (up - down) / (2 * kStep);
    const double scale = std::max({std::abs(numeric), std::abs(analytic(i)), 1e-6});
    out.max_relative_error = std::max(out.max_relative_error, std::abs(numeric - analytic(i)) / scale);
  }
  net.params.set_flat_values(theta);
  return out;
}

safety::GapObservation random_gaps(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> gap(0.0, 120.0), speed(0.0, 30.0), unit(0.0, 1.0);
  safety::GapObservation g;
  g.ego_speed = speed(rng);
  g.ego_width = 2.55;
  if (unit(rng) < 0.7) g.front_current = safety::Neighbor{gap(rng), speed(rng)};
  if (unit(rng) < 0.7) g.front_target = safety::Neighbor{gap(rng), speed(rng)};
  if (unit(rng) < 0.7) g.rear_target = safety::Neighbor{gap(rng), speed(rng)};
  return g;
}

}  // namespace truckmorl::verification
