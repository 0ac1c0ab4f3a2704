#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "truckmorl/autodiff/network.hpp"
#include "truckmorl/env/mo_env.hpp"
#include "truckmorl/errors.hpp"
#include "truckmorl/moppo/policy.hpp"
#include "truckmorl/moppo/weights.hpp"

namespace truckmorl::moppo {

struct MoppoConfig {
  double gamma = 0.99;
  double lambda = 0.95;
  double clip_epsilon = 0.2;
  double value_coef = 0.5;     // c1
  double entropy_coef = 0.01;  // c2
  int epochs = 10;
  int minibatch_size = 64;
  double learning_rate = 3e-4;
  int steps_per_iteration = 10000;
  double selected_probability = 0.5;  // chance an episode is conditioned on the selected weight
  double max_grad_norm = 0.5;         // <= 0 disables clipping

  void validate() const;
};

struct Transition {
  Eigen::VectorXd observation;
  ad::MaskVector mask;
  int action = 0;
  double log_prob = 0.0;
  Eigen::VectorXd reward;
  bool terminated = false;
  bool truncated = false;
  Eigen::VectorXd value;      // V(s_t, w_t)
  Eigen::VectorXd bootstrap;  // V(s_{t+1}, w_t) where the trajectory is cut without termination; else empty
  WeightVector weight = WeightVector::basis(1, 0);
  int episode = 0;

  bool ends_segment() const { return terminated || bootstrap.size() > 0; }
};

struct EpisodeSummary {
  WeightVector weight;
  bool selected = false;  // conditioned on the selected weight
  Eigen::VectorXd undiscounted;
  bool success = false;
  bool collision = false;
  bool complete = false;  // false for the episode cut by the end of the buffer
};

struct RolloutBuffer {
  std::vector<Transition> transitions;
  std::vector<Eigen::VectorXd> advantages;  // per objective
  std::vector<Eigen::VectorXd> returns;     // advantages + values
  std::vector<EpisodeSummary> episodes;

  std::size_t size() const { return transitions.size(); }
};

struct GaeResult {
  std::vector<Eigen::VectorXd> advantages;
  std::vector<Eigen::VectorXd> returns;
};

/// Per-objective GAE(gamma, lambda). A segment ends at a terminated transition (bootstrap 0)
/// or at one carrying a bootstrap value (truncation or end of buffer).
GaeResult compute_gae(std::span<const Transition> transitions, double gamma, double lambda);

void compute_gae(RolloutBuffer& buffer, double gamma, double lambda);

/// Draws an index from a probability vector using one uniform draw.
int sample_categorical(const Eigen::VectorXd& p, std::mt19937_64& rng);

/// Collects exactly steps_per_iteration transitions with the stochastic policy.
/// The first episode is conditioned on `selected`; each later episode keeps `selected` with
/// probability selected_probability and otherwise draws uniformly from `pool`.
template <typename Scalar>
RolloutBuffer collect_rollout(env::MoEnv& env, const ad::ActorCritic<Scalar>& net, const WeightVector& selected,
                              const std::vector<WeightVector>& pool, const MoppoConfig& config, std::uint64_t seed);

// Implementation --------------------------------------------------------------------------

namespace detail {

template <typename Scalar>
Eigen::VectorXd critic_value(const ad::ActorCritic<Scalar>& net, const Eigen::VectorXd& obs, const WeightVector& w) {
  return ad::infer_values(net, ad::Matrix<Scalar>(obs.cast<Scalar>()), ad::Matrix<Scalar>(w.values().cast<Scalar>()))
      .col(0)
      .template cast<double>();
}

std::uint64_t episode_seed(std::mt19937_64& rng);

}  // namespace detail

template <typename Scalar>
RolloutBuffer collect_rollout(env::MoEnv& env, const ad::ActorCritic<Scalar>& net, const WeightVector& selected,
                              const std::vector<WeightVector>& pool, const MoppoConfig& config, std::uint64_t seed) {
  if (pool.empty()) throw ConfigError("collect_rollout: weight pool is empty");
  if (config.steps_per_iteration < 1) throw ConfigError("collect_rollout: steps_per_iteration must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);

  RolloutBuffer buffer;
  buffer.transitions.reserve(static_cast<std::size_t>(config.steps_per_iteration));
  WeightVector w = selected;
  bool is_selected = true;
  int episode = 0;
  env::Observation obs = env.reset(detail::episode_seed(rng));
  Eigen::VectorXd undiscounted = Eigen::VectorXd::Zero(env.reward_size());

  for (int t = 0; t < config.steps_per_iteration; ++t) {
    const ActionDistribution dist = action_distribution(net, obs.features, w, obs.mask);
    const int action = sample_categorical(dist.probabilities, rng);
    Transition tr{obs.features, obs.mask, action, dist.log_probabilities(action), {}, false, false,
                  detail::critic_value(net, obs.features, w), {}, w, episode};
    env::StepResult r;
    try {
      r = env.step(action);
    } catch (const std::exception& e) {
      throw std::runtime_error("collect_rollout: environment failed at step " + std::to_string(t) + " of " +
                               std::to_string(config.steps_per_iteration) + " (" + std::to_string(buffer.size()) +
                               " transitions collected): " + e.what());
    }
    tr.reward = r.reward;
    tr.terminated = r.terminated;
    tr.truncated = r.truncated;
    undiscounted += r.reward;
    const bool last = t + 1 == config.steps_per_iteration;
    if (!r.terminated && (r.truncated || last)) tr.bootstrap = detail::critic_value(net, r.observation.features, w);
    buffer.transitions.push_back(std::move(tr));

    if (r.terminated || r.truncated || last) {
      buffer.episodes.push_back(EpisodeSummary{w, is_selected, undiscounted, r.info.target_reached,
                                               r.info.collision != env::CollisionKind::none,
                                               r.terminated || r.truncated});
      if (last) break;
      ++episode;
      undiscounted.setZero();
      w = unit(rng) < config.selected_probability ? selected : pool[pick(rng)];
      is_selected = w == selected;
      obs = env.reset(detail::episode_seed(rng));
    } else {
      obs = r.observation;
    }
  }
  return buffer;
}

}  // namespace truckmorl::moppo
