#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "truckmorl/autodiff/distribution.hpp"
#include "truckmorl/autodiff/network.hpp"
#include "truckmorl/env/mo_env.hpp"
#include "truckmorl/moppo/weights.hpp"

namespace truckmorl::moppo {

/// Per-objective logit table (A x d), its scalarization under w, and the masked distribution.
struct ActionDistribution {
  Eigen::MatrixXd logits;
  Eigen::VectorXd scalarized;
  Eigen::VectorXd probabilities;
  Eigen::VectorXd log_probabilities;
};

/// Distribution from a per-objective logit table; z(a) = sum_i w_i Z(a, i).
ActionDistribution distribution_from_logits(const Eigen::MatrixXd& logits, const WeightVector& w,
                                            const ad::MaskVector& mask);

template <typename Scalar>
ActionDistribution action_distribution(const ad::ActorCritic<Scalar>& net, const Eigen::VectorXd& obs,
                                       const WeightVector& w, const ad::MaskVector& mask) {
  const ad::Matrix<Scalar> logits =
      ad::infer_logits(net, ad::Matrix<Scalar>(obs.cast<Scalar>()), ad::Matrix<Scalar>(w.values().cast<Scalar>()));
  const Eigen::MatrixXd table = ad::logit_table(logits, 0, net.spec.weight_size).template cast<double>();
  return distribution_from_logits(table, w, mask);
}

/// Argmax of the scalarized masked logits (lowest index on ties).
template <typename Scalar>
int greedy_action(const ad::ActorCritic<Scalar>& net, const Eigen::VectorXd& obs, const WeightVector& w,
                  const ad::MaskVector& mask) {
  return ad::masked_argmax(action_distribution(net, obs, w, mask).scalarized, mask);
}

/// Maps the current observation to an action.
using Actor = std::function<int(const env::Observation&)>;

template <typename Scalar>
Actor greedy_actor(const ad::ActorCritic<Scalar>& net, WeightVector w) {
  return [&net, w = std::move(w)](const env::Observation& o) { return greedy_action(net, o.features, w, o.mask); };
}

struct EpisodeOutcome {
  Eigen::VectorXd discounted;    // sum_t gamma^t r_t
  Eigen::VectorXd undiscounted;  // sum_t r_t
  int steps = 0;
  double distance = 0.0;
  double seconds = 0.0;          // nominal decision time
  double energy_kwh = 0.0;
  bool success = false;
  bool collision = false;
  bool truncated = false;
  bool collision_during_lane_change = false;
};

EpisodeOutcome run_episode(env::MoEnv& env, const Actor& actor, std::uint64_t seed, double gamma);

struct Evaluation {
  Eigen::VectorXd value;  // mean discounted return
  std::vector<EpisodeOutcome> episodes;
};

/// Standard error of the mean discounted return per objective (zeros for a single episode).
Eigen::VectorXd standard_error(const Evaluation& evaluation);

/// Mean discounted return over the evaluation episodes `seeds`.
Evaluation evaluate_actor(env::MoEnv& env, const Actor& actor, const std::vector<std::uint64_t>& seeds, double gamma);

/// Greedy evaluation of `net` conditioned on `w`.
template <typename Scalar>
Evaluation evaluate_policy(const ad::ActorCritic<Scalar>& net, const WeightVector& w, env::MoEnv& env,
                           const std::vector<std::uint64_t>& seeds, double gamma) {
  return evaluate_actor(env, greedy_actor(net, w), seeds, gamma);
}

/// Evaluation seeds 0..count-1 derived from `master`.
std::vector<std::uint64_t> evaluation_seeds(std::uint64_t master, int count);

}  // namespace truckmorl::moppo
