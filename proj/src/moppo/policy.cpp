#include "truckmorl/moppo/policy.hpp"

#include <cmath>

#include "truckmorl/errors.hpp"
#include "truckmorl/seeding.hpp"

namespace truckmorl::moppo {

ActionDistribution distribution_from_logits(const Eigen::MatrixXd& logits, const WeightVector& w,
                                            const ad::MaskVector& mask) {
  if (logits.cols() != w.size()) throw ConfigError("action distribution: logit table has wrong objective count");
  ActionDistribution out;
  out.logits = logits;
  out.scalarized = logits * w.values();
  out.log_probabilities = ad::masked_log_softmax(out.scalarized, mask);
  out.probabilities = ad::masked_softmax(out.scalarized, mask);
  return out;
}

EpisodeOutcome run_episode(env::MoEnv& env, const Actor& actor, std::uint64_t seed, double gamma) {
  EpisodeOutcome out;
  out.discounted = Eigen::VectorXd::Zero(env.reward_size());
  out.undiscounted = Eigen::VectorXd::Zero(env.reward_size());
  env::Observation obs = env.reset(seed);
  double discount = 1.0;
  for (;;) {
    const env::StepResult r = env.step(actor(obs));
    out.discounted += discount * r.reward;
    out.undiscounted += r.reward;
    discount *= gamma;
    ++out.steps;
    out.distance += r.info.distance;
    out.seconds += r.info.dt;
    out.energy_kwh += r.info.energy_kwh;
    if (r.terminated || r.truncated) {
      out.success = r.info.target_reached;
      out.collision = r.info.collision != env::CollisionKind::none;
      out.collision_during_lane_change = out.collision && r.info.lateral;
      out.truncated = r.truncated;
      return out;
    }
    obs = r.observation;
  }
}

Evaluation evaluate_actor(env::MoEnv& env, const Actor& actor, const std::vector<std::uint64_t>& seeds, double gamma) {
  if (seeds.empty()) throw ConfigError("evaluate: at least one episode is required");
  Evaluation out;
  out.value = Eigen::VectorXd::Zero(env.reward_size());
  for (std::uint64_t s : seeds) {
    out.episodes.push_back(run_episode(env, actor, s, gamma));
    out.value += out.episodes.back().discounted;
  }
  out.value /= static_cast<double>(seeds.size());
  return out;
}

Eigen::VectorXd standard_error(const Evaluation& evaluation) {
  const auto n = static_cast<double>(evaluation.episodes.size());
  if (n < 2) return Eigen::VectorXd::Zero(evaluation.value.size());
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(evaluation.episodes.front().discounted.size());
  for (const auto& e : evaluation.episodes) mean += e.discounted;
  mean /= n;
  Eigen::VectorXd se = Eigen::VectorXd::Zero(mean.size());
  for (const auto& e : evaluation.episodes) se += (e.discounted - mean).cwiseAbs2();
  return (se / (n - 1.0)).cwiseSqrt() / std::sqrt(n);
}

std::vector<std::uint64_t> evaluation_seeds(std::uint64_t master, int count) {
  std::vector<std::uint64_t> seeds;
  for (int k = 0; k < count; ++k) seeds.push_back(evaluation_episode_seed(master, static_cast<std::uint64_t>(k)));
  return seeds;
}

}  // namespace truckmorl::moppo
