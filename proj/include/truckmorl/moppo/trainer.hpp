#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "truckmorl/autodiff/adam.hpp"
#include "truckmorl/autodiff/network.hpp"
#include "truckmorl/env/mo_env.hpp"
#include "truckmorl/moppo/loss.hpp"
#include "truckmorl/moppo/policy.hpp"
#include "truckmorl/moppo/rollout.hpp"

namespace truckmorl::moppo {

struct UpdateReport {
  LossReport loss;
  int episodes = 0;          // completed episodes in the buffer
  double success_rate = 0.0; // over completed episodes
  Eigen::VectorXd mean_return;  // undiscounted, over completed episodes
};

/// Owns the shared actor/critic and its optimizer state across iterations.
template <typename Scalar>
class Trainer {
 public:
  Trainer(const ad::NetworkSpec& spec, MoppoConfig config)
      : config_(config), net_(ad::make_actor_critic<Scalar>(spec)),
        adam_(ad::make_adam_state(net_.params, ad::AdamConfig{config.learning_rate})) {
    config_.validate();
  }

  Trainer(ad::ActorCritic<Scalar> net, ad::AdamState<Scalar> adam, MoppoConfig config)
      : config_(config), net_(std::move(net)), adam_(std::move(adam)) {
    config_.validate();
  }

  /// One collect -> GAE -> PPO pass.
  UpdateReport update(env::MoEnv& env, const WeightVector& selected, const std::vector<WeightVector>& pool,
                      std::uint64_t rollout_seed, std::uint64_t update_seed) {
    RolloutBuffer buffer = collect_rollout(env, net_, selected, pool, config_, rollout_seed);
    compute_gae(buffer, config_.gamma, config_.lambda);
    UpdateReport report;
    report.loss = ppo_update(buffer, net_, adam_, config_, update_seed);
    report.mean_return = Eigen::VectorXd::Zero(env.reward_size());
    int successes = 0;
    for (const EpisodeSummary& e : buffer.episodes) {
      if (!e.complete) continue;
      ++report.episodes;
      successes += e.success ? 1 : 0;
      report.mean_return += e.undiscounted;
    }
    if (report.episodes > 0) {
      report.mean_return /= report.episodes;
      report.success_rate = static_cast<double>(successes) / report.episodes;
    }
    return report;
  }

  const ad::ActorCritic<Scalar>& network() const { return net_; }
  ad::ActorCritic<Scalar>& network() { return net_; }
  const ad::AdamState<Scalar>& optimizer() const { return adam_; }
  const MoppoConfig& config() const { return config_; }

 private:
  MoppoConfig config_;
  ad::ActorCritic<Scalar> net_;
  ad::AdamState<Scalar> adam_;
};

struct IterationResult {
  UpdateReport update;
  Eigen::VectorXd value;  // greedy evaluation at the selected weight
};

template <typename Scalar>
IterationResult train_iteration(Trainer<Scalar>& trainer, env::MoEnv& env, const WeightVector& selected,
                                const std::vector<WeightVector>& pool, std::uint64_t rollout_seed,
                                std::uint64_t update_seed, const std::vector<std::uint64_t>& evaluation_seeds) {
  IterationResult r;
  r.update = trainer.update(env, selected, pool, rollout_seed, update_seed);
  r.value = evaluate_policy(trainer.network(), selected, env, evaluation_seeds, trainer.config().gamma).value;
  return r;
}

}  // namespace truckmorl::moppo
