#include "truckmorl/moppo/rollout.hpp"

#include "truckmorl/seeding.hpp"

namespace truckmorl::moppo {

void MoppoConfig::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("moppo: gamma must be in [0, 1)");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("moppo: lambda must be in [0, 1]");
  if (!(clip_epsilon > 0.0)) throw ConfigError("moppo: clip_epsilon must be positive");
  if (value_coef < 0.0 || entropy_coef < 0.0) throw ConfigError("moppo: loss coefficients must be non-negative");
  if (epochs < 0) throw ConfigError("moppo: epochs must be non-negative");
  if (minibatch_size < 1) throw ConfigError("moppo: minibatch_size must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("moppo: learning_rate must be positive");
  if (steps_per_iteration < 1) throw ConfigError("moppo: steps_per_iteration must be positive");
  if (!(selected_probability >= 0.0 && selected_probability <= 1.0))
    throw ConfigError("moppo: selected_probability must be in [0, 1]");
}

GaeResult compute_gae(std::span<const Transition> transitions, double gamma, double lambda) {
  GaeResult out;
  const std::size_t n = transitions.size();
  out.advantages.resize(n);
  out.returns.resize(n);
  if (n == 0) return out;
  if (!transitions.back().ends_segment())
    throw UsageError("compute_gae: the last transition needs a terminal flag or a bootstrap value");
  Eigen::VectorXd next_advantage;
  for (std::size_t i = n; i-- > 0;) {
    const Transition& t = transitions[i];
    Eigen::VectorXd next_value;
    if (t.terminated) {
      next_value = Eigen::VectorXd::Zero(t.value.size());
      next_advantage = Eigen::VectorXd::Zero(t.value.size());
    } else if (t.bootstrap.size() > 0) {
      next_value = t.bootstrap;
      next_advantage = Eigen::VectorXd::Zero(t.value.size());
    } else {
      next_value = transitions[i + 1].value;
    }
    const Eigen::VectorXd delta = t.reward + gamma * next_value - t.value;
    out.advantages[i] = delta + gamma * lambda * next_advantage;
    next_advantage = out.advantages[i];
    out.returns[i] = out.advantages[i] + t.value;
  }
  return out;
}

void compute_gae(RolloutBuffer& buffer, double gamma, double lambda) {
  GaeResult r = compute_gae(std::span<const Transition>(buffer.transitions), gamma, lambda);
  buffer.advantages = std::move(r.advantages);
  buffer.returns = std::move(r.returns);
}

int sample_categorical(const Eigen::VectorXd& p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng) * p.sum();
  double acc = 0.0;
  int last_positive = 0;
  for (Eigen::Index a = 0; a < p.size(); ++a) {
    if (p(a) <= 0.0) continue;
    last_positive = static_cast<int>(a);
    acc += p(a);
    if (u < acc) return last_positive;
  }
  return last_positive;
}

namespace detail {

std::uint64_t episode_seed(std::mt19937_64& rng) { return training_episode_seed(rng()); }

}  // namespace detail

}  // namespace truckmorl::moppo
