#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "truckmorl/autodiff/adam.hpp"
#include "truckmorl/autodiff/network.hpp"
#include "truckmorl/autodiff/ops.hpp"
#include "truckmorl/errors.hpp"
#include "truckmorl/moppo/rollout.hpp"

namespace truckmorl::moppo {

/// Column-major batch of B transitions prepared for one loss evaluation.
template <typename Scalar>
struct Minibatch {
  ad::Matrix<Scalar> observations;  // n_obs x B
  ad::Matrix<Scalar> weights;       // d x B
  ad::MaskMatrix masks;             // A x B
  std::vector<int> actions;
  ad::Matrix<Scalar> old_log_probs;  // 1 x B
  ad::Matrix<Scalar> advantages;     // 1 x B, scalarized (normalized or not, as given)
  ad::Matrix<Scalar> returns;        // d x B

  Eigen::Index size() const { return observations.cols(); }
};

struct LossReport {
  double clip_objective = 0.0;  // L^CLIP (maximized)
  double value_loss = 0.0;      // L^VF
  double entropy = 0.0;         // S
  double total = 0.0;           // -L^CLIP + c1 L^VF - c2 S
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
};

/// Scalarized advantages w_t^T A_t, optionally standardized over the given indices.
Eigen::VectorXd scalarized_advantages(const RolloutBuffer& buffer, const std::vector<std::size_t>& indices,
                                      bool normalize);

template <typename Scalar>
Minibatch<Scalar> make_minibatch(const RolloutBuffer& buffer, const std::vector<std::size_t>& indices,
                                 bool normalize_advantages = true) {
  if (buffer.advantages.size() != buffer.size()) throw UsageError("make_minibatch: advantages not computed");
  const auto b = static_cast<Eigen::Index>(indices.size());
  const Transition& first = buffer.transitions.at(indices.at(0));
  const Eigen::Index n_obs = first.observation.size(), d = first.weight.size(), a = first.mask.size();
  Minibatch<Scalar> mb;
  mb.observations.resize(n_obs, b);
  mb.weights.resize(d, b);
  mb.masks.resize(a, b);
  mb.actions.resize(indices.size());
  mb.old_log_probs.resize(1, b);
  mb.returns.resize(d, b);
  const Eigen::VectorXd adv = scalarized_advantages(buffer, indices, normalize_advantages);
  mb.advantages = adv.transpose().cast<Scalar>();
  for (Eigen::Index j = 0; j < b; ++j) {
    const std::size_t i = indices[static_cast<std::size_t>(j)];
    const Transition& t = buffer.transitions[i];
    mb.observations.col(j) = t.observation.cast<Scalar>();
    mb.weights.col(j) = t.weight.values().cast<Scalar>();
    mb.masks.col(j) = t.mask;
    mb.actions[static_cast<std::size_t>(j)] = t.action;
    mb.old_log_probs(0, j) = static_cast<Scalar>(t.log_prob);
    mb.returns.col(j) = buffer.returns[i].cast<Scalar>();
  }
  return mb;
}

template <typename Scalar>
struct RecordedLoss {
  ad::Var<Scalar> total;
  LossReport report;
};

/// Records total = -L^CLIP + c1 L^VF - c2 S on `tape`.
template <typename Scalar>
RecordedLoss<Scalar> record_ppo_loss(ad::Tape<Scalar>& tape, ad::ActorCritic<Scalar>& net, const Minibatch<Scalar>& mb,
                                     const MoppoConfig& config) {
  using ad::Var;
  const Scalar inv_b = Scalar(1) / static_cast<Scalar>(mb.size());
  const ad::RecordedOutput<Scalar> out = ad::record_forward(tape, net, mb.observations, mb.weights);
  const Var<Scalar> log_probs = ad::masked_log_softmax(ad::scalarize(out.logits, mb.weights), mb.masks);
  const Var<Scalar> taken = ad::pick(log_probs, mb.actions);
  const Var<Scalar> ratio = ad::exp(taken - tape.constant(mb.old_log_probs));
  const auto eps = static_cast<Scalar>(config.clip_epsilon);
  const Var<Scalar> surrogate = ad::minimum(ad::cmul(ratio, mb.advantages),
                                            ad::cmul(ad::clip(ratio, Scalar(1) - eps, Scalar(1) + eps), mb.advantages));
  const Var<Scalar> clip_objective = ad::mean(surrogate);
  const Var<Scalar> value_loss = inv_b * ad::sum(ad::square(out.values - tape.constant(mb.returns)));
  const Var<Scalar> entropy = -(inv_b * ad::sum(ad::cmul(ad::exp(log_probs), log_probs)));
  const Var<Scalar> total = -clip_objective + static_cast<Scalar>(config.value_coef) * value_loss -
                            static_cast<Scalar>(config.entropy_coef) * entropy;

  RecordedLoss<Scalar> r{total, {}};
  r.report.clip_objective = static_cast<double>(clip_objective.value()(0, 0));
  r.report.value_loss = static_cast<double>(value_loss.value()(0, 0));
  r.report.entropy = static_cast<double>(entropy.value()(0, 0));
  r.report.total = static_cast<double>(total.value()(0, 0));
  const auto& rv = ratio.value();
  const auto log_ratio = (taken.value() - mb.old_log_probs).template cast<double>();
  r.report.approx_kl = ((log_ratio.array().exp() - 1.0) - log_ratio.array()).mean();
  r.report.clip_fraction = ((rv.array() - Scalar(1)).abs() > eps).template cast<double>().mean();
  return r;
}

/// Epochs of shuffled minibatch Adam updates over a buffer with computed advantages.
/// Returns the mean report over all minibatches (zeros when epochs == 0).
template <typename Scalar>
LossReport ppo_update(const RolloutBuffer& buffer, ad::ActorCritic<Scalar>& net, ad::AdamState<Scalar>& adam,
                      const MoppoConfig& config, std::uint64_t seed) {
  LossReport mean{};
  if (config.epochs == 0 || buffer.size() == 0) return mean;
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(buffer.size());
  int count = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.minibatch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(config.minibatch_size));
      const std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                         order.begin() + static_cast<std::ptrdiff_t>(stop));
      const Minibatch<Scalar> mb = make_minibatch<Scalar>(buffer, idx);
      ad::Tape<Scalar> tape;
      net.params.zero_grad();
      const RecordedLoss<Scalar> loss = record_ppo_loss(tape, net, mb, config);
      const LossReport& r = loss.report;
      if (!std::isfinite(r.clip_objective) || !std::isfinite(r.value_loss) || !std::isfinite(r.entropy))
        throw NumericalError("ppo_update: non-finite loss at epoch " + std::to_string(epoch) + ", buffer positions " +
                             std::to_string(start) + ".." + std::to_string(stop - 1) + " of the shuffled order");
      tape.backward(loss.total);
      if (config.max_grad_norm > 0.0) ad::clip_grad_norm(net.params, config.max_grad_norm);
      ad::adam_step(net.params, adam);
      mean.clip_objective += r.clip_objective;
      mean.value_loss += r.value_loss;
      mean.entropy += r.entropy;
      mean.total += r.total;
      mean.approx_kl += r.approx_kl;
      mean.clip_fraction += r.clip_fraction;
      ++count;
    }
  }
  const double inv = 1.0 / count;
  mean.clip_objective *= inv;
  mean.value_loss *= inv;
  mean.entropy *= inv;
  mean.total *= inv;
  mean.approx_kl *= inv;
  mean.clip_fraction *= inv;
  return mean;
}

}  // namespace truckmorl::moppo
