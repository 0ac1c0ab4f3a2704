#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "truckmorl/autodiff/ops.hpp"
#include "truckmorl/autodiff/parameters.hpp"
#include "truckmorl/autodiff/tape.hpp"
#include "truckmorl/autodiff/types.hpp"
#include "truckmorl/errors.hpp"

namespace truckmorl::ad {

enum class Activation { tanh, identity };

/// Shape of the weight-conditioned actor/critic pair.
///
/// Each of the two towers (actor, critic) encodes the observation and the preference
/// weight with separate MLPs whose final widths match, multiplies the two features
/// element-wise, and reads the result with a linear head: the actor head emits
/// action_count * weight_size logits (row a*d+i is objective i of action a), the critic
/// head emits weight_size values.
struct NetworkSpec {
  int observation_size = 0;
  int weight_size = 3;
  int action_count = 8;
  std::vector<int> observation_layers{256, 256};
  std::vector<int> weight_layers{256, 256};
  Activation activation = Activation::tanh;
  double hidden_gain = std::sqrt(2.0);
  double actor_head_gain = 0.01;
  double critic_head_gain = 1.0;
  std::uint64_t seed = 0;

  int feature_size() const { return observation_layers.empty() ? observation_size : observation_layers.back(); }

  void validate() const {
    if (observation_size <= 0 || weight_size <= 0 || action_count <= 0)
      throw ConfigError("NetworkSpec: sizes must be positive");
    for (int w : observation_layers)
      if (w <= 0) throw ConfigError("NetworkSpec: observation layer widths must be positive");
    for (int w : weight_layers)
      if (w <= 0) throw ConfigError("NetworkSpec: weight layer widths must be positive");
    const int obs_out = observation_layers.empty() ? observation_size : observation_layers.back();
    const int w_out = weight_layers.empty() ? weight_size : weight_layers.back();
    if (obs_out != w_out)
      throw ConfigError("NetworkSpec: observation and weight encoders must end at the same width (" +
                        std::to_string(obs_out) + " vs " + std::to_string(w_out) + ")");
  }

  /// Stable FNV-1a digest of every field that determines the parameter layout and init.
  std::uint64_t hash() const {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](std::uint64_t x) {
      for (int i = 0; i < 8; ++i) {
        h ^= (x >> (8 * i)) & 0xffU;
        h *= 1099511628211ULL;
      }
    };
    mix(static_cast<std::uint64_t>(observation_size));
    mix(static_cast<std::uint64_t>(weight_size));
    mix(static_cast<std::uint64_t>(action_count));
    mix(observation_layers.size());
    for (int w : observation_layers) mix(static_cast<std::uint64_t>(w));
    mix(weight_layers.size());
    for (int w : weight_layers) mix(static_cast<std::uint64_t>(w));
    mix(static_cast<std::uint64_t>(activation));
    return h;
  }
};

template <typename Scalar>
struct ActorCritic {
  NetworkSpec spec;
  ParameterSet<Scalar> params;
};

enum class Tower { actor, critic };

namespace detail {

inline const char* tower_name(Tower t) { return t == Tower::actor ? "actor" : "critic"; }

inline std::string layer_name(Tower t, const char* branch, std::size_t i, const char* what) {
  return std::string(tower_name(t)) + "." + branch + "." + std::to_string(i) + "." + what;
}

/// Orthogonal matrix of shape (rows x cols) scaled by gain.
inline Eigen::MatrixXd orthogonal(Eigen::Index rows, Eigen::Index cols, double gain, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const bool tall = rows >= cols;
  Eigen::MatrixXd a(tall ? rows : cols, tall ? cols : rows);
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i) a(i, j) = normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(a.rows(), a.cols());
  const Eigen::MatrixXd r = qr.matrixQR().topRows(a.cols()).template triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < q.cols(); ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;
  q *= gain;
  return tall ? q : Eigen::MatrixXd(q.transpose());
}

template <typename Scalar>
void add_linear(ParameterSet<Scalar>& p, const std::string& weight_name, const std::string& bias_name, int in, int out,
                double gain, std::mt19937_64& rng) {
  p.add(weight_name, orthogonal(out, in, gain, rng).template cast<Scalar>());
  p.add(bias_name, Matrix<Scalar>::Zero(out, 1));
}

template <typename Scalar>
void add_tower(ParameterSet<Scalar>& p, const NetworkSpec& spec, Tower tower, std::mt19937_64& rng) {
  int in = spec.observation_size;
  for (std::size_t i = 0; i < spec.observation_layers.size(); ++i) {
    add_linear(p, layer_name(tower, "obs", i, "weight"), layer_name(tower, "obs", i, "bias"), in,
               spec.observation_layers[i], spec.hidden_gain, rng);
    in = spec.observation_layers[i];
  }
  in = spec.weight_size;
  for (std::size_t i = 0; i < spec.weight_layers.size(); ++i) {
    add_linear(p, layer_name(tower, "pref", i, "weight"), layer_name(tower, "pref", i, "bias"), in,
               spec.weight_layers[i], spec.hidden_gain, rng);
    in = spec.weight_layers[i];
  }
  const int out = tower == Tower::actor ? spec.action_count * spec.weight_size : spec.weight_size;
  const double gain = tower == Tower::actor ? spec.actor_head_gain : spec.critic_head_gain;
  add_linear(p, std::string(tower_name(tower)) + ".head.weight", std::string(tower_name(tower)) + ".head.bias",
             spec.feature_size(), out, gain, rng);
}

/// Parameter block indices of one tower, in the fixed creation order.
struct TowerLayout {
  std::size_t first = 0;
  std::size_t obs_layers = 0;
  std::size_t pref_layers = 0;

  std::size_t obs_weight(std::size_t i) const { return first + 2 * i; }
  std::size_t pref_weight(std::size_t i) const { return first + 2 * (obs_layers + i); }
  std::size_t head_weight() const { return first + 2 * (obs_layers + pref_layers); }
  std::size_t block_count() const { return 2 * (obs_layers + pref_layers + 1); }
};

inline TowerLayout tower_layout(const NetworkSpec& spec, Tower tower) {
  TowerLayout actor{0, spec.observation_layers.size(), spec.weight_layers.size()};
  if (tower == Tower::actor) return actor;
  return TowerLayout{actor.block_count(), actor.obs_layers, actor.pref_layers};
}

template <typename Scalar>
Matrix<Scalar> activate(Activation act, Matrix<Scalar> x) {
  if (act == Activation::tanh) x = x.array().tanh().matrix();
  return x;
}

template <typename Scalar>
Var<Scalar> activate(Activation act, Var<Scalar> x) {
  return act == Activation::tanh ? ad::tanh(x) : x;
}

template <typename Scalar>
Matrix<Scalar> tower_infer(const ActorCritic<Scalar>& net, Tower tower, const Matrix<Scalar>& obs,
                           const Matrix<Scalar>& w) {
  const NetworkSpec& spec = net.spec;
  const TowerLayout lay = tower_layout(spec, tower);
  const auto& p = net.params;
  Matrix<Scalar> x = obs;
  for (std::size_t i = 0; i < lay.obs_layers; ++i) {
    const auto k = lay.obs_weight(i);
    x = activate<Scalar>(spec.activation, (p[k].value * x).colwise() + p[k + 1].value.col(0));
  }
  Matrix<Scalar> y = w;
  for (std::size_t i = 0; i < lay.pref_layers; ++i) {
    const auto k = lay.pref_weight(i);
    y = activate<Scalar>(spec.activation, (p[k].value * y).colwise() + p[k + 1].value.col(0));
  }
  const auto k = lay.head_weight();
  return (p[k].value * x.cwiseProduct(y)).colwise() + p[k + 1].value.col(0);
}

template <typename Scalar>
Var<Scalar> tower_record(Tape<Scalar>& tape, ActorCritic<Scalar>& net, Tower tower, const Matrix<Scalar>& obs,
                         const Matrix<Scalar>& w) {
  const NetworkSpec& spec = net.spec;
  const TowerLayout lay = tower_layout(spec, tower);
  auto& p = net.params;
  auto linear = [&](std::size_t k, Var<Scalar> in) {
    return add_bias(matmul(tape.parameter(p[k]), in), tape.parameter(p[k + 1]));
  };
  Var<Scalar> x = tape.constant(obs);
  for (std::size_t i = 0; i < lay.obs_layers; ++i) x = activate(spec.activation, linear(lay.obs_weight(i), x));
  Var<Scalar> y = tape.constant(w);
  for (std::size_t i = 0; i < lay.pref_layers; ++i) y = activate(spec.activation, linear(lay.pref_weight(i), y));
  return linear(lay.head_weight(), cmul(x, y));
}

template <typename Scalar>
void check_inputs(const NetworkSpec& spec, const Matrix<Scalar>& obs, const Matrix<Scalar>& w) {
  if (obs.rows() != spec.observation_size)
    throw ConfigError("network: observation has " + std::to_string(obs.rows()) + " features, expected " +
                      std::to_string(spec.observation_size));
  if (w.rows() != spec.weight_size)
    throw ConfigError("network: weight has " + std::to_string(w.rows()) + " entries, expected " +
                      std::to_string(spec.weight_size));
  if (obs.cols() != w.cols()) throw ConfigError("network: observation and weight batch sizes differ");
}

}  // namespace detail

template <typename Scalar>
ActorCritic<Scalar> make_actor_critic(const NetworkSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  ActorCritic<Scalar> net{spec, {}};
  detail::add_tower(net.params, spec, Tower::actor, rng);
  detail::add_tower(net.params, spec, Tower::critic, rng);
  net.params.freeze();
  return net;
}

/// Forward pass without recording. `obs` is (observation_size x B), `w` is (weight_size x B).
template <typename Scalar>
struct NetworkOutput {
  Matrix<Scalar> logits;  // (action_count * weight_size) x B
  Matrix<Scalar> values;  // weight_size x B
};

template <typename Scalar>
NetworkOutput<Scalar> infer(const ActorCritic<Scalar>& net, const Matrix<Scalar>& obs, const Matrix<Scalar>& w) {
  detail::check_inputs(net.spec, obs, w);
  return {detail::tower_infer(net, Tower::actor, obs, w), detail::tower_infer(net, Tower::critic, obs, w)};
}

template <typename Scalar>
Matrix<Scalar> infer_logits(const ActorCritic<Scalar>& net, const Matrix<Scalar>& obs, const Matrix<Scalar>& w) {
  detail::check_inputs(net.spec, obs, w);
  return detail::tower_infer(net, Tower::actor, obs, w);
}

template <typename Scalar>
Matrix<Scalar> infer_values(const ActorCritic<Scalar>& net, const Matrix<Scalar>& obs, const Matrix<Scalar>& w) {
  detail::check_inputs(net.spec, obs, w);
  return detail::tower_infer(net, Tower::critic, obs, w);
}

template <typename Scalar>
struct RecordedOutput {
  Var<Scalar> logits;
  Var<Scalar> values;
};

/// Forward pass recorded on `tape`; parameters are bound so backward() fills their grads.
template <typename Scalar>
RecordedOutput<Scalar> record_forward(Tape<Scalar>& tape, ActorCritic<Scalar>& net, const Matrix<Scalar>& obs,
                                      const Matrix<Scalar>& w) {
  detail::check_inputs(net.spec, obs, w);
  return {detail::tower_record(tape, net, Tower::actor, obs, w), detail::tower_record(tape, net, Tower::critic, obs, w)};
}

/// Reshapes one column of actor logits into an (action_count x weight_size) matrix.
template <typename Scalar>
Matrix<Scalar> logit_table(const Matrix<Scalar>& logits, Eigen::Index column, int weight_size) {
  const Eigen::Index actions = logits.rows() / weight_size;
  Matrix<Scalar> table(actions, weight_size);
  for (Eigen::Index a = 0; a < actions; ++a) table.row(a) = logits.col(column).segment(a * weight_size, weight_size);
  return table;
}

}  // namespace truckmorl::ad
