#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "truckmorl/autodiff/distribution.hpp"
#include "truckmorl/autodiff/network.hpp"
#include "truckmorl/env/mo_env.hpp"
#include "truckmorl/errors.hpp"
#include "truckmorl/gpils/ccs.hpp"
#include "truckmorl/moppo/policy.hpp"

namespace truckmorl::gpils {

/// A policy of the GPI set: a parameter snapshot conditioned on the weight it was registered under.
template <typename Scalar>
struct GpiMember {
  const ad::ActorCritic<Scalar>* network;
  WeightVector weight;
};

/// argmax_a max_j z_j(a), z_j = Z_j w, over per-policy logit tables Z_j (A x d). Masked actions are
/// excluded before both maxima; the lowest action index wins ties.
int gpi_action_from_tables(const std::vector<Eigen::MatrixXd>& tables, const WeightVector& w,
                           const ad::MaskVector& mask);

/// Per-action max over members of the masked scalarized logits. Members sharing a network are
/// evaluated in one batched forward pass.
template <typename Scalar>
Eigen::VectorXd gpi_scores(const Eigen::VectorXd& obs, const ad::MaskVector& mask, const WeightVector& w,
                           const std::vector<GpiMember<Scalar>>& members) {
  if (members.empty()) throw UsageError("gpi_action: empty policy set");
  if (!mask.any()) throw InvalidMaskError("gpi_action: every action is masked");
  const int d = w.size();
  Eigen::VectorXd best = Eigen::VectorXd::Constant(mask.size(), -std::numeric_limits<double>::infinity());
  const ad::Matrix<Scalar> obs_s = obs.cast<Scalar>();
  for (std::size_t start = 0; start < members.size();) {
    std::size_t stop = start + 1;
    while (stop < members.size() && members[stop].network == members[start].network) ++stop;
    const auto count = static_cast<Eigen::Index>(stop - start);
    ad::Matrix<Scalar> conditioning(d, count);
    for (Eigen::Index j = 0; j < count; ++j)
      conditioning.col(j) = members[start + static_cast<std::size_t>(j)].weight.values().template cast<Scalar>();
    const ad::Matrix<Scalar> logits =
        ad::infer_logits(*members[start].network, ad::Matrix<Scalar>(obs_s.replicate(1, count)), conditioning);
    for (Eigen::Index j = 0; j < count; ++j) {
      const Eigen::VectorXd z = ad::logit_table(logits, j, d).template cast<double>() * w.values();
      best = best.cwiseMax(z);
    }
    start = stop;
  }
  return best;
}

template <typename Scalar>
int gpi_action(const Eigen::VectorXd& obs, const ad::MaskVector& mask, const WeightVector& w,
               const std::vector<GpiMember<Scalar>>& members) {
  return ad::masked_argmax(gpi_scores(obs, mask, w, members), mask);
}

/// Mean over the seeded rollouts of w^T (discounted return) when acting by gpi_action.
template <typename Scalar>
double estimate_gpi_value(const WeightVector& w, const std::vector<GpiMember<Scalar>>& members, env::MoEnv& env,
                          const std::vector<std::uint64_t>& seeds, double gamma) {
  const moppo::Actor actor = [&](const env::Observation& o) { return gpi_action(o.features, o.mask, w, members); };
  return w.dot(moppo::evaluate_actor(env, actor, seeds, gamma).value);
}

struct RankedWeight {
  WeightVector weight;
  double gpi_value;    // estimated optimal scalarized value
  double current;      // max over registered value vectors of w^T v
  double improvement;  // gpi_value - current
};

/// Scores every corner not in `ccs.visited` and sorts by decreasing improvement, breaking ties
/// lexicographically on the weight. Empty result means the outer loop has nothing left to solve.
std::vector<RankedWeight> rank_corners(const std::vector<WeightVector>& corners, const CcsState& ccs,
                                       const std::function<double(const WeightVector&)>& gpi_value);

/// First entry of rank_corners; nullopt when no candidate remains.
std::optional<RankedWeight> select_weight(const std::vector<WeightVector>& corners, const CcsState& ccs,
                                          const std::function<double(const WeightVector&)>& gpi_value);

}  // namespace truckmorl::gpils
