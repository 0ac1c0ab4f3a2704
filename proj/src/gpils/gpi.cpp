#include "truckmorl/gpils/gpi.hpp"

#include <algorithm>

namespace truckmorl::gpils {

int gpi_action_from_tables(const std::vector<Eigen::MatrixXd>& tables, const WeightVector& w,
                           const ad::MaskVector& mask) {
  if (tables.empty()) throw UsageError("gpi_action: empty policy set");
  Eigen::VectorXd best = Eigen::VectorXd::Constant(mask.size(), -std::numeric_limits<double>::infinity());
  for (const auto& z : tables) {
    if (z.rows() != mask.size() || z.cols() != w.size()) throw ConfigError("gpi_action: logit table shape mismatch");
    best = best.cwiseMax(z * w.values());
  }
  return ad::masked_argmax(best, mask);
}

std::vector<RankedWeight> rank_corners(const std::vector<WeightVector>& corners, const CcsState& ccs,
                                       const std::function<double(const WeightVector&)>& gpi_value) {
  std::vector<RankedWeight> ranked;
  for (const auto& w : corners) {
    if (moppo::contains_weight(ccs.visited, w, kWeightTolerance)) continue;
    const double estimate = gpi_value(w);
    const double current = ccs.best_scalarized(w);
    ranked.push_back({w, estimate, current, estimate - current});
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const RankedWeight& a, const RankedWeight& b) {
    if (a.improvement != b.improvement) return a.improvement > b.improvement;
    return a.weight < b.weight;
  });
  return ranked;
}

std::optional<RankedWeight> select_weight(const std::vector<WeightVector>& corners, const CcsState& ccs,
                                          const std::function<double(const WeightVector&)>& gpi_value) {
  std::vector<RankedWeight> ranked = rank_corners(corners, ccs, gpi_value);
  if (ranked.empty()) return std::nullopt;
  return ranked.front();
}

}  // namespace truckmorl::gpils
