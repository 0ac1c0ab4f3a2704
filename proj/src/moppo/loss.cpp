#include "truckmorl/moppo/loss.hpp"

namespace truckmorl::moppo {

Eigen::VectorXd scalarized_advantages(const RolloutBuffer& buffer, const std::vector<std::size_t>& indices,
                                      bool normalize) {
  Eigen::VectorXd a(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t j = 0; j < indices.size(); ++j) {
    const std::size_t i = indices[j];
    a(static_cast<Eigen::Index>(j)) = buffer.transitions.at(i).weight.dot(buffer.advantages.at(i));
  }
  if (normalize && a.size() > 0) {
    const double mean = a.mean();
    const double var = (a.array() - mean).square().mean();
    a = (a.array() - mean) / (std::sqrt(var) + 1e-8);
  }
  return a;
}

}  // namespace truckmorl::moppo
