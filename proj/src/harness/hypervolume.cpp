#include "truckmorl/harness/hypervolume.hpp"

#include <algorithm>
#include <sstream>

namespace truckmorl::harness {

double hypervolume(const std::vector<Eigen::Vector2d>& points, const Eigen::Vector2d& ref,
                   std::vector<std::string>* warnings) {
  std::vector<Eigen::Vector2d> kept;
  for (const auto& p : points) {
    if (p.x() > ref.x() && p.y() > ref.y()) {
      kept.push_back(p);
    } else if (warnings) {
      std::ostringstream msg;
      msg << "hypervolume: point (" << p.x() << ", " << p.y() << ") does not dominate the reference point; skipped";
      warnings->push_back(msg.str());
    }
  }
  std::sort(kept.begin(), kept.end(), [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return a.x() != b.x() ? a.x() > b.x() : a.y() > b.y();
  });
  double area = 0.0;
  double covered_y = ref.y();
  for (const auto& p : kept) {
    if (p.y() <= covered_y) continue;
    area += (p.x() - ref.x()) * (p.y() - covered_y);
    covered_y = p.y();
  }
  return area;
}

}  // namespace truckmorl::harness
