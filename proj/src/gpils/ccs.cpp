#include "truckmorl/gpils/ccs.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "truckmorl/errors.hpp"

namespace truckmorl::gpils {

std::vector<WeightVector> simplex_lattice(int dimension, int divisions) {
  if (dimension < 1 || divisions < 1) throw ConfigError("simplex_lattice: dimension and divisions must be positive");
  std::vector<WeightVector> out;
  std::vector<int> k(static_cast<std::size_t>(dimension), 0);
  std::function<void(int, int)> fill = [&](int index, int remaining) {
    if (index == dimension - 1) {
      k[static_cast<std::size_t>(index)] = remaining;
      Eigen::VectorXd w(dimension);
      for (int i = 0; i < dimension; ++i) w(i) = static_cast<double>(k[static_cast<std::size_t>(i)]) / divisions;
      out.push_back(WeightVector::normalized(std::move(w)));
      return;
    }
    for (int c = 0; c <= remaining; ++c) {
      k[static_cast<std::size_t>(index)] = c;
      fill(index + 1, remaining - c);
    }
  };
  fill(0, divisions);
  return out;
}

int lattice_divisions_for(int dimension, int min_points) {
  if (dimension < 1) throw ConfigError("lattice_divisions_for: dimension must be positive");
  if (dimension == 1) return 1;
  for (int n = 1;; ++n) {
    // C(n + d - 1, d - 1)
    double count = 1.0;
    for (int i = 1; i < dimension; ++i) count = count * (n + i) / i;
    if (count >= min_points) return n;
  }
}

namespace {

double value_scale(const std::vector<Eigen::VectorXd>& values) {
  double s = 1.0;
  for (const auto& v : values) s = std::max(s, v.cwiseAbs().maxCoeff());
  return s;
}

}  // namespace

std::vector<WeightVector> corner_weights(const std::vector<Eigen::VectorXd>& values, const CornerOptions& options) {
  if (values.empty()) throw ConfigError("corner_weights: empty value set");
  const int d = static_cast<int>(values.front().size());
  for (const auto& v : values)
    if (v.size() != d) throw ConfigError("corner_weights: value vectors differ in size");
  const int n = static_cast<int>(values.size());
  const double tol = 1e-9 * value_scale(values);

  std::vector<WeightVector> found;
  for (int k = 0; k < d; ++k) found.push_back(WeightVector::basis(d, k));

  // Constraint rows: 0..n-1 are "u = w^T v_i", n..n+d-1 are "w_k = 0".
  const int rows = n + d;
  std::vector<int> pick(static_cast<std::size_t>(d));
  std::function<void(int, int)> choose = [&](int slot, int start) {
    if (slot == d) {
      Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d + 1, d + 1);
      Eigen::VectorXd b = Eigen::VectorXd::Zero(d + 1);
      for (int r = 0; r < d; ++r) {
        const int c = pick[static_cast<std::size_t>(r)];
        if (c < n) {
          a.row(r).head(d) = values[static_cast<std::size_t>(c)].transpose();
          a(r, d) = -1.0;
        } else {
          a(r, c - n) = 1.0;
        }
      }
      a.row(d).head(d).setOnes();
      b(d) = 1.0;
      const Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
      if (!lu.isInvertible()) return;
      const Eigen::VectorXd x = lu.solve(b);
      const Eigen::VectorXd w = x.head(d);
      if (!x.allFinite() || w.minCoeff() < -1e-9) return;
      const double u = x(d);
      for (const auto& v : values)
        if (w.dot(v) > u + tol) return;
      Eigen::VectorXd clipped = w;
      for (int i = 0; i < d; ++i)
        if (clipped(i) < 0.0) clipped(i) = 0.0;
      const WeightVector candidate = WeightVector::normalized(clipped / clipped.sum());
      if (!moppo::contains_weight(found, candidate, options.dedup_tolerance)) found.push_back(candidate);
      return;
    }
    for (int c = start; c < rows; ++c) {
      pick[static_cast<std::size_t>(slot)] = c;
      choose(slot + 1, c + 1);
    }
  };
  choose(0, 0);
  std::sort(found.begin(), found.end());
  return found;
}

std::vector<Eigen::VectorXd> CcsState::values() const {
  std::vector<Eigen::VectorXd> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.value);
  return out;
}

double CcsState::best_scalarized(const WeightVector& w) const {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& e : entries) best = std::max(best, w.dot(e.value));
  return best;
}

std::vector<std::size_t> undominated_indices(const std::vector<Eigen::VectorXd>& values) {
  if (values.empty()) return {};
  const int d = static_cast<int>(values.front().size());
  std::vector<WeightVector> points = simplex_lattice(d, d == 1 ? 1 : 100);
  for (const auto& c : corner_weights(values)) points.push_back(c);

  std::vector<bool> keep(values.size(), false);
  for (const auto& w : points) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& v : values) best = std::max(best, w.dot(v));
    const double tol = 1e-9 * std::max(1.0, std::abs(best));
    for (std::size_t i = 0; i < values.size(); ++i)
      if (w.dot(values[i]) >= best - tol) keep[i] = true;
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (keep[i]) out.push_back(i);
  return out;
}

void remove_dominated(CcsState& ccs) {
  const std::vector<std::size_t> keep = undominated_indices(ccs.values());
  std::vector<CcsEntry> entries;
  for (std::size_t i : keep) entries.push_back(ccs.entries[i]);
  ccs.entries = std::move(entries);
  std::vector<WeightVector> visited;
  for (const auto& w : ccs.visited) {
    const bool registered = std::any_of(ccs.entries.begin(), ccs.entries.end(),
                                        [&](const CcsEntry& e) { return e.weight.near(w, kWeightTolerance); });
    if (registered) visited.push_back(w);
  }
  ccs.visited = std::move(visited);
}

}  // namespace truckmorl::gpils
