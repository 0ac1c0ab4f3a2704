#include "truckmorl/moppo/weights.hpp"

#include <cmath>
#include <cstdio>

#include "truckmorl/errors.hpp"

namespace truckmorl::moppo {

WeightVector::WeightVector(Eigen::VectorXd w) : w_(std::move(w)) {
  if (w_.size() == 0) throw ConfigError("WeightVector: empty");
  if (!w_.allFinite()) throw ConfigError("WeightVector: non-finite component");
  if (w_.minCoeff() < 0.0) throw ConfigError("WeightVector: negative component in " + to_string());
  if (std::abs(w_.sum() - 1.0) > kTolerance) throw ConfigError("WeightVector: components of " + to_string() + " do not sum to 1");
}

WeightVector WeightVector::basis(int size, int index) {
  if (index < 0 || index >= size) throw ConfigError("WeightVector::basis: index out of range");
  return WeightVector(Eigen::VectorXd::Unit(size, index));
}

WeightVector WeightVector::normalized(Eigen::VectorXd w) {
  for (Eigen::Index i = 0; i < w.size(); ++i)
    if (w(i) < 0.0 && w(i) >= -kTolerance) w(i) = 0.0;
  const double s = w.sum();
  if (s > 0.0) w /= s;
  return WeightVector(std::move(w));
}

double WeightVector::dot(const Eigen::VectorXd& v) const {
  if (v.size() != w_.size()) throw ConfigError("WeightVector::dot: size mismatch");
  return w_.dot(v);
}

bool WeightVector::near(const WeightVector& other, double tol) const {
  return other.size() == size() && (w_ - other.w_).cwiseAbs().maxCoeff() <= tol;
}

std::string WeightVector::to_string() const {
  std::string out = "(";
  char buf[32];
  for (Eigen::Index i = 0; i < w_.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.6g", w_(i));
    if (i) out += ", ";
    out += buf;
  }
  return out + ")";
}

bool operator<(const WeightVector& a, const WeightVector& b) {
  const Eigen::Index n = std::min(a.w_.size(), b.w_.size());
  for (Eigen::Index i = 0; i < n; ++i)
    if (a.w_(i) != b.w_(i)) return a.w_(i) < b.w_(i);
  return a.w_.size() < b.w_.size();
}

std::vector<WeightVector> unique_weights(const std::vector<WeightVector>& ws, double tol) {
  std::vector<WeightVector> out;
  for (const auto& w : ws)
    if (!contains_weight(out, w, tol)) out.push_back(w);
  return out;
}

bool contains_weight(const std::vector<WeightVector>& ws, const WeightVector& w, double tol) {
  for (const auto& x : ws)
    if (x.near(w, tol)) return true;
  return false;
}

Eigen::MatrixXd weight_matrix(const std::vector<WeightVector>& ws) {
  if (ws.empty()) return {};
  Eigen::MatrixXd m(ws.front().size(), static_cast<Eigen::Index>(ws.size()));
  for (std::size_t j = 0; j < ws.size(); ++j) m.col(static_cast<Eigen::Index>(j)) = ws[j].values();
  return m;
}

}  // namespace truckmorl::moppo
