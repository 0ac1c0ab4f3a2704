#include "truckmorl/gpils/run.hpp"

#include <algorithm>

namespace truckmorl::gpils {

void GpilsConfig::validate() const {
  if (iterations < 1) throw ConfigError("gpils: iterations must be at least 1");
  if (top_k < 1) throw ConfigError("gpils: top_k must be at least 1");
  if (eval_episodes < 1) throw ConfigError("gpils: eval_episodes must be at least 1");
  if (gpi_rollouts < 1) throw ConfigError("gpils: gpi_rollouts must be at least 1");
  if (!(dedup_tolerance > 0.0)) throw ConfigError("gpils: dedup_tolerance must be positive");
}

double ccs_hypervolume(const CcsState& ccs) {
  std::vector<Eigen::Vector2d> points;
  for (const auto& e : ccs.entries) {
    if (e.value.size() < 3) return 0.0;
    points.emplace_back(e.value(1), e.value(2));
  }
  return harness::hypervolume(points, kAuditReference);
}

double ccs_hypervolume_tolerance(const CcsState& ccs, double sigmas) {
  double tol = 0.0;
  for (const auto& e : ccs.entries) {
    if (e.value.size() < 3 || e.standard_error.size() < 3) continue;
    const double width = std::max(0.0, e.value(1) - kAuditReference(0));
    const double height = std::max(0.0, e.value(2) - kAuditReference(1));
    tol += sigmas * (e.standard_error(1) * height + e.standard_error(2) * width);
  }
  return tol;
}

namespace {

std::string join_weight(const WeightVector& w, char sep) {
  std::string s;
  for (int i = 0; i < w.size(); ++i) s += (i ? std::string(1, sep) : "") + format_double(w[i]);
  return s;
}

}  // namespace

std::string training_log_header(int weight_size) {
  std::string h = "iteration";
  for (int i = 0; i < weight_size; ++i) h += ",w" + std::to_string(i);
  h += ",pool_size,clip_objective,value_loss,entropy,total_loss,approx_kl,clip_fraction,episodes,success_rate";
  for (int i = 0; i < weight_size; ++i) h += ",mean_return" + std::to_string(i);
  h += ",hypervolume,hypervolume_tolerance,ccs_size";
  return h;
}

std::string training_log_row(const IterationLog& log) {
  const auto& u = log.update;
  std::string r = std::to_string(log.iteration) + "," + join_weight(log.selected, ',');
  r += "," + std::to_string(log.pool.size());
  for (double x : {u.loss.clip_objective, u.loss.value_loss, u.loss.entropy, u.loss.total, u.loss.approx_kl,
                   u.loss.clip_fraction})
    r += "," + format_double(x);
  r += "," + std::to_string(u.episodes) + "," + format_double(u.success_rate);
  for (int i = 0; i < log.selected.size(); ++i)
    r += "," + format_double(i < u.mean_return.size() ? u.mean_return(i) : 0.0);
  r += "," + format_double(log.hypervolume) + "," + format_double(log.hypervolume_tolerance) + "," +
       std::to_string(log.ccs_size);
  return r;
}

std::string history_header() { return "iteration,selected,visited,hypervolume"; }

std::string history_row(const IterationLog& log) {
  std::string visited;
  for (std::size_t i = 0; i < log.visited.size(); ++i) visited += (i ? "|" : "") + join_weight(log.visited[i], ' ');
  return std::to_string(log.iteration) + "," + join_weight(log.selected, ' ') + "," + visited + "," +
         format_double(log.hypervolume);
}

}  // namespace truckmorl::gpils
