#include "truckmorl/harness/pareto.hpp"

namespace truckmorl::harness {

ParetoRecord aggregate_record(const moppo::WeightVector& w, int policy, const std::vector<moppo::EpisodeOutcome>& episodes) {
  if (episodes.empty()) throw UsageError("aggregate_record: no episodes");
  ParetoRecord r;
  r.weight = w;
  r.policy = policy;
  int success = 0, failure = 0, max_step = 0;
  double seconds = 0.0;
  for (const auto& e : episodes) {
    if (e.success)
      ++success;
    else if (e.collision)
      ++failure;
    else
      ++max_step;
    r.driver_cost += -e.undiscounted(1);
    r.energy_cost += -e.undiscounted(2);
    r.distance += e.distance;
    seconds += e.seconds;
  }
  const double n = static_cast<double>(episodes.size());
  r.success_rate = 100.0 * success / n;
  r.failure_rate = 100.0 * failure / n;
  r.max_step_rate = 100.0 * max_step / n;
  r.driver_cost /= n;
  r.energy_cost /= n;
  r.distance /= n;
  r.average_speed = seconds > 0.0 ? r.distance / (seconds / n) : 0.0;
  r.tcop = r.energy_cost + r.driver_cost;
  r.tcop_per_m = r.distance > 0.0 ? r.tcop / r.distance : 0.0;
  return r;
}

std::size_t select_entry(const gpils::CcsState& ccs, const moppo::WeightVector& w) {
  if (ccs.entries.empty()) throw UsageError("select_entry: empty CCS");
  std::size_t best = 0;
  double best_u = w.dot(ccs.entries[0].value);
  for (std::size_t i = 1; i < ccs.entries.size(); ++i) {
    const double u = w.dot(ccs.entries[i].value);
    if (u > best_u) {
      best_u = u;
      best = i;
    }
  }
  return best;
}

namespace {

bool dominates(const ParetoRecord& a, const ParetoRecord& b) {
  const bool no_worse = a.driver_cost <= b.driver_cost && a.energy_cost <= b.energy_cost && a.success_rate >= b.success_rate;
  const bool better = a.driver_cost < b.driver_cost || a.energy_cost < b.energy_cost || a.success_rate > b.success_rate;
  return no_worse && better;
}

bool same_point(const ParetoRecord& a, const ParetoRecord& b) {
  return a.driver_cost == b.driver_cost && a.energy_cost == b.energy_cost && a.success_rate == b.success_rate;
}

}  // namespace

std::vector<ParetoRecord> non_dominated(const std::vector<ParetoRecord>& records) {
  std::vector<ParetoRecord> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    bool keep = true;
    for (std::size_t j = 0; j < records.size() && keep; ++j) {
      if (i == j) continue;
      if (dominates(records[j], records[i]) || (j < i && same_point(records[j], records[i]))) keep = false;
    }
    if (keep) out.push_back(records[i]);
  }
  return out;
}

std::vector<moppo::WeightVector> evaluation_weights(int dimension, int count) {
  return gpils::simplex_lattice(dimension, gpils::lattice_divisions_for(dimension, count));
}

}  // namespace truckmorl::harness
