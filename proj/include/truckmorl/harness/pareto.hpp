#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "truckmorl/env/mo_env.hpp"
#include "truckmorl/errors.hpp"
#include "truckmorl/gpils/ccs.hpp"
#include "truckmorl/gpils/run.hpp"
#include "truckmorl/moppo/policy.hpp"

namespace truckmorl::harness {

struct ParetoRecord {
  moppo::WeightVector weight = moppo::WeightVector::basis(3, 0);
  int policy = 0;              // snapshot id of the acting CCS entry
  double success_rate = 0.0;   // %
  double failure_rate = 0.0;   // %
  double max_step_rate = 0.0;  // %
  double average_speed = 0.0;  // m/s
  double energy_cost = 0.0;    // EUR, undiscounted, mean over episodes
  double driver_cost = 0.0;    // EUR
  double distance = 0.0;       // m
  double tcop = 0.0;           // energy + driver
  double tcop_per_m = 0.0;

  bool operator==(const ParetoRecord&) const = default;
};

/// Aggregates the greedy episodes of one weight into a record.
ParetoRecord aggregate_record(const moppo::WeightVector& w, int policy, const std::vector<moppo::EpisodeOutcome>& episodes);

/// Index of the entry maximizing w^T v (first on ties). Throws UsageError on an empty CCS.
std::size_t select_entry(const gpils::CcsState& ccs, const moppo::WeightVector& w);

/// Records not dominated by any other in (driver cost, energy cost, success rate) jointly;
/// exact duplicates keep their first occurrence. Order is preserved.
std::vector<ParetoRecord> non_dominated(const std::vector<ParetoRecord>& records);

/// Evaluation lattice with the fewest points >= count on the simplex of dimension d.
std::vector<moppo::WeightVector> evaluation_weights(int dimension, int count);

struct ParetoOptions {
  int weight_count = 500;
  int episodes = 5;
  std::uint64_t seed = 0;
  double gamma = 0.99;
  int threads = 0;  // 0: hardware concurrency
};

/// One record per weight, in weight order. Each weight acts with the CCS entry that maximizes
/// w^T v, conditioned on w itself, greedily over the shared evaluation seeds.
template <typename Scalar>
std::vector<ParetoRecord> evaluate_weights(const gpils::CcsState& ccs, const gpils::SnapshotMap<Scalar>& snapshots,
                                           const env::EnvFactory& factory,
                                           const std::vector<moppo::WeightVector>& weights,
                                           const ParetoOptions& options) {
  if (ccs.entries.empty()) throw UsageError("pareto_eval: empty CCS");
  if (options.episodes < 1) throw UsageError("pareto_eval: episodes must be at least 1");
  for (const auto& e : ccs.entries)
    if (!snapshots.count(e.snapshot)) throw CheckpointError("pareto_eval: missing snapshot " + std::to_string(e.snapshot));
  const std::vector<std::uint64_t> seeds = moppo::evaluation_seeds(options.seed, options.episodes);

  std::vector<ParetoRecord> records(weights.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    try {
      std::unique_ptr<env::MoEnv> env = factory();
      for (std::size_t i = next++; i < weights.size(); i = next++) {
        const moppo::WeightVector& w = weights[i];
        const gpils::CcsEntry& entry = ccs.entries[select_entry(ccs, w)];
        const auto& net = *snapshots.at(entry.snapshot);
        const moppo::Evaluation ev = moppo::evaluate_policy(net, w, *env, seeds, options.gamma);
        records[i] = aggregate_record(w, entry.snapshot, ev.episodes);
      }
    } catch (...) {
      const std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = weights.size();
    }
  };
  unsigned n = options.threads > 0 ? static_cast<unsigned>(options.threads) : std::max(1u, std::thread::hardware_concurrency());
  n = std::min<unsigned>(n, static_cast<unsigned>(std::max<std::size_t>(1, weights.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return records;
}

/// Full sweep: evaluation lattice, per-weight records, non-dominated filter.
template <typename Scalar>
std::vector<ParetoRecord> pareto_eval(const gpils::CcsState& ccs, const gpils::SnapshotMap<Scalar>& snapshots,
                                      const env::EnvFactory& factory, const ParetoOptions& options) {
  if (ccs.entries.empty()) throw UsageError("pareto_eval: empty CCS");
  const int d = ccs.entries.front().weight.size();
  return non_dominated(evaluate_weights(ccs, snapshots, factory, evaluation_weights(d, options.weight_count), options));
}

}  // namespace truckmorl::harness
