#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "truckmorl/autodiff/checkpoint.hpp"
#include "truckmorl/env/mo_env.hpp"
#include "truckmorl/errors.hpp"
#include "truckmorl/gpils/ccs.hpp"
#include "truckmorl/gpils/gpi.hpp"
#include "truckmorl/gpils/store.hpp"
#include "truckmorl/harness/hypervolume.hpp"
#include "truckmorl/moppo/trainer.hpp"
#include "truckmorl/seeding.hpp"

namespace truckmorl::gpils {

struct GpilsConfig {
  int iterations = 100;
  int top_k = 4;
  int eval_episodes = 5;
  int gpi_rollouts = 5;
  double dedup_tolerance = 1e-6;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Reference point of the training hypervolume audit over (driver, energy) values.
inline const Eigen::Vector2d kAuditReference{-5.0, -5.0};

/// Hypervolume of the (driver, energy) projections of the registered value vectors.
double ccs_hypervolume(const CcsState& ccs);

/// First-order bound on the hypervolume change when every projected point moves by
/// `sigmas` standard errors per coordinate.
double ccs_hypervolume_tolerance(const CcsState& ccs, double sigmas = 3.0);

struct IterationLog {
  int iteration = 0;
  WeightVector selected = WeightVector::basis(1, 0);
  std::vector<WeightVector> pool;     // M'
  std::vector<WeightVector> visited;  // M after pruning
  moppo::UpdateReport update;
  double hypervolume = 0.0;
  double hypervolume_tolerance = 0.0;
  int ccs_size = 0;
};

std::string training_log_header(int weight_size);
std::string training_log_row(const IterationLog& log);
std::string history_header();
std::string history_row(const IterationLog& log);

struct RunOptions {
  std::filesystem::path checkpoint_dir;  // empty: no checkpointing or resume
  std::filesystem::path training_log;    // empty: no CSV log
  int stop_after = 0;                    // stop once this iteration completes (0: never)
  std::function<void(const IterationLog&)> on_iteration;
};

template <typename Scalar>
using SnapshotMap = std::map<int, std::shared_ptr<const ad::ActorCritic<Scalar>>>;

template <typename Scalar>
struct GpilsResult {
  CcsState ccs;
  SnapshotMap<Scalar> snapshots;   // every snapshot referenced by ccs.entries
  std::vector<IterationLog> history;  // iterations executed by this call
  bool finished = false;              // budget consumed or no corner weight left
  bool resumed = false;
};

/// GPI members for every registered entry, grouped by snapshot so shared parameters batch.
template <typename Scalar>
std::vector<GpiMember<Scalar>> gpi_members(const CcsState& ccs, const SnapshotMap<Scalar>& snapshots) {
  std::vector<GpiMember<Scalar>> members;
  for (const auto& [id, net] : snapshots)
    for (const auto& e : ccs.entries)
      if (e.snapshot == id) members.push_back({net.get(), e.weight});
  return members;
}

/// Loads the CCS and its snapshots from a checkpoint bundle.
template <typename Scalar>
GpilsResult<Scalar> load_gpils_checkpoint(const std::filesystem::path& dir) {
  const CheckpointStore store(dir);
  if (!store.has_progress()) throw CheckpointError("no checkpoint found in " + dir.string());
  const Progress progress = store.read_progress();
  if (progress.iteration < 1) throw CheckpointError("checkpoint in " + dir.string() + " holds no iteration");
  GpilsResult<Scalar> r;
  r.ccs = store.read_ccs(progress.weight_size, progress.iteration);
  if (r.ccs.entries.empty()) throw CheckpointError("checkpoint in " + dir.string() + " has an empty CCS");
  for (const auto& e : r.ccs.entries) {
    if (r.snapshots.count(e.snapshot)) continue;
    r.snapshots[e.snapshot] = std::make_shared<const ad::ActorCritic<Scalar>>(
        ad::load_checkpoint<Scalar>(store.snapshot_path(e.snapshot)).network);
  }
  r.finished = progress.finished;
  return r;
}

/// GPI-LS outer loop over a single MOPPO learner, with per-iteration checkpoints.
///
/// Iteration 1 trains at e1. Each later iteration ranks the corner weights of the current value
/// set that are not yet in M by estimated GPI improvement, trains on the best one with episodes
/// drawn from M' = M + TopK + {w}, evaluates the new parameters conditioned on every weight of M',
/// registers the results and prunes. A run resumed from the checkpoint directory continues with
/// the same derived seeds and therefore reproduces an uninterrupted run.
template <typename Scalar>
GpilsResult<Scalar> run_gpils(const env::EnvFactory& factory, const ad::NetworkSpec& spec,
                              const moppo::MoppoConfig& moppo_config, const GpilsConfig& config,
                              const RunOptions& options) {
  config.validate();
  moppo_config.validate();
  const int d = spec.weight_size;
  const double gamma = moppo_config.gamma;
  std::unique_ptr<env::MoEnv> env = factory();
  if (env->reward_size() != d) throw ConfigError("run_gpils: reward size does not match the network weight size");

  const bool checkpointing = !options.checkpoint_dir.empty();
  const CheckpointStore store(options.checkpoint_dir);
  GpilsResult<Scalar> result;
  std::unique_ptr<moppo::Trainer<Scalar>> trainer;
  Progress progress;
  progress.weight_size = d;

  if (checkpointing && store.has_progress()) {
    progress = store.read_progress();
    if (progress.weight_size != d) throw CheckpointError("checkpoint weight size does not match the configuration");
    GpilsResult<Scalar> loaded = load_gpils_checkpoint<Scalar>(options.checkpoint_dir);
    result.ccs = std::move(loaded.ccs);
    result.snapshots = std::move(loaded.snapshots);
    ad::LoadedCheckpoint<Scalar> state = ad::load_checkpoint<Scalar>(store.state_path());
    if (state.network.spec.hash() != spec.hash())
      throw CheckpointError("checkpoint network layout does not match the configuration");
    if (!state.adam) throw CheckpointError("checkpoint state lacks optimizer moments");
    trainer = std::make_unique<moppo::Trainer<Scalar>>(std::move(state.network), std::move(*state.adam), moppo_config);
    if (!options.training_log.empty()) truncate_csv(options.training_log, progress.training_log_rows);
    truncate_csv(store.history_path(), progress.history_rows);
    result.resumed = true;
    if (progress.finished) {
      result.finished = true;
      return result;
    }
  } else {
    if (checkpointing) {
      std::filesystem::create_directories(options.checkpoint_dir / "snapshots");
      std::filesystem::remove(store.history_path());
    }
    if (!options.training_log.empty()) std::filesystem::remove(options.training_log);
    trainer = std::make_unique<moppo::Trainer<Scalar>>(spec, moppo_config);
  }

  const std::vector<std::uint64_t> eval_seeds = moppo::evaluation_seeds(config.seed, config.eval_episodes);
  const std::vector<std::uint64_t> gpi_seeds = moppo::evaluation_seeds(config.seed, config.gpi_rollouts);

  for (int it = progress.iteration + 1; it <= config.iterations; ++it) {
    IterationLog log;
    log.iteration = it;
    std::vector<WeightVector> pool;
    if (it == 1) {
      log.selected = WeightVector::basis(d, 0);
      pool = {log.selected};
    } else {
      const std::vector<WeightVector> corners = corner_weights(result.ccs.values(), CornerOptions{config.dedup_tolerance});
      const std::vector<GpiMember<Scalar>> members = gpi_members(result.ccs, result.snapshots);
      const std::vector<RankedWeight> ranked = rank_corners(corners, result.ccs, [&](const WeightVector& w) {
        return estimate_gpi_value(w, members, *env, gpi_seeds, gamma);
      });
      if (ranked.empty()) {
        result.finished = true;
        break;
      }
      log.selected = ranked.front().weight;
      pool = result.ccs.visited;
      for (std::size_t k = 0; k < ranked.size() && k < static_cast<std::size_t>(config.top_k); ++k)
        pool.push_back(ranked[k].weight);
      pool.push_back(log.selected);
      pool = moppo::unique_weights(pool, kWeightTolerance);
    }
    log.pool = pool;

    log.update = trainer->update(*env, log.selected, pool, derive_seed(config.seed, static_cast<std::uint64_t>(it), SeedPurpose::rollout),
                                 derive_seed(config.seed, static_cast<std::uint64_t>(it), SeedPurpose::update));
    auto snapshot = std::make_shared<const ad::ActorCritic<Scalar>>(trainer->network());
    for (const auto& w : pool) {
      const moppo::Evaluation ev = moppo::evaluate_policy(*snapshot, w, *env, eval_seeds, gamma);
      result.ccs.entries.push_back({w, ev.value, it, moppo::standard_error(ev)});
    }
    result.ccs.visited = pool;
    remove_dominated(result.ccs);
    result.ccs.iteration = it;

    const bool referenced = std::any_of(result.ccs.entries.begin(), result.ccs.entries.end(),
                                        [&](const CcsEntry& e) { return e.snapshot == it; });
    if (referenced) result.snapshots[it] = snapshot;
    for (auto s = result.snapshots.begin(); s != result.snapshots.end();) {
      const int id = s->first;
      const bool used = std::any_of(result.ccs.entries.begin(), result.ccs.entries.end(),
                                    [&](const CcsEntry& e) { return e.snapshot == id; });
      s = used ? std::next(s) : result.snapshots.erase(s);
    }

    log.visited = result.ccs.visited;
    log.hypervolume = ccs_hypervolume(result.ccs);
    log.hypervolume_tolerance = ccs_hypervolume_tolerance(result.ccs);
    log.ccs_size = static_cast<int>(result.ccs.entries.size());

    if (!options.training_log.empty())
      append_csv_line(options.training_log, training_log_header(d), training_log_row(log));
    progress.iteration = it;
    progress.training_log_rows = it;
    progress.finished = it == config.iterations;
    if (checkpointing) {
      append_csv_line(store.history_path(), history_header(), history_row(log));
      progress.history_rows = it;
      if (referenced) ad::save_checkpoint(store.snapshot_path(it), *snapshot);
      ad::save_checkpoint(store.state_path(), trainer->network(), &trainer->optimizer());
      store.write_ccs(result.ccs);
      store.write_progress(progress);
    }
    result.history.push_back(log);
    if (options.on_iteration) options.on_iteration(log);
    if (progress.finished) result.finished = true;
    if (options.stop_after > 0 && it == options.stop_after) break;
  }
  if (result.finished && checkpointing && !progress.finished) {
    progress.finished = true;
    store.write_progress(progress);
  }
  return result;
}

}  // namespace truckmorl::gpils
