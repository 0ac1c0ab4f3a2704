#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "truckmorl/env/highway_env.hpp"
#include "truckmorl/gpils/run.hpp"
#include "truckmorl/harness/config.hpp"
#include "truckmorl/harness/pareto.hpp"

namespace truckmorl::harness {

env::EnvFactory highway_factory(const env::SimConfig& sim);

struct TrainSummary {
  int iterations_run = 0;   // by this call
  int last_iteration = 0;
  bool finished = false;
  bool resumed = false;
  std::size_t ccs_size = 0;
  double hypervolume = 0.0;
};

/// Runs (or resumes) GPI-LS into `out_dir`: checkpoint bundle, config.ini copy and
/// training_log.csv. Resuming with a different configuration text throws CheckpointError.
TrainSummary train(const RunConfig& config, const std::string& config_text, const std::filesystem::path& out_dir,
                   int stop_after = 0, const std::function<void(const gpils::IterationLog&)>& on_iteration = {});

/// Configuration stored alongside a checkpoint. Throws CheckpointError when absent.
RunConfig checkpoint_config(const std::filesystem::path& dir);

/// Pareto sweep of a checkpoint under its own simulation settings.
std::vector<ParetoRecord> evaluate_checkpoint(const std::filesystem::path& dir, int weight_count, int episodes,
                                              int threads = 0);

/// Seeded re-simulation described by an INI file with [sim] overrides and a [replay] section
/// (seed, actions = comma list or policy = maintain|random, steps). Returns the substep trace.
std::vector<env::TraceRow> replay(const IniDocument& doc, const std::string& source);

}  // namespace truckmorl::harness
