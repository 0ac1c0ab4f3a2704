#include "truckmorl/harness/session.hpp"

#include <random>
#include <sstream>

#include "truckmorl/harness/artifacts.hpp"

namespace truckmorl::harness {

namespace fs = std::filesystem;

env::EnvFactory highway_factory(const env::SimConfig& sim) {
  return [sim]() -> std::unique_ptr<env::MoEnv> { return std::make_unique<env::HighwayEnv>(sim); };
}

namespace {

template <typename Scalar>
TrainSummary train_as(const RunConfig& c, const fs::path& out, int stop_after,
                      const std::function<void(const gpils::IterationLog&)>& on_iteration) {
  gpils::RunOptions options;
  options.checkpoint_dir = out;
  options.training_log = out / "training_log.csv";
  options.stop_after = stop_after;
  options.on_iteration = on_iteration;
  const gpils::GpilsResult<Scalar> r =
      gpils::run_gpils<Scalar>(highway_factory(c.sim), c.network, c.moppo, c.gpils, options);
  TrainSummary s;
  s.iterations_run = static_cast<int>(r.history.size());
  s.last_iteration = r.ccs.iteration;
  s.finished = r.finished;
  s.resumed = r.resumed;
  s.ccs_size = r.ccs.entries.size();
  s.hypervolume = gpils::ccs_hypervolume(r.ccs);
  return s;
}

template <typename Scalar>
std::vector<ParetoRecord> evaluate_as(const RunConfig& c, const fs::path& dir, const ParetoOptions& options) {
  const gpils::GpilsResult<Scalar> r = gpils::load_gpils_checkpoint<Scalar>(dir);
  return pareto_eval(r.ccs, r.snapshots, highway_factory(c.sim), options);
}

}  // namespace

TrainSummary train(const RunConfig& config, const std::string& config_text, const fs::path& out_dir, int stop_after,
                   const std::function<void(const gpils::IterationLog&)>& on_iteration) {
  config.validate();
  fs::create_directories(out_dir);
  const fs::path stored = out_dir / "config.ini";
  if (fs::exists(stored)) {
    if (read_text(stored) != config_text)
      throw CheckpointError("configuration differs from the one stored in " + stored.string());
  } else {
    gpils::write_file_atomic(stored, config_text);
  }
  if (config.precision == Precision::double_) return train_as<double>(config, out_dir, stop_after, on_iteration);
  return train_as<float>(config, out_dir, stop_after, on_iteration);
}

RunConfig checkpoint_config(const fs::path& dir) {
  const fs::path stored = dir / "config.ini";
  if (!fs::exists(stored)) throw CheckpointError("no checkpoint configuration in " + dir.string());
  return load_run_config(stored);
}

std::vector<ParetoRecord> evaluate_checkpoint(const fs::path& dir, int weight_count, int episodes, int threads) {
  if (!fs::is_directory(dir)) throw CheckpointError("checkpoint directory " + dir.string() + " does not exist");
  const RunConfig c = checkpoint_config(dir);
  ParetoOptions options;
  options.weight_count = weight_count;
  options.episodes = episodes;
  options.seed = c.seed;
  options.gamma = c.moppo.gamma;
  options.threads = threads;
  if (c.precision == Precision::double_) return evaluate_as<double>(c, dir, options);
  return evaluate_as<float>(c, dir, options);
}

namespace {

// Action by name ("lane_left") or index.
int parse_action(std::string cell) {
  const auto first = cell.find_first_not_of(" \t");
  const auto last = cell.find_last_not_of(" \t");
  cell = first == std::string::npos ? "" : cell.substr(first, last - first + 1);
  for (int a = 0; a < env::kActionCount; ++a)
    if (cell == env::action_name(a)) return a;
  std::size_t used = 0;
  const int a = std::stoi(cell, &used);
  if (used != cell.size()) throw std::invalid_argument(cell);
  return a;
}

}  // namespace

std::vector<env::TraceRow> replay(const IniDocument& doc, const std::string& source) {
  for (const auto& [section, keys] : doc)
    if (section != "sim" && section != "replay")
      throw ConfigError(source + ":" + std::to_string(first_line(keys)) + ": unknown section [" + section + "]");
  env::SimConfig sim;
  apply_sim_section(doc, source, sim);
  sim.validate();

  std::uint64_t seed = 0;
  std::vector<int> actions;
  std::string policy = "maintain";
  int steps = sim.max_steps;
  int actions_line = 0;
  if (const auto it = doc.find("replay"); it != doc.end()) {
    for (const auto& [key, v] : it->second) {
      const std::string where = source + ":" + std::to_string(v.line) + ": ";
      try {
        if (key == "seed") {
          seed = std::stoull(v.value);
        } else if (key == "steps") {
          steps = std::stoi(v.value);
        } else if (key == "policy") {
          policy = v.value;
          if (policy != "maintain" && policy != "random") throw ConfigError(where + "policy must be 'maintain' or 'random'");
        } else if (key == "actions") {
          actions_line = v.line;
          std::stringstream ss(v.value);
          std::string cell;
          while (std::getline(ss, cell, ',')) actions.push_back(parse_action(cell));
        } else {
          throw ConfigError(where + "unknown key '" + key + "' in [replay]");
        }
      } catch (const std::logic_error&) {
        throw ConfigError(where + "malformed value '" + v.value + "' for '" + key + "'");
      }
    }
  }
  if (!actions.empty()) steps = static_cast<int>(actions.size());
  if (steps < 0) throw ConfigError(source + ": steps must be non-negative");

  env::HighwayEnv env(sim);
  std::vector<env::TraceRow> trace;
  env.set_trace(&trace);
  env::Observation obs = env.reset(seed);
  std::mt19937_64 rng(seed);
  for (int t = 0; t < steps && !env.done(); ++t) {
    int action = static_cast<int>(env::Action::maintain);
    if (!actions.empty()) {
      action = actions[static_cast<std::size_t>(t)];
      if (action < 0 || action >= env::kActionCount || !obs.mask(action))
        throw ConfigError(source + ":" + std::to_string(actions_line) + ": action " + std::to_string(action) +
                          " at step " + std::to_string(t) + " is not available");
    } else if (policy == "random") {
      std::vector<int> allowed;
      for (int a = 0; a < env::kActionCount; ++a)
        if (obs.mask(a)) allowed.push_back(a);
      action = allowed[std::uniform_int_distribution<std::size_t>(0, allowed.size() - 1)(rng)];
    }
    obs = env.step(action).observation;
  }
  return trace;
}

}  // namespace truckmorl::harness
