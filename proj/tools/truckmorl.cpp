#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>

#include <CLI11.hpp>

#include "truckmorl/errors.hpp"
#include "truckmorl/harness/artifacts.hpp"
#include "truckmorl/harness/baseline.hpp"
#include "truckmorl/harness/config.hpp"
#include "truckmorl/harness/session.hpp"
#include "truckmorl/verification/suites.hpp"

namespace fs = std::filesystem;
using namespace truckmorl;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitCheckpoint = 3;

fs::path under_output_root(const fs::path& p) {
  const char* root = std::getenv(harness::kOutputRootVariable);
  if (root && *root && p.is_relative()) return fs::path(root) / p;
  return p;
}

int run_train(const fs::path& config_path, int stop_after, const fs::path& out) {
  const harness::RunConfig config = harness::load_run_config(config_path);
  const fs::path dir = harness::resolve_output_dir(config, out);
  std::cout << "training into " << dir.string() << '\n';
  const harness::TrainSummary s =
      harness::train(config, harness::read_text(config_path), dir, stop_after, [](const gpils::IterationLog& log) {
        std::cout << "iteration " << log.iteration << "  w=" << log.selected.to_string() << "  pool=" << log.pool.size()
                  << "  success=" << std::setprecision(3) << log.update.success_rate << "  hv=" << log.hypervolume
                  << "  ccs=" << log.ccs_size << std::endl;
      });
  if (s.resumed) std::cout << "resumed from the existing checkpoint\n";
  std::cout << "iterations completed: " << s.last_iteration << (s.finished ? " (finished)" : "") << ", CCS size "
            << s.ccs_size << ", hypervolume " << s.hypervolume << '\n';
  return 0;
}

int run_eval(const fs::path& checkpoint, int weights, int episodes, int threads, const fs::path& out) {
  const fs::path dir = under_output_root(checkpoint);
  const std::vector<harness::ParetoRecord> records = harness::evaluate_checkpoint(dir, weights, episodes, threads);
  const fs::path target = out.empty() ? dir : under_output_root(out);
  harness::write_text(target / "pareto.csv", harness::pareto_csv(records));
  harness::write_text(target / "pareto.svg", harness::pareto_svg(records));
  std::cout << std::fixed << std::setprecision(4) << "success%  fail%  max-step%  speed  energy  driver  distance  TCOP  TCOP/m\n";
  for (const auto& r : records)
    std::cout << std::setprecision(1) << r.success_rate << "  " << r.failure_rate << "  " << r.max_step_rate << "  "
              << std::setprecision(2) << r.average_speed << "  " << r.energy_cost << "  " << r.driver_cost << "  "
              << std::setprecision(0) << r.distance << "  " << std::setprecision(2) << r.tcop << "  "
              << std::setprecision(5) << r.tcop_per_m << '\n';
  std::cout << records.size() << " non-dominated records written to " << (target / "pareto.csv").string() << '\n';
  return 0;
}

int run_baseline(const fs::path& config_path, const fs::path& out) {
  env::SimConfig sim;
  if (!config_path.empty()) sim = harness::load_run_config(config_path).sim;
  const harness::BaselineResult b = harness::analytic_optimum(sim);
  const fs::path target = under_output_root(out);
  harness::write_text(target / "baseline.csv", harness::baseline_csv(b.curve));
  harness::write_text(target / "baseline.svg", harness::baseline_svg(b));
  auto best = b.curve.front();
  for (const auto& row : b.curve)
    if (row.total_cost < best.total_cost) best = row;
  std::cout << std::fixed << std::setprecision(2) << "optimal speed " << b.optimal_speed << " m/s, cost "
            << b.min_cost << " EUR over " << std::setprecision(0) << b.road_length << " m\n"
            << std::setprecision(2) << "curve minimum row: " << best.speed << ", " << best.total_cost << '\n';
  return 0;
}

int run_replay(const fs::path& trace, const fs::path& out) {
  const std::vector<env::TraceRow> rows = harness::replay(harness::read_ini(trace), trace.string());
  const std::string csv = harness::trace_csv(rows);
  if (out.empty())
    std::cout << csv;
  else
    harness::write_text(under_output_root(out), csv);
  return 0;
}

int run_selftest(bool full, const fs::path& work) {
  std::vector<verification::SuiteResult> results = verification::oracle_suites();
  results.push_back(verification::zero_collision_suite());
  if (full) {
    const fs::path dir = under_output_root(work);
    results.push_back(verification::determinism_suite(dir));
    results.push_back(verification::desk_training_suite(dir));
  }
  bool ok = true;
  for (const auto& r : results) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << " (" << std::fixed << std::setprecision(2) << r.seconds
              << " s): " << r.detail << '\n';
    ok = ok && r.passed;
  }
  return ok ? 0 : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-objective tactical driving for a heavy-duty truck"};
  app.require_subcommand(1);

  fs::path train_config, train_out;
  int stop_after = 0;
  auto* train = app.add_subcommand("train", "Run or resume GPI-LS training with checkpointing");
  train->add_option("config", train_config, "Run configuration (INI)")->required();
  train->add_option("--stop-after", stop_after, "Stop after this iteration (resume later with the same command)");
  train->add_option("--out", train_out, "Output directory (default: <output_dir>/<name>)");

  fs::path checkpoint, eval_out;
  int weights = 500, episodes = 5, threads = 0;
  auto* eval = app.add_subcommand("eval", "Pareto-front sweep of a trained checkpoint");
  eval->add_option("checkpoint", checkpoint, "Checkpoint directory written by train")->required();
  eval->add_option("--weights", weights, "Minimum number of evaluation weights")->check(CLI::PositiveNumber);
  eval->add_option("--episodes", episodes, "Episodes per weight")->check(CLI::PositiveNumber);
  eval->add_option("--threads", threads, "Worker threads (0: all cores)");
  eval->add_option("--out", eval_out, "Output directory (default: the checkpoint directory)");

  fs::path baseline_config, baseline_out = ".";
  auto* baseline = app.add_subcommand("baseline", "Analytical constant-speed cost curve and optimum");
  baseline->add_option("--config", baseline_config, "Take vehicle and cost constants from this configuration");
  baseline->add_option("--out", baseline_out, "Output directory");

  fs::path trace, replay_out;
  auto* replay = app.add_subcommand("replay", "Re-simulate a seeded episode and emit the substep trace");
  replay->add_option("trace", trace, "Replay description (INI with [sim] and [replay])")->required();
  replay->add_option("--out", replay_out, "CSV file (default: standard output)");

  bool full = false;
  fs::path work = "selftest";
  auto* selftest = app.add_subcommand("selftest", "Run the oracle suites");
  selftest->add_flag("--full", full, "Also run the determinism and desk-training suites");
  selftest->add_option("--work-dir", work, "Scratch directory for training suites");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitFailure;
  }

  try {
    if (*train) return run_train(train_config, stop_after, train_out);
    if (*eval) return run_eval(checkpoint, weights, episodes, threads, eval_out);
    if (*baseline) return run_baseline(baseline_config, baseline_out);
    if (*replay) return run_replay(trace, replay_out);
    if (*selftest) return run_selftest(full, work);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << '\n';
    return kExitCheckpoint;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitFailure;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}
