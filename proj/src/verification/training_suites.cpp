#include <chrono>
#include <fstream>
#include <sstream>

#include "truckmorl/harness/artifacts.hpp"
#include "truckmorl/harness/pareto.hpp"
#include "truckmorl/harness/session.hpp"
#include "truckmorl/verification/suites.hpp"

namespace truckmorl::verification {

namespace fs = std::filesystem;

namespace {

double elapsed(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string desk_config_text(std::uint64_t seed) {
  return "[sim]\n"
         "density = 0\n"
         "[moppo]\n"
         "steps_per_iteration = 2000\n"
         "[gpils]\n"
         "iterations = 10\n"
         "eval_episodes = 5\n"
         "gpi_rollouts = 5\n"
         "[network]\n"
         "observation_layers = 64, 64\n"
         "weight_layers = 64, 64\n"
         "precision = float\n"
         "[run]\n"
         "name = desk\n"
         "seed = " +
         std::to_string(seed) + "\n";
}

std::string determinism_config_text() {
  return "[sim]\n"
         "density = 0.015\n"
         "max_steps = 40\n"
         "[moppo]\n"
         "steps_per_iteration = 160\n"
         "epochs = 2\n"
         "minibatch_size = 32\n"
         "[gpils]\n"
         "iterations = 4\n"
         "eval_episodes = 2\n"
         "gpi_rollouts = 2\n"
         "[network]\n"
         "observation_layers = 16\n"
         "weight_layers = 16\n"
         "[run]\n"
         "name = determinism\n"
         "seed = 7\n";
}

std::string read_or_empty(const fs::path& p) { return fs::exists(p) ? harness::read_text(p) : std::string(); }

struct DeskAttempt {
  bool success_policy = false;
  bool monotone = true;
  double best_tcop_per_m = 0.0;
  std::string detail;
};

DeskAttempt desk_attempt(const fs::path& dir, std::uint64_t seed) {
  fs::remove_all(dir);
  const std::string text = desk_config_text(seed);
  const harness::RunConfig config = harness::run_config_from_ini(harness::parse_ini(text, "desk.ini"), "desk.ini");
  std::vector<double> hv, tol;
  harness::train(config, text, dir, 0, [&](const gpils::IterationLog& log) {
    hv.push_back(log.hypervolume);
    tol.push_back(log.hypervolume_tolerance);
  });

  DeskAttempt a;
  std::ostringstream detail;
  detail << "seed " << seed << ": hv";
  for (std::size_t i = 0; i < hv.size(); ++i) {
    detail << (i ? "," : " ") << hv[i];
    if (i > 0 && hv[i] < hv[i - 1] - std::max(tol[i], tol[i - 1]) - 1e-12) a.monotone = false;
  }

  const gpils::GpilsResult<float> r = gpils::load_gpils_checkpoint<float>(dir);
  env::HighwayEnv env(config.sim);
  const std::vector<std::uint64_t> seeds = moppo::evaluation_seeds(config.seed, config.gpils.eval_episodes);
  a.best_tcop_per_m = std::numeric_limits<double>::infinity();
  for (const auto& e : r.ccs.entries) {
    const moppo::Evaluation ev = moppo::evaluate_policy(*r.snapshots.at(e.snapshot), e.weight, env, seeds, config.moppo.gamma);
    const harness::ParetoRecord rec = harness::aggregate_record(e.weight, e.snapshot, ev.episodes);
    if (rec.success_rate == 100.0) {
      a.best_tcop_per_m = std::min(a.best_tcop_per_m, rec.tcop_per_m);
      if (rec.tcop_per_m <= 0.0015) a.success_policy = true;
    }
  }
  detail << "; ccs " << r.ccs.entries.size() << " entries; best successful TCOP/m " << a.best_tcop_per_m;
  a.detail = detail.str();
  return a;
}

}  // namespace

SuiteResult desk_training_suite(const fs::path& work_dir, int attempts) {
  const auto start = std::chrono::steady_clock::now();
  SuiteResult out{"desk-scale training", false, "", 0.0};
  for (int i = 0; i < attempts; ++i) {
    const DeskAttempt a = desk_attempt(work_dir / ("desk_" + std::to_string(i)), 11 + static_cast<std::uint64_t>(i));
    out.detail += (i ? " | " : "") + a.detail;
    if (!a.monotone) out.detail += " (hypervolume decreased)";
    if (a.success_policy && a.monotone) {
      out.passed = true;
      break;
    }
  }
  out.seconds = elapsed(start);
  out.passed = out.passed && out.seconds < 3600.0;
  return out;
}

SuiteResult determinism_suite(const fs::path& work_dir) {
  const auto start = std::chrono::steady_clock::now();
  const std::string text = determinism_config_text();
  const harness::RunConfig config = harness::run_config_from_ini(harness::parse_ini(text, "determinism.ini"), "determinism.ini");
  const fs::path a = work_dir / "det_a", b = work_dir / "det_b", c = work_dir / "det_c";
  for (const auto& d : {a, b, c}) fs::remove_all(d);

  harness::train(config, text, a);
  harness::train(config, text, b);
  harness::train(config, text, c, 2);
  const harness::TrainSummary resumed = harness::train(config, text, c);

  std::vector<std::string> mismatches;
  for (const char* file : {"training_log.csv", "m_history.csv", "ccs.csv", "visited.csv", "progress.txt"}) {
    const std::string ref = read_or_empty(a / file);
    if (ref.empty()) mismatches.push_back(std::string(file) + " missing");
    if (read_or_empty(b / file) != ref) mismatches.push_back(std::string("repeat run differs in ") + file);
    if (read_or_empty(c / file) != ref) mismatches.push_back(std::string("resumed run differs in ") + file);
  }
  if (!resumed.resumed) mismatches.push_back("second call did not resume");
  std::string detail = "4 iterations, interrupted after 2";
  for (const auto& m : mismatches) detail += "; " + m;
  return {"determinism and resume", mismatches.empty(), detail, elapsed(start)};
}

}  // namespace truckmorl::verification
