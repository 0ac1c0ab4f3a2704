#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "truckmorl/harness/artifacts.hpp"

namespace fs = std::filesystem;
using namespace truckmorl;

namespace {

const fs::path kWork = fs::temp_directory_path() / "truckmorl_cli_test";

int run(const std::string& args) {
  const std::string cmd = std::string("\"") + TRUCKMORL_CLI + "\" " + args + " > \"" + (kWork / "last.log").string() +
                          "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string quoted(const fs::path& p) { return "\"" + p.string() + "\""; }

const std::string kTinyConfig =
    "[sim]\ndensity = 0.015\nroad_length = 600\nmax_steps = 30\n"
    "[moppo]\nsteps_per_iteration = 96\nepochs = 1\nminibatch_size = 32\n"
    "[gpils]\niterations = 3\neval_episodes = 2\ngpi_rollouts = 1\n"
    "[network]\nobservation_layers = 8\nweight_layers = 8\n"
    "[run]\nname = tiny\nseed = 3\n";

struct Workspace {
  Workspace() {
    fs::remove_all(kWork);
    fs::create_directories(kWork);
  }
  ~Workspace() { fs::remove_all(kWork); }
};

}  // namespace

TEST_CASE("baseline writes a curve whose minimum row is the analytic optimum") {
  Workspace ws;
  REQUIRE(run("baseline --out " + quoted(kWork / "b")) == 0);
  const auto curve = harness::parse_baseline_csv(harness::read_text(kWork / "b" / "baseline.csv"));
  const auto min_row =
      std::min_element(curve.begin(), curve.end(), [](const auto& a, const auto& b) { return a.total_cost < b.total_cost; });
  CHECK(min_row->speed == doctest::Approx(24.04));
  CHECK(min_row->total_cost == doctest::Approx(3.68).epsilon(0.01 / 3.68));
  CHECK(fs::exists(kWork / "b" / "baseline.svg"));
}

TEST_CASE("error categories map to exit codes") {
  Workspace ws;
  fs::create_directories(kWork / "empty");
  CHECK(run("eval " + quoted(kWork / "empty")) == 3);
  CHECK(run("eval " + quoted(kWork / "absent")) == 3);

  harness::write_text(kWork / "bad.ini", "[sim]\ndensity = 0.015\nwarp_factor = 9\n");
  CHECK(run("train " + quoted(kWork / "bad.ini")) == 2);
  CHECK(harness::read_text(kWork / "last.log").find("bad.ini:3") != std::string::npos);
  CHECK(run("train " + quoted(kWork / "missing.ini")) == 2);
  CHECK(run("baseline --config " + quoted(kWork / "bad.ini")) == 2);

  CHECK(run("") == 1);
  CHECK(run("frobnicate") == 1);
  CHECK(run("eval") == 1);
}

TEST_CASE("train, resume, evaluate and replay") {
  Workspace ws;
  harness::write_text(kWork / "tiny.ini", kTinyConfig);
  const std::string cfg = quoted(kWork / "tiny.ini");
  REQUIRE(run("train " + cfg + " --out " + quoted(kWork / "full")) == 0);
  REQUIRE(run("train " + cfg + " --out " + quoted(kWork / "part") + " --stop-after 1") == 0);
  REQUIRE(run("train " + cfg + " --out " + quoted(kWork / "part")) == 0);
  for (const char* f : {"ccs.csv", "visited.csv", "m_history.csv", "training_log.csv", "progress.txt"})
    CHECK_MESSAGE(harness::read_text(kWork / "full" / f) == harness::read_text(kWork / "part" / f), f);

  harness::write_text(kWork / "other.ini", "[sim]\ndensity = 0.03\n");
  CHECK(run("train " + quoted(kWork / "other.ini") + " --out " + quoted(kWork / "full")) == 3);

  REQUIRE(run("eval " + quoted(kWork / "full") + " --weights 6 --episodes 1 --threads 2") == 0);
  const auto front = harness::parse_pareto_csv(harness::read_text(kWork / "full" / "pareto.csv"));
  CHECK(!front.empty());
  for (const auto& r : front) CHECK(r.success_rate + r.failure_rate + r.max_step_rate == doctest::Approx(100.0));
  CHECK(fs::exists(kWork / "full" / "pareto.svg"));

  harness::write_text(kWork / "trace.ini", "[sim]\ndensity = 0.015\n[replay]\nseed = 2\nsteps = 3\n");
  REQUIRE(run("replay " + quoted(kWork / "trace.ini") + " --out " + quoted(kWork / "trace.csv")) == 0);
  const auto rows = harness::parse_trace_csv(harness::read_text(kWork / "trace.csv"));
  CHECK(rows.size() == 30 * 8);
}

TEST_CASE("output root variable places relative run directories") {
  Workspace ws;
  harness::write_text(kWork / "tiny.ini", kTinyConfig);
  ::setenv("TRUCKMORL_OUTPUT_ROOT", kWork.c_str(), 1);
  const int code = run("train " + quoted(kWork / "tiny.ini") + " --stop-after 1");
  ::unsetenv("TRUCKMORL_OUTPUT_ROOT");
  CHECK(code == 0);
  CHECK(fs::exists(kWork / "runs" / "tiny" / "progress.txt"));
}
