#include <filesystem>
#include <iomanip>
#include <iostream>
#include <string>

#include "truckmorl/verification/suites.hpp"

namespace fs = std::filesystem;
using truckmorl::verification::SuiteResult;

int main(int argc, char** argv) {
  fs::path work = fs::temp_directory_path() / "truckmorl_acceptance";
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--work-dir" && i + 1 < argc) {
      work = argv[++i];
    } else {
      std::cerr << "usage: " << argv[0] << " [--work-dir DIR]\n";
      return 1;
    }
  }
  fs::create_directories(work);

  namespace v = truckmorl::verification;
  int failed = 0;
  auto report = [&failed](const SuiteResult& r) {
    std::cout << (r.passed ? "PASS" : "FAIL") << "  " << r.name << "  (" << std::fixed << std::setprecision(2)
              << r.seconds << " s)  " << r.detail << std::endl;
    if (!r.passed) ++failed;
  };
  report(v::baseline_suite());
  report(v::cost_model_suite());
  report(v::corner_suite());
  report(v::gae_suite());
  report(v::gradient_suite());
  report(v::pruning_suite());
  report(v::safety_suite());
  report(v::zero_collision_suite());
  report(v::desk_training_suite(work));
  report(v::determinism_suite(work));
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
