#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "truckmorl/moppo/rollout.hpp"
#include "truckmorl/safety/safety_filter.hpp"

namespace truckmorl::verification {

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

// Oracles ------------------------------------------------------------------------------------

/// Corners of the upper envelope max_i w^T v_i located on a simplex grid with `divisions`
/// steps per axis: simplex vertices, argmax switches along the edges and grid cells that see
/// three different argmax labels. Supports d = 2 and d = 3.
std::vector<Eigen::VectorXd> grid_corner_oracle(const std::vector<Eigen::VectorXd>& values, int divisions);

struct CornerComparison {
  int missed = 0;    // oracle corners without a computed corner within tolerance
  int spurious = 0;  // computed corners without an oracle corner within tolerance
};

CornerComparison compare_corners(const std::vector<Eigen::VectorXd>& computed, const std::vector<Eigen::VectorXd>& oracle,
                                 double tolerance);

/// A_t = sum_l (gamma lambda)^l delta_{t+l} evaluated term by term within each segment.
std::vector<Eigen::VectorXd> brute_force_advantages(const std::vector<moppo::Transition>& transitions, double gamma,
                                                    double lambda);

/// Random multi-objective episode of `length` steps; the last one terminates or carries a bootstrap.
std::vector<moppo::Transition> random_episode(int length, int reward_size, std::uint64_t seed);

struct GradientCheck {
  double max_relative_error = 0.0;
  Eigen::Index parameters = 0;
};

/// Central finite differences of the full PPO loss on a 4-transition buffer with a tiny network.
GradientCheck check_loss_gradient(std::uint64_t seed);

/// Random GapObservation; each neighbor is present with probability 0.7.
safety::GapObservation random_gaps(std::mt19937_64& rng);

// Suites -------------------------------------------------------------------------------------

SuiteResult baseline_suite();
SuiteResult cost_model_suite();
SuiteResult corner_suite(int sets = 200, std::uint64_t seed = 1);
SuiteResult gae_suite(int episodes = 500, std::uint64_t seed = 2);
SuiteResult gradient_suite(int seeds = 20);
SuiteResult pruning_suite(int sets = 100, std::uint64_t seed = 3);
SuiteResult safety_suite(int fuzz_cases = 10000, std::uint64_t seed = 4);
SuiteResult zero_collision_suite(int episodes = 100, std::uint64_t seed = 5);

/// Zero-traffic GPI-LS run of 10 iterations x 2000 steps; retries with up to `attempts` seeds.
SuiteResult desk_training_suite(const std::filesystem::path& work_dir, int attempts = 3);

/// Identical seeds give identical logs; an interrupted and resumed run matches an uninterrupted one.
SuiteResult determinism_suite(const std::filesystem::path& work_dir);

/// Every fast oracle suite (no training).
std::vector<SuiteResult> oracle_suites();

}  // namespace truckmorl::verification
