#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "truckmorl/autodiff/network.hpp"
#include "truckmorl/env/config.hpp"
#include "truckmorl/gpils/run.hpp"
#include "truckmorl/moppo/rollout.hpp"

namespace truckmorl::harness {

enum class Precision { single, double_ };

/// One `key = value` line of an INI file.
struct IniValue {
  std::string value;
  int line = 0;
};

/// section -> key -> value. Keys and section names are lower-case; '#' and ';' start comments.
using IniDocument = std::map<std::string, std::map<std::string, IniValue>>;

/// Throws ConfigError("<source>:<line>: ...") on syntax errors and duplicate keys.
IniDocument parse_ini(const std::string& text, const std::string& source);
IniDocument read_ini(const std::filesystem::path& path);

/// Line of the earliest key in a section (0 when empty).
int first_line(const std::map<std::string, IniValue>& keys);

struct RunConfig {
  env::SimConfig sim;
  moppo::MoppoConfig moppo;
  gpils::GpilsConfig gpils;
  ad::NetworkSpec network;  // observation_size is derived from `sim`
  Precision precision = Precision::single;
  std::string name = "run";
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "runs";

  void validate() const;
};

/// Applies [sim] keys onto `sim`; unknown keys are errors.
void apply_sim_section(const IniDocument& doc, const std::string& source, env::SimConfig& sim);

/// Builds a RunConfig from [sim], [moppo], [gpils], [network] and [run]. Unknown sections or keys
/// and malformed values throw ConfigError naming the file and line.
RunConfig run_config_from_ini(const IniDocument& doc, const std::string& source);
RunConfig load_run_config(const std::filesystem::path& path);

/// Observation width produced by the highway environment for `sim`.
int observation_size_for(const env::SimConfig& sim);

/// Output directory for a run: `cli_out` if given, else output_dir/name; relative paths are
/// placed under $TRUCKMORL_OUTPUT_ROOT when it is set.
std::filesystem::path resolve_output_dir(const RunConfig& config, const std::filesystem::path& cli_out);

inline constexpr const char* kOutputRootVariable = "TRUCKMORL_OUTPUT_ROOT";

}  // namespace truckmorl::harness
