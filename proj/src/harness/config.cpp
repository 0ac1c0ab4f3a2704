#include "truckmorl/harness/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "truckmorl/env/highway_env.hpp"
#include "truckmorl/errors.hpp"

namespace truckmorl::harness {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

[[noreturn]] void fail(const std::string& source, int line, const std::string& what) {
  throw ConfigError(source + ":" + std::to_string(line) + ": " + what);
}

double to_double(const IniValue& v, const std::string& source, const std::string& key) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v.value, &used);
    if (used == v.value.size()) return x;
  } catch (const std::exception&) {
  }
  fail(source, v.line, "'" + key + "' expects a number, got '" + v.value + "'");
}

long long to_integer(const IniValue& v, const std::string& source, const std::string& key) {
  try {
    std::size_t used = 0;
    const long long x = std::stoll(v.value, &used);
    if (used == v.value.size()) return x;
  } catch (const std::exception&) {
  }
  fail(source, v.line, "'" + key + "' expects an integer, got '" + v.value + "'");
}

std::uint64_t to_unsigned(const IniValue& v, const std::string& source, const std::string& key) {
  try {
    std::size_t used = 0;
    if (!v.value.empty() && v.value[0] != '-') {
      const unsigned long long x = std::stoull(v.value, &used);
      if (used == v.value.size()) return x;
    }
  } catch (const std::exception&) {
  }
  fail(source, v.line, "'" + key + "' expects a non-negative integer, got '" + v.value + "'");
}

std::vector<int> to_int_list(const IniValue& v, const std::string& source, const std::string& key) {
  std::vector<int> out;
  std::stringstream ss(v.value);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cell = trim(cell);
    if (cell.empty()) continue;
    out.push_back(static_cast<int>(to_integer({cell, v.line}, source, key)));
  }
  return out;
}

using Setter = std::function<void(const IniValue&, const std::string&, const std::string&)>;

void apply_section(const IniDocument& doc, const std::string& section, const std::string& source,
                   const std::map<std::string, Setter>& setters) {
  const auto it = doc.find(section);
  if (it == doc.end()) return;
  for (const auto& [key, value] : it->second) {
    const auto s = setters.find(key);
    if (s == setters.end()) fail(source, value.line, "unknown key '" + key + "' in [" + section + "]");
    s->second(value, source, key);
  }
}

Setter real(double& target) {
  return [&target](const IniValue& v, const std::string& src, const std::string& key) { target = to_double(v, src, key); };
}

Setter integer(int& target) {
  return [&target](const IniValue& v, const std::string& src, const std::string& key) {
    target = static_cast<int>(to_integer(v, src, key));
  };
}

Setter unsigned64(std::uint64_t& target) {
  return [&target](const IniValue& v, const std::string& src, const std::string& key) {
    target = to_unsigned(v, src, key);
  };
}

}  // namespace

int first_line(const std::map<std::string, IniValue>& keys) {
  int line = 0;
  for (const auto& [key, v] : keys)
    if (line == 0 || v.line < line) line = v.line;
  return line;
}

IniDocument parse_ini(const std::string& text, const std::string& source) {
  IniDocument doc;
  std::istringstream in(text);
  std::string raw, section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(source, line_no, "unterminated section header");
      section = lower(trim(line.substr(1, line.size() - 2)));
      if (section.empty()) fail(source, line_no, "empty section name");
      doc[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(source, line_no, "expected 'key = value'");
    if (section.empty()) fail(source, line_no, "key outside of any section");
    const std::string key = lower(trim(line.substr(0, eq)));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(source, line_no, "empty key");
    if (doc[section].count(key)) fail(source, line_no, "duplicate key '" + key + "' in [" + section + "]");
    doc[section][key] = IniValue{value, line_no};
  }
  return doc;
}

IniDocument read_ini(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_ini(ss.str(), path.string());
}

void apply_sim_section(const IniDocument& doc, const std::string& source, env::SimConfig& s) {
  double krauss_sigma = -1.0;
  const std::map<std::string, Setter> setters{
      {"road_length", real(s.road_length)},
      {"window_length", real(s.window_length)},
      {"lane_count", integer(s.lane_count)},
      {"lane_width", real(s.lane_width)},
      {"density", real(s.density)},
      {"truck_fraction", real(s.truck_fraction)},
      {"car_speed_mean", real(s.car_speed.mean)},
      {"car_speed_stddev", real(s.car_speed.stddev)},
      {"truck_speed_mean", real(s.truck_speed.mean)},
      {"truck_speed_stddev", real(s.truck_speed.stddev)},
      {"min_spawn_speed", real(s.min_spawn_speed)},
      {"ego_max_speed", real(s.ego_max_speed)},
      {"ego_max_accel", real(s.ego_max_accel)},
      {"ego_max_decel", real(s.ego_max_decel)},
      {"ego_start_speed", real(s.ego_start_speed)},
      {"ego_start_desired_speed", real(s.ego_start_desired_speed)},
      {"ego_start_time_gap", real(s.ego_start_time_gap)},
      {"ego_lateral_speed", real(s.ego_lateral_speed)},
      {"max_steps", integer(s.max_steps)},
      {"substep", real(s.substep)},
      {"traffic_lateral_speed", real(s.traffic_lateral_speed)},
      {"lane_change_cooldown", real(s.lane_change_cooldown)},
      {"lane_change_incentive", real(s.lane_change_incentive)},
      {"sensed_slots", integer(s.sensed_slots)},
      {"krauss_sigma", real(krauss_sigma)},
      {"slope_percent", real(s.vehicle.slope_percent)},
      {"mass", real(s.vehicle.mass)},
      {"drag_coefficient", real(s.vehicle.drag_coefficient)},
      {"frontal_area", real(s.vehicle.frontal_area)},
      {"air_density", real(s.vehicle.air_density)},
      {"rolling_resistance", real(s.vehicle.rolling_resistance)},
      {"target_reward", real(s.reward.target_reward)},
      {"collision_penalty", real(s.reward.collision_penalty)},
      {"driver_cost_per_hour", real(s.reward.driver_cost_per_hour)},
      {"energy_cost_per_kwh", real(s.reward.energy_cost_per_kwh)},
      {"safety_standstill_gap", real(s.safety.standstill_gap)},
      {"safety_time_headway", real(s.safety.time_headway)},
      {"safety_max_accel", real(s.safety.max_accel)},
      {"safety_comfortable_decel", real(s.safety.comfortable_decel)},
      {"safety_epsilon", real(s.safety.epsilon)},
      {"idm_standstill_gap", real(s.idm.standstill_gap)},
      {"idm_exponent", real(s.idm.exponent)},
      {"idm_comfortable_decel", real(s.idm.comfortable_decel)},
  };
  apply_section(doc, "sim", source, setters);
  if (krauss_sigma >= 0.0) {
    s.car_krauss.sigma = krauss_sigma;
    s.truck_krauss.sigma = krauss_sigma;
  }
  s.safety.lane_width = s.lane_width;
  s.safety.lateral_speed = s.ego_lateral_speed;
}

RunConfig run_config_from_ini(const IniDocument& doc, const std::string& source) {
  for (const auto& [section, keys] : doc) {
    if (section == "sim" || section == "moppo" || section == "gpils" || section == "network" || section == "run")
      continue;
    fail(source, first_line(keys), "unknown section [" + section + "]");
  }
  RunConfig c;
  apply_sim_section(doc, source, c.sim);

  moppo::MoppoConfig& m = c.moppo;
  apply_section(doc, "moppo", source,
                {{"gamma", real(m.gamma)},
                 {"lambda", real(m.lambda)},
                 {"clip_epsilon", real(m.clip_epsilon)},
                 {"value_coef", real(m.value_coef)},
                 {"entropy_coef", real(m.entropy_coef)},
                 {"epochs", integer(m.epochs)},
                 {"minibatch_size", integer(m.minibatch_size)},
                 {"learning_rate", real(m.learning_rate)},
                 {"steps_per_iteration", integer(m.steps_per_iteration)},
                 {"selected_probability", real(m.selected_probability)},
                 {"max_grad_norm", real(m.max_grad_norm)}});

  gpils::GpilsConfig& g = c.gpils;
  apply_section(doc, "gpils", source,
                {{"iterations", integer(g.iterations)},
                 {"top_k", integer(g.top_k)},
                 {"eval_episodes", integer(g.eval_episodes)},
                 {"gpi_rollouts", integer(g.gpi_rollouts)},
                 {"dedup_tolerance", real(g.dedup_tolerance)}});

  ad::NetworkSpec& n = c.network;
  apply_section(
      doc, "network", source,
      {{"observation_layers",
        [&n](const IniValue& v, const std::string& src, const std::string& key) { n.observation_layers = to_int_list(v, src, key); }},
       {"weight_layers",
        [&n](const IniValue& v, const std::string& src, const std::string& key) { n.weight_layers = to_int_list(v, src, key); }},
       {"activation",
        [&n](const IniValue& v, const std::string& src, const std::string&) {
          const std::string a = lower(v.value);
          if (a == "tanh")
            n.activation = ad::Activation::tanh;
          else if (a == "identity")
            n.activation = ad::Activation::identity;
          else
            fail(src, v.line, "activation must be 'tanh' or 'identity'");
        }},
       {"hidden_gain", real(n.hidden_gain)},
       {"actor_head_gain", real(n.actor_head_gain)},
       {"critic_head_gain", real(n.critic_head_gain)},
       {"precision", [&c](const IniValue& v, const std::string& src, const std::string&) {
          const std::string p = lower(v.value);
          if (p == "float" || p == "single" || p == "32")
            c.precision = Precision::single;
          else if (p == "double" || p == "64")
            c.precision = Precision::double_;
          else
            fail(src, v.line, "precision must be 'float' or 'double'");
        }}});

  apply_section(doc, "run", source,
                {{"name", [&c](const IniValue& v, const std::string& src, const std::string&) {
                    if (v.value.empty()) fail(src, v.line, "name must not be empty");
                    c.name = v.value;
                  }},
                 {"seed", unsigned64(c.seed)},
                 {"output_dir", [&c](const IniValue& v, const std::string&, const std::string&) { c.output_dir = v.value; }}});

  c.network.observation_size = observation_size_for(c.sim);
  c.network.weight_size = 3;
  c.network.action_count = env::kActionCount;
  c.network.seed = c.seed;
  c.gpils.seed = c.seed;
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return run_config_from_ini(read_ini(path), path.string());
}

int observation_size_for(const env::SimConfig& sim) {
  return env::kEgoFeatures + (env::kFeaturesPerVehicle + 1) * sim.sensed_slots;
}

void RunConfig::validate() const {
  sim.validate();
  moppo.validate();
  gpils.validate();
  network.validate();
}

std::filesystem::path resolve_output_dir(const RunConfig& config, const std::filesystem::path& cli_out) {
  std::filesystem::path out = cli_out.empty() ? config.output_dir / config.name : cli_out;
  const char* root = std::getenv(kOutputRootVariable);
  if (root && *root && out.is_relative()) out = std::filesystem::path(root) / out;
  return out;
}

}  // namespace truckmorl::harness
