#include "truckmorl/gpils/store.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "truckmorl/errors.hpp"

namespace truckmorl::gpils {

namespace fs = std::filesystem;

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw CheckpointError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

void truncate_csv(const fs::path& path, int rows) {
  if (!fs::exists(path)) return;
  std::ifstream in(path);
  std::string line, kept;
  int n = -1;
  while (n < rows && std::getline(in, line)) {
    kept += line + '\n';
    ++n;
  }
  in.close();
  write_file_atomic(path, kept);
}

void append_csv_line(const fs::path& path, const std::string& header, const std::string& line) {
  const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw CheckpointError("cannot append to " + path.string());
  if (fresh) out << header << '\n';
  out << line << '\n';
}

CheckpointStore::CheckpointStore(fs::path dir) : dir_(std::move(dir)) {}

fs::path CheckpointStore::snapshot_path(int iteration) const {
  char name[32];
  std::snprintf(name, sizeof name, "%04d.bin", iteration);
  return dir_ / "snapshots" / name;
}

bool CheckpointStore::has_progress() const { return fs::exists(dir_ / "progress.txt"); }

Progress CheckpointStore::read_progress() const {
  std::ifstream in(dir_ / "progress.txt");
  if (!in) throw CheckpointError("no progress.txt in " + dir_.string());
  std::map<std::string, long long> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    try {
      kv[line.substr(0, eq)] = std::stoll(line.substr(eq + 1));
    } catch (const std::exception&) {
      throw CheckpointError("malformed progress.txt line: " + line);
    }
  }
  for (const char* key : {"iteration", "finished", "training_log_rows", "history_rows", "weight_size"})
    if (!kv.count(key)) throw CheckpointError(std::string("progress.txt lacks '") + key + "'");
  Progress p;
  p.iteration = static_cast<int>(kv["iteration"]);
  p.finished = kv["finished"] != 0;
  p.training_log_rows = static_cast<int>(kv["training_log_rows"]);
  p.history_rows = static_cast<int>(kv["history_rows"]);
  p.weight_size = static_cast<int>(kv["weight_size"]);
  return p;
}

void CheckpointStore::write_progress(const Progress& p) const {
  std::ostringstream out;
  out << "iteration=" << p.iteration << '\n'
      << "finished=" << (p.finished ? 1 : 0) << '\n'
      << "training_log_rows=" << p.training_log_rows << '\n'
      << "history_rows=" << p.history_rows << '\n'
      << "weight_size=" << p.weight_size << '\n';
  write_file_atomic(dir_ / "progress.txt", out.str());
}

namespace {

std::string weight_header(const char* prefix, int d) {
  std::string h;
  for (int i = 0; i < d; ++i) h += std::string(i ? "," : "") + prefix + std::to_string(i);
  return h;
}

std::vector<double> parse_row(const std::string& line, std::size_t expected, const fs::path& file) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw CheckpointError("malformed number '" + cell + "' in " + file.string());
    }
  }
  if (out.size() != expected) throw CheckpointError("wrong column count in " + file.string());
  return out;
}

}  // namespace

void CheckpointStore::write_ccs(const CcsState& ccs) const {
  const int d = ccs.entries.empty() ? (ccs.visited.empty() ? 0 : ccs.visited.front().size())
                                    : ccs.entries.front().weight.size();
  std::string body =
      "snapshot," + weight_header("w", d) + "," + weight_header("v", d) + "," + weight_header("se", d) + "\n";
  for (const auto& e : ccs.entries) {
    body += std::to_string(e.snapshot);
    for (int i = 0; i < d; ++i) body += "," + format_double(e.weight[i]);
    for (int i = 0; i < d; ++i) body += "," + format_double(e.value(i));
    for (int i = 0; i < d; ++i) body += "," + format_double(e.standard_error.size() == d ? e.standard_error(i) : 0.0);
    body += "\n";
  }
  write_file_atomic(dir_ / "ccs.csv", body);
  std::string visited = weight_header("w", d) + "\n";
  for (const auto& w : ccs.visited) {
    for (int i = 0; i < d; ++i) visited += (i ? "," : "") + format_double(w[i]);
    visited += "\n";
  }
  write_file_atomic(dir_ / "visited.csv", visited);
}

CcsState CheckpointStore::read_ccs(int weight_size, int iteration) const {
  CcsState ccs;
  ccs.iteration = iteration;
  const int d = weight_size;
  const fs::path ccs_file = dir_ / "ccs.csv";
  std::ifstream in(ccs_file);
  if (!in) throw CheckpointError("missing " + ccs_file.string());
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<double> row = parse_row(line, static_cast<std::size_t>(1 + 3 * d), ccs_file);
    Eigen::VectorXd w(d), v(d), se(d);
    for (int i = 0; i < d; ++i) {
      w(i) = row[static_cast<std::size_t>(1 + i)];
      v(i) = row[static_cast<std::size_t>(1 + d + i)];
      se(i) = row[static_cast<std::size_t>(1 + 2 * d + i)];
    }
    ccs.entries.push_back({WeightVector(w), v, static_cast<int>(row[0]), se});
  }
  const fs::path visited_file = dir_ / "visited.csv";
  std::ifstream vin(visited_file);
  if (!vin) throw CheckpointError("missing " + visited_file.string());
  std::getline(vin, line);
  while (std::getline(vin, line)) {
    if (line.empty()) continue;
    const std::vector<double> row = parse_row(line, static_cast<std::size_t>(d), visited_file);
    ccs.visited.push_back(WeightVector(Eigen::Map<const Eigen::VectorXd>(row.data(), d)));
  }
  return ccs;
}

}  // namespace truckmorl::gpils
