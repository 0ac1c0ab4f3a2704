#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "truckmorl/gpils/ccs.hpp"

namespace truckmorl::gpils {

/// Last completed iteration and the log lengths that belong to it.
struct Progress {
  int iteration = 0;
  bool finished = false;
  int training_log_rows = 0;
  int history_rows = 0;
  int weight_size = 0;
};

/// File layout of a training checkpoint bundle:
///
///   progress.txt       key=value, written last (the commit point of an iteration)
///   state.bin          shared network + optimizer state
///   snapshots/NNNN.bin network parameters after iteration NNNN
///   ccs.csv            registered entries: snapshot, weight, value
///   visited.csv        M
///   m_history.csv      per-iteration selected weight, M and hypervolume
///   config.ini         copy of the run configuration (written by the CLI)
class CheckpointStore {
 public:
  explicit CheckpointStore(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path state_path() const { return dir_ / "state.bin"; }
  std::filesystem::path snapshot_path(int iteration) const;
  std::filesystem::path history_path() const { return dir_ / "m_history.csv"; }
  std::filesystem::path config_path() const { return dir_ / "config.ini"; }

  bool has_progress() const;
  Progress read_progress() const;
  void write_progress(const Progress& p) const;

  void write_ccs(const CcsState& ccs) const;
  /// Throws CheckpointError when files are missing or malformed.
  CcsState read_ccs(int weight_size, int iteration) const;

 private:
  std::filesystem::path dir_;
};

/// Writes `content` to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Keeps the header line and the first `rows` data lines of a CSV file (no-op if missing).
void truncate_csv(const std::filesystem::path& path, int rows);

/// Appends `line` (without newline) to `path`, writing `header` first if the file is new or empty.
void append_csv_line(const std::filesystem::path& path, const std::string& header, const std::string& line);

/// %.17g formatting: round-trips doubles exactly.
std::string format_double(double x);

}  // namespace truckmorl::gpils
