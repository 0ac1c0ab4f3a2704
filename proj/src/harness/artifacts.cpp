#include "truckmorl/harness/artifacts.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "truckmorl/errors.hpp"
#include "truckmorl/gpils/store.hpp"

namespace truckmorl::harness {

namespace {

using gpils::format_double;

std::vector<std::vector<double>> parse_rows(const std::string& text, const std::string& header, const char* what) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != header) throw UsageError(std::string(what) + ": unexpected header");
  const auto columns = static_cast<std::size_t>(std::count(header.begin(), header.end(), ',') + 1);
  std::vector<std::vector<double>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      std::size_t used = 0;
      double x = 0.0;
      try {
        x = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != cell.size())
        throw UsageError(std::string(what) + ": line " + std::to_string(line_no) + ": bad number '" + cell + "'");
      row.push_back(x);
    }
    if (row.size() != columns)
      throw UsageError(std::string(what) + ": line " + std::to_string(line_no) + ": expected " +
                       std::to_string(columns) + " columns");
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string pareto_header(int d) {
  std::string h;
  for (int i = 0; i < d; ++i) h += "w" + std::to_string(i) + ",";
  return h + "policy,success_rate,failure_rate,max_step_rate,average_speed,energy_cost,driver_cost,distance,tcop,tcop_per_m";
}

constexpr const char* kBaselineHeader = "speed,cost_per_m,total_cost";
constexpr const char* kTraceHeader = "t,id,lane,x,v,a";

std::string fmt(double x, int digits = 4) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

struct Axis {
  double lo, hi;
  double px_lo, px_hi;
  double map(double x) const { return hi > lo ? px_lo + (x - lo) / (hi - lo) * (px_hi - px_lo) : 0.5 * (px_lo + px_hi); }
};

Axis padded(double lo, double hi, double px_lo, double px_hi) {
  const double pad = hi > lo ? 0.05 * (hi - lo) : std::max(1e-3, 0.05 * std::abs(lo));
  return {lo - pad, hi + pad, px_lo, px_hi};
}

constexpr double kWidth = 640, kHeight = 480, kLeft = 80, kRight = 600, kTop = 40, kBottom = 420;

std::string frame(const Axis& x, const Axis& y, const std::string& title, const std::string& xlabel,
                  const std::string& ylabel) {
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n"
    << "<line x1=\"" << kLeft << "\" y1=\"" << kBottom << "\" x2=\"" << kRight << "\" y2=\"" << kBottom
    << "\" stroke=\"black\"/>\n"
    << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kBottom
    << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double vx = x.lo + (x.hi - x.lo) * i / 5.0;
    const double px = x.map(vx);
    s << "<line x1=\"" << px << "\" y1=\"" << kBottom << "\" x2=\"" << px << "\" y2=\"" << kBottom + 5
      << "\" stroke=\"black\"/><text x=\"" << px << "\" y=\"" << kBottom + 18 << "\" text-anchor=\"middle\">"
      << fmt(vx) << "</text>\n";
    const double vy = y.lo + (y.hi - y.lo) * i / 5.0;
    const double py = y.map(vy);
    s << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << py << "\" x2=\"" << kLeft << "\" y2=\"" << py
      << "\" stroke=\"black\"/><text x=\"" << kLeft - 8 << "\" y=\"" << py + 4 << "\" text-anchor=\"end\">"
      << fmt(vy) << "</text>\n";
  }
  s << "<text x=\"" << (kLeft + kRight) / 2 << "\" y=\"" << kHeight - 20 << "\" text-anchor=\"middle\">" << xlabel
    << "</text>\n"
    << "<text x=\"18\" y=\"" << (kTop + kBottom) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
    << (kTop + kBottom) / 2 << ")\">" << ylabel << "</text>\n";
  return s.str();
}

// red (0 %) to green (100 %)
std::string success_color(double rate) {
  const double t = std::clamp(rate / 100.0, 0.0, 1.0);
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x40", static_cast<int>(220 * (1 - t)), static_cast<int>(40 + 160 * t));
  return buf;
}

}  // namespace

std::string pareto_csv(const std::vector<ParetoRecord>& records) {
  const int d = records.empty() ? 3 : records.front().weight.size();
  std::string out = pareto_header(d) + "\n";
  for (const auto& r : records) {
    for (int i = 0; i < d; ++i) out += format_double(r.weight[i]) + ",";
    out += std::to_string(r.policy);
    for (double x : {r.success_rate, r.failure_rate, r.max_step_rate, r.average_speed, r.energy_cost, r.driver_cost,
                     r.distance, r.tcop, r.tcop_per_m})
      out += "," + format_double(x);
    out += "\n";
  }
  return out;
}

std::vector<ParetoRecord> parse_pareto_csv(const std::string& text) {
  const std::string first = text.substr(0, text.find('\n'));
  const int d = static_cast<int>(std::count(first.begin(), first.end(), ',')) + 1 - 10;
  if (d < 1) throw UsageError("pareto csv: unexpected header");
  std::vector<ParetoRecord> out;
  for (const auto& row : parse_rows(text, pareto_header(d), "pareto csv")) {
    ParetoRecord r;
    r.weight = moppo::WeightVector(Eigen::Map<const Eigen::VectorXd>(row.data(), d));
    std::size_t k = static_cast<std::size_t>(d);
    r.policy = static_cast<int>(row[k++]);
    for (double* f : {&r.success_rate, &r.failure_rate, &r.max_step_rate, &r.average_speed, &r.energy_cost,
                      &r.driver_cost, &r.distance, &r.tcop, &r.tcop_per_m})
      *f = row[k++];
    out.push_back(r);
  }
  return out;
}

std::string baseline_csv(const std::vector<BaselineSample>& curve) {
  std::string out = std::string(kBaselineHeader) + "\n";
  for (const auto& s : curve)
    out += format_double(s.speed) + "," + format_double(s.cost_per_meter) + "," + format_double(s.total_cost) + "\n";
  return out;
}

std::vector<BaselineSample> parse_baseline_csv(const std::string& text) {
  std::vector<BaselineSample> out;
  for (const auto& row : parse_rows(text, kBaselineHeader, "baseline csv")) out.push_back({row[0], row[1], row[2]});
  return out;
}

std::string trace_csv(const std::vector<env::TraceRow>& rows) {
  std::string out = std::string(kTraceHeader) + "\n";
  for (const auto& r : rows)
    out += format_double(r.t) + "," + std::to_string(r.id) + "," + std::to_string(r.lane) + "," + format_double(r.x) +
           "," + format_double(r.v) + "," + format_double(r.a) + "\n";
  return out;
}

std::vector<env::TraceRow> parse_trace_csv(const std::string& text) {
  std::vector<env::TraceRow> out;
  for (const auto& row : parse_rows(text, kTraceHeader, "trace csv"))
    out.push_back({row[0], static_cast<int>(row[1]), static_cast<int>(row[2]), row[3], row[4], row[5]});
  return out;
}

std::string pareto_svg(const std::vector<ParetoRecord>& records) {
  double xlo = 0, xhi = 1, ylo = 0, yhi = 1;
  if (!records.empty()) {
    xlo = xhi = records.front().driver_cost;
    ylo = yhi = records.front().energy_cost;
    for (const auto& r : records) {
      xlo = std::min(xlo, r.driver_cost);
      xhi = std::max(xhi, r.driver_cost);
      ylo = std::min(ylo, r.energy_cost);
      yhi = std::max(yhi, r.energy_cost);
    }
  }
  const Axis x = padded(xlo, xhi, kLeft, kRight);
  const Axis y = padded(ylo, yhi, kBottom, kTop);
  std::ostringstream s;
  s << frame(x, y, "Pareto front", "driver cost (EUR)", "energy cost (EUR)");
  for (const auto& r : records)
    s << "<circle cx=\"" << x.map(r.driver_cost) << "\" cy=\"" << y.map(r.energy_cost) << "\" r=\"4\" fill=\""
      << success_color(r.success_rate) << "\" stroke=\"black\" stroke-width=\"0.5\"><title>success " << fmt(r.success_rate)
      << "%, TCOP " << fmt(r.tcop) << "</title></circle>\n";
  s << "<text x=\"" << kRight << "\" y=\"" << kTop << "\" text-anchor=\"end\" fill=\"" << success_color(100)
    << "\">100% success</text>\n"
    << "<text x=\"" << kRight << "\" y=\"" << kTop + 14 << "\" text-anchor=\"end\" fill=\"" << success_color(0)
    << "\">0% success</text>\n</svg>\n";
  return s.str();
}

std::string baseline_svg(const BaselineResult& b) {
  double ylo = 0, yhi = 1;
  if (!b.curve.empty()) {
    ylo = yhi = b.curve.front().total_cost;
    for (const auto& c : b.curve) {
      ylo = std::min(ylo, c.total_cost);
      yhi = std::max(yhi, c.total_cost);
    }
  }
  const double xlo = b.curve.empty() ? 0 : b.curve.front().speed;
  const double xhi = b.curve.empty() ? 1 : b.curve.back().speed;
  const Axis x = padded(xlo, xhi, kLeft, kRight);
  const Axis y = padded(ylo, yhi, kBottom, kTop);
  std::ostringstream s;
  s << frame(x, y, "Constant-speed cost", "speed (m/s)", "total cost (EUR)");
  s << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
  for (const auto& c : b.curve) s << x.map(c.speed) << "," << y.map(c.total_cost) << " ";
  s << "\"/>\n";
  if (b.optimal_speed >= xlo && b.optimal_speed <= xhi)
    s << "<circle cx=\"" << x.map(b.optimal_speed) << "\" cy=\"" << y.map(b.min_cost)
      << "\" r=\"4\" fill=\"crimson\"/>\n<text x=\"" << x.map(b.optimal_speed) - 6 << "\" y=\""
      << y.map(b.min_cost) - 8 << "\" text-anchor=\"end\">" << fmt(b.optimal_speed) << " m/s, " << fmt(b.min_cost, 3)
      << " EUR</text>\n";
  s << "</svg>\n";
  return s.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot write " + path.string());
  out << text;
  if (!out) throw UsageError("write failed for " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace truckmorl::harness
