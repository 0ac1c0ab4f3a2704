#include "truckmorl/harness/baseline.hpp"

#include <cmath>

#include "truckmorl/errors.hpp"

namespace truckmorl::harness {

namespace {

double drag_factor(const env::VehicleParams& p) { return 0.5 * p.drag_coefficient * p.frontal_area * p.air_density; }

}  // namespace

double analytic_cost_per_meter(double v, const env::RewardParams& reward, const env::VehicleParams& p) {
  if (!(v > 0.0)) throw UsageError("analytic_cost_per_meter: speed must be positive");
  const double grade = std::sin(std::atan(p.slope_percent / 100.0));
  const double force = drag_factor(p) * v * v + p.mass * p.gravity * (p.rolling_resistance + grade);
  return reward.driver_cost_per_hour / (3600.0 * v) + reward.energy_cost_per_kwh / 3.6e6 * force;
}

double analytic_optimal_speed(const env::RewardParams& reward, const env::VehicleParams& p) {
  return std::cbrt(reward.driver_cost_per_hour * 3.6e6 /
                   (3600.0 * reward.energy_cost_per_kwh * 2.0 * drag_factor(p)));
}

double golden_section_speed(const env::RewardParams& reward, const env::VehicleParams& p, double lo, double hi,
                            double tol) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto f = [&](double v) { return analytic_cost_per_meter(v, reward, p); };
  double a = lo, b = hi;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

BaselineResult analytic_optimum(const env::SimConfig& sim, double lo, double hi, double step) {
  if (!(lo > 0.0) || !(hi > lo) || !(step > 0.0)) throw UsageError("analytic_optimum: invalid speed range");
  BaselineResult r;
  r.road_length = sim.road_length;
  r.optimal_speed = analytic_optimal_speed(sim.reward, sim.vehicle);
  r.golden_speed = golden_section_speed(sim.reward, sim.vehicle);
  r.min_cost = analytic_cost_per_meter(r.optimal_speed, sim.reward, sim.vehicle) * sim.road_length;
  const long n = std::lround((hi - lo) / step);
  const double inverse = 1.0 / step;
  const double scale = std::abs(inverse - std::round(inverse)) < 1e-9 ? std::round(inverse) : 0.0;
  r.curve.reserve(static_cast<std::size_t>(n + 1));
  for (long i = 0; i <= n; ++i) {
    // integer numerators keep samples on the decimal grid (24.04, not 24.039999...)
    const double v = scale > 0.0 ? (std::round(lo * scale) + static_cast<double>(i)) / scale
                                 : lo + static_cast<double>(i) * step;
    const double c = analytic_cost_per_meter(v, sim.reward, sim.vehicle);
    r.curve.push_back({v, c, c * sim.road_length});
  }
  return r;
}

}  // namespace truckmorl::harness
