#include <doctest.h>

#include <cmath>

#include "truckmorl/env/highway_env.hpp"
#include "truckmorl/errors.hpp"
#include "truckmorl/safety/safety_filter.hpp"
#include "truckmorl/verification/suites.hpp"

using namespace truckmorl;
using namespace truckmorl::safety;

TEST_CASE("lane change timing") {
  const LaneChangeTimes t = lane_change_times(3.2, 2.55, 0.8);
  CHECK(t.duration == doctest::Approx(4.0));
  CHECK(t.enter == doctest::Approx(0.40625));
  CHECK(t.exit == doctest::Approx(3.59375));
  CHECK(t.enter < t.exit);
  CHECK_THROWS_AS(lane_change_times(3.2, 2.55, 0.0), ConfigError);
  CHECK_THROWS_AS(lane_change_times(3.2, 0.0, 0.8), ConfigError);
}

TEST_CASE("minimum gap") {
  const SafetyParams p;
  CHECK(min_gap(0, 0, p) == 2.0);
  CHECK(min_gap(20, 0, p) == doctest::Approx(22.0));
  CHECK(min_gap(20, -50, p) == 2.0);
  CHECK(min_gap(20, 2, p) == doctest::Approx(2 + 20 + 40 / (2 * std::sqrt(3.0))));
}

TEST_CASE("required deceleration") {
  CHECK(required_deceleration(25, 20, 15, 0.40625, 1e-3) == doctest::Approx(5 / (3 - 0.40625)));
  CHECK(required_deceleration(25, 20, 15, 0.40625, 1e-3) == doctest::Approx(1.928).epsilon(1e-3));
  CHECK(required_deceleration(25, 20, 1, 0.40625, 1e-3) == doctest::Approx(5 / 1e-3));
  CHECK(required_deceleration(20.5, 20, 1000, 0.4, 1e-3) == doctest::Approx(0.25 / 1000).epsilon(0.01));
  CHECK_THROWS_AS(required_deceleration(20, 20, 15, 0.4, 1e-3), UsageError);
}

TEST_CASE("lane change admissibility hand cases") {
  const SafetyParams p;
  GapObservation g;
  g.ego_speed = 20;
  CHECK(lane_change_safe(g, p).admissible);

  g.rear_target = Neighbor{6, 25};
  SafetyVerdict v = lane_change_safe(g, p);
  CHECK_FALSE(v.admissible);
  CHECK_FALSE(v.passed[3]);
  CHECK(v.failed_conditions().find('4') != std::string::npos);

  GapObservation front;
  front.ego_speed = 20;
  front.front_target = Neighbor{30, 20};
  v = lane_change_safe(front, p);
  CHECK(v.passed[1]);
  CHECK(v.margin[1] == doctest::Approx(8.0));

  front.front_target = Neighbor{21, 20};
  CHECK_FALSE(lane_change_safe(front, p).passed[1]);

  GapObservation current;
  current.ego_speed = 20;
  current.front_current = Neighbor{10, 20};
  CHECK_FALSE(lane_change_safe(current, p).passed[0]);

  GapObservation close_rear;
  close_rear.ego_speed = 20;
  close_rear.rear_target = Neighbor{2, 21};
  CHECK_FALSE(lane_change_safe(close_rear, p).admissible);

  GapObservation slow_rear;
  slow_rear.ego_speed = 20;
  slow_rear.rear_target = Neighbor{30, 15};
  CHECK(lane_change_safe(slow_rear, p).admissible);
}

TEST_CASE("enlarging a gap never turns admissible into inadmissible") {
  const verification::SuiteResult r = verification::safety_suite(2000, 9);
  CHECK_MESSAGE(r.passed, r.detail);
}

TEST_CASE("environment lane-change bits equal lane existence and the filter verdict") {
  env::SimConfig c;
  c.density = 0.03;
  env::HighwayEnv e(c);
  std::mt19937_64 rng(2);
  env::Observation obs = e.reset(21);
  for (int i = 0; i < 150 && !e.done(); ++i) {
    for (int dir : {1, -1}) {
      const auto verdict = e.ego_lane_change_verdict(dir);
      const int bit = static_cast<int>(dir == 1 ? env::Action::lane_left : env::Action::lane_right);
      CHECK(obs.mask(bit) == (verdict.has_value() && verdict->admissible));
    }
    std::vector<int> valid;
    for (int a = 0; a < obs.mask.size(); ++a)
      if (obs.mask(a)) valid.push_back(a);
    obs = e.step(valid[std::uniform_int_distribution<std::size_t>(0, valid.size() - 1)(rng)]).observation;
  }
}
