#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "arms/episode.hpp"
#include "arms/rng.hpp"
#include "arms/switcher.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace arms;

namespace {

RiskFeatures features(double c, double ttc, double valid, double jerk = 0.0, double band = 0.0) {
  return {c, ttc, jerk, band, valid};
}

FilterOutput filter_with_rows(Vec2 a_qp, bool valid, std::vector<HalfPlane> rows) { return {a_qp, valid, std::move(rows)}; }

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

TEST_CASE("time to collision") {
  CHECK(min_time_to_collision(fixture::uniform_scan(3.0), {}) == kTtcSentinel);
  LidarScan scan = fixture::uniform_scan(5.0);
  scan.ranges[0] = 2.0;
  CHECK(min_time_to_collision(scan, {1.0, 0.0}) == doctest::Approx(2.0));
  // Beams behind the motion never count.
  CHECK(min_time_to_collision(scan, {-1.0, 0.0}) == doctest::Approx(5.0));
  // Tiny closing speeds are floored.
  CHECK(min_time_to_collision(scan, {1e-6, 0.0}) == doctest::Approx(2.0 / 1e-3));
}

TEST_CASE("risk features") {
  LidarScan scan = fixture::uniform_scan(5.0);
  scan.ranges[270] = 0.75;
  const RiskFeatures phi = compute_risk_features(scan, {0.3, 0.4}, {0.3, 0.4}, {0.0, 1.6}, true);
  CHECK(phi.clearance == doctest::Approx(0.5));
  CHECK(phi.jerk == 0.0);
  CHECK(phi.band_error == doctest::Approx(0.5));
  CHECK(phi.valid == 1.0);
  CHECK(phi.ttc_min == doctest::Approx(0.75 / 0.4));
  const RiskFeatures moving = compute_risk_features(scan, {0.3, 0.0}, {0.0, 0.4}, {1.1, 0.0}, false);
  CHECK(moving.jerk == doctest::Approx(0.5 / 0.05));
  CHECK(moving.band_error == doctest::Approx(0.0));
  CHECK(moving.valid == 0.0);
  const auto n = normalize({2.5, kTtcSentinel, 20.0, 1.25, 1.0});
  CHECK(n[0] == 0.5);
  CHECK(n[1] == 1.0);
  CHECK(n[2] == 0.5);
  CHECK(n[3] == 0.5);
  CHECK(n[4] == 1.0);
}

TEST_CASE("logic and distance gates") {
  CHECK(gate(LogicGate{}, features(2.0, kTtcSentinel, 1.0)) == 1.0);
  CHECK(gate(LogicGate{}, features(0.4, kTtcSentinel, 1.0)) == 0.0);
  CHECK(gate(LogicGate{}, features(2.0, 0.5, 1.0)) == 0.0);
  CHECK(gate(LogicGate{}, features(2.0, kTtcSentinel, 0.0)) == 0.0);
  CHECK(gate(DistanceGate{}, features(2.0, kTtcSentinel, 0.0)) == 0.0);
  CHECK(gate(DistanceGate{}, features(0.3, kTtcSentinel, 1.0)) == 0.0);
  CHECK(gate(DistanceGate{}, features(1.2, kTtcSentinel, 1.0)) == 1.0);
  CHECK(gate(DistanceGate{}, features(0.75, kTtcSentinel, 1.0)) == doctest::Approx(0.5));
  CHECK(gate(ConstantGate{0.3}, features(0.0, 0.0, 0.0)) == 0.3);
}

TEST_CASE("learned gate applies a sigmoid to the network output") {
  const auto w = std::make_shared<const NeuralPolicyWeights>(default_gate_weights());
  const RiskFeatures phi = features(1.5, 3.0, 1.0, 4.0, 0.2);
  const auto x = normalize(phi);
  const double z = 4.0 * x[0] + 1.5 * x[1] - 2.0 * x[2] - 3.0 * x[3] + 0.5 * x[4] - 2.0;
  CHECK(gate(LearnedGate{w}, phi) == doctest::Approx(sigmoid(z)).epsilon(1e-6));
  CHECK_THROWS(gate(LearnedGate{}, phi));
  Rng rng(61);
  for (int i = 0; i < 500; ++i) {
    const double a = gate(LearnedGate{w}, features(rng.uniform(-0.5, 5.0), rng.uniform(0.0, 20.0),
                                                   rng.bernoulli(0.5) ? 1.0 : 0.0, rng.uniform(0.0, 60.0),
                                                   rng.uniform(0.0, 3.0)));
    CHECK(a >= 0.0);
    CHECK(a <= 1.0);
  }
}

TEST_CASE("fusion endpoints") {
  const ActionLimits limits;
  const Action a_prev{0.2, 0.0};
  const FilterOutput filter = filter_with_rows({0.22, 0.01}, true, {});
  GateState zero{0.0, 0.0, 1.0};
  const FuseResult r0 = fuse_step({0.9, -0.5}, filter, zero, ConstantGate{0.0}, features(1, 1, 1), a_prev);
  CHECK(r0.a_exec == rate_limit(clip_action({0.9, -0.5}, limits), a_prev, limits));
  const FuseResult r1 = fuse_step({0.9, -0.5}, filter, zero, ConstantGate{1.0}, features(1, 1, 1), a_prev);
  CHECK(r1.a_exec == rate_limit(clip_action({0.22, 0.01}, limits), a_prev, limits));
  CHECK(r1.a_blend == Action{0.22, 0.01});
}

TEST_CASE("fallback uses the follower alone") {
  const FilterOutput filter = filter_with_rows({0.0, 0.0}, false, {{{1.0, 0.0}, -5.0}});
  for (double alpha : {0.0, 0.3, 1.0}) {
    const FuseResult r = fuse_step({0.4, 0.1}, filter, {alpha, alpha, 0.2}, ConstantGate{alpha}, features(0, 0, 0), {0.4, 0.1});
    CHECK(r.a_qp_used == Action{0.4, 0.1});
    CHECK(r.a_blend == Action{0.4, 0.1});
    CHECK(r.a_exec == Action{0.4, 0.1});
    CHECK_FALSE(r.override_fired);
  }
}

TEST_CASE("violating follower actions are overridden by the filter") {
  // The follower pushes forward into a clearance row allowing u_x <= 0.1.
  const FilterOutput filter = filter_with_rows({0.1, 0.0}, true, {{{1.0, 0.0}, 0.1}});
  const FuseResult r = fuse_step({0.5, 0.0}, filter, {0.0, 0.0, 0.2}, ConstantGate{0.0}, features(1, 1, 1), {0.1, 0.0});
  CHECK(r.override_fired);
  CHECK(r.gate.alpha_bar == 1.0);
  CHECK(r.a_blend == Action{0.1, 0.0});
  CHECK(r.a_exec == Action{0.1, 0.0});
}

TEST_CASE("EMA update and its limits") {
  const FilterOutput filter = filter_with_rows({}, true, {});
  Rng rng(62);
  GateState s{1.0, 1.0, 0.2};
  for (int k = 0; k < 200; ++k) {
    const double a = rng.uniform();
    const FuseResult r = fuse_step({}, filter, s, ConstantGate{a}, features(1, 1, 1), {});
    CHECK(r.gate.alpha_bar == doctest::Approx(0.2 * a + 0.8 * s.alpha_bar).epsilon(1e-15));
    CHECK(r.gate.alpha_bar >= 0.0);
    CHECK(r.gate.alpha_bar <= 1.0);
    s = r.gate;
  }
  GateState follow{1.0, 0.4, 1.0};
  GateState frozen{1.0, 0.4, 0.0};
  for (int k = 0; k < 20; ++k) {
    const double a = rng.uniform();
    follow = fuse_step({}, filter, follow, ConstantGate{a}, features(1, 1, 1), {}).gate;
    frozen = fuse_step({}, filter, frozen, ConstantGate{a}, features(1, 1, 1), {}).gate;
    CHECK(follow.alpha_bar == a);
    CHECK(frozen.alpha_bar == 0.4);
  }
}

TEST_CASE("fusion branches on random steps") {
  Rng rng(63);
  int branch[2][2] = {{0, 0}, {0, 0}};
  const ActionLimits limits;
  for (int trial = 0; trial < 4000; ++trial) {
    const bool valid = rng.bernoulli(0.6);
    const Action a_f{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    const Action a_qp{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    const Action a_prev{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    std::vector<HalfPlane> rows;
    for (int i = rng.uniform_int(0, 3); i > 0; --i) {
      const Vec2 n = from_angle(rng.uniform(0.0, 6.28));
      rows.push_back({n, dot(n, a_qp) + rng.uniform(0.0, 0.5)});
    }
    const double alpha0 = rng.uniform();
    const GateState state{alpha0, alpha0, 0.2};
    const FilterOutput filter = filter_with_rows(a_qp, valid, rows);
    const bool violating = violates(rows, a_f);
    const FuseResult r = fuse_step(a_f, filter, state, ConstantGate{rng.uniform()}, features(1, 1, valid), a_prev);
    ++branch[valid][violating];

    CHECK(r.gate.alpha_bar >= 0.0);
    CHECK(r.gate.alpha_bar <= 1.0);
    if (!valid) {
      CHECK(r.a_blend == a_f);
      CHECK_FALSE(r.override_fired);
    } else if (violating) {
      CHECK(r.override_fired);
      CHECK(r.a_blend == a_qp);
    } else {
      CHECK_FALSE(r.override_fired);
      for (int axis = 0; axis < 2; ++axis) {
        const double f = axis == 0 ? a_f.x : a_f.y;
        const double q = axis == 0 ? a_qp.x : a_qp.y;
        const double b = axis == 0 ? r.a_blend.x : r.a_blend.y;
        CHECK(b >= std::min(f, q) - 1e-15);
        CHECK(b <= std::max(f, q) + 1e-15);
      }
    }
    CHECK(r.a_exec == rate_limit(clip_action(r.a_blend, limits), a_prev, limits));
  }
  for (int v = 0; v < 2; ++v) {
    for (int x = 0; x < 2; ++x) CHECK(branch[v][x] > 100);
  }
}

TEST_CASE("switcher reward") {
  CHECK(switcher_reward(0.37, 0.4, 0.1, false) == 0.37);
  CHECK(switcher_reward(0.37, 0.25, 0.5, true) == doctest::Approx(0.37 - 0.08 * 0.75).epsilon(1e-12));
  CHECK(switcher_reward(1.0, 1.0, 1e9, true) == doctest::Approx(1.3).epsilon(1e-12));
  for (double r_env : {-8.0, 0.0, 0.66}) {
    for (double ab : {0.0, 0.2, 0.5, 0.8, 1.0}) {
      for (double c : {-0.1, 0.0, 0.3, 0.5, 0.7, 2.0}) {
        for (bool valid : {false, true}) {
          CHECK(std::abs(switcher_reward(r_env, ab, c, valid) - oracle::switcher_reward(r_env, ab, c, valid)) <= 1e-12);
        }
      }
    }
  }
}

TEST_CASE("total variation") {
  const std::vector<double> xs{0.5, 1.0, 0.0, 0.0};
  CHECK(total_variation(xs, 1.0) == 2.0);
  CHECK(total_variation(std::vector<double>{}, 0.3) == 0.0);
}
