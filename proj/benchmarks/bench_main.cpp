#include <benchmark/benchmark.h>

#include <vector>

#include "arms/controllers.hpp"
#include "arms/harness.hpp"
#include "arms/qp.hpp"
#include "arms/rng.hpp"
#include "arms/safety_filter.hpp"
#include "arms/switcher.hpp"
#include "arms/world.hpp"

using namespace arms;

namespace {

struct State {
  Vec2 p_h;
  Vec2 v_h;
  Action a_prev;
  LidarScan scan;
};

WorldMap cluttered_room() {
  std::vector<Obstacle> obstacles{
      Circle{{2.0, 1.2}, 0.4}, Circle{{3.5, 2.8}, 0.3}, Circle{{5.0, 1.0}, 0.5}, Circle{{6.2, 3.0}, 0.35},
      Wall{{1.0, 3.5}, {4.0, 3.5}, 0.1}, Wall{{7.0, 0.5}, {7.0, 2.0}, 0.1},
  };
  return WorldMap(10.0, 4.0, 0.1, std::move(obstacles));
}

// 256 states sampled around a cluttered corridor; every benchmark cycles
// through them so branch predictors see varied active sets.
const std::vector<State>& states() {
  static const std::vector<State> pool = [] {
    const WorldMap map = cluttered_room();
    Rng rng(9);
    std::vector<State> out;
    while (out.size() < 256) {
      const Vec2 robot{rng.uniform(0.3, 9.7), rng.uniform(0.3, 3.7)};
      if (map.clearance_at(robot) < 0.4) continue;
      State s;
      s.scan = raycast(map, Pose2{robot, 0.0}, 5.0);
      s.p_h = from_angle(rng.uniform(-3.14, 3.14)) * rng.uniform(0.8, 2.0);
      s.v_h = from_angle(rng.uniform(-3.14, 3.14)) * rng.uniform(0.0, 0.5);
      s.a_prev = {rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
      out.push_back(std::move(s));
    }
    return out;
  }();
  return pool;
}

void BM_Raycast(benchmark::State& bench) {
  const WorldMap map = cluttered_room();
  const Pose2 pose{{0.6, 2.0}, 0.0};
  for (auto _ : bench) benchmark::DoNotOptimize(raycast(map, pose, 5.0));
}
BENCHMARK(BM_Raycast);

void BM_SolveQP(benchmark::State& bench) {
  const FilterParams params;
  std::vector<DenseQP> qps;
  for (const auto& s : states()) {
    qps.push_back(build_qp(s.p_h, s.v_h, s.a_prev, select_constraint_rays(s.scan, params), params));
  }
  std::size_t i = 0;
  for (auto _ : bench) benchmark::DoNotOptimize(solve(qps[i++ % qps.size()]));
}
BENCHMARK(BM_SolveQP);

void BM_SafetyFilter(benchmark::State& bench) {
  const FilterParams params;
  std::size_t i = 0;
  for (auto _ : bench) {
    const State& s = states()[i++ % states().size()];
    const auto rays = select_constraint_rays(s.scan, params);
    benchmark::DoNotOptimize(solve_safety_qp(s.p_h, s.v_h, s.a_prev, rays, params));
  }
}
BENCHMARK(BM_SafetyFilter);

void BM_FuseStep(benchmark::State& bench) {
  const FilterParams params;
  const SwitchPolicy policy = default_learned_gate();
  std::size_t i = 0;
  for (auto _ : bench) {
    const State& s = states()[i++ % states().size()];
    const auto rays = select_constraint_rays(s.scan, params);
    const FilterOutput f = solve_safety_qp(s.p_h, s.v_h, s.a_prev, rays, params);
    const RiskFeatures phi = compute_risk_features(s.scan, s.a_prev, {}, s.p_h, f.valid);
    benchmark::DoNotOptimize(fuse_step(s.a_prev, f, GateState{}, policy, phi, s.a_prev));
  }
}
BENCHMARK(BM_FuseStep);

void BM_Mpc(benchmark::State& bench) {
  MpcParams params;
  params.horizon = static_cast<int>(bench.range(0));
  std::size_t i = 0;
  for (auto _ : bench) {
    const State& s = states()[i++ % states().size()];
    const auto rays = select_constraint_rays(s.scan, params.filter);
    benchmark::DoNotOptimize(mpc_baseline(s.p_h, s.v_h, s.a_prev, rays, params));
  }
}
BENCHMARK(BM_Mpc)->Arg(1)->Arg(3)->Arg(10);

}  // namespace
BENCHMARK_MAIN();
