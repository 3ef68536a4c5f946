#include <benchmark/benchmark.h>

#include "idid/domain.hpp"
#include "idid/exact.hpp"
#include "idid/idid.hpp"
#include "idid/policy.hpp"

using namespace idid;

static void BM_SolveDid(benchmark::State& state) {
  DomainModel d = build_mabc();
  int T = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto t = solve_did(d.solo_view_j, d.solo_view_j.initial_belief, T);
    benchmark::DoNotOptimize(t.value);
  }
}
BENCHMARK(BM_SolveDid)->Arg(2)->Arg(4)->Arg(6);

static void BM_JointValue(benchmark::State& state) {
  DomainModel d = build_mabc();
  Rng rng(1);
  PolicyTree pi = PolicyTree::random(2, 2, static_cast<int>(state.range(0)), rng);
  PolicyTree pj = PolicyTree::random(2, 2, static_cast<int>(state.range(0)), rng);
  for (auto _ : state) benchmark::DoNotOptimize(joint_value(d, pi, pj).value);
}
BENCHMARK(BM_JointValue)->Arg(3)->Arg(5);

static void BM_Oracle(benchmark::State& state) {
  DomainModel d = build_mabc();
  int T = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto res = brute_force_oracle(d, T, 1);
    benchmark::DoNotOptimize(res.report.value);
  }
}
BENCHMARK(BM_Oracle)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

static void BM_SolveIdid(benchmark::State& state) {
  DomainModel d = build_mabc();
  IDID idid = make_traditional_idid(d, Agent::I, 1, 3, 5);
  IdidSolveOptions opts;
  opts.prune = state.range(0) != 0;
  for (auto _ : state) {
    auto sol = solve_idid(idid, opts);
    benchmark::DoNotOptimize(sol.expected_utility);
  }
}
BENCHMARK(BM_SolveIdid)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_GridLevel1(benchmark::State& state) {
  DomainModel d = build_grid();
  IDID idid = make_traditional_idid(d, Agent::I, 1, static_cast<int>(state.range(0)), 1);
  for (auto _ : state) {
    auto sol = solve_idid(idid);
    benchmark::DoNotOptimize(sol.expected_utility);
  }
}
BENCHMARK(BM_GridLevel1)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
