// Acceptance gate: one line per criterion, exit 0 iff all pass.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <thread>

#include "idid/adhoc.hpp"
#include "idid/domain.hpp"
#include "idid/exact.hpp"
#include "idid/idid.hpp"
#include "idid/mcesp.hpp"
#include "idid/policy.hpp"

using namespace idid;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("criterion %d: %s — %s\n", criterion, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

int workers() {
  return static_cast<int>(std::max(2u, std::thread::hardware_concurrency()));
}

IDID singleton_policy_idid(const DomainModel& d, const PolicyTree& pj, int horizon) {
  IDID idid = make_traditional_idid(d, Agent::I, 1, horizon);
  idid.model_space = ModelSpace{};
  Level0Model m;
  m.belief = d.solo_view_j.initial_belief;
  m.frame = PolicyFrame{};
  m.solution = pj;
  idid.model_space.models.push_back(std::move(m));
  return idid;
}

// 1. Exact joint planning on MABC T=3 reproduces the known team optimum.
OracleResult criterion1(const DomainModel& mabc) {
  auto t0 = Clock::now();
  auto oracle = brute_force_oracle(mabc, 3, workers());
  double dt = seconds_since(t0);
  bool pass = std::abs(oracle.report.value - 2.99) <= 0.01 && dt < 60.0;
  report(1, pass,
         "mabc T=3 oracle value " + fmt(oracle.report.value) + " (target 2.99 +- 0.01, " +
             fmt(dt) + "s)");
  return oracle;
}

// 2. Probability 1 on j's true model recovers the same team optimum.
void criterion2(const DomainModel& mabc, const OracleResult& oracle) {
  auto sol = solve_idid(singleton_policy_idid(mabc, oracle.policy_j, 3));
  bool pass = std::abs(sol.expected_utility - 2.99) <= 0.01;
  report(2, pass, "true-model solve value " + fmt(sol.expected_utility) + " (target 2.99)");
}

// 3. One-shot grid: traditional planning at levels 1 and 2 settles on the
// 30-reward pairing; the augmented solve coordinates on the 40-reward one.
void criterion3(const DomainModel& grid) {
  auto l1 = solve_idid(make_traditional_idid(grid, Agent::I, 1, 1, /*prior_count=*/1));
  auto l2 = solve_idid(make_traditional_idid(grid, Agent::I, 2, 1, /*prior_count=*/1));

  LearnerConfig cfg;
  cfg.seed = 7;
  auto cs = generate_collaborative_set(grid, Agent::J, 1, 8, cfg);
  auto aug = solve_augmented_idid(make_traditional_idid(grid, Agent::I, 1, 1, 1),
                                  cs.candidates);

  bool pass = std::abs(l1.team_value - 30.0) <= 1e-9 && std::abs(l2.team_value - 30.0) <= 1e-9 &&
              std::abs(aug.team_value - 40.0) <= 1e-9 && l1.policy.action == 3 &&
              l2.policy.action == 3 && aug.policy.action == 2;
  report(3, pass,
         "one-shot grid team values: level 1 " + fmt(l1.team_value) + ", level 2 " +
             fmt(l2.team_value) + ", augmented " + fmt(aug.team_value) + " (targets 30/30/40)");
}

// 4. With an identical model prior, augmenting the space never hurts the team.
void criterion4(const DomainModel& mabc) {
  IDID idid = make_traditional_idid(mabc, Agent::I, 1, 3, /*prior_count=*/5);
  auto trad = solve_idid(idid);
  LearnerConfig cfg;
  cfg.seed = 3;
  auto cs = generate_collaborative_set(mabc, Agent::J, 3, 8, cfg);
  auto aug = solve_augmented_idid(idid, cs.candidates);
  bool pass = aug.team_value >= trad.team_value - 1e-9;
  report(4, pass,
         "mabc T=3 team value: traditional " + fmt(trad.team_value) + " vs augmented " +
             fmt(aug.team_value));
}

// 5. Behavioral-equivalence pruning shrinks the space without moving the value.
void criterion5(const DomainModel& mabc) {
  IDID idid = make_traditional_idid(mabc, Agent::I, 1, 3, /*prior_count=*/5);
  IdidSolveOptions off;
  off.prune = false;
  auto pruned = solve_idid(idid);
  auto full = solve_idid(idid, off);
  bool smaller = false;
  for (size_t t = 0; t < pruned.models_per_step.size(); ++t)
    if (pruned.models_per_step[t] < full.models_per_step[t]) smaller = true;
  bool pass = std::abs(pruned.expected_utility - full.expected_utility) <= 1e-9 && smaller;
  report(5, pass,
         "prune on/off values " + fmt(pruned.expected_utility) + "/" +
             fmt(full.expected_utility) + ", final layer " +
             std::to_string(pruned.models_per_step.back()) + " vs " +
             std::to_string(full.models_per_step.back()) + " models");
}

// 6. The level-0 learner reliably approaches the exact best response.
void criterion6(const DomainModel& mabc, const OracleResult& oracle) {
  auto t0 = Clock::now();
  // exact best response of j to i's fixed oracle policy, by enumeration
  double br = -1e100;
  for (const auto& pj : enumerate_policy_trees(2, 2, 3))
    br = std::max(br, joint_value(mabc, oracle.policy_i, pj).value);

  int hits = 0;
  for (uint64_t seed = 0; seed < 10; ++seed) {
    Level0Model model;
    model.belief = mabc.solo_view_j.initial_belief;
    LearningFrame frame;
    Rng rng(seed * 77 + 5);
    frame.seed_policy = PolicyTree::random(2, 2, 3, rng);
    frame.other_policy = oracle.policy_i;
    model.frame = std::move(frame);
    LearnerConfig cfg;
    cfg.seed = seed;
    auto res = learn_level0(model, mabc, Agent::J, cfg);
    if (joint_value(mabc, oracle.policy_i, res.policy).value >= 0.95 * br) ++hits;
  }
  double dt = seconds_since(t0);
  bool pass = hits >= 8 && dt < 300.0;
  report(6, pass,
         "learner within 5% of the best response on " + std::to_string(hits) +
             "/10 seeds (need 8, " + fmt(dt) + "s)");
}

// 7. Ad hoc episodes: the augmented agent beats the rollout baseline and its
// model belief converges on a true-model teammate.
void criterion7(const DomainModel& mabc) {
  auto t0 = Clock::now();
  CompareConfig cc;
  cc.trials = 5;
  cc.steps = 20;
  cc.lookahead = 3;
  cc.restarts = 8;
  cc.rollouts = 200;
  cc.seed = 11;
  cc.workers = workers();
  cc.teammates = {"random", "predefined"};
  auto table = compare(mabc, cc);
  double aug_random = 0, opat_random = 0, aug_pre = 0, opat_pre = 0;
  for (const auto& row : table) {
    if (row.agent == "aug-idid" && row.teammate == "random") aug_random = row.mean;
    if (row.agent == "opat-po" && row.teammate == "random") opat_random = row.mean;
    if (row.agent == "aug-idid" && row.teammate == "predefined") aug_pre = row.mean;
    if (row.agent == "opat-po" && row.teammate == "predefined") opat_pre = row.mean;
  }

  // belief convergence against a teammate that plays the true (oracle) policy
  auto oracle = brute_force_oracle(mabc, 3, workers());
  auto candidates = build_candidate_set(mabc, Agent::I, 3, /*restarts=*/0, 8, 1, true);
  double mass = 0.0;
  for (uint64_t seed = 0; seed < 10; ++seed) {
    auto agent = make_idid_agent(mabc, Agent::I, candidates, 3);
    auto tm = make_policy_teammate(oracle.policy_j);
    auto log = run_episode(*agent, *tm, mabc, 20, seed * 31 + 7);
    mass += log.steps.back().model_belief.front();  // candidate 0 is the oracle
  }
  mass /= 10.0;
  double dt = seconds_since(t0);
  bool pass = aug_random > opat_random && aug_pre > opat_pre && mass > 0.9 && dt < 600.0;
  report(7, pass,
         "mean reward aug vs opat: random " + fmt(aug_random) + "/" + fmt(opat_random) +
             ", predefined " + fmt(aug_pre) + "/" + fmt(opat_pre) +
             "; mean final true-model mass " + fmt(mass) + " (need > 0.9, " + fmt(dt) + "s)");
}

// 8. Cross-cutting invariants hold on randomized instances.
void criterion8(const DomainModel& mabc) {
  auto t0 = Clock::now();
  bool ok = true;

  // model-space expansion conserves probability mass and pruning is exact
  ModelSpace ms;
  ms.models = default_level0_prior(mabc, Agent::J, 5);
  ms.weights.assign(ms.models.size(), 1.0 / ms.models.size());
  for (auto& m : ms.models) solve_level0_model(m, mabc, Agent::J, 3);
  ModelSpace step = expand_model_space(ms, mabc, Agent::J, 3);
  ok = ok && std::abs(step.weight_sum() - 1.0) <= 1e-9;
  ModelSpace pruned = prune_behavioral_eq(step);
  ok = ok && std::abs(pruned.weight_sum() - 1.0) <= 1e-9 && pruned.size() <= step.size();

  // projection exactness: folded policy evaluation equals the joint value
  Rng rng(123);
  for (int k = 0; k < 10 && ok; ++k) {
    PolicyTree pi = PolicyTree::random(2, 2, 3, rng);
    PolicyTree pj = PolicyTree::random(2, 2, 3, rng);
    ProjectedEnv env = project(mabc, pj, Agent::I);
    double v = evaluate_policy(env.as_pomdp(), env.as_pomdp().initial_belief, pi);
    ok = std::abs(v - joint_value(mabc, pi, pj).value) <= 1e-9;
  }

  // q_update stays inside the hull of its inputs
  std::uniform_real_distribution<double> val(-20, 20), rate(0, 1);
  for (int k = 0; k < 100 && ok; ++k) {
    double q = val(rng), a = rate(rng), r = val(rng);
    double out = q_update(q, a, r);
    ok = out >= std::min(q, r) - 1e-12 && out <= std::max(q, r) + 1e-12;
  }

  // statistics are sane
  auto w = welch_t_test({1, 2, 3}, {1, 2, 3});
  ok = ok && w.p > 0.99 && w.p <= 1.0;

  double dt = seconds_since(t0);
  report(8, ok && dt < 120.0, "invariant sweep (" + fmt(dt) + "s)");
}

}  // namespace

int main() {
  DomainModel mabc = build_mabc();
  DomainModel grid = build_one_shot_grid();

  auto oracle = criterion1(mabc);
  criterion2(mabc, oracle);
  criterion3(grid);
  criterion4(mabc);
  criterion5(mabc);
  criterion6(mabc, oracle);
  criterion7(mabc);
  criterion8(mabc);

  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
