#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "idid/domain.hpp"
#include "idid/exact.hpp"
#include "idid/idid.hpp"
#include "idid/mcesp.hpp"
#include "idid/policy.hpp"

using namespace idid;

namespace {

ModelSpace solved_prior(const DomainModel& d, Agent owner, int count, int horizon) {
  ModelSpace ms;
  ms.models = default_level0_prior(d, owner, count);
  ms.weights.assign(ms.models.size(), 1.0 / ms.models.size());
  for (auto& m : ms.models) solve_level0_model(m, d, owner, horizon);
  return ms;
}

}  // namespace

TEST_CASE("assign_weights") {
  auto u = assign_weights({1, 2, 3, 4}, WeightingScheme::Uniform);
  CHECK(u == std::vector<double>{0.25, 0.25, 0.25, 0.25});

  auto d = assign_weights({10, 10}, WeightingScheme::Diverse);
  CHECK(d[0] == doctest::Approx(0.5));
  CHECK(d[1] == doctest::Approx(0.5));

  d = assign_weights({0, 10}, WeightingScheme::Diverse);
  CHECK(d[1] > d[0]);
  CHECK(d[0] + d[1] == doctest::Approx(1.0));
  CHECK(d[0] > 0.0);
}

TEST_CASE("default prior starts at the solo initial belief") {
  DomainModel d = build_mabc();
  auto prior = default_level0_prior(d, Agent::J, 5);
  REQUIRE(prior.size() == 5);
  CHECK(prior[0].belief == d.solo_view_j.initial_belief);
  for (const auto& m : prior) {
    double sum = 0.0;
    for (double x : m.belief) sum += x;
    CHECK(sum == doctest::Approx(1.0));
  }
  CHECK(default_level0_prior(d, Agent::J, 2).size() == 2);
}

TEST_CASE("expand splits one model by observation likelihood") {
  DomainModel d = build_mabc();
  ModelSpace ms = solved_prior(d, Agent::J, 1, 3);
  // the solo-view planner at the initial belief has a unique optimal action
  REQUIRE(optimal_root_actions(d.solo_view_j, ms.models[0].belief, 3).size() == 1);
  int a = ms.models[0].solution->action;

  ModelSpace next = expand_model_space(ms, d, Agent::J, 3);
  REQUIRE(next.size() == 2);
  for (int o = 0; o < 2; ++o) {
    double po = observation_probability(ms.models[0].belief, a, o, d.solo_view_j);
    CHECK(next.weights[o] == doctest::Approx(po));
  }
  CHECK(next.weight_sum() == doctest::Approx(1.0));
}

TEST_CASE("expand successor count and weight conservation") {
  DomainModel d = build_mabc();
  ModelSpace ms = solved_prior(d, Agent::J, 2, 3);
  ModelSpace next = expand_model_space(ms, d, Agent::J, 3);
  CHECK(next.size() <= 2u * d.num_actions_j * d.num_obs_j);
  CHECK(next.weight_sum() == doctest::Approx(1.0));
  for (const auto& m : next.models) {
    REQUIRE(m.solution.has_value());
    CHECK(m.solution->depth() == 2);
  }
  // one more step
  ModelSpace third = expand_model_space(next, d, Agent::J, 2);
  CHECK(third.weight_sum() == doctest::Approx(1.0));
  CHECK_THROWS_AS(expand_model_space(third, d, Agent::J, 1), DomainError);
}

TEST_CASE("prune merges exact duplicates and sums their weights") {
  DomainModel d = build_mabc();
  ModelSpace ms = solved_prior(d, Agent::J, 1, 2);
  ms.models.push_back(ms.models[0]);
  ms.weights = {0.3, 0.7};
  ModelSpace out = prune_behavioral_eq(ms);
  REQUIRE(out.size() == 1);
  CHECK(out.weights[0] == doctest::Approx(1.0));
}

TEST_CASE("prune merges different beliefs with identical policy trees") {
  DomainModel d = build_mabc();
  ModelSpace ms = solved_prior(d, Agent::J, 5, 2);
  ModelSpace out = prune_behavioral_eq(ms);
  CHECK(out.size() < ms.size());
  CHECK(out.weight_sum() == doctest::Approx(1.0));
  // idempotent
  CHECK(prune_behavioral_eq(out).size() == out.size());
}

TEST_CASE("pruning leaves the level-1 value unchanged") {
  DomainModel d = build_mabc();
  IDID idid = make_traditional_idid(d, Agent::I, 1, 3);
  IdidSolveOptions on, off;
  off.prune = false;
  auto a = solve_idid(idid, on);
  auto b = solve_idid(idid, off);
  CHECK(std::abs(a.expected_utility - b.expected_utility) <= 1e-9);
  CHECK(a.policy.behavior_key() == b.policy.behavior_key());
  // pruning actually bites somewhere
  bool smaller = false;
  REQUIRE(a.models_per_step.size() == b.models_per_step.size());
  for (size_t t = 0; t < a.models_per_step.size(); ++t) {
    CHECK(a.models_per_step[t] <= b.models_per_step[t]);
    if (a.models_per_step[t] < b.models_per_step[t]) smaller = true;
  }
  CHECK(smaller);
}

TEST_CASE("one-shot grid, level 1: i best-responds to the greedy j with MW") {
  DomainModel d = build_one_shot_grid();
  IDID idid = make_traditional_idid(d, Agent::I, 1, 1, /*prior_count=*/1);
  auto sol = solve_idid(idid);
  CHECK(sol.policy.action == 3);  // MW
  CHECK(sol.expected_utility == doctest::Approx(30.0));
  CHECK(sol.team_value == doctest::Approx(30.0));
  REQUIRE(sol.predicted_other.has_value());
  CHECK(sol.predicted_other->action == 0);  // MS
}

TEST_CASE("one-shot grid, level 2: same joint outcome as level 1") {
  DomainModel d = build_one_shot_grid();
  IDID idid = make_traditional_idid(d, Agent::I, 2, 1, /*prior_count=*/1);
  auto sol = solve_idid(idid);
  CHECK(sol.policy.action == 3);  // MW
  CHECK(sol.team_value == doctest::Approx(30.0));
}

TEST_CASE("singleton true-policy space yields the enumerated best response") {
  DomainModel d = build_mabc();
  Rng rng(3);
  PolicyTree pj = PolicyTree::random(2, 2, 3, rng);

  IDID idid = make_traditional_idid(d, Agent::I, 1, 3);
  idid.model_space = ModelSpace{};
  Level0Model m;
  m.belief = d.solo_view_j.initial_belief;
  m.frame = PolicyFrame{};
  m.solution = pj;
  idid.model_space.models.push_back(std::move(m));
  auto sol = solve_idid(idid);

  double best = -1e100;
  for (const auto& pi : enumerate_policy_trees(2, 2, 3))
    best = std::max(best, joint_value(d, pi, pj).value);
  CHECK(sol.expected_utility == doctest::Approx(best));
  CHECK(joint_value(d, sol.policy, pj).value == doctest::Approx(best));
}

TEST_CASE("augmented solve with weight 1 on the collaborative policy plays ME") {
  DomainModel d = build_one_shot_grid();
  IDID idid = make_traditional_idid(d, Agent::I, 1, 1, /*prior_count=*/1);
  idid.top_k = 1;  // keeps only the learned MN policy (highest EU)
  LearnedPolicy mn;
  mn.policy = PolicyTree::constant(1, d.num_obs_j, 1);
  mn.expected_utility = best_response_value(d, Agent::I, mn.policy);
  CHECK(mn.expected_utility == doctest::Approx(40.0));

  auto sol = solve_augmented_idid(idid, {mn});
  CHECK(sol.policy.action == 2);  // ME
  CHECK(sol.expected_utility == doctest::Approx(40.0));
  CHECK(sol.team_value == doctest::Approx(40.0));
}

TEST_CASE("top-K at or above the space size is the identity filter") {
  DomainModel d = build_mabc();
  Rng rng(9);
  std::vector<LearnedPolicy> learned;
  for (int k = 0; k < 2; ++k) {
    LearnedPolicy lp;
    lp.policy = PolicyTree::random(2, 2, 3, rng);
    lp.expected_utility = best_response_value(d, Agent::I, lp.policy);
    learned.push_back(std::move(lp));
  }
  IDID idid = make_traditional_idid(d, Agent::I, 1, 3);
  IDID wide = idid;
  idid.top_k = 5 + 2;  // exactly |space|
  wide.top_k = 1000;
  auto a = solve_augmented_idid(idid, learned);
  auto b = solve_augmented_idid(wide, learned);
  CHECK(a.expected_utility == doctest::Approx(b.expected_utility));
  CHECK(a.policy.behavior_key() == b.policy.behavior_key());
}

TEST_CASE("probability 1 on the true oracle model recovers the team optimum") {
  DomainModel d = build_mabc();
  auto oracle = brute_force_oracle(d, 3, 4);

  IDID idid = make_traditional_idid(d, Agent::I, 1, 3);
  idid.model_space = ModelSpace{};
  Level0Model m;
  m.belief = d.solo_view_j.initial_belief;
  m.frame = PolicyFrame{};
  m.solution = oracle.policy_j;
  idid.model_space.models.push_back(std::move(m));
  auto sol = solve_idid(idid);
  CHECK(std::abs(sol.expected_utility - 2.99) <= 0.01);
  CHECK(sol.expected_utility == doctest::Approx(oracle.report.value));
}

TEST_CASE("solve_level0_model rejects a policy frame of the wrong depth") {
  DomainModel d = build_mabc();
  Level0Model m;
  m.belief = d.solo_view_j.initial_belief;
  m.frame = PolicyFrame{};
  m.solution = PolicyTree::constant(0, 2, 2);
  CHECK_THROWS_AS(solve_level0_model(m, d, Agent::J, 3), DomainError);
}

TEST_CASE("solve_against_trees matches the best response to a single tree") {
  DomainModel d = build_mabc();
  Rng rng(13);
  PolicyTree pj = PolicyTree::random(2, 2, 3, rng);
  std::map<std::pair<int, int>, double> belief;
  for (int s = 0; s < d.num_states; ++s)
    if (d.initial_state_dist[s] > 0) belief[{s, 0}] = d.initial_state_dist[s];
  PolicyTree pi = solve_against_trees(d, Agent::I, {pj}, belief, 3);
  CHECK(joint_value(d, pi, pj).value == doctest::Approx(best_response_value(d, Agent::I, pj)));
}

TEST_CASE("level-2 solve on mabc is well formed") {
  DomainModel d = build_mabc();
  IDID idid = make_traditional_idid(d, Agent::I, 2, 3, /*prior_count=*/2);
  auto sol = solve_idid(idid);
  CHECK(sol.policy.depth() == 3);
  CHECK(sol.policy.complete(2));
  CHECK(std::isfinite(sol.expected_utility));
}
