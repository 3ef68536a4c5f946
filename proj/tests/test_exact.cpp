#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "idid/domain.hpp"
#include "idid/exact.hpp"
#include "idid/policy.hpp"

using namespace idid;

namespace {

// Tiny fully-specified POMDP: 2 states, 2 actions, 2 observations.
Pomdp two_state(double obs_accuracy) {
  Pomdp m;
  m.num_states = 2;
  m.num_actions = 2;
  m.num_obs = 2;
  m.allocate();
  for (int s = 0; s < 2; ++s)
    for (int a = 0; a < 2; ++a) m.trans(s, a, s) = 1.0;  // identity transitions
  for (int s2 = 0; s2 < 2; ++s2)
    for (int a = 0; a < 2; ++a) {
      m.obs(s2, a, s2) = obs_accuracy;
      m.obs(s2, a, 1 - s2) = 1.0 - obs_accuracy;
    }
  m.rew(0, 0) = 1.0;
  m.rew(0, 1) = 0.0;
  m.rew(1, 0) = 0.0;
  m.rew(1, 1) = 2.0;
  m.initial_belief = {0.5, 0.5};
  m.validate();
  return m;
}

}  // namespace

TEST_CASE("observation probabilities sum to one") {
  Pomdp m = two_state(0.8);
  Belief b = {0.3, 0.7};
  for (int a = 0; a < 2; ++a) {
    double sum = 0.0;
    for (int o = 0; o < 2; ++o) sum += observation_probability(b, a, o, m);
    CHECK(sum == doctest::Approx(1.0));
  }
}

TEST_CASE("belief_update with a state-revealing observation is a point mass") {
  Pomdp m = two_state(1.0);
  Belief post = belief_update({0.5, 0.5}, 0, 1, m);
  CHECK(post[0] == doctest::Approx(0.0));
  CHECK(post[1] == doctest::Approx(1.0));
}

TEST_CASE("belief_update with an uninformative observation propagates the prior") {
  Pomdp m = two_state(0.5);
  Belief b = {0.25, 0.75};
  Belief post = belief_update(b, 1, 0, m);
  // identity transitions, uniform likelihood: posterior == prior
  CHECK(post[0] == doctest::Approx(b[0]));
  CHECK(post[1] == doctest::Approx(b[1]));
}

TEST_CASE("belief_update throws on an impossible observation") {
  Pomdp m = two_state(1.0);
  Belief b = {1.0, 0.0};  // state 0 for sure, identity transitions
  CHECK_THROWS_AS(belief_update(b, 0, 1, m), ImpossibleObservation);
}

TEST_CASE("mabc collision posterior matches the hand-summed Bayes rule") {
  DomainModel m = build_mabc();
  PolicyTree pj = PolicyTree::constant(/*send*/ 0, m.num_obs_j, 1);
  ProjectedEnv env = project(m, pj, Agent::I);
  const Pomdp& p = env.as_pomdp();

  Belief post = belief_update(p.initial_belief, /*send*/ 0, /*collision*/ 0, p);
  // marginal over the world state, computed independently from the joint tables
  std::vector<double> expect(4, 0.0);
  double z = 0.0;
  for (int s = 0; s < 4; ++s) {
    for (int s2 = 0; s2 < 4; ++s2) {
      double w = m.initial_state_dist[s] * m.trans(s, 0, 0, s2) *
                 m.observe(Agent::I, s2, 0, 0, 0);
      expect[s2] += w;
      z += w;
    }
  }
  REQUIRE(z > 0.0);
  for (double& x : expect) x /= z;

  std::vector<double> got(4, 0.0);
  for (int ps = 0; ps < p.num_states; ++ps) got[ps % 4] += post[ps];
  for (int s2 = 0; s2 < 4; ++s2) CHECK(got[s2] == doctest::Approx(expect[s2]));
}

TEST_CASE("solve_did at T=1 is the immediate-reward argmax") {
  Pomdp m = two_state(0.8);
  PolicyTree t = solve_did(m, {0.9, 0.1}, 1);
  CHECK(t.action == 0);  // 0.9*1 vs 0.1*2
  t = solve_did(m, {0.1, 0.9}, 1);
  CHECK(t.action == 1);
  CHECK(t.value == doctest::Approx(0.9 * 2.0));
}

TEST_CASE("solve_did tie-break picks the smallest action index") {
  Pomdp m = two_state(0.8);
  // belief where both actions score equally: b0*1 == b1*2 at b = (2/3, 1/3)
  PolicyTree t = solve_did(m, {2.0 / 3.0, 1.0 / 3.0}, 1);
  CHECK(t.action == 0);
  auto ties = optimal_root_actions(m, {2.0 / 3.0, 1.0 / 3.0}, 1);
  CHECK(ties == std::vector<int>{0, 1});
}

TEST_CASE("solve_did value equals its own policy evaluation") {
  DomainModel d = build_mabc();
  for (int T = 1; T <= 3; ++T) {
    PolicyTree t = solve_did(d.solo_view_j, d.solo_view_j.initial_belief, T);
    CHECK(t.value ==
          doctest::Approx(evaluate_policy(d.solo_view_j, d.solo_view_j.initial_belief, t)));
    CHECK(t.depth() == T);
    CHECK(t.complete(d.solo_view_j.num_obs));
  }
}

TEST_CASE("joint_value on the one-shot grid") {
  DomainModel m = build_one_shot_grid();
  PolicyTree mw = PolicyTree::constant(3, m.num_obs_i, 1);
  PolicyTree ms = PolicyTree::constant(0, m.num_obs_j, 1);
  CHECK(joint_value(m, mw, ms).value == doctest::Approx(30.0));
  PolicyTree me = PolicyTree::constant(2, m.num_obs_i, 1);
  PolicyTree mn = PolicyTree::constant(1, m.num_obs_j, 1);
  CHECK(joint_value(m, me, mn).value == doctest::Approx(40.0));
}

TEST_CASE("joint_value is symmetric on a symmetric domain") {
  GridConfig cfg;
  cfg.start_i = cfg.start_j = 4;  // identical starts make the domain symmetric
  DomainModel m = build_grid(cfg);
  Rng rng(7);
  PolicyTree a = PolicyTree::random(5, 3, 2, rng);
  PolicyTree b = PolicyTree::random(5, 3, 2, rng);
  CHECK(joint_value(m, a, b).value == doctest::Approx(joint_value(m, b, a).value));
}

TEST_CASE("joint_value rejects depth mismatch") {
  DomainModel m = build_mabc();
  PolicyTree a = PolicyTree::constant(0, 2, 2);
  PolicyTree b = PolicyTree::constant(0, 2, 3);
  CHECK_THROWS_AS(joint_value(m, a, b), DomainError);
}

TEST_CASE("brute_force_oracle at T=1 equals the exhaustive joint-action argmax") {
  DomainModel m = build_mabc();
  auto res = brute_force_oracle(m, 1);
  double best = -1e100;
  for (int ai = 0; ai < m.num_actions_i; ++ai)
    for (int aj = 0; aj < m.num_actions_j; ++aj) {
      double v = 0.0;
      for (int s = 0; s < m.num_states; ++s) v += m.initial_state_dist[s] * m.rew(s, ai, aj);
      best = std::max(best, v);
    }
  CHECK(res.report.value == doctest::Approx(best));
}

TEST_CASE("brute_force_oracle on the one-shot grid finds (ME, MN) = 40") {
  DomainModel m = build_one_shot_grid();
  auto res = brute_force_oracle(m, 1);
  CHECK(res.policy_i.action == 2);
  CHECK(res.policy_j.action == 1);
  CHECK(res.report.value == doctest::Approx(40.0));
}

TEST_CASE("mabc T=3 oracle reaches the published joint optimum") {
  DomainModel m = build_mabc();
  auto res = brute_force_oracle(m, 3, 4);
  CHECK(std::abs(res.report.value - 2.99) <= 0.01);
  CHECK(joint_value(m, res.policy_i, res.policy_j).value ==
        doctest::Approx(res.report.value));
}

TEST_CASE("brute_force_oracle is invariant to the worker count") {
  DomainModel m = build_mabc();
  auto a = brute_force_oracle(m, 3, 1);
  auto b = brute_force_oracle(m, 3, 3);
  CHECK(a.report.value == doctest::Approx(b.report.value));
  CHECK(a.policy_i.behavior_key() == b.policy_i.behavior_key());
  CHECK(a.policy_j.behavior_key() == b.policy_j.behavior_key());
}

TEST_CASE("brute_force_oracle guard rejects grid3 at T=3 with a size estimate") {
  DomainModel m = build_grid();
  try {
    brute_force_oracle(m, 3);
    FAIL("expected InstanceTooLarge");
  } catch (const InstanceTooLarge& e) {
    // 5^(1+3+9) = 5^13 trees per agent
    CHECK(std::string(e.what()).find("1.2207") != std::string::npos);
  }
}

TEST_CASE("projection with a fixed action reduces to that action slice") {
  DomainModel m = build_one_shot_grid();
  PolicyTree mn = PolicyTree::constant(1, m.num_obs_j, 1);
  ProjectedEnv env = project(m, mn, Agent::I);
  const Pomdp& p = env.as_pomdp();
  // immediate reward of each own action equals the joint table with a_j = MN
  int s0 = 7 * 9 + 5;
  for (int ai = 0; ai < 5; ++ai) {
    double r = 0.0;
    for (int ps = 0; ps < p.num_states; ++ps)
      if (p.initial_belief[ps] > 0) r += p.initial_belief[ps] * p.rew(ps, ai);
    CHECK(r == doctest::Approx(m.rew(s0, ai, 1)));
  }
}

TEST_CASE("policy evaluation on the projection equals the joint value") {
  DomainModel m = build_mabc();
  Rng rng(11);
  for (int k = 0; k < 5; ++k) {
    PolicyTree pi = PolicyTree::random(2, 2, 3, rng);
    PolicyTree pj = PolicyTree::random(2, 2, 3, rng);
    ProjectedEnv env = project(m, pj, Agent::I);
    double v = evaluate_policy(env.as_pomdp(), env.as_pomdp().initial_belief, pi);
    CHECK(v == doctest::Approx(joint_value(m, pi, pj).value));
  }
}

TEST_CASE("sampled episodes agree with the exact policy value") {
  DomainModel m = build_mabc();
  Rng rng(5);
  PolicyTree pj = PolicyTree::random(2, 2, 3, rng);
  PolicyTree pi = PolicyTree::random(2, 2, 3, rng);
  ProjectedEnv env = project(m, pj, Agent::I);
  FlatPolicy flat = FlatPolicy::from_tree(pi, 2);

  const int n = 20000;
  double sum = 0.0, sumsq = 0.0;
  for (int k = 0; k < n; ++k) {
    auto ep = env.start(rng);
    double ret = 0.0;
    int node = 0;
    for (int t = 0; t < 3; ++t) {
      auto [o, r] = ep.step(flat.nodes[node].action);
      ret += r;
      node = flat.advance(node, o);
    }
    sum += ret;
    sumsq += ret * ret;
  }
  double mean = sum / n;
  double se = std::sqrt((sumsq / n - mean * mean) / n);
  double exact = joint_value(m, pi, pj).value;
  CHECK(std::abs(mean - exact) < 4.0 * se + 1e-9);
}
