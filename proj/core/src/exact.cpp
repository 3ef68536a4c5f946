#include "idid/exact.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>
#include <limits>

namespace idid {

namespace {
constexpr double kPruneMass = 1e-12;
}

double observation_probability(const Belief& b, int a, int o, const Pomdp& model) {
  double p = 0.0;
  for (int s = 0; s < model.num_states; ++s) {
    if (b[s] == 0.0) continue;
    for (int s2 = 0; s2 < model.num_states; ++s2) {
      double t = model.trans(s, a, s2);
      if (t == 0.0) continue;
      p += b[s] * t * model.obs(s2, a, o);
    }
  }
  return p;
}

Belief belief_update(const Belief& b, int a, int o, const Pomdp& model) {
  Belief post(model.num_states, 0.0);
  double norm = 0.0;
  for (int s2 = 0; s2 < model.num_states; ++s2) {
    double acc = 0.0;
    for (int s = 0; s < model.num_states; ++s) {
      if (b[s] == 0.0) continue;
      acc += b[s] * model.trans(s, a, s2);
    }
    double w = acc * model.obs(s2, a, o);
    post[s2] = w;
    norm += w;
  }
  if (norm <= 0.0) {
    std::ostringstream os;
    os << "impossible observation " << o << " after action " << a;
    throw ImpossibleObservation(os.str());
  }
  for (double& p : post) p /= norm;
  return post;
}

namespace {

PolicyTree solve_did_rec(const Pomdp& model, const Belief& b, int horizon) {
  PolicyTree best;
  double best_value = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < model.num_actions; ++a) {
    double er = 0.0;
    for (int s = 0; s < model.num_states; ++s) er += b[s] * model.rew(s, a);
    PolicyTree node;
    node.action = a;
    double value = er;
    if (horizon > 1) {
      node.children.resize(model.num_obs);
      node.child_reachable.assign(model.num_obs, true);
      for (int o = 0; o < model.num_obs; ++o) {
        double po = observation_probability(b, a, o, model);
        if (po <= 0.0) {
          node.children[o] = PolicyTree::constant(0, model.num_obs, horizon - 1);
          node.child_reachable[o] = false;
          continue;
        }
        Belief b2 = belief_update(b, a, o, model);
        node.children[o] = solve_did_rec(model, b2, horizon - 1);
        value += model.discount * po * node.children[o].value;
      }
    }
    node.value = value;
    if (value > best_value) {  // strict: lexicographically smallest action wins ties
      best_value = value;
      best = std::move(node);
    }
  }
  return best;
}

}  // namespace

PolicyTree solve_did(const Pomdp& model, const Belief& b0, int horizon) {
  if (horizon < 1) throw DomainError("solve_did: horizon must be >= 1");
  return solve_did_rec(model, b0, horizon);
}

std::vector<int> optimal_root_actions(const Pomdp& model, const Belief& b0, int horizon,
                                      double tol) {
  if (horizon < 1) throw DomainError("optimal_root_actions: horizon must be >= 1");
  std::vector<double> q(model.num_actions, 0.0);
  for (int a = 0; a < model.num_actions; ++a) {
    double v = 0.0;
    for (int s = 0; s < model.num_states; ++s) v += b0[s] * model.rew(s, a);
    if (horizon > 1) {
      for (int o = 0; o < model.num_obs; ++o) {
        double po = observation_probability(b0, a, o, model);
        if (po <= 0.0) continue;
        Belief b2 = belief_update(b0, a, o, model);
        v += model.discount * po * solve_did_rec(model, b2, horizon - 1).value;
      }
    }
    q[a] = v;
  }
  double best = *std::max_element(q.begin(), q.end());
  std::vector<int> tied;
  for (int a = 0; a < model.num_actions; ++a)
    if (q[a] >= best - tol) tied.push_back(a);
  return tied;
}

namespace {

void joint_value_rec(const DomainModel& d, const PolicyTree& pi, const PolicyTree& pj,
                     const std::vector<double>& dist, int t, std::vector<double>& per_step) {
  int ai = pi.action, aj = pj.action;
  double er = 0.0;
  for (int s = 0; s < d.num_states; ++s) {
    if (dist[s] != 0.0) er += dist[s] * d.rew(s, ai, aj);
  }
  per_step[t] += er;
  if (pi.children.empty()) return;
  std::vector<double> propagated(d.num_states, 0.0);
  for (int s = 0; s < d.num_states; ++s) {
    if (dist[s] == 0.0) continue;
    for (int s2 = 0; s2 < d.num_states; ++s2) {
      double tr = d.trans(s, ai, aj, s2);
      if (tr != 0.0) propagated[s2] += dist[s] * tr;
    }
  }
  std::vector<double> branch(d.num_states);
  for (int oi = 0; oi < d.num_obs_i; ++oi)
    for (int oj = 0; oj < d.num_obs_j; ++oj) {
      double mass = 0.0;
      for (int s2 = 0; s2 < d.num_states; ++s2) {
        branch[s2] = propagated[s2] * d.observe(Agent::I, s2, ai, aj, oi) *
                     d.observe(Agent::J, s2, ai, aj, oj);
        mass += branch[s2];
      }
      if (mass < kPruneMass) continue;
      joint_value_rec(d, pi.children[oi], pj.children[oj], branch, t + 1, per_step);
    }
}

}  // namespace

ValueReport joint_value(const DomainModel& domain, const PolicyTree& pi_i,
                        const PolicyTree& pi_j) {
  int depth = pi_i.depth();
  if (depth != pi_j.depth()) throw DomainError("joint_value: policy depth mismatch");
  ValueReport rep;
  rep.per_step.assign(depth, 0.0);
  joint_value_rec(domain, pi_i, pi_j, domain.initial_state_dist, 0, rep.per_step);
  double g = 1.0;
  for (double r : rep.per_step) {
    rep.value += g * r;
    g *= domain.discount;
  }
  return rep;
}

namespace {

double evaluate_policy_rec(const Pomdp& m, const std::vector<double>& dist, const PolicyTree& t) {
  int a = t.action;
  double er = 0.0;
  for (int s = 0; s < m.num_states; ++s)
    if (dist[s] != 0.0) er += dist[s] * m.rew(s, a);
  if (t.children.empty()) return er;
  std::vector<double> propagated(m.num_states, 0.0);
  for (int s = 0; s < m.num_states; ++s) {
    if (dist[s] == 0.0) continue;
    for (int s2 = 0; s2 < m.num_states; ++s2) {
      double tr = m.trans(s, a, s2);
      if (tr != 0.0) propagated[s2] += dist[s] * tr;
    }
  }
  std::vector<double> branch(m.num_states);
  for (int o = 0; o < m.num_obs; ++o) {
    double mass = 0.0;
    for (int s2 = 0; s2 < m.num_states; ++s2) {
      branch[s2] = propagated[s2] * m.obs(s2, a, o);
      mass += branch[s2];
    }
    if (mass < kPruneMass) continue;
    er += m.discount * evaluate_policy_rec(m, branch, t.children[o]);
  }
  return er;
}

}  // namespace

double evaluate_policy(const Pomdp& model, const Belief& b0, const PolicyTree& tree) {
  return evaluate_policy_rec(model, b0, tree);
}

OracleResult brute_force_oracle(const DomainModel& domain, int horizon, int workers,
                                size_t guard) {
  double count_i = policy_tree_count(domain.num_actions_i, domain.num_obs_i, horizon);
  double count_j = policy_tree_count(domain.num_actions_j, domain.num_obs_j, horizon);
  if (count_i > static_cast<double>(guard) || count_j > static_cast<double>(guard)) {
    std::ostringstream os;
    os << "instance too large for brute-force oracle: " << count_i << " i-trees, "
       << count_j << " j-trees (guard " << guard << " per agent)";
    throw InstanceTooLarge(os.str());
  }
  auto trees_i = enumerate_policy_trees(domain.num_actions_i, domain.num_obs_i, horizon, guard);
  auto trees_j = enumerate_policy_trees(domain.num_actions_j, domain.num_obs_j, horizon, guard);

  struct Best {
    double value = -std::numeric_limits<double>::infinity();
    size_t i = 0, j = 0;
  };
  int nthreads = std::max(1, workers);
  std::vector<Best> results(nthreads);
  auto work = [&](int w) {
    Best local;
    for (size_t a = w; a < trees_i.size(); a += nthreads) {
      for (size_t b = 0; b < trees_j.size(); ++b) {
        double v = joint_value(domain, trees_i[a], trees_j[b]).value;
        if (v > local.value) local = {v, a, b};
      }
    }
    results[w] = local;
  };
  if (nthreads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < nthreads; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  // deterministic combine: highest value, then smallest enumeration index
  Best best;
  for (const auto& r : results) {
    if (r.value > best.value ||
        (r.value == best.value && (r.i < best.i || (r.i == best.i && r.j < best.j)))) {
      best = r;
    }
  }
  OracleResult out;
  out.policy_i = trees_i[best.i];
  out.policy_j = trees_j[best.j];
  out.report = joint_value(domain, out.policy_i, out.policy_j);
  out.policy_i.value = out.report.value;
  out.policy_j.value = out.report.value;
  return out;
}

// ---------------------------------------------------------------------------
// Projection
// ---------------------------------------------------------------------------

ProjectedEnv::ProjectedEnv(const DomainModel& domain, const PolicyTree& other_policy,
                           Agent perspective)
    : domain_(&domain),
      perspective_(perspective),
      folded_(FlatPolicy::from_tree(other_policy, domain.num_obs(other(perspective)))),
      horizon_(other_policy.depth()) {
  const Agent me = perspective_;
  const Agent them = other(me);
  const int ns = domain.num_states;
  const int nn = static_cast<int>(folded_.nodes.size());
  const int na = domain.num_actions(me);
  const int no = domain.num_obs(me);
  const int no_them = domain.num_obs(them);

  pomdp_.num_states = ns * nn;
  pomdp_.num_actions = na;
  pomdp_.num_obs = no;
  pomdp_.discount = domain.discount;
  pomdp_.action_labels = me == Agent::I ? domain.action_labels_i : domain.action_labels_j;
  pomdp_.obs_labels = me == Agent::I ? domain.obs_labels_i : domain.obs_labels_j;
  pomdp_.allocate();

  auto joint = [&](int a_me, int a_them, int* ai, int* aj) {
    *ai = me == Agent::I ? a_me : a_them;
    *aj = me == Agent::I ? a_them : a_me;
  };

  for (int s = 0; s < ns; ++s)
    for (int n = 0; n < nn; ++n) {
      int x = s * nn + n;
      const auto& node = folded_.nodes[n];
      for (int a = 0; a < na; ++a) {
        if (node.terminal) {
          pomdp_.trans(x, a, x) = 1.0;  // absorbing beyond the folded depth
          continue;
        }
        int ai, aj;
        joint(a, node.action, &ai, &aj);
        pomdp_.rew(x, a) = domain.rew(s, ai, aj);
        for (int s2 = 0; s2 < ns; ++s2) {
          double tr = domain.trans(s, ai, aj, s2);
          if (tr == 0.0) continue;
          for (int ot = 0; ot < no_them; ++ot) {
            double po = domain.observe(them, s2, ai, aj, ot);
            if (po == 0.0) continue;
            int n2 = node.child[ot];
            pomdp_.trans(x, a, s2 * nn + n2) += tr * po;
          }
        }
      }
    }

  // The learner's observation depends on both actions at the transition; the
  // folded action is recovered from the arrival node's parent.
  for (int s2 = 0; s2 < ns; ++s2)
    for (int n2 = 0; n2 < nn; ++n2) {
      int x2 = s2 * nn + n2;
      const auto& node2 = folded_.nodes[n2];
      int parent = node2.parent;
      for (int a = 0; a < na; ++a) {
        if (parent < 0) {
          // root is never an arrival state within an episode
          pomdp_.obs(x2, a, 0) = 1.0;
          continue;
        }
        int a_them = folded_.nodes[parent].action;
        int ai, aj;
        joint(a, a_them, &ai, &aj);
        for (int o = 0; o < no; ++o)
          pomdp_.obs(x2, a, o) = domain.observe(me, s2, ai, aj, o);
      }
    }

  for (int s = 0; s < ns; ++s)
    pomdp_.initial_belief[s * nn + 0] = domain.initial_state_dist[s];
  pomdp_.validate();
}

ProjectedEnv project(const DomainModel& domain, const PolicyTree& other_policy,
                     Agent perspective) {
  return ProjectedEnv(domain, other_policy, perspective);
}

ProjectedEnv::Episode::Episode(const ProjectedEnv& env, Rng& rng) : env_(&env), rng_(&rng) {
  state_ = sample_index(env.pomdp_.initial_belief, rng);
}

ProjectedEnv::StepResult ProjectedEnv::Episode::step(int action) {
  const Pomdp& p = env_->pomdp_;
  int nn = static_cast<int>(env_->folded_.nodes.size());
  if (env_->folded_.nodes[state_ % nn].terminal || t_ >= env_->horizon_) {
    throw DomainError("projected episode: folded policy depth exhausted");
  }
  double r = p.rew(state_, action);
  size_t base = (static_cast<size_t>(state_) * p.num_actions + action) *
                static_cast<size_t>(p.num_states);
  int s2 = sample_index(&p.transition[base], p.num_states, *rng_);
  size_t obase = (static_cast<size_t>(s2) * p.num_actions + action) *
                 static_cast<size_t>(p.num_obs);
  int o = sample_index(&p.observation[obase], p.num_obs, *rng_);
  state_ = s2;
  ++t_;
  return {o, r};
}

}  // namespace idid
