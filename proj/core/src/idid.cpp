#include "idid/idid.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <tuple>

#include "idid/mcesp.hpp"

namespace idid {

namespace {
constexpr double kPruneMass = 1e-12;
}

double ModelSpace::weight_sum() const {
  return std::accumulate(weights.begin(), weights.end(), 0.0);
}

std::vector<double> assign_weights(const std::vector<double>& expected_utilities,
                                   WeightingScheme scheme) {
  size_t n = expected_utilities.size();
  if (n == 0) throw DomainError("assign_weights: empty list");
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  if (scheme == WeightingScheme::Diverse) {
    double lo = *std::min_element(expected_utilities.begin(), expected_utilities.end());
    double sum = 0.0;
    for (size_t k = 0; k < n; ++k) {
      w[k] = expected_utilities[k] - lo + 1e-6;
      sum += w[k];
    }
    for (double& x : w) x /= sum;
  }
  return w;
}

namespace {

/// The single-agent view a model updates its belief with.
const Pomdp& model_view(const Level0Model& m, const DomainModel& domain, Agent owner) {
  if (const auto* pf = std::get_if<PlanningFrame>(&m.frame)) return pf->view;
  return domain.solo_view(owner);
}

/// Root actions the model predicts at the given remaining depth: the tie set
/// for planners, the cached tree's root for everything else.
std::vector<int> root_actions(const Level0Model& m, const DomainModel& domain, Agent owner,
                              int horizon) {
  if (const auto* pf = std::get_if<PlanningFrame>(&m.frame))
    return optimal_root_actions(pf->view, m.belief, horizon);
  if (!m.solution) throw DomainError("model space contains an unsolved model");
  return {m.solution->action};
}

Belief propagate_belief(const Belief& b, int a, const Pomdp& view) {
  Belief out(view.num_states, 0.0);
  for (int s = 0; s < view.num_states; ++s) {
    if (b[s] == 0.0) continue;
    for (int s2 = 0; s2 < view.num_states; ++s2) out[s2] += b[s] * view.trans(s, a, s2);
  }
  return out;
}

/// Successor of a solved model after it acts `a` and observes `o`, solved at
/// horizon - 1. Falls back to the action-propagated belief when the model
/// considers `o` impossible (such branches carry weight 0).
Level0Model successor_model(const Level0Model& m, const DomainModel& domain, Agent owner,
                            int horizon, int a, int o, double obs_prob) {
  const Pomdp& view = model_view(m, domain, owner);
  Level0Model next;
  next.belief = obs_prob > 0.0 ? belief_update(m.belief, a, o, view)
                               : propagate_belief(m.belief, a, view);
  if (std::holds_alternative<PlanningFrame>(m.frame)) {
    next.frame = m.frame;
    next.solution = solve_did(view, next.belief, horizon - 1);
  } else {
    next.frame = PolicyFrame{};
    next.solution = m.solution->children.at(o);
  }
  return next;
}

struct Expansion {
  ModelSpace ms;
  /// succ[{parent index, action, observation}] -> index in ms. Defined for
  /// every predicted action and every observation (impossible ones included,
  /// at weight 0) so the downstream DP has a total transition function.
  std::map<std::tuple<size_t, int, int>, size_t> succ;
};

Expansion expand_internal(const ModelSpace& ms, const DomainModel& domain, Agent owner,
                          int horizon) {
  if (horizon < 2) throw DomainError("expand_model_space: remaining horizon must be >= 2");
  Expansion out;
  const int no = domain.num_obs(owner);
  for (size_t k = 0; k < ms.models.size(); ++k) {
    const Level0Model& m = ms.models[k];
    if (!m.solution) throw DomainError("model space contains an unsolved model");
    const Pomdp& view = model_view(m, domain, owner);
    auto actions = root_actions(m, domain, owner, horizon);
    double pa = 1.0 / static_cast<double>(actions.size());
    for (int a : actions) {
      for (int o = 0; o < no; ++o) {
        double po = observation_probability(m.belief, a, o, view);
        if (po <= kPruneMass) po = 0.0;
        out.succ[{k, a, o}] = out.ms.models.size();
        out.ms.models.push_back(successor_model(m, domain, owner, horizon, a, o, po));
        out.ms.weights.push_back(ms.weights[k] * pa * po);
      }
    }
  }
  return out;
}

/// Full predicted behavior of a model over the remaining horizon: the tied
/// root actions plus, recursively, every successor's behavior. Finer than
/// policy-tree identity (models mixing differently over tied optima are not
/// equivalent), which is what makes in-solver pruning exactly value-preserving.
std::string behavior_signature(const Level0Model& m, const DomainModel& domain, Agent owner,
                               int horizon) {
  auto ties = root_actions(m, domain, owner, horizon);
  std::string s = "{";
  for (int a : ties) {
    s += std::to_string(a);
    s += ',';
  }
  s += '}';
  if (horizon > 1) {
    const Pomdp& view = model_view(m, domain, owner);
    const int no = domain.num_obs(owner);
    s += '(';
    for (int a : ties) {
      for (int o = 0; o < no; ++o) {
        double po = observation_probability(m.belief, a, o, view);
        if (po <= kPruneMass) po = 0.0;
        Level0Model next = successor_model(m, domain, owner, horizon, a, o, po);
        s += behavior_signature(next, domain, owner, horizon - 1);
        s += ';';
      }
    }
    s += ')';
  }
  return s;
}

struct Pruned {
  ModelSpace ms;
  std::vector<size_t> remap;  // old index -> new index
};

Pruned prune_internal(const ModelSpace& ms, const DomainModel& domain, Agent owner,
                      int horizon) {
  Pruned out;
  std::map<std::string, size_t> seen;
  out.remap.resize(ms.models.size());
  for (size_t k = 0; k < ms.models.size(); ++k) {
    if (!ms.models[k].solution) throw DomainError("prune_behavioral_eq: unsolved model");
    std::string key = behavior_signature(ms.models[k], domain, owner, horizon);
    auto [it, inserted] = seen.try_emplace(key, out.ms.models.size());
    if (inserted) {
      out.ms.models.push_back(ms.models[k]);
      out.ms.weights.push_back(ms.weights[k]);
    } else {
      out.ms.weights[it->second] += ms.weights[k];
    }
    out.remap[k] = it->second;
  }
  return out;
}

}  // namespace

void solve_level0_model(Level0Model& model, const DomainModel& domain, Agent owner,
                        int horizon, const LearnerConfig* learner_cfg, uint64_t seed) {
  if (horizon < 1) throw DomainError("solve_level0_model: horizon must be >= 1");
  if (const auto* pf = std::get_if<PlanningFrame>(&model.frame)) {
    model.solution = solve_did(pf->view, model.belief, horizon);
  } else if (std::holds_alternative<LearningFrame>(model.frame)) {
    LearnerConfig cfg = learner_cfg ? *learner_cfg : LearnerConfig{};
    cfg.seed = seed;
    cfg.alpha = std::get<LearningFrame>(model.frame).alpha;
    model.solution = learn_level0(model, domain, owner, cfg).policy;
  } else {
    if (!model.solution) throw DomainError("policy-frame model has no cached policy");
    if (model.solution->depth() != horizon)
      throw DomainError("policy-frame model depth does not match the horizon");
  }
}

ModelSpace expand_model_space(const ModelSpace& ms, const DomainModel& domain, Agent owner,
                              int remaining_horizon) {
  Expansion ex = expand_internal(ms, domain, owner, remaining_horizon);
  // only positively-likely branches are part of the public successor space
  ModelSpace out;
  for (size_t k = 0; k < ex.ms.models.size(); ++k) {
    if (ex.ms.weights[k] > 0.0) {
      out.models.push_back(ex.ms.models[k]);
      out.weights.push_back(ex.ms.weights[k]);
    }
  }
  return out;
}

ModelSpace prune_behavioral_eq(const ModelSpace& ms) {
  ModelSpace out;
  std::map<std::string, size_t> seen;
  for (size_t k = 0; k < ms.models.size(); ++k) {
    if (!ms.models[k].solution) throw DomainError("prune_behavioral_eq: unsolved model");
    auto [it, inserted] = seen.try_emplace(ms.models[k].solution->behavior_key(), out.models.size());
    if (inserted) {
      out.models.push_back(ms.models[k]);
      out.weights.push_back(ms.weights[k]);
    } else {
      out.weights[it->second] += ms.weights[k];
    }
  }
  return out;
}

double best_response_value(const DomainModel& domain, Agent subject,
                           const PolicyTree& other_policy) {
  ProjectedEnv env = project(domain, other_policy, subject);
  const Pomdp& p = env.as_pomdp();
  return solve_did(p, p.initial_belief, other_policy.depth()).value;
}

namespace {

/// The other agent's behavior over time, flattened for the interactive-state
/// DP: one node per retained model per time step.
struct Automaton {
  struct Node {
    std::vector<int> actions;              // predicted root actions (uniform)
    std::map<std::pair<int, int>, int> succ;  // (action, obs) -> node id, -1 past the horizon
  };
  std::vector<Node> nodes;
  std::vector<std::pair<int, double>> roots;  // (node id, weight)
};

/// Sparse belief over (world state, automaton node).
using IBelief = std::map<std::pair<int, int>, double>;

PolicyTree solve_interactive(const DomainModel& d, Agent subject, const Automaton& at,
                             const IBelief& b, int horizon) {
  const Agent oa = other(subject);
  const int na = d.num_actions(subject);
  const int no = d.num_obs(subject);
  const int no_oa = d.num_obs(oa);
  auto joint = [&](int a_me, int a_them, int* ai, int* aj) {
    *ai = subject == Agent::I ? a_me : a_them;
    *aj = subject == Agent::I ? a_them : a_me;
  };

  PolicyTree best;
  double best_value = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < na; ++a) {
    double er = 0.0;
    for (const auto& [sk, p] : b) {
      const auto& node = at.nodes[sk.second];
      double pa = 1.0 / static_cast<double>(node.actions.size());
      for (int am : node.actions) {
        int ai, aj;
        joint(a, am, &ai, &aj);
        er += p * pa * d.rew(sk.first, ai, aj);
      }
    }
    PolicyTree cand;
    cand.action = a;
    double value = er;
    if (horizon > 1) {
      cand.children.resize(no);
      cand.child_reachable.assign(no, true);
      for (int o = 0; o < no; ++o) {
        IBelief post;
        double mass = 0.0;
        for (const auto& [sk, p] : b) {
          auto [s, k] = sk;
          const auto& node = at.nodes[k];
          double pa = 1.0 / static_cast<double>(node.actions.size());
          for (int am : node.actions) {
            int ai, aj;
            joint(a, am, &ai, &aj);
            for (int s2 = 0; s2 < d.num_states; ++s2) {
              double tr = d.trans(s, ai, aj, s2);
              if (tr == 0.0) continue;
              double base = p * pa * tr * d.observe(subject, s2, ai, aj, o);
              if (base == 0.0) continue;
              for (int om = 0; om < no_oa; ++om) {
                double pom = d.observe(oa, s2, ai, aj, om);
                if (pom == 0.0) continue;
                int k2 = node.succ.at({am, om});
                post[{s2, k2}] += base * pom;
                mass += base * pom;
              }
            }
          }
        }
        if (mass < kPruneMass) {
          cand.children[o] = PolicyTree::constant(0, no, horizon - 1);
          cand.child_reachable[o] = false;
          continue;
        }
        for (auto& [sk, p] : post) p /= mass;
        cand.children[o] = solve_interactive(d, subject, at, post, horizon - 1);
        value += d.discount * mass * cand.children[o].value;
      }
    }
    cand.value = value;
    if (value > best_value) {  // strict: lexicographically smallest action wins ties
      best_value = value;
      best = std::move(cand);
    }
  }
  return best;
}

ModelSpace normalized(ModelSpace ms) {
  if (ms.weights.empty()) ms.weights.assign(ms.models.size(), 1.0);
  if (ms.weights.size() != ms.models.size())
    throw DomainError("model space: weight/model count mismatch");
  double sum = ms.weight_sum();
  if (sum <= 0.0) throw DomainError("model space: weights must have positive mass");
  for (double& w : ms.weights) w /= sum;
  return ms;
}

IdidSolution solve_from_space(const IDID& idid, ModelSpace ms, const IdidSolveOptions& opts) {
  const int T = idid.horizon;
  const Agent oa = other(idid.subject);
  if (ms.models.empty()) throw DomainError("solve_idid: empty model space");
  for (size_t k = 0; k < ms.models.size(); ++k) {
    if (!ms.models[k].solution)
      solve_level0_model(ms.models[k], idid.domain, oa, T, opts.learner_cfg,
                         opts.seed + 0x9e3779b97f4a7c15ULL * (k + 1));
  }
  ms = normalized(std::move(ms));

  IdidSolution sol;
  Automaton at;
  std::vector<std::vector<size_t>> layer_ids;  // per step, node id per model
  std::vector<ModelSpace> layers;

  sol.models_per_step_unpruned.push_back(ms.size());
  Pruned p0 = opts.prune ? prune_internal(ms, idid.domain, oa, T) : Pruned{ms, {}};
  layers.push_back(std::move(p0.ms));
  sol.models_per_step.push_back(layers[0].size());

  for (int t = 0; t + 1 < T; ++t) {
    Expansion ex = expand_internal(layers[t], idid.domain, oa, T - t);
    sol.models_per_step_unpruned.push_back(ex.ms.size());
    Pruned pr = opts.prune ? prune_internal(ex.ms, idid.domain, oa, T - t - 1) : Pruned{ex.ms, {}};
    if (!opts.prune) {
      pr.remap.resize(ex.ms.size());
      std::iota(pr.remap.begin(), pr.remap.end(), size_t{0});
    }
    sol.models_per_step.push_back(pr.ms.size());

    // materialize layer t's automaton nodes now that successor ids are known
    std::vector<size_t> ids;
    for (size_t k = 0; k < layers[t].models.size(); ++k) {
      Automaton::Node node;
      node.actions = root_actions(layers[t].models[k], idid.domain, oa, T - t);
      for (int a : node.actions)
        for (int o = 0; o < idid.domain.num_obs(oa); ++o)
          node.succ[{a, o}] = -1;  // patched below once layer t+1 ids exist
      ids.push_back(at.nodes.size());
      at.nodes.push_back(std::move(node));
    }
    layer_ids.push_back(std::move(ids));
    layers.push_back(std::move(pr.ms));
    // keep succ maps in model-space indices for now
    for (auto& [key, v] : ex.succ) v = pr.remap.empty() ? v : pr.remap[v];
    // stash the remapped succ per parent into the freshly added nodes
    for (const auto& [key, v] : ex.succ) {
      auto [k, a, o] = key;
      at.nodes[layer_ids[t][k]].succ[{a, o}] = static_cast<int>(v);
    }
  }
  // final layer: no successors needed
  {
    std::vector<size_t> ids;
    int t = T - 1;
    for (size_t k = 0; k < layers[t].models.size(); ++k) {
      Automaton::Node node;
      node.actions = root_actions(layers[t].models[k], idid.domain, oa, 1);
      ids.push_back(at.nodes.size());
      at.nodes.push_back(std::move(node));
    }
    layer_ids.push_back(std::move(ids));
  }
  // successor ids were recorded as layer-local indices; shift to global ids
  for (int t = 0; t + 1 < T; ++t) {
    for (size_t id : layer_ids[t]) {
      for (auto& [key, v] : at.nodes[id].succ) {
        if (v < 0) throw DomainError("solve_idid: incomplete model update link");
        v = static_cast<int>(layer_ids[t + 1][v]);
      }
    }
  }

  IBelief b0;
  for (size_t k = 0; k < layers[0].models.size(); ++k) {
    double w = layers[0].weights[k];
    if (w <= 0.0) continue;
    for (int s = 0; s < idid.domain.num_states; ++s) {
      double p = idid.domain.initial_state_dist[s] * w;
      if (p > 0.0) b0[{s, static_cast<int>(layer_ids[0][k])}] += p;
    }
  }
  sol.policy = solve_interactive(idid.domain, idid.subject, at, b0, T);
  sol.expected_utility = sol.policy.value;
  // predicted teammate: the retained model whose policy pairs best with the
  // solved policy (ties break to the higher weight, then the earlier model)
  auto pair_value = [&](const PolicyTree& pj) {
    return idid.subject == Agent::I ? joint_value(idid.domain, sol.policy, pj).value
                                    : joint_value(idid.domain, pj, sol.policy).value;
  };
  size_t rep = 0;
  double rep_v = pair_value(*layers[0].models[0].solution);
  for (size_t k = 1; k < layers[0].size(); ++k) {
    double v = pair_value(*layers[0].models[k].solution);
    if (v > rep_v + 1e-12 ||
        (v > rep_v - 1e-12 && layers[0].weights[k] > layers[0].weights[rep] + 1e-12)) {
      rep = k;
      rep_v = v;
    }
  }
  sol.predicted_other = *layers[0].models[rep].solution;
  sol.team_value = rep_v;
  return sol;
}

ModelSpace lower_space(const IDID& idid, const IdidSolveOptions& opts,
                       const std::vector<LearnedPolicy>* learned) {
  const Agent oa = other(idid.subject);
  if (idid.level <= 1) {
    ModelSpace ms = idid.model_space;
    if (learned) {
      for (const auto& lp : *learned) {
        if (lp.policy.depth() != idid.horizon)
          throw DomainError("solve_augmented_idid: learned policy depth mismatch");
        Level0Model m;
        m.belief = idid.domain.solo_view(oa).initial_belief;
        m.frame = PolicyFrame{};
        m.solution = lp.policy;
        m.expected_utility = lp.expected_utility;
        ms.models.push_back(std::move(m));
        ms.weights.push_back(0.0);  // replaced by assign_weights below
      }
    }
    return ms;
  }
  // level >= 2: the other agent is a mixture of solved lower-level I-DIDs
  if (idid.lower.empty()) throw DomainError("solve_idid: empty model space");
  ModelSpace ms;
  for (const auto& sub : idid.lower) {
    IdidSolution s = learned ? solve_augmented_idid(sub, *learned, opts) : solve_idid(sub, opts);
    Level0Model m;
    m.belief = idid.domain.solo_view(oa).initial_belief;
    m.frame = PolicyFrame{};
    m.solution = std::move(s.policy);
    ms.models.push_back(std::move(m));
  }
  ms.weights = idid.lower_weights;
  return ms;
}

}  // namespace

PolicyTree solve_against_trees(const DomainModel& domain, Agent subject,
                               const std::vector<PolicyTree>& trees,
                               const std::map<std::pair<int, int>, double>& belief,
                               int horizon) {
  if (horizon < 1) throw DomainError("solve_against_trees: horizon must be >= 1");
  if (trees.empty()) throw DomainError("solve_against_trees: empty tree set");
  const int no = domain.num_obs(other(subject));
  Automaton at;
  std::vector<int> roots;
  auto add = [&](auto&& self, const PolicyTree& n, int depth) -> int {
    int id = static_cast<int>(at.nodes.size());
    at.nodes.emplace_back();
    at.nodes[id].actions = {n.action};
    if (depth + 1 < horizon) {
      for (int o = 0; o < no; ++o) {
        int child = self(self, n.children.at(o), depth + 1);
        at.nodes[id].succ[{n.action, o}] = child;
      }
    }
    return id;
  };
  for (const auto& t : trees) {
    if (t.depth() < horizon)
      throw DomainError("solve_against_trees: tree shallower than the horizon");
    roots.push_back(add(add, t, 0));
  }
  IBelief b0;
  double mass = 0.0;
  for (const auto& [sk, p] : belief) {
    if (p < 0.0) throw DomainError("solve_against_trees: negative belief mass");
    if (p == 0.0) continue;
    auto [s, k] = sk;
    if (s < 0 || s >= domain.num_states || k < 0 || k >= static_cast<int>(trees.size()))
      throw DomainError("solve_against_trees: belief index out of range");
    b0[{s, roots[k]}] += p;
    mass += p;
  }
  if (mass <= 0.0) throw DomainError("solve_against_trees: belief has no mass");
  for (auto& [sk, p] : b0) p /= mass;
  return solve_interactive(domain, subject, at, b0, horizon);
}

IdidSolution solve_idid(const IDID& idid, const IdidSolveOptions& opts) {
  if (idid.horizon < 1) throw DomainError("solve_idid: horizon must be >= 1");
  if (idid.level < 1) throw DomainError("solve_idid: level must be >= 1");
  return solve_from_space(idid, lower_space(idid, opts, nullptr), opts);
}

IdidSolution solve_augmented_idid(const IDID& idid, const std::vector<LearnedPolicy>& learned,
                                  const IdidSolveOptions& opts) {
  if (idid.horizon < 1) throw DomainError("solve_augmented_idid: horizon must be >= 1");
  if (idid.top_k < 1) throw DomainError("solve_augmented_idid: K must be >= 1");
  const Agent oa = other(idid.subject);
  ModelSpace ms = lower_space(idid, opts, &learned);
  if (idid.level > 1) return solve_from_space(idid, std::move(ms), opts);
  if (ms.models.empty()) throw DomainError("solve_augmented_idid: empty model space");

  for (size_t k = 0; k < ms.models.size(); ++k) {
    if (!ms.models[k].solution)
      solve_level0_model(ms.models[k], idid.domain, oa, idid.horizon, opts.learner_cfg,
                         opts.seed + 0x9e3779b97f4a7c15ULL * (k + 1));
    if (std::isnan(ms.models[k].expected_utility))
      ms.models[k].expected_utility =
          best_response_value(idid.domain, idid.subject, *ms.models[k].solution);
  }
  // top-K by expected utility, ties to the earlier model
  std::vector<size_t> order(ms.models.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return ms.models[a].expected_utility > ms.models[b].expected_utility;
  });
  size_t keep = std::min<size_t>(idid.top_k, order.size());
  order.resize(keep);
  std::sort(order.begin(), order.end());

  ModelSpace kept;
  std::vector<double> eus;
  for (size_t k : order) {
    kept.models.push_back(ms.models[k]);
    eus.push_back(ms.models[k].expected_utility);
  }
  kept.weights = assign_weights(eus, idid.weighting);
  return solve_from_space(idid, std::move(kept), opts);
}

std::vector<Level0Model> default_level0_prior(const DomainModel& domain, Agent owner,
                                              int count) {
  if (count < 1) throw DomainError("default_level0_prior: count must be >= 1");
  const Pomdp& view = domain.solo_view(owner);
  std::vector<Level0Model> out;
  auto push = [&](Belief b) {
    Level0Model m;
    m.belief = std::move(b);
    m.frame = PlanningFrame{view};
    out.push_back(std::move(m));
  };
  push(view.initial_belief);
  for (int s = 0; s < view.num_states && static_cast<int>(out.size()) < count; ++s) {
    Belief b(view.num_states, 0.0);
    b[s] = 1.0;
    push(std::move(b));
  }
  if (static_cast<int>(out.size()) < count)
    push(Belief(view.num_states, 1.0 / view.num_states));
  Rng rng(20240229u);
  std::gamma_distribution<double> gamma1(1.0, 1.0);
  while (static_cast<int>(out.size()) < count) {
    Belief b(view.num_states);
    double sum = 0.0;
    for (double& x : b) {
      x = gamma1(rng);
      sum += x;
    }
    for (double& x : b) x /= sum;
    push(std::move(b));
  }
  return out;
}

IDID make_traditional_idid(const DomainModel& domain, Agent subject, int level, int horizon,
                           int prior_count, WeightingScheme weighting, int top_k) {
  if (level < 1) throw DomainError("make_traditional_idid: level must be >= 1");
  IDID idid;
  idid.level = level;
  idid.horizon = horizon;
  idid.domain = domain;
  idid.subject = subject;
  idid.weighting = weighting;
  idid.top_k = top_k;
  if (level == 1) {
    idid.model_space.models = default_level0_prior(domain, other(subject), prior_count);
  } else {
    idid.lower.push_back(make_traditional_idid(domain, other(subject), level - 1, horizon,
                                               prior_count, weighting, top_k));
  }
  return idid;
}

}  // namespace idid
