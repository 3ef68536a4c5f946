#include "idid/mcesp.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace idid {

void LearnerConfig::validate() const {
  if (alpha <= 0.0 || alpha > 1.0) throw DomainError("learner: alpha must be in (0, 1]");
  if (gamma <= 0.0 || gamma > 1.0) throw DomainError("learner: gamma must be in (0, 1]");
  if (n_saa < 1) throw DomainError("learner: n_saa must be >= 1");
  if (max_iterations < 1) throw DomainError("learner: max_iterations must be >= 1");
  if (patience < 1) throw DomainError("learner: patience must be >= 1");
  if (exploring_start_prob < 0.0 || exploring_start_prob > 1.0)
    throw DomainError("learner: exploring_start_prob must be in [0, 1]");
  if (max_rollouts_per_eval < 1) throw DomainError("learner: max_rollouts_per_eval must be >= 1");
}

double q_update(double q, double alpha, double ret) {
  return (1.0 - alpha) * q + alpha * ret;
}

std::optional<double> post_history_return(const Trajectory& tau, const ObsHistory& hist,
                                          double gamma) {
  int t0 = static_cast<int>(hist.size());
  if (t0 > tau.horizon()) return std::nullopt;
  for (int k = 0; k < t0; ++k) {
    if (tau.observations[k] != hist[k]) return std::nullopt;
  }
  double ret = 0.0;
  double g = std::pow(gamma, t0);
  for (int t = t0; t < tau.horizon(); ++t) {
    ret += g * tau.rewards[t];
    g *= gamma;
  }
  return ret;
}

const QTable::Entry* QTable::find(const ObsHistory& h, int a) const {
  auto it = entries.find({h, a});
  return it == entries.end() ? nullptr : &it->second;
}

void QTable::record(const ObsHistory& h, int a, double ret, double alpha) {
  Entry& e = entries[{h, a}];
  e.q = e.count == 0 ? ret : q_update(e.q, alpha, ret);
  ++e.count;
  ++e.fresh;
  e.fresh_sum += ret;
}

double QTable::fresh_mean(const ObsHistory& h, int a) const {
  const Entry* e = find(h, a);
  if (!e || e->fresh == 0) throw DomainError("fresh_mean: no fresh samples");
  return e->fresh_sum / static_cast<double>(e->fresh);
}

void QTable::reset_fresh() {
  for (auto& [key, e] : entries) {
    e.fresh = 0;
    e.fresh_sum = 0.0;
  }
}

bool terminate_saa(const SaaProgress& progress, const LearnerConfig& cfg) {
  if (progress.change_since_reset) return false;
  for (long c : progress.fresh_counts) {
    if (c < cfg.n_saa) return false;
  }
  return true;
}

namespace {

using PolicyMap = std::map<ObsHistory, int>;

void map_from_tree(const PolicyTree& t, ObsHistory& hist, PolicyMap& out) {
  out[hist] = t.action;
  for (size_t o = 0; o < t.children.size(); ++o) {
    hist.push_back(static_cast<int>(o));
    map_from_tree(t.children[o], hist, out);
    hist.pop_back();
  }
}

PolicyMap map_from_tree(const PolicyTree& seed) {
  PolicyMap out;
  ObsHistory hist;
  map_from_tree(seed, hist, out);
  return out;
}

PolicyTree tree_from_map(const PolicyMap& pol, ObsHistory& hist, int num_obs, int horizon) {
  PolicyTree t;
  auto it = pol.find(hist);
  t.action = it == pol.end() ? 0 : it->second;
  if (horizon > 1) {
    t.children.reserve(num_obs);
    t.child_reachable.assign(num_obs, true);
    for (int o = 0; o < num_obs; ++o) {
      hist.push_back(o);
      t.children.push_back(tree_from_map(pol, hist, num_obs, horizon - 1));
      hist.pop_back();
    }
  }
  return t;
}

PolicyTree tree_from_map(const PolicyMap& pol, int num_obs, int horizon) {
  ObsHistory hist;
  return tree_from_map(pol, hist, num_obs, horizon);
}

void reachable_rec(const Pomdp& m, const PolicyMap& pol, const Belief& b, ObsHistory& hist,
                   int horizon, std::vector<ObsHistory>& out) {
  out.push_back(hist);
  if (static_cast<int>(hist.size()) >= horizon - 1) return;
  int a = pol.at(hist);
  for (int o = 0; o < m.num_obs; ++o) {
    double po = observation_probability(b, a, o, m);
    if (po <= 1e-12) continue;
    Belief b2 = belief_update(b, a, o, m);
    hist.push_back(o);
    reachable_rec(m, pol, b2, hist, horizon, out);
    hist.pop_back();
  }
}

/// Observation histories with positive probability under the current policy.
std::vector<ObsHistory> reachable_histories(const Pomdp& m, const PolicyMap& pol, int horizon) {
  std::vector<ObsHistory> out;
  ObsHistory hist;
  reachable_rec(m, pol, m.initial_belief, hist, horizon, out);
  return out;
}

}  // namespace

LearnResult learn_level0(const Level0Model& model, const ProjectedEnv& env,
                         const LearnerConfig& cfg) {
  cfg.validate();
  const auto* frame = std::get_if<LearningFrame>(&model.frame);
  if (!frame) throw DomainError("learn_level0: model does not carry a learning frame");
  const Pomdp& m = env.as_pomdp();
  const int T = env.horizon();
  if (frame->seed_policy.depth() != T)
    throw DomainError("learn_level0: seed policy depth does not match the horizon");

  PolicyMap pol = map_from_tree(frame->seed_policy);
  QTable q;
  Rng rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> rand_action(0, m.num_actions - 1);

  auto rollout = [&]() {
    auto ep = env.start(rng);
    Trajectory tau;
    ObsHistory hist;
    for (int t = 0; t < T; ++t) {
      int a = pol.at(hist);
      if (t == 0 && unit(rng) < cfg.exploring_start_prob) a = rand_action(rng);
      auto [o, r] = ep.step(a);
      tau.actions.push_back(a);
      tau.rewards.push_back(r);
      tau.observations.push_back(o);
      hist.push_back(o);
    }
    // credit every prefix history with its post-history return
    ObsHistory prefix;
    for (int t = 0; t < T; ++t) {
      double ret = *post_history_return(tau, prefix, cfg.gamma);
      q.record(prefix, tau.actions[t], ret, frame->alpha);
      prefix.push_back(tau.observations[t]);
    }
  };

  // rollouts until (h, a) has `need` fresh samples; false when the budget runs out
  auto collect = [&](const ObsHistory& h, int a, int need) {
    for (int k = 0; k < cfg.max_rollouts_per_eval; ++k) {
      const auto* e = q.find(h, a);
      if (e && e->fresh >= need) return true;
      rollout();
    }
    const auto* e = q.find(h, a);
    return e && e->fresh >= need;
  };

  // warm the Q estimates with one SAA batch of the seed policy before any
  // switch is considered
  for (int k = 0; k < cfg.n_saa; ++k) rollout();

  LearnResult result;
  int discards = 0;
  bool change_since_reset = false;
  for (int it = 0; it < cfg.max_iterations; ++it) {
    auto reachable = reachable_histories(m, pol, T);
    std::uniform_int_distribution<size_t> pick(0, reachable.size() - 1);
    ObsHistory hist = reachable[pick(rng)];
    int a_old = pol.at(hist);
    int a_new = rand_action(rng);
    while (a_new == a_old && m.num_actions > 1) a_new = rand_action(rng);
    if (a_new == a_old) break;  // single-action domain: nothing to perturb

    bool ok = collect(hist, a_old, cfg.n_saa);
    double mean_old = ok ? q.fresh_mean(hist, a_old) : 0.0;
    pol[hist] = a_new;
    ok = ok && collect(hist, a_new, cfg.n_saa);

    LearnTraceRow row;
    row.iteration = it;
    row.perturbed = hist;
    row.proposed_action = a_new;
    if (ok && q.fresh_mean(hist, a_new) > mean_old) {
      row.accepted = true;
      q.reset_fresh();
      change_since_reset = false;
      discards = 0;
    } else {
      pol[hist] = a_old;
      ++discards;
    }
    row.exact_value = evaluate_policy(m, m.initial_belief, tree_from_map(pol, m.num_obs, T));
    result.trace.push_back(std::move(row));

    if (discards >= cfg.patience) {
      SaaProgress progress;
      progress.change_since_reset = change_since_reset;
      for (const auto& h : reachable) {
        const auto* e = q.find(h, pol.at(h));
        progress.fresh_counts.push_back(e ? e->fresh : 0);
      }
      if (terminate_saa(progress, cfg)) break;
      rollout();  // keep fresh counts growing toward the SAA threshold
    }
  }

  result.policy = tree_from_map(pol, m.num_obs, T);
  result.policy.value = evaluate_policy(m, m.initial_belief, result.policy);
  result.qtable = std::move(q);
  result.iterations = static_cast<int>(result.trace.size());
  return result;
}

LearnResult learn_level0(const Level0Model& model, const DomainModel& domain, Agent owner,
                         const LearnerConfig& cfg) {
  const auto* frame = std::get_if<LearningFrame>(&model.frame);
  if (!frame) throw DomainError("learn_level0: model does not carry a learning frame");
  ProjectedEnv env = project(domain, frame->other_policy, owner);
  return learn_level0(model, env, cfg);
}

CollaborativeSetResult generate_collaborative_set(const DomainModel& domain, Agent owner,
                                                  int horizon, int restarts,
                                                  const LearnerConfig& cfg) {
  cfg.validate();
  if (horizon < 1) throw DomainError("generate_collaborative_set: horizon must be >= 1");
  if (restarts < 1) throw DomainError("generate_collaborative_set: restarts must be >= 1");
  const Agent peer = other(owner);
  if (domain.num_actions(owner) != domain.num_actions(peer) ||
      domain.num_obs(owner) != domain.num_obs(peer)) {
    throw DomainError("generate_collaborative_set: requires symmetric action/observation spaces");
  }
  const int na = domain.num_actions(owner);
  const int no = domain.num_obs(owner);

  Rng master(cfg.seed);
  auto learn_vs = [&](const PolicyTree& seed, const PolicyTree& against) {
    Level0Model model;
    model.belief = domain.solo_view(owner).initial_belief;
    LearningFrame frame;
    frame.alpha = cfg.alpha;
    frame.seed_policy = seed;
    frame.other_policy = against;
    model.frame = std::move(frame);
    LearnerConfig run_cfg = cfg;
    run_cfg.seed = master();
    return learn_level0(model, domain, owner, run_cfg);
  };
  auto team_value = [&](const PolicyTree& peer_pol, const PolicyTree& owner_pol) {
    return owner == Agent::J ? joint_value(domain, peer_pol, owner_pol).value
                             : joint_value(domain, owner_pol, peer_pol).value;
  };

  CollaborativeSetResult result;
  std::set<std::string> seen;
  auto add = [&](const PolicyTree& pol) {
    if (!seen.insert(pol.behavior_key()).second) return;
    LearnedPolicy lp;
    lp.policy = pol;
    lp.expected_utility = best_response_value(domain, peer, pol);
    result.candidates.push_back(std::move(lp));
  };

  constexpr int kMaxAlternations = 8;
  for (int r = 0; r < restarts; ++r) {
    Rng init(master());
    PolicyTree peer_pol = PolicyTree::random(na, no, horizon, init);
    PolicyTree seed = PolicyTree::random(na, no, horizon, init);
    auto learned = learn_vs(seed, peer_pol);
    for (auto& row : learned.trace) result.trace.push_back(row);
    add(learned.policy);
    double best = team_value(peer_pol, learned.policy);
    PolicyTree current = learned.policy;
    for (int k = 0; k < kMaxAlternations; ++k) {
      // the partner adopts the learned policy; learn a response to it
      auto next = learn_vs(current, current);
      for (auto& row : next.trace) result.trace.push_back(row);
      double v = team_value(current, next.policy);
      if (v <= best + 1e-9) break;
      add(next.policy);
      best = v;
      current = next.policy;
    }
  }
  return result;
}

}  // namespace idid
