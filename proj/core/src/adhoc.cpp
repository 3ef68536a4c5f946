#include "idid/adhoc.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <numeric>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

namespace idid {

namespace {

uint64_t mix_seed(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t mix_seed(uint64_t a, uint64_t b) { return mix_seed(mix_seed(a) ^ b); }

}  // namespace

void TeammateScript::validate(const DomainModel& domain) const {
  if (kind != "random" && kind != "predefined" && kind != "optimal" && kind != "switching")
    throw DomainError("teammate script: unknown kind '" + kind + "'");
  if (kind == "predefined" || kind == "switching") {
    if (pattern.empty()) throw DomainError("teammate script: empty pattern");
    for (int a : pattern)
      if (a < 0 || a >= domain.num_actions_j)
        throw DomainError("teammate script: pattern action out of range");
  }
  if (repetition < 1) throw DomainError("teammate script: repetition must be >= 1");
  if (kind == "switching" && switch_step < 0)
    throw DomainError("teammate script: switch_step must be >= 0");
}

std::vector<int> expand_pattern(const std::vector<int>& pattern, int repetition) {
  std::vector<int> out;
  out.reserve(pattern.size() * repetition);
  for (int a : pattern)
    for (int r = 0; r < repetition; ++r) out.push_back(a);
  return out;
}

std::vector<int> scripted_sequence(const TeammateScript& script, const DomainModel& domain,
                                   int steps) {
  script.validate(domain);
  std::vector<int> seq;
  if (script.kind == "random") {
    Rng rng(script.seed);
    std::uniform_int_distribution<int> pick(0, domain.num_actions_j - 1);
    for (int t = 0; t < steps; ++t) seq.push_back(pick(rng));
    return seq;
  }
  if (script.kind != "predefined")
    throw DomainError("scripted_sequence: only random/predefined kinds have fixed sequences");
  std::vector<int> base = expand_pattern(script.pattern, script.repetition);
  for (int t = 0; t < steps; ++t) seq.push_back(base[t % base.size()]);
  return seq;
}

namespace {

class ScriptedTeammate : public Teammate {
 public:
  explicit ScriptedTeammate(std::vector<int> seq) : seq_(std::move(seq)) {}
  int act(int step) override {
    if (step < 0 || step >= static_cast<int>(seq_.size()))
      throw DomainError("scripted teammate: step out of range");
    return seq_[step];
  }

 private:
  std::vector<int> seq_;
};

class PolicyTeammate : public Teammate {
 public:
  explicit PolicyTeammate(PolicyTree policy) : policy_(std::move(policy)), node_(&policy_) {}
  int act(int) override { return node_->action; }
  void observe(int obs) override {
    node_ = node_->children.empty() ? &policy_ : &node_->children.at(obs);
  }

 private:
  PolicyTree policy_;
  const PolicyTree* node_;
};

class SwitchingTeammate : public Teammate {
 public:
  SwitchingTeammate(std::unique_ptr<Teammate> before, std::unique_ptr<Teammate> after,
                    int switch_step)
      : before_(std::move(before)), after_(std::move(after)), switch_step_(switch_step) {}
  int act(int step) override {
    active_ = step < switch_step_ ? before_.get() : after_.get();
    return active_->act(step);
  }
  void observe(int obs) override {
    if (active_) active_->observe(obs);
  }

 private:
  std::unique_ptr<Teammate> before_, after_;
  int switch_step_;
  Teammate* active_ = nullptr;
};

}  // namespace

std::unique_ptr<Teammate> make_policy_teammate(const PolicyTree& policy) {
  return std::make_unique<PolicyTeammate>(policy);
}

std::unique_ptr<Teammate> make_teammate(const TeammateScript& script,
                                        const DomainModel& domain, int steps,
                                        int lookahead) {
  script.validate(domain);
  if (script.kind == "random" || script.kind == "predefined")
    return std::make_unique<ScriptedTeammate>(scripted_sequence(script, domain, steps));
  PolicyTree optimal = brute_force_oracle(domain, lookahead).policy_j;
  if (script.kind == "optimal") return make_policy_teammate(optimal);
  TeammateScript pre = script;
  pre.kind = "predefined";
  return std::make_unique<SwitchingTeammate>(
      std::make_unique<ScriptedTeammate>(scripted_sequence(pre, domain, steps)),
      make_policy_teammate(optimal), script.switch_step);
}

// ---------------------------------------------------------------------------
// Joint (state, candidate model, tree position) filtering
// ---------------------------------------------------------------------------

namespace {

/// Candidate trees flattened into one automaton; leaves wrap around to their
/// tree's root so a depth-L hypothesis extends to any episode length.
struct Forest {
  struct Node {
    int action = 0;
    int tree = 0;
    std::vector<int> child;  // per teammate observation
  };
  std::vector<Node> nodes;
  std::vector<int> roots;
};

Forest build_forest(const std::vector<CandidateModel>& candidates, int num_obs_them) {
  Forest f;
  for (size_t k = 0; k < candidates.size(); ++k) {
    int root = static_cast<int>(f.nodes.size());
    f.roots.push_back(root);
    auto add = [&](auto&& self, const PolicyTree& n) -> int {
      int id = static_cast<int>(f.nodes.size());
      f.nodes.emplace_back();
      f.nodes[id].action = n.action;
      f.nodes[id].tree = static_cast<int>(k);
      if (n.children.empty()) {
        f.nodes[id].child.assign(num_obs_them, root);
      } else {
        f.nodes[id].child.resize(num_obs_them);
        for (int o = 0; o < num_obs_them; ++o)
          f.nodes[id].child[o] = self(self, n.children.at(o));
      }
      return id;
    };
    add(add, candidates[k].policy);
  }
  return f;
}

class ForestFilter {
 public:
  using JointBelief = std::map<std::pair<int, int>, double>;  // (state, forest node)

  ForestFilter(const DomainModel& domain, Agent subject,
               const std::vector<CandidateModel>& candidates)
      : domain_(&domain), subject_(subject), them_(other(subject)) {
    forest_ = build_forest(candidates, domain.num_obs(them_));
    double total = 0.0;
    for (const auto& c : candidates) {
      if (c.prior_weight < 0.0) throw DomainError("candidate model: negative prior weight");
      total += c.prior_weight;
    }
    if (total <= 0.0) throw DomainError("candidate models: prior has no mass");
    for (const auto& c : candidates) prior_.push_back(c.prior_weight / total);
    reset();
  }

  void reset() {
    b_.clear();
    for (size_t k = 0; k < prior_.size(); ++k) {
      if (prior_[k] == 0.0) continue;
      for (int s = 0; s < domain_->num_states; ++s) {
        double p = domain_->initial_state_dist[s] * prior_[k];
        if (p > 0.0) b_[{s, forest_.roots[k]}] += p;
      }
    }
  }

  /// Returns false when the observation was impossible under the tracked
  /// support and the belief was re-initialized to the prior.
  bool update(int a_own, int o_own) {
    JointBelief post;
    Belief state_only(domain_->num_states, 0.0);
    double mass = 0.0, state_mass = 0.0;
    for (const auto& [sn, p] : b_) {
      auto [s, n] = sn;
      int ai, aj;
      joint(a_own, forest_.nodes[n].action, &ai, &aj);
      for (int s2 = 0; s2 < domain_->num_states; ++s2) {
        double tr = domain_->trans(s, ai, aj, s2);
        if (tr == 0.0) continue;
        double w = p * tr * domain_->observe(subject_, s2, ai, aj, o_own);
        if (w == 0.0) continue;
        state_only[s2] += w;
        state_mass += w;
        for (int ot = 0; ot < domain_->num_obs(them_); ++ot) {
          double pot = domain_->observe(them_, s2, ai, aj, ot);
          if (pot == 0.0) continue;
          post[{s2, forest_.nodes[n].child[ot]}] += w * pot;
          mass += w * pot;
        }
      }
    }
    if (mass <= 0.0) {
      // impossible under the joint support: keep whatever the state evidence
      // says (falling back to the initial distribution) and restore the model
      // prior
      Belief sm = state_mass > 0.0 ? state_only : domain_->initial_state_dist;
      double norm = 0.0;
      for (double x : sm) norm += x;
      b_.clear();
      for (size_t k = 0; k < prior_.size(); ++k) {
        if (prior_[k] == 0.0) continue;
        for (int s = 0; s < domain_->num_states; ++s) {
          double p = sm[s] / norm * prior_[k];
          if (p > 0.0) b_[{s, forest_.roots[k]}] += p;
        }
      }
      return false;
    }
    for (auto& [sn, p] : post) p /= mass;
    b_ = std::move(post);
    return true;
  }

  std::vector<double> model_marginal() const {
    std::vector<double> out(prior_.size(), 0.0);
    for (const auto& [sn, p] : b_) out[forest_.nodes[sn.second].tree] += p;
    return out;
  }

  Belief state_marginal() const {
    Belief out(domain_->num_states, 0.0);
    for (const auto& [sn, p] : b_) out[sn.first] += p;
    return out;
  }

  const JointBelief& belief() const { return b_; }
  const Forest& forest() const { return forest_; }

 private:
  void joint(int a_me, int a_them, int* ai, int* aj) const {
    *ai = subject_ == Agent::I ? a_me : a_them;
    *aj = subject_ == Agent::I ? a_them : a_me;
  }

  const DomainModel* domain_;
  Agent subject_, them_;
  Forest forest_;
  std::vector<double> prior_;
  JointBelief b_;
};

/// Behavior tree of depth `horizon` starting from a forest node (wrapping at
/// tree boundaries).
PolicyTree unroll(const Forest& f, int node, int num_obs_them, int horizon) {
  PolicyTree t;
  t.action = f.nodes[node].action;
  if (horizon > 1) {
    t.children.reserve(num_obs_them);
    t.child_reachable.assign(num_obs_them, true);
    for (int o = 0; o < num_obs_them; ++o)
      t.children.push_back(unroll(f, f.nodes[node].child[o], num_obs_them, horizon - 1));
  }
  return t;
}

class IdidAgent : public AdhocAgent {
 public:
  IdidAgent(const DomainModel& domain, Agent subject, std::vector<CandidateModel> candidates,
            int lookahead)
      : domain_(&domain),
        subject_(subject),
        candidates_(std::move(candidates)),
        lookahead_(lookahead),
        filter_(domain, subject, candidates_) {
    if (lookahead_ < 1) throw DomainError("idid agent: lookahead must be >= 1");
    if (candidates_.empty()) throw DomainError("idid agent: empty candidate set");
  }

  void reset() override {
    filter_.reset();
    reset_flag_ = false;
  }

  int act(Rng&) override {
    // collapse the joint belief onto distinct starting nodes, unroll each to
    // the planning depth, and solve exactly
    const int no_them = domain_->num_obs(other(subject_));
    std::map<int, int> node_index;
    std::vector<PolicyTree> trees;
    std::map<std::pair<int, int>, double> jb;
    for (const auto& [sn, p] : filter_.belief()) {
      auto [s, n] = sn;
      auto [it, inserted] = node_index.try_emplace(n, static_cast<int>(trees.size()));
      if (inserted) trees.push_back(unroll(filter_.forest(), n, no_them, lookahead_));
      jb[{s, it->second}] += p;
    }
    return solve_against_trees(*domain_, subject_, trees, jb, lookahead_).action;
  }

  void update(int action, int obs) override { reset_flag_ = !filter_.update(action, obs); }

  std::vector<double> model_belief() const override { return filter_.model_marginal(); }
  std::vector<std::string> model_names() const override {
    std::vector<std::string> names;
    for (const auto& c : candidates_) names.push_back(c.name);
    return names;
  }
  bool last_update_reset() const override { return reset_flag_; }

 private:
  const DomainModel* domain_;
  Agent subject_;
  std::vector<CandidateModel> candidates_;
  int lookahead_;
  ForestFilter filter_;
  bool reset_flag_ = false;
};

int rollout_argmax(const Belief& state_belief, const DomainModel& domain, Agent subject,
                   const PolicyTree& own_policy, const PolicyTree& their_policy,
                   int lookahead, int rollouts, Rng& rng) {
  const Agent them = other(subject);
  const int na = domain.num_actions(subject);
  int best_a = 0;
  double best_v = -std::numeric_limits<double>::infinity();
  for (int a0 = 0; a0 < na; ++a0) {
    double total = 0.0;
    for (int r = 0; r < rollouts; ++r) {
      int s = sample_index(state_belief, rng);
      const PolicyTree* mine = &own_policy;
      const PolicyTree* theirs = &their_policy;
      double g = 1.0;
      for (int d = 0; d < lookahead; ++d) {
        int a_me = d == 0 ? a0 : mine->action;
        int a_them = theirs->action;
        int ai = subject == Agent::I ? a_me : a_them;
        int aj = subject == Agent::I ? a_them : a_me;
        total += g * domain.rew(s, ai, aj);
        g *= domain.discount;
        if (d + 1 == lookahead) break;
        int s2 = domain.sample_next_state(s, ai, aj, rng);
        int o_me = domain.sample_observation(subject, s2, ai, aj, rng);
        int o_them = domain.sample_observation(them, s2, ai, aj, rng);
        if (!mine->children.empty()) mine = &mine->children[o_me];
        if (!theirs->children.empty()) theirs = &theirs->children[o_them];
        s = s2;
      }
    }
    double v = total / rollouts;
    if (v > best_v) {  // strict: lexicographic tie-break
      best_v = v;
      best_a = a0;
    }
  }
  return best_a;
}

class OpatAgent : public AdhocAgent {
 public:
  OpatAgent(const DomainModel& domain, Agent subject, int lookahead, int rollouts)
      : domain_(&domain), subject_(subject), lookahead_(lookahead), rollouts_(rollouts) {
    if (rollouts_ < 1) throw DomainError("opat agent: rollouts must be >= 1");
    auto oracle = brute_force_oracle(domain, lookahead);
    own_ = subject == Agent::I ? oracle.policy_i : oracle.policy_j;
    theirs_ = subject == Agent::I ? oracle.policy_j : oracle.policy_i;
    CandidateModel hypothesis{"optimal", theirs_, 1.0};
    filter_ = std::make_unique<ForestFilter>(domain, subject,
                                             std::vector<CandidateModel>{hypothesis});
  }

  void reset() override {
    filter_->reset();
    reset_flag_ = false;
  }
  int act(Rng& rng) override {
    return rollout_argmax(filter_->state_marginal(), *domain_, subject_, own_, theirs_,
                          lookahead_, rollouts_, rng);
  }
  void update(int action, int obs) override { reset_flag_ = !filter_->update(action, obs); }
  bool last_update_reset() const override { return reset_flag_; }

 private:
  const DomainModel* domain_;
  Agent subject_;
  int lookahead_, rollouts_;
  PolicyTree own_, theirs_;
  std::unique_ptr<ForestFilter> filter_;
  bool reset_flag_ = false;
};

}  // namespace

std::unique_ptr<AdhocAgent> make_idid_agent(const DomainModel& domain, Agent subject,
                                            std::vector<CandidateModel> candidates,
                                            int lookahead) {
  return std::make_unique<IdidAgent>(domain, subject, std::move(candidates), lookahead);
}

std::unique_ptr<AdhocAgent> make_opat_agent(const DomainModel& domain, Agent subject,
                                            int lookahead, int rollouts) {
  return std::make_unique<OpatAgent>(domain, subject, lookahead, rollouts);
}

int opat_po_step(const Belief& state_belief, const DomainModel& domain, int lookahead,
                 int rollouts, uint64_t seed, Agent subject) {
  if (rollouts < 1) throw DomainError("opat_po_step: rollouts must be >= 1");
  auto oracle = brute_force_oracle(domain, lookahead);
  const PolicyTree& own = subject == Agent::I ? oracle.policy_i : oracle.policy_j;
  const PolicyTree& theirs = subject == Agent::I ? oracle.policy_j : oracle.policy_i;
  Rng rng(seed);
  return rollout_argmax(state_belief, domain, subject, own, theirs, lookahead, rollouts, rng);
}

std::vector<CandidateModel> build_candidate_set(const DomainModel& domain, Agent subject,
                                                int lookahead, int restarts, int top_k,
                                                uint64_t seed, bool include_oracle,
                                                const LearnerConfig* learner_cfg) {
  if (top_k < 1) throw DomainError("build_candidate_set: top_k must be >= 1");
  const Agent them = other(subject);
  std::vector<CandidateModel> pool;
  if (include_oracle) {
    auto oracle = brute_force_oracle(domain, lookahead);
    pool.push_back({"oracle", them == Agent::J ? oracle.policy_j : oracle.policy_i, 1.0});
  }
  auto prior = default_level0_prior(domain, them, 5);
  for (size_t k = 0; k < prior.size(); ++k) {
    solve_level0_model(prior[k], domain, them, lookahead);
    pool.push_back({"prior-" + std::to_string(k), *prior[k].solution, 1.0});
  }
  if (restarts > 0) {
    LearnerConfig cfg = learner_cfg ? *learner_cfg : LearnerConfig{};
    cfg.seed = mix_seed(seed, 0x1ea7);
    auto cs = generate_collaborative_set(domain, them, lookahead, restarts, cfg);
    for (size_t k = 0; k < cs.candidates.size(); ++k)
      pool.push_back({"learned-" + std::to_string(k), cs.candidates[k].policy, 1.0});
  }
  // dedupe by behavior, earlier entries win their name
  std::set<std::string> seen;
  std::vector<CandidateModel> unique;
  for (auto& c : pool) {
    if (seen.insert(c.policy.behavior_key()).second) unique.push_back(std::move(c));
  }
  std::vector<double> eu;
  for (const auto& c : unique) eu.push_back(best_response_value(domain, subject, c.policy));
  std::vector<size_t> order(unique.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return eu[a] > eu[b]; });
  order.resize(std::min<size_t>(top_k, order.size()));
  std::sort(order.begin(), order.end());
  std::vector<CandidateModel> out;
  for (size_t k : order) {
    unique[k].prior_weight = 1.0 / static_cast<double>(order.size());
    out.push_back(std::move(unique[k]));
  }
  return out;
}

EpisodeLog run_episode(AdhocAgent& agent, Teammate& teammate, const DomainModel& domain,
                       int steps, uint64_t seed) {
  if (steps < 0) throw DomainError("run_episode: steps must be >= 0");
  Rng rng(seed);
  agent.reset();
  EpisodeLog log;
  log.model_names = agent.model_names();
  if (steps == 0) return log;
  int s = domain.sample_initial_state(rng);
  for (int t = 0; t < steps; ++t) {
    StepRecord rec;
    rec.state = s;
    rec.action_i = agent.act(rng);
    rec.action_j = teammate.act(t);
    rec.reward = domain.rew(s, rec.action_i, rec.action_j);
    int s2 = domain.sample_next_state(s, rec.action_i, rec.action_j, rng);
    rec.obs_i = domain.sample_observation(Agent::I, s2, rec.action_i, rec.action_j, rng);
    rec.obs_j = domain.sample_observation(Agent::J, s2, rec.action_i, rec.action_j, rng);
    teammate.observe(rec.obs_j);
    agent.update(rec.action_i, rec.obs_i);
    rec.reset = agent.last_update_reset();
    rec.model_belief = agent.model_belief();
    log.cumulative_reward += rec.reward;
    log.steps.push_back(std::move(rec));
    s = s2;
  }
  return log;
}

WelchResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) throw DomainError("welch_t_test: need >= 2 samples each");
  auto stats = [](const std::vector<double>& x) {
    double m = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
    double v = 0.0;
    for (double q : x) v += (q - m) * (q - m);
    v /= (x.size() - 1);
    return std::pair{m, v};
  };
  auto [m1, v1] = stats(a);
  auto [m2, v2] = stats(b);
  double n1 = static_cast<double>(a.size()), n2 = static_cast<double>(b.size());
  double se2 = v1 / n1 + v2 / n2;
  WelchResult out;
  if (se2 <= 0.0) {
    out.t = 0.0;
    out.df = n1 + n2 - 2;
    out.p = m1 == m2 ? 1.0 : 0.0;
    return out;
  }
  out.t = (m1 - m2) / std::sqrt(se2);
  double num = se2 * se2;
  double den = (v1 / n1) * (v1 / n1) / (n1 - 1) + (v2 / n2) * (v2 / n2) / (n2 - 1);
  out.df = den > 0.0 ? num / den : n1 + n2 - 2;
  boost::math::students_t dist(out.df);
  out.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(out.t)));
  return out;
}

std::vector<RunSummary> compare(const DomainModel& domain, const CompareConfig& cfg) {
  if (cfg.trials < 2) throw DomainError("compare: trials must be >= 2");
  std::vector<CandidateModel> aug_candidates, trad_candidates;
  for (const auto& a : cfg.agents) {
    if (a == "aug-idid" && aug_candidates.empty())
      aug_candidates = build_candidate_set(domain, Agent::I, cfg.lookahead, cfg.restarts, 32,
                                           cfg.seed, true);
    else if (a == "idid" && trad_candidates.empty())
      trad_candidates = build_candidate_set(domain, Agent::I, cfg.lookahead, 0, 32,
                                            cfg.seed, false);
    else if (a != "aug-idid" && a != "idid" && a != "opat-po")
      throw DomainError("compare: unknown agent '" + a + "'");
  }
  auto make_agent = [&](const std::string& name) -> std::unique_ptr<AdhocAgent> {
    if (name == "aug-idid")
      return make_idid_agent(domain, Agent::I, aug_candidates, cfg.lookahead);
    if (name == "idid") return make_idid_agent(domain, Agent::I, trad_candidates, cfg.lookahead);
    return make_opat_agent(domain, Agent::I, cfg.lookahead, cfg.rollouts);
  };
  auto make_script = [&](const std::string& kind, uint64_t trial_seed) {
    TeammateScript sc;
    sc.kind = kind;
    sc.seed = trial_seed;
    if (kind == "predefined" || kind == "switching") {
      sc.pattern = cfg.pattern.empty() ? std::vector<int>{0} : cfg.pattern;
      sc.repetition = cfg.repetition;
      sc.switch_step = cfg.steps / 2;
    }
    return sc;
  };

  struct Cell {
    size_t ai, ti;
    int trial;
    uint64_t seed;
    double reward = 0.0;
  };
  std::vector<Cell> cells;
  for (size_t ai = 0; ai < cfg.agents.size(); ++ai)
    for (size_t ti = 0; ti < cfg.teammates.size(); ++ti)
      for (int tr = 0; tr < cfg.trials; ++tr)
        cells.push_back({ai, ti, tr, mix_seed(mix_seed(cfg.seed, ai * 1000003 + ti), tr)});

  auto work = [&](size_t begin, size_t stride) {
    for (size_t c = begin; c < cells.size(); c += stride) {
      auto& cell = cells[c];
      auto agent = make_agent(cfg.agents[cell.ai]);
      auto sc = make_script(cfg.teammates[cell.ti], cell.seed);
      auto teammate = make_teammate(sc, domain, cfg.steps, cfg.lookahead);
      cell.reward =
          run_episode(*agent, *teammate, domain, cfg.steps, mix_seed(cell.seed, 0xe7150dULL))
              .cumulative_reward;
    }
  };
  int workers = std::max(1, cfg.workers);
  if (workers == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
    for (auto& th : pool) th.join();
  }

  std::vector<RunSummary> table;
  auto rewards_of = [&](size_t ai, size_t ti) {
    std::vector<double> r(cfg.trials);
    for (const auto& cell : cells)
      if (cell.ai == ai && cell.ti == ti) r[cell.trial] = cell.reward;
    return r;
  };
  auto baseline_idx = std::find(cfg.agents.begin(), cfg.agents.end(), cfg.baseline);
  for (size_t ai = 0; ai < cfg.agents.size(); ++ai)
    for (size_t ti = 0; ti < cfg.teammates.size(); ++ti) {
      RunSummary row;
      row.agent = cfg.agents[ai];
      row.teammate = cfg.teammates[ti];
      row.trials = cfg.trials;
      row.rewards = rewards_of(ai, ti);
      double m = std::accumulate(row.rewards.begin(), row.rewards.end(), 0.0) / cfg.trials;
      double v = 0.0;
      for (double q : row.rewards) v += (q - m) * (q - m);
      row.mean = m;
      row.stddev = std::sqrt(v / (cfg.trials - 1));
      if (baseline_idx != cfg.agents.end() &&
          static_cast<size_t>(baseline_idx - cfg.agents.begin()) != ai) {
        row.p_vs_baseline =
            welch_t_test(row.rewards,
                         rewards_of(baseline_idx - cfg.agents.begin(), ti)).p;
      }
      table.push_back(std::move(row));
    }
  return table;
}

}  // namespace idid
