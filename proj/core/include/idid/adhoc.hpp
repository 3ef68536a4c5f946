#pragma once

#include <memory>
#include <string>
#include <vector>

#include "idid/idid.hpp"
#include "idid/mcesp.hpp"

namespace idid {

/// Declarative teammate description; `kind` is one of random, predefined,
/// optimal, switching. Switching plays the predefined sequence until
/// switch_step, then the optimal policy.
struct TeammateScript {
  std::string kind = "random";
  uint64_t seed = 0;
  std::vector<int> pattern;
  int repetition = 1;
  int switch_step = 0;

  void validate(const DomainModel& domain) const;
};

/// pattern "1324" with repetition 2 -> "11332244".
std::vector<int> expand_pattern(const std::vector<int>& pattern, int repetition);

/// The fixed action sequence of a scripted (random/predefined) teammate,
/// cycled to `steps`. Agent-independent and reproducible from the seed.
std::vector<int> scripted_sequence(const TeammateScript& script, const DomainModel& domain,
                                   int steps);

/// A teammate instantiated for one episode.
class Teammate {
 public:
  virtual ~Teammate() = default;
  virtual int act(int step) = 0;
  /// The teammate's own observation after the joint step (policy followers
  /// advance their tree; scripted kinds ignore it).
  virtual void observe(int obs) {}
};

/// Instantiates a script. `lookahead` is the planning depth of the optimal
/// policy, which restarts from its root when its tree is exhausted. Throws
/// InstanceTooLarge when the optimal kind exceeds the oracle guard.
std::unique_ptr<Teammate> make_teammate(const TeammateScript& script,
                                        const DomainModel& domain, int steps,
                                        int lookahead);
/// Policy-following teammate around an explicit tree (e.g. the true model).
std::unique_ptr<Teammate> make_policy_teammate(const PolicyTree& policy);

/// A named behavior hypothesis the planning agent filters over.
struct CandidateModel {
  std::string name;
  PolicyTree policy;  // depth = lookahead; cycled across planning windows
  double prior_weight = 1.0;
};

/// Candidate set for the ad hoc agent: traditional level-0 planner solutions,
/// learned collaborative policies, optionally the oracle teammate policy;
/// deduplicated and cut to the top_k highest best-response utilities.
std::vector<CandidateModel> build_candidate_set(const DomainModel& domain, Agent subject,
                                                int lookahead, int restarts, int top_k,
                                                uint64_t seed, bool include_oracle,
                                                const LearnerConfig* learner_cfg = nullptr);

/// An online decision maker living through one episode.
class AdhocAgent {
 public:
  virtual ~AdhocAgent() = default;
  virtual void reset() = 0;
  virtual int act(Rng& rng) = 0;
  /// Incorporates the agent's own action and observation.
  virtual void update(int action, int obs) = 0;
  /// Posterior over candidate models; empty when the agent keeps none.
  virtual std::vector<double> model_belief() const { return {}; }
  virtual std::vector<std::string> model_names() const { return {}; }
  /// True when the last update hit an impossible observation and the model
  /// belief was re-initialized to the prior.
  virtual bool last_update_reset() const { return false; }
};

/// Receding-horizon I-DID agent: filters a joint belief over (world state,
/// candidate model, position in its tree) and replans exactly to `lookahead`
/// every step.
std::unique_ptr<AdhocAgent> make_idid_agent(const DomainModel& domain, Agent subject,
                                            std::vector<CandidateModel> candidates,
                                            int lookahead);

/// Monte Carlo rollout value estimate per own action, teammate assumed to play
/// its optimal policy indexed by its simulated observation sequence; argmax
/// with lexicographic tie-break.
int opat_po_step(const Belief& state_belief, const DomainModel& domain, int lookahead,
                 int rollouts, uint64_t seed, Agent subject = Agent::I);

/// OPAT generalized to partial observability: tracks the state belief with the
/// same filter as the I-DID agent (single optimal-teammate hypothesis) and
/// picks actions via opat_po_step's rollout estimate.
std::unique_ptr<AdhocAgent> make_opat_agent(const DomainModel& domain, Agent subject,
                                            int lookahead, int rollouts);

struct StepRecord {
  int state = 0;
  int action_i = 0, action_j = 0;
  int obs_i = 0, obs_j = 0;
  double reward = 0.0;
  std::vector<double> model_belief;
  bool reset = false;
};

struct EpisodeLog {
  std::vector<StepRecord> steps;
  double cumulative_reward = 0.0;
  std::vector<std::string> model_names;
};

/// Runs one episode: the agent replans/acts/filters, the teammate follows its
/// script, all chance is drawn from a stream seeded with `seed`.
EpisodeLog run_episode(AdhocAgent& agent, Teammate& teammate, const DomainModel& domain,
                       int steps, uint64_t seed);

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;  // two-sided
};

/// Welch's unequal-variance two-sample t-test.
WelchResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b);

struct RunSummary {
  std::string agent;
  std::string teammate;
  int trials = 0;
  double mean = 0.0;
  double stddev = 0.0;
  double p_vs_baseline = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> rewards;  // per trial, sorted by trial index
};

struct CompareConfig {
  std::vector<std::string> agents{"aug-idid", "opat-po"};  // also: idid
  std::vector<std::string> teammates{"random", "predefined", "optimal"};
  std::string baseline = "opat-po";
  int trials = 10;
  int steps = 20;
  int lookahead = 3;
  int restarts = 8;    // collaborative-learning restarts behind aug-idid
  int rollouts = 200;  // OPAT-PO rollouts per action
  std::vector<int> pattern;  // predefined/switching teammates; empty -> {0}
  int repetition = 1;
  uint64_t seed = 0;
  int workers = 1;
};

/// Full agents x teammates cross product; per-trial seeds derive from
/// (master seed, agent, teammate, trial), so results are deterministic and
/// independent of the worker count.
std::vector<RunSummary> compare(const DomainModel& domain, const CompareConfig& cfg);

}  // namespace idid
