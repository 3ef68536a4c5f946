#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "idid/exact.hpp"
#include "idid/idid.hpp"

namespace idid {

/// Observation history; empty vector is the start marker `*`.
using ObsHistory = std::vector<int>;

struct LearnerConfig {
  double alpha = 0.9;
  double gamma = 1.0;
  int n_saa = 25;                    // fresh samples per compared pair
  int max_iterations = 400;          // perturbation cycles guard
  int patience = 10;                 // consecutive discarded perturbations
  double exploring_start_prob = 0.2; // random first action per rollout
  int max_rollouts_per_eval = 4000;  // cap while chasing a rare history
  uint64_t seed = 0;

  void validate() const;
};

/// One simulated episode: {*, a0, r0, o1, a1, r1, ..., o^T}.
struct Trajectory {
  std::vector<int> actions;       // a^0 .. a^{T-1}
  std::vector<double> rewards;    // r^0 .. r^{T-1}
  std::vector<int> observations;  // o^1 .. o^T

  int horizon() const { return static_cast<int>(actions.size()); }
};

/// Eq-1 exponential update.
double q_update(double q, double alpha, double ret);

/// gamma^t-weighted reward sum from the first occurrence of the history
/// (t' = |hist|, matching the trajectory's observation prefix) to T-1.
/// Exponents use absolute time t. nullopt when the history does not occur.
std::optional<double> post_history_return(const Trajectory& tau, const ObsHistory& hist,
                                          double gamma);

struct QTable {
  struct Entry {
    double q = 0.0;        // Eq-1 exponential estimate
    long count = 0;        // lifetime samples
    long fresh = 0;        // samples since the last accepted policy change
    double fresh_sum = 0.0;
  };
  std::map<std::pair<ObsHistory, int>, Entry> entries;

  Entry& at(const ObsHistory& h, int a) { return entries[{h, a}]; }
  const Entry* find(const ObsHistory& h, int a) const;
  void record(const ObsHistory& h, int a, double ret, double alpha);
  double fresh_mean(const ObsHistory& h, int a) const;
  void reset_fresh();
};

/// Snapshot fed to the SAA termination rule: fresh sample counts for every
/// reachable (history, action) pair under the current policy, plus whether a
/// policy change was accepted since the counts were last reset.
struct SaaProgress {
  std::vector<long> fresh_counts;
  bool change_since_reset = false;
};

/// True iff no policy change is pending and every reachable pair has n_saa
/// fresh samples. Unreachable histories are excluded by construction (they
/// never enter fresh_counts).
bool terminate_saa(const SaaProgress& progress, const LearnerConfig& cfg);

struct LearnTraceRow {
  int iteration = 0;
  ObsHistory perturbed;
  int proposed_action = -1;
  bool accepted = false;
  double exact_value = 0.0;
};

struct LearnResult {
  PolicyTree policy;
  QTable qtable;
  int iterations = 0;
  std::vector<LearnTraceRow> trace;
};

/// Generalized MCESP with sample-average comparisons: rolls out trajectories
/// under the current policy (with exploring starts), updates Q per Eq 1,
/// switches the policy action for a history when the fresh sample averages
/// favor it, perturbs one history per cycle, and stops on the SAA rule /
/// perturbation patience / the iteration guard.
LearnResult learn_level0(const Level0Model& model, const ProjectedEnv& env,
                         const LearnerConfig& cfg);

/// Convenience overload building the environment from the learning frame's
/// candidate policy of the other agent.
LearnResult learn_level0(const Level0Model& model, const DomainModel& domain, Agent owner,
                         const LearnerConfig& cfg);

struct CollaborativeSetResult {
  std::vector<LearnedPolicy> candidates;
  std::vector<LearnTraceRow> trace;
};

/// Fig-6-style loop: per restart, learn against a random policy of the other
/// agent, then keep re-seeding with the learned policy while the exact joint
/// utility improves. Candidates are deduplicated; expected utilities are the
/// subject's exact best-response team values.
CollaborativeSetResult generate_collaborative_set(const DomainModel& domain, Agent owner,
                                                  int horizon, int restarts,
                                                  const LearnerConfig& cfg);

}  // namespace idid
