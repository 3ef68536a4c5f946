#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "idid/domain.hpp"
#include "idid/policy.hpp"

namespace idid {

using Belief = std::vector<double>;

struct ImpossibleObservation : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InstanceTooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Probability of observing `o` after acting `a` from belief `b`.
double observation_probability(const Belief& b, int a, int o, const Pomdp& model);

/// Standard Bayes-filter posterior. Throws ImpossibleObservation when
/// P(o | b, a) == 0; a zero vector is never silently renormalized.
Belief belief_update(const Belief& b, int a, int o, const Pomdp& model);

/// Exact optimal depth-T policy by dynamic programming over the reachable
/// belief tree. Ties break to the lexicographically smallest action index.
/// Zero-probability observation branches get action 0 and are marked
/// unreachable in `child_reachable`.
PolicyTree solve_did(const Pomdp& model, const Belief& b0, int horizon);

/// Root actions within `tol` of optimal (the tie set), sorted ascending.
std::vector<int> optimal_root_actions(const Pomdp& model, const Belief& b0, int horizon,
                                      double tol = 1e-9);

struct ValueReport {
  double value = 0.0;
  std::vector<double> per_step;
};

/// Exact expected team utility of a fixed policy pair by forward enumeration
/// over (state, history) with probability pruning below 1e-12. Throws
/// DomainError on depth mismatch.
ValueReport joint_value(const DomainModel& domain, const PolicyTree& pi_i,
                        const PolicyTree& pi_j);

/// Exact expected value of executing a fixed policy tree from a belief.
double evaluate_policy(const Pomdp& model, const Belief& b0, const PolicyTree& tree);

struct OracleResult {
  PolicyTree policy_i;
  PolicyTree policy_j;
  ValueReport report;
};

/// Exhaustive argmax over joint policy-tree pairs. Throws InstanceTooLarge
/// (with a size estimate) when either agent has more than `guard` trees.
/// Deterministic regardless of `workers`: ties resolve to the smallest
/// enumeration index.
OracleResult brute_force_oracle(const DomainModel& domain, int horizon, int workers = 1,
                                size_t guard = 100000);

/// The joint domain with one agent folded in behind a fixed policy,
/// expressed as an exact single-agent POMDP over (world state, folded
/// agent's policy node) and as a sampling environment.
class ProjectedEnv {
 public:
  ProjectedEnv(const DomainModel& domain, const PolicyTree& other_policy, Agent perspective);

  const Pomdp& as_pomdp() const { return pomdp_; }
  const DomainModel& base() const { return *domain_; }
  Agent perspective() const { return perspective_; }
  int horizon() const { return horizon_; }

  struct StepResult {
    int obs = 0;
    double reward = 0.0;
  };

  /// Sampling interface; the caller supplies the random stream.
  class Episode {
   public:
    Episode(const ProjectedEnv& env, Rng& rng);
    /// Throws DomainError once the folded policy's depth is exhausted.
    StepResult step(int action);
    int steps_taken() const { return t_; }

   private:
    const ProjectedEnv* env_;
    Rng* rng_;
    int state_;
    int t_ = 0;
  };

  Episode start(Rng& rng) const { return Episode(*this, rng); }

 private:
  const DomainModel* domain_;
  Agent perspective_;
  FlatPolicy folded_;
  Pomdp pomdp_;
  int horizon_;
  friend class Episode;
};

ProjectedEnv project(const DomainModel& domain, const PolicyTree& other_policy,
                     Agent perspective);

}  // namespace idid
