#pragma once

#include <limits>
#include <map>
#include <optional>
#include <variant>
#include <vector>

#include "idid/domain.hpp"
#include "idid/exact.hpp"
#include "idid/policy.hpp"

namespace idid {

struct LearnerConfig;  // mcesp.hpp

/// The non-belief part of a level-0 model.
struct PlanningFrame {
  Pomdp view;  // the owner's single-agent view of the domain
};

struct LearningFrame {
  double alpha = 0.9;
  PolicyTree seed_policy;   // depth = planning horizon
  PolicyTree other_policy;  // candidate policy of the other agent, folded into the env
};

/// Fixed-behavior frame: the model is nothing but its cached policy tree.
/// Used for learned policies entering the augmented solve, for lower-level
/// I-DID solutions at level >= 2, and for expansion successors of non-planning
/// models.
struct PolicyFrame {};

using Frame = std::variant<PlanningFrame, LearningFrame, PolicyFrame>;

/// A level-0 model of the other agent: belief over its view states plus a
/// frame. `solution` caches the solved/learned policy of the correct depth.
struct Level0Model {
  Belief belief;
  Frame frame;
  std::optional<PolicyTree> solution;
  /// Team utility used for top-K ranking: the subject's exact best-response
  /// value against the model's policy. NaN until computed.
  double expected_utility = std::numeric_limits<double>::quiet_NaN();

  bool is_learning() const { return std::holds_alternative<LearningFrame>(frame); }
};

/// Weighted collection of models at one level and time step.
struct ModelSpace {
  std::vector<Level0Model> models;
  std::vector<double> weights;

  size_t size() const { return models.size(); }
  double weight_sum() const;
};

enum class WeightingScheme { Uniform, Diverse };

/// w_k proportional to (EU_k - min EU + 1e-6) for Diverse, 1/n for Uniform.
std::vector<double> assign_weights(const std::vector<double>& expected_utilities,
                                   WeightingScheme scheme);

struct IDID {
  int level = 1;
  int horizon = 1;
  DomainModel domain;
  Agent subject = Agent::I;
  /// Level-0 model space of the other agent (used when level == 1).
  ModelSpace model_space;
  /// Lower-level I-DIDs of the other agent (used when level > 1).
  std::vector<IDID> lower;
  std::vector<double> lower_weights;  // empty -> uniform
  WeightingScheme weighting = WeightingScheme::Uniform;
  int top_k = 32;
};

/// Solves an unsolved model in place at the given horizon. Planning frames go
/// through the exact DID solve; learning frames run the level-0 RL against
/// the frame's candidate policy of the other agent.
void solve_level0_model(Level0Model& model, const DomainModel& domain, Agent owner,
                        int horizon, const LearnerConfig* learner_cfg = nullptr,
                        uint64_t seed = 0);

/// One step of the model-update link: for each solved model, each tied optimal
/// root action and each observation, emit the belief-updated successor model
/// solved at horizon-1. Successor weight = parent weight * P(a | model) *
/// P(o | belief, a); zero-likelihood branches are dropped, so the weights
/// still sum to 1. `remaining_horizon` is the depth the input models are
/// solved at (>= 2).
ModelSpace expand_model_space(const ModelSpace& ms, const DomainModel& domain, Agent owner,
                              int remaining_horizon);

/// Merges models whose policy trees over the remaining horizon are identical.
/// The representative is the member with the smallest index; merged weight is
/// the sum of member weights.
ModelSpace prune_behavioral_eq(const ModelSpace& ms);

struct IdidSolveOptions {
  bool prune = true;
  const LearnerConfig* learner_cfg = nullptr;
  uint64_t seed = 0;
};

struct IdidSolution {
  PolicyTree policy;
  double expected_utility = 0.0;
  /// Policy of the highest-weight retained model of the other agent (ties
  /// break to the higher expected utility, then the earlier model) and the
  /// exact team value of pairing the subject's policy with it.
  std::optional<PolicyTree> predicted_other;
  double team_value = std::numeric_limits<double>::quiet_NaN();
  /// Retained model counts per time step (after pruning when enabled).
  std::vector<size_t> models_per_step;
  /// Candidate model counts before pruning at each step.
  std::vector<size_t> models_per_step_unpruned;
};

/// Exact solve of a level l >= 1 I-DID: recursively solves the lower-level
/// models, expands the model space over time with behavioral-equivalence
/// pruning, and runs exact dynamic programming over interactive beliefs
/// (world state x other-agent model).
IdidSolution solve_idid(const IDID& idid, const IdidSolveOptions& opts = {});

struct LearnedPolicy {
  PolicyTree policy;
  double expected_utility = 0.0;
};

/// Fig-5-style augmented solve: the level-0 space is the union of the
/// traditional solved models and the learned policies; the top-K by expected
/// utility are retained and weighted per the weighting scheme before the
/// level-l solve proceeds.
IdidSolution solve_augmented_idid(const IDID& idid, const std::vector<LearnedPolicy>& learned,
                                  const IdidSolveOptions& opts = {});

/// Documented default level-0 prior over the owner's solo view: the view's
/// initial belief first, then point masses on every state, the uniform
/// belief, and seeded Dirichlet(1) draws up to `count` models.
std::vector<Level0Model> default_level0_prior(const DomainModel& domain, Agent owner,
                                              int count);

/// Builds a traditional finitely-nested I-DID: level-0 models are solo-view
/// planners; level >= 2 nests I-DIDs of the other agent.
IDID make_traditional_idid(const DomainModel& domain, Agent subject, int level, int horizon,
                           int prior_count = 5,
                           WeightingScheme weighting = WeightingScheme::Uniform,
                           int top_k = 32);

/// Exact subject policy against a weighted set of fixed other-agent behavior
/// trees, starting from a joint belief over (world state, tree index). Keeps
/// the state/model correlation a product-form model space cannot express;
/// this is the receding-horizon replanning entry used by the episode harness.
PolicyTree solve_against_trees(const DomainModel& domain, Agent subject,
                               const std::vector<PolicyTree>& trees,
                               const std::map<std::pair<int, int>, double>& belief,
                               int horizon);

/// Best-response team utility of the subject against a fixed policy of the
/// other agent (the expected-utility ranking used by top-K).
double best_response_value(const DomainModel& domain, Agent subject,
                           const PolicyTree& other_policy);

}  // namespace idid
