#pragma once

#include <string>
#include <vector>

#include "idid/domain.hpp"

namespace idid {

/// Depth-T deterministic policy: one action per node, one child per
/// observation until the horizon exhausts. `value` carries the expected
/// utility at the belief the tree was planned for; it is ignored when
/// comparing behavior.
struct PolicyTree {
  int action = 0;
  double value = 0.0;
  std::vector<PolicyTree> children;       // empty at leaves, else one per observation
  std::vector<bool> child_reachable;      // parallel to children; false on zero-probability branches

  int depth() const;
  size_t node_count() const;
  /// True when every interior node has exactly num_obs children down to a
  /// uniform depth.
  bool complete(int num_obs) const;
  /// Structural equality of actions/children; values and reachability marks
  /// are not compared.
  bool same_behavior(const PolicyTree& other) const;
  /// Stable key for hashing/dedup of behavior.
  std::string behavior_key() const;

  /// Builds a complete depth-`horizon` tree playing `action` everywhere.
  static PolicyTree constant(int action, int num_obs, int horizon);
  /// Uniform random complete tree.
  static PolicyTree random(int num_actions, int num_obs, int horizon, Rng& rng);
};

std::string to_json(const PolicyTree& tree, const std::vector<std::string>& action_labels,
                    const std::vector<std::string>& obs_labels);
PolicyTree policy_from_json(const std::string& text,
                            const std::vector<std::string>& action_labels,
                            const std::vector<std::string>& obs_labels);

void save_policy(const PolicyTree& tree, const std::string& path,
                 const std::vector<std::string>& action_labels,
                 const std::vector<std::string>& obs_labels);
PolicyTree load_policy(const std::string& path,
                       const std::vector<std::string>& action_labels,
                       const std::vector<std::string>& obs_labels);

/// Number of distinct complete depth-`horizon` policy trees,
/// |A|^(sum_t |O|^t), saturating at `cap`.
double policy_tree_count(int num_actions, int num_obs, int horizon);

/// Enumerates every complete policy tree of the given shape in a fixed
/// lexicographic order. Throws DomainError when the count exceeds `guard`.
std::vector<PolicyTree> enumerate_policy_trees(int num_actions, int num_obs, int horizon,
                                               size_t guard = 100000);

/// Policy tree flattened to an indexed node list (breadth-first), with a
/// terminal layer below the leaves so that executing exactly depth() steps
/// always has a successor node. Terminal nodes self-loop.
struct FlatPolicy {
  struct Node {
    int action = 0;
    int parent = -1;
    int depth = 0;
    bool terminal = false;
    std::vector<int> child;  // per observation; terminal nodes loop to themselves
  };
  std::vector<Node> nodes;  // node 0 is the root
  int num_obs = 0;

  static FlatPolicy from_tree(const PolicyTree& tree, int num_obs);
  int advance(int node, int obs) const { return nodes[node].child[obs]; }
};

}  // namespace idid
