#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace idid {

using Rng = std::mt19937_64;

/// Which side of a two-agent domain we are talking about.
enum class Agent { I = 0, J = 1 };

inline Agent other(Agent a) { return a == Agent::I ? Agent::J : Agent::I; }

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Single-agent finite POMDP. Used both for level-0 "solo" views of a
/// two-agent domain and for exact projections of the joint model given a
/// fixed policy of the other agent.
struct Pomdp {
  int num_states = 0;
  int num_actions = 0;
  int num_obs = 0;
  std::vector<double> transition;   // [s][a][s']
  std::vector<double> observation;  // [s'][a][o]
  std::vector<double> reward;       // [s][a]
  std::vector<double> initial_belief;
  double discount = 1.0;

  std::vector<std::string> action_labels;
  std::vector<std::string> obs_labels;

  double trans(int s, int a, int s2) const {
    return transition[(static_cast<size_t>(s) * num_actions + a) * num_states + s2];
  }
  double& trans(int s, int a, int s2) {
    return transition[(static_cast<size_t>(s) * num_actions + a) * num_states + s2];
  }
  double obs(int s2, int a, int o) const {
    return observation[(static_cast<size_t>(s2) * num_actions + a) * num_obs + o];
  }
  double& obs(int s2, int a, int o) {
    return observation[(static_cast<size_t>(s2) * num_actions + a) * num_obs + o];
  }
  double rew(int s, int a) const { return reward[static_cast<size_t>(s) * num_actions + a]; }
  double& rew(int s, int a) { return reward[static_cast<size_t>(s) * num_actions + a]; }

  void allocate();
  /// Throws DomainError if any distribution row is invalid (sum != 1 +- 1e-9,
  /// entries outside [0,1]) or a reward is not finite.
  void validate() const;
};

/// Tabular two-agent common-reward domain. Immutable after construction and
/// safe to share across threads.
struct DomainModel {
  std::string name;
  int num_states = 0;
  int num_actions_i = 0;
  int num_actions_j = 0;
  int num_obs_i = 0;
  int num_obs_j = 0;

  std::vector<double> transition;  // [s][ai][aj][s']
  std::vector<double> obs_i;       // [s'][ai][aj][oi]
  std::vector<double> obs_j;       // [s'][ai][aj][oj]
  std::vector<double> reward;      // [s][ai][aj], team reward shared by both agents
  std::vector<double> initial_state_dist;
  double discount = 1.0;

  std::vector<std::string> state_labels;
  std::vector<std::string> action_labels_i, action_labels_j;
  std::vector<std::string> obs_labels_i, obs_labels_j;

  /// Level-0 single-agent views: the domain as seen by one agent when the
  /// other agent's existence is not modeled.
  Pomdp solo_view_i;
  Pomdp solo_view_j;

  double trans(int s, int ai, int aj, int s2) const {
    return transition[((static_cast<size_t>(s) * num_actions_i + ai) * num_actions_j + aj) *
                          num_states + s2];
  }
  double& trans(int s, int ai, int aj, int s2) {
    return transition[((static_cast<size_t>(s) * num_actions_i + ai) * num_actions_j + aj) *
                          num_states + s2];
  }
  double observe(Agent who, int s2, int ai, int aj, int o) const {
    const auto& tab = who == Agent::I ? obs_i : obs_j;
    int n = num_obs(who);
    return tab[((static_cast<size_t>(s2) * num_actions_i + ai) * num_actions_j + aj) * n + o];
  }
  double& observe(Agent who, int s2, int ai, int aj, int o) {
    auto& tab = who == Agent::I ? obs_i : obs_j;
    int n = num_obs(who);
    return tab[((static_cast<size_t>(s2) * num_actions_i + ai) * num_actions_j + aj) * n + o];
  }
  double rew(int s, int ai, int aj) const {
    return reward[(static_cast<size_t>(s) * num_actions_i + ai) * num_actions_j + aj];
  }
  double& rew(int s, int ai, int aj) {
    return reward[(static_cast<size_t>(s) * num_actions_i + ai) * num_actions_j + aj];
  }

  int num_actions(Agent a) const { return a == Agent::I ? num_actions_i : num_actions_j; }
  int num_obs(Agent a) const { return a == Agent::I ? num_obs_i : num_obs_j; }
  const Pomdp& solo_view(Agent a) const { return a == Agent::I ? solo_view_i : solo_view_j; }

  void allocate();
  void validate() const;

  int sample_initial_state(Rng& rng) const;
  int sample_next_state(int s, int ai, int aj, Rng& rng) const;
  int sample_observation(Agent who, int s2, int ai, int aj, Rng& rng) const;
};

/// Parameters for the domain families. Every field has the canonical
/// benchmark default; JSON configs under configs/domains/ override them.
struct GridConfig {
  int size = 3;
  std::vector<double> cell_rewards;  // row-major, row 0 = bottom; empty -> canonical 3x3 layout
  int start_i = -1;                  // cell index; -1 -> canonical start
  int start_j = -1;
  double gamma = 1.0;
};

struct MabcConfig {
  double fill_prob_i = 0.9;
  double fill_prob_j = 0.1;
  double obs_noise = 0.1;
  double gamma = 1.0;
};

struct BoxPushingConfig {
  int corridor_length = 5;
  double small_box_reward = 5.0;
  double large_box_reward = 100.0;
  double step_cost = 0.1;
  double gamma = 1.0;
};

DomainModel build_mabc(const MabcConfig& cfg = {});
DomainModel build_grid(const GridConfig& cfg = {});
DomainModel build_box_pushing(const BoxPushingConfig& cfg = {});

/// Horizon-1 grid instance behind the two-agent coordination regression:
/// individually greedy moves (i west, j south) give team reward 30 while the
/// coordinated moves (i east, j north) meet in one cell for 40.
DomainModel build_one_shot_grid();

/// name is one of "mabc", "grid3" / "grid(N)" / "gridN", "box_pushing",
/// "grid1shot". Throws DomainError on unknown names.
DomainModel build_domain(const std::string& name);

/// Loads a JSON domain config file ({"family": ..., overrides...}).
DomainModel load_domain(const std::string& path);

/// Convenience: resolve a --domain argument that is either a canonical name
/// or a path to a JSON config.
DomainModel resolve_domain(const std::string& name_or_path);

int sample_index(const std::vector<double>& dist, Rng& rng);
int sample_index(const double* row, int n, Rng& rng);

}  // namespace idid
