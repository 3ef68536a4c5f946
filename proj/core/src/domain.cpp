#include "idid/domain.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace idid {

namespace {

constexpr double kRowTol = 1e-9;

void check_row(const double* row, int n, const std::string& what) {
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    double p = row[k];
    if (!(p >= 0.0 && p <= 1.0 + kRowTol)) {
      throw DomainError(what + ": probability out of range");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kRowTol) {
    std::ostringstream os;
    os << what << ": row sums to " << sum;
    throw DomainError(os.str());
  }
}

}  // namespace

void Pomdp::allocate() {
  transition.assign(static_cast<size_t>(num_states) * num_actions * num_states, 0.0);
  observation.assign(static_cast<size_t>(num_states) * num_actions * num_obs, 0.0);
  reward.assign(static_cast<size_t>(num_states) * num_actions, 0.0);
  initial_belief.assign(num_states, 0.0);
}

void Pomdp::validate() const {
  for (int s = 0; s < num_states; ++s)
    for (int a = 0; a < num_actions; ++a)
      check_row(&transition[(static_cast<size_t>(s) * num_actions + a) * num_states],
                num_states, "pomdp transition");
  for (int s2 = 0; s2 < num_states; ++s2)
    for (int a = 0; a < num_actions; ++a)
      check_row(&observation[(static_cast<size_t>(s2) * num_actions + a) * num_obs],
                num_obs, "pomdp observation");
  for (double r : reward)
    if (!std::isfinite(r)) throw DomainError("pomdp reward not finite");
  check_row(initial_belief.data(), num_states, "pomdp initial belief");
  if (!(discount >= 0.0 && discount <= 1.0)) throw DomainError("pomdp discount out of range");
}

void DomainModel::allocate() {
  size_t sa = static_cast<size_t>(num_states) * num_actions_i * num_actions_j;
  transition.assign(sa * num_states, 0.0);
  obs_i.assign(sa * num_obs_i, 0.0);
  obs_j.assign(sa * num_obs_j, 0.0);
  reward.assign(sa, 0.0);
  initial_state_dist.assign(num_states, 0.0);
}

void DomainModel::validate() const {
  for (int s = 0; s < num_states; ++s)
    for (int ai = 0; ai < num_actions_i; ++ai)
      for (int aj = 0; aj < num_actions_j; ++aj) {
        size_t base = (static_cast<size_t>(s) * num_actions_i + ai) * num_actions_j + aj;
        check_row(&transition[base * num_states], num_states, name + " transition");
        check_row(&obs_i[base * num_obs_i], num_obs_i, name + " obs_i");
        check_row(&obs_j[base * num_obs_j], num_obs_j, name + " obs_j");
        if (!std::isfinite(rew(s, ai, aj))) throw DomainError(name + ": reward not finite");
      }
  check_row(initial_state_dist.data(), num_states, name + " initial state dist");
  if (!(discount >= 0.0 && discount <= 1.0)) throw DomainError(name + ": discount out of range");
  solo_view_i.validate();
  solo_view_j.validate();
}

int sample_index(const double* row, int n, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double x = u(rng);
  double acc = 0.0;
  for (int k = 0; k < n; ++k) {
    acc += row[k];
    if (x < acc) return k;
  }
  // numerical slack: return the last entry with positive mass
  for (int k = n - 1; k >= 0; --k)
    if (row[k] > 0.0) return k;
  return n - 1;
}

int sample_index(const std::vector<double>& dist, Rng& rng) {
  return sample_index(dist.data(), static_cast<int>(dist.size()), rng);
}

int DomainModel::sample_initial_state(Rng& rng) const {
  return sample_index(initial_state_dist, rng);
}

int DomainModel::sample_next_state(int s, int ai, int aj, Rng& rng) const {
  size_t base = ((static_cast<size_t>(s) * num_actions_i + ai) * num_actions_j + aj) *
                static_cast<size_t>(num_states);
  return sample_index(&transition[base], num_states, rng);
}

int DomainModel::sample_observation(Agent who, int s2, int ai, int aj, Rng& rng) const {
  const auto& tab = who == Agent::I ? obs_i : obs_j;
  int n = num_obs(who);
  size_t base = ((static_cast<size_t>(s2) * num_actions_i + ai) * num_actions_j + aj) *
                static_cast<size_t>(n);
  return sample_index(&tab[base], n, rng);
}

// ---------------------------------------------------------------------------
// MABC: two nodes share a broadcast channel. State = (buffer_i, buffer_j),
// each empty(0)/full(1); s = 2*buffer_i + buffer_j. A message is transmitted
// when exactly one agent with a full buffer sends; simultaneous full-buffer
// sends collide and both messages are retained. A buffer that just emptied or
// was empty refills with the per-agent fill probability. Both agents start
// with full buffers. Observations are a noisy collision indicator.
// ---------------------------------------------------------------------------

namespace {

constexpr int kSend = 0;
constexpr int kWait = 1;

Pomdp mabc_solo_view(double fill_prob, double obs_noise, double gamma) {
  Pomdp v;
  v.num_states = 2;  // own buffer: 0 empty, 1 full
  v.num_actions = 2;
  v.num_obs = 2;
  v.discount = gamma;
  v.action_labels = {"send", "wait"};
  v.obs_labels = {"collision", "no_collision"};
  v.allocate();
  for (int b = 0; b < 2; ++b)
    for (int a = 0; a < 2; ++a) {
      bool sent = (b == 1 && a == kSend);  // solo channel is always free
      if (b == 1 && !sent) {
        v.trans(b, a, 1) = 1.0;
      } else {
        v.trans(b, a, 1) = fill_prob;
        v.trans(b, a, 0) = 1.0 - fill_prob;
      }
      v.rew(b, a) = sent ? 1.0 : 0.0;
    }
  // No other sender at level 0, so "collision" is only ever the false-alarm
  // rate of the channel sensor.
  for (int b2 = 0; b2 < 2; ++b2)
    for (int a = 0; a < 2; ++a) {
      v.obs(b2, a, 0) = obs_noise;
      v.obs(b2, a, 1) = 1.0 - obs_noise;
    }
  v.initial_belief = {0.0, 1.0};
  v.validate();
  return v;
}

}  // namespace

DomainModel build_mabc(const MabcConfig& cfg) {
  DomainModel m;
  m.name = "mabc";
  m.num_states = 4;
  m.num_actions_i = m.num_actions_j = 2;
  m.num_obs_i = m.num_obs_j = 2;
  m.discount = cfg.gamma;
  m.state_labels = {"ee", "ef", "fe", "ff"};  // (buffer_i, buffer_j)
  m.action_labels_i = m.action_labels_j = {"send", "wait"};
  m.obs_labels_i = m.obs_labels_j = {"collision", "no_collision"};
  m.allocate();

  const double pf[2] = {cfg.fill_prob_i, cfg.fill_prob_j};
  for (int s = 0; s < 4; ++s) {
    int buf_i = s >> 1, buf_j = s & 1;
    for (int ai = 0; ai < 2; ++ai)
      for (int aj = 0; aj < 2; ++aj) {
        bool on_air_i = (buf_i == 1 && ai == kSend);
        bool on_air_j = (buf_j == 1 && aj == kSend);
        bool collision = on_air_i && on_air_j;
        bool success_i = on_air_i && !collision;
        bool success_j = on_air_j && !collision;
        m.rew(s, ai, aj) = (success_i ? 1.0 : 0.0) + (success_j ? 1.0 : 0.0);

        // P(buffer full next) per agent
        double p_full[2];
        bool retain[2] = {buf_i == 1 && !success_i, buf_j == 1 && !success_j};
        for (int x = 0; x < 2; ++x) p_full[x] = retain[x] ? 1.0 : pf[x];
        for (int b2i = 0; b2i < 2; ++b2i)
          for (int b2j = 0; b2j < 2; ++b2j) {
            double p = (b2i ? p_full[0] : 1.0 - p_full[0]) *
                       (b2j ? p_full[1] : 1.0 - p_full[1]);
            m.trans(s, ai, aj, (b2i << 1) | b2j) = p;
          }
      }
  }

  // A collision leaves both buffers full, so the noisy channel indicator is
  // keyed on (both sent, both buffers full afterwards).
  for (int s2 = 0; s2 < 4; ++s2)
    for (int ai = 0; ai < 2; ++ai)
      for (int aj = 0; aj < 2; ++aj) {
        bool signal = (ai == kSend && aj == kSend && s2 == 3);
        double p_col = signal ? 1.0 - cfg.obs_noise : cfg.obs_noise;
        for (Agent who : {Agent::I, Agent::J}) {
          m.observe(who, s2, ai, aj, 0) = p_col;
          m.observe(who, s2, ai, aj, 1) = 1.0 - p_col;
        }
      }

  m.initial_state_dist = {0.0, 0.0, 0.0, 1.0};  // both buffers full
  m.solo_view_i = mabc_solo_view(cfg.fill_prob_i, cfg.obs_noise, cfg.gamma);
  m.solo_view_j = mabc_solo_view(cfg.fill_prob_j, cfg.obs_noise, cfg.gamma);
  m.validate();
  return m;
}

// ---------------------------------------------------------------------------
// Grid meeting: each agent occupies a cell of an NxN grid (row 0 = bottom)
// and collects the reward printed in the cell it moves into; meeting in one
// cell pays twice the sum of the individual rewards. Moves are deterministic,
// walls block (the agent stays), and each agent senses the wall to its right
// (RW), left (LW) or no wall (NW) -- a deterministic function of its column.
// Joint state = pos_i * N^2 + pos_j.
// ---------------------------------------------------------------------------

namespace {

// Action order follows the domain description: MS, MN, ME, MW, ST.
constexpr int kMoveSouth = 0;
constexpr int kMoveNorth = 1;
constexpr int kMoveEast = 2;
constexpr int kMoveWest = 3;
constexpr int kStay = 4;

int grid_move(int pos, int action, int n) {
  int row = pos / n, col = pos % n;
  switch (action) {
    case kMoveSouth: if (row > 0) --row; break;
    case kMoveNorth: if (row < n - 1) ++row; break;
    case kMoveEast:  if (col < n - 1) ++col; break;
    case kMoveWest:  if (col > 0) --col; break;
    default: break;
  }
  return row * n + col;
}

int grid_wall_obs(int pos, int n) {
  int col = pos % n;
  if (col == n - 1) return 0;  // RW
  if (col == 0) return 1;      // LW
  return 2;                    // NW
}

Pomdp grid_solo_view(const GridConfig& cfg, int start) {
  int n = cfg.size;
  Pomdp v;
  v.num_states = n * n;
  v.num_actions = 5;
  v.num_obs = 3;
  v.discount = cfg.gamma;
  v.action_labels = {"MS", "MN", "ME", "MW", "ST"};
  v.obs_labels = {"RW", "LW", "NW"};
  v.allocate();
  for (int p = 0; p < n * n; ++p)
    for (int a = 0; a < 5; ++a) {
      int dest = grid_move(p, a, n);
      v.trans(p, a, dest) = 1.0;
      v.rew(p, a) = cfg.cell_rewards[dest];
    }
  for (int p2 = 0; p2 < n * n; ++p2)
    for (int a = 0; a < 5; ++a) v.obs(p2, a, grid_wall_obs(p2, n)) = 1.0;
  v.initial_belief[start] = 1.0;
  v.validate();
  return v;
}

// Canonical 3x3 layout (row 0 = bottom). i starts at (2,1), j at (1,2).
// i's greedy move is west to the 15-cell and j's is south to the other
// 15-cell (team 30); moving east/north meets both agents in the 10-cell for
// a team reward of 4*10 = 40.
const std::vector<double> kCanonicalCellRewards = {
    0.0, 1.0, 15.0,   // row 0
    1.0, 3.0, 2.0,    // row 1
    15.0, 2.0, 10.0,  // row 2
};

}  // namespace

DomainModel build_grid(const GridConfig& cfg_in) {
  GridConfig cfg = cfg_in;
  int n = cfg.size;
  if (n < 2) throw DomainError("grid: size must be >= 2");
  if (cfg.cell_rewards.empty()) {
    if (n != 3) throw DomainError("grid: cell_rewards required for size != 3");
    cfg.cell_rewards = kCanonicalCellRewards;
  }
  if (static_cast<int>(cfg.cell_rewards.size()) != n * n)
    throw DomainError("grid: cell_rewards size mismatch");
  if (cfg.start_i < 0) cfg.start_i = 2 * n + 1;      // (row 2, col 1) for n=3
  if (cfg.start_j < 0) cfg.start_j = 1 * n + (n - 1);  // (row 1, col n-1)

  DomainModel m;
  m.name = "grid" + std::to_string(n);
  int cells = n * n;
  m.num_states = cells * cells;
  m.num_actions_i = m.num_actions_j = 5;
  m.num_obs_i = m.num_obs_j = 3;
  m.discount = cfg.gamma;
  m.action_labels_i = m.action_labels_j = {"MS", "MN", "ME", "MW", "ST"};
  m.obs_labels_i = m.obs_labels_j = {"RW", "LW", "NW"};
  m.allocate();

  for (int pi = 0; pi < cells; ++pi)
    for (int pj = 0; pj < cells; ++pj) {
      int s = pi * cells + pj;
      for (int ai = 0; ai < 5; ++ai)
        for (int aj = 0; aj < 5; ++aj) {
          int di = grid_move(pi, ai, n);
          int dj = grid_move(pj, aj, n);
          m.trans(s, ai, aj, di * cells + dj) = 1.0;
          double r;
          if (di == dj) {
            r = 2.0 * (cfg.cell_rewards[di] + cfg.cell_rewards[dj]);
          } else {
            r = cfg.cell_rewards[di] + cfg.cell_rewards[dj];
          }
          m.rew(s, ai, aj) = r;
        }
    }
  for (int s2 = 0; s2 < m.num_states; ++s2) {
    int pi = s2 / cells, pj = s2 % cells;
    for (int ai = 0; ai < 5; ++ai)
      for (int aj = 0; aj < 5; ++aj) {
        m.observe(Agent::I, s2, ai, aj, grid_wall_obs(pi, n)) = 1.0;
        m.observe(Agent::J, s2, ai, aj, grid_wall_obs(pj, n)) = 1.0;
      }
  }
  m.initial_state_dist[cfg.start_i * cells + cfg.start_j] = 1.0;
  m.solo_view_i = grid_solo_view(cfg, cfg.start_i);
  m.solo_view_j = grid_solo_view(cfg, cfg.start_j);
  m.validate();
  return m;
}

DomainModel build_one_shot_grid() {
  DomainModel m = build_grid(GridConfig{});
  m.name = "grid1shot";
  return m;
}

// ---------------------------------------------------------------------------
// Box pushing, reduced to 50 states: a corridor of L=5 cells with a large box
// in the middle cell and a small box at each end. State = (pos_i * L + pos_j)
// * 2 + delivered. Pushing a small box alone pays a small reward (the box is
// restocked); pushing the large box pays a large one-time reward and needs
// both agents in the middle cell pushing simultaneously. Observations:
// large box, other agent, left wall, right wall, nothing (priority order).
// ---------------------------------------------------------------------------

namespace {

constexpr int kPush = 0;
constexpr int kLeft = 1;
constexpr int kRight = 2;
constexpr int kBpStay = 3;

int bp_move(int pos, int action, int len) {
  if (action == kLeft && pos > 0) return pos - 1;
  if (action == kRight && pos < len - 1) return pos + 1;
  return pos;
}

int bp_obs(int own, int other, bool delivered, int len) {
  int mid = len / 2;
  if (own == mid && !delivered) return 0;  // large box ahead
  if (own == other) return 1;              // other agent in the same cell
  if (own == 0) return 2;                  // wall on the left
  if (own == len - 1) return 3;            // wall on the right
  return 4;                                // nothing
}

Pomdp bp_solo_view(const BoxPushingConfig& cfg, int start) {
  int len = cfg.corridor_length, mid = len / 2;
  Pomdp v;
  v.num_states = len;
  v.num_actions = 4;
  v.num_obs = 5;
  v.discount = cfg.gamma;
  v.action_labels = {"push", "left", "right", "stay"};
  v.obs_labels = {"box", "agent", "wall_left", "wall_right", "nothing"};
  v.allocate();
  for (int p = 0; p < len; ++p)
    for (int a = 0; a < 4; ++a) {
      int dest = bp_move(p, a, len);
      v.trans(p, a, dest) = 1.0;
      double r = 0.0;
      if (a == kPush && (p == 0 || p == len - 1)) r += cfg.small_box_reward;
      if (a == kLeft || a == kRight) r -= cfg.step_cost;
      v.rew(p, a) = r;  // the large box at mid cannot be moved alone
      (void)mid;
    }
  for (int p2 = 0; p2 < len; ++p2)
    for (int a = 0; a < 4; ++a) {
      int o = (p2 == mid) ? 0 : (p2 == 0 ? 2 : (p2 == len - 1 ? 3 : 4));
      v.obs(p2, a, o) = 1.0;
    }
  v.initial_belief[start] = 1.0;
  v.validate();
  return v;
}

}  // namespace

DomainModel build_box_pushing(const BoxPushingConfig& cfg) {
  int len = cfg.corridor_length, mid = len / 2;
  DomainModel m;
  m.name = "box_pushing";
  m.num_states = len * len * 2;
  m.num_actions_i = m.num_actions_j = 4;
  m.num_obs_i = m.num_obs_j = 5;
  m.discount = cfg.gamma;
  m.action_labels_i = m.action_labels_j = {"push", "left", "right", "stay"};
  m.obs_labels_i = m.obs_labels_j = {"box", "agent", "wall_left", "wall_right", "nothing"};
  m.allocate();

  auto sid = [&](int pi, int pj, int d) { return (pi * len + pj) * 2 + d; };

  for (int pi = 0; pi < len; ++pi)
    for (int pj = 0; pj < len; ++pj)
      for (int d = 0; d < 2; ++d) {
        int s = sid(pi, pj, d);
        for (int ai = 0; ai < 4; ++ai)
          for (int aj = 0; aj < 4; ++aj) {
            int di = bp_move(pi, ai, len);
            int dj = bp_move(pj, aj, len);
            bool push_large = (d == 0 && pi == mid && pj == mid &&
                               ai == kPush && aj == kPush);
            int d2 = (d == 1 || push_large) ? 1 : 0;
            m.trans(s, ai, aj, sid(di, dj, d2)) = 1.0;
            double r = 0.0;
            if (push_large) r += cfg.large_box_reward;
            if (ai == kPush && (pi == 0 || pi == len - 1)) r += cfg.small_box_reward;
            if (aj == kPush && (pj == 0 || pj == len - 1)) r += cfg.small_box_reward;
            if (ai == kLeft || ai == kRight) r -= cfg.step_cost;
            if (aj == kLeft || aj == kRight) r -= cfg.step_cost;
            m.rew(s, ai, aj) = r;
          }
      }
  for (int pi = 0; pi < len; ++pi)
    for (int pj = 0; pj < len; ++pj)
      for (int d = 0; d < 2; ++d) {
        int s2 = sid(pi, pj, d);
        for (int ai = 0; ai < 4; ++ai)
          for (int aj = 0; aj < 4; ++aj) {
            m.observe(Agent::I, s2, ai, aj, bp_obs(pi, pj, d == 1, len)) = 1.0;
            m.observe(Agent::J, s2, ai, aj, bp_obs(pj, pi, d == 1, len)) = 1.0;
          }
      }
  m.initial_state_dist[sid(0, len - 1, 0)] = 1.0;
  m.solo_view_i = bp_solo_view(cfg, 0);
  m.solo_view_j = bp_solo_view(cfg, len - 1);
  m.validate();
  return m;
}

DomainModel build_domain(const std::string& name) {
  if (name == "mabc") return build_mabc();
  if (name == "box_pushing" || name == "bp") return build_box_pushing();
  if (name == "grid1shot") return build_one_shot_grid();
  if (name.rfind("grid", 0) == 0) {
    std::string rest = name.substr(4);
    if (!rest.empty() && rest.front() == '(') {  // grid(N)
      rest = rest.substr(1, rest.size() - 2);
    }
    if (rest.empty()) rest = "3";
    int n;
    try {
      n = std::stoi(rest);
    } catch (const std::exception&) {
      throw DomainError("unknown domain: " + name);
    }
    GridConfig cfg;
    cfg.size = n;
    return build_grid(cfg);
  }
  throw DomainError("unknown domain: " + name);
}

DomainModel load_domain(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open domain config: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw DomainError("malformed domain config " + path + ": " + e.what());
  }
  std::string family = j.value("family", "");
  if (family == "mabc") {
    MabcConfig cfg;
    cfg.fill_prob_i = j.value("fill_prob_i", cfg.fill_prob_i);
    cfg.fill_prob_j = j.value("fill_prob_j", cfg.fill_prob_j);
    cfg.obs_noise = j.value("obs_noise", cfg.obs_noise);
    cfg.gamma = j.value("gamma", cfg.gamma);
    return build_mabc(cfg);
  }
  if (family == "grid") {
    GridConfig cfg;
    cfg.size = j.value("size", cfg.size);
    if (j.contains("cell_rewards"))
      cfg.cell_rewards = j.at("cell_rewards").get<std::vector<double>>();
    cfg.start_i = j.value("start_i", cfg.start_i);
    cfg.start_j = j.value("start_j", cfg.start_j);
    cfg.gamma = j.value("gamma", cfg.gamma);
    return build_grid(cfg);
  }
  if (family == "grid1shot") return build_one_shot_grid();
  if (family == "box_pushing") {
    BoxPushingConfig cfg;
    cfg.corridor_length = j.value("corridor_length", cfg.corridor_length);
    cfg.small_box_reward = j.value("small_box_reward", cfg.small_box_reward);
    cfg.large_box_reward = j.value("large_box_reward", cfg.large_box_reward);
    cfg.step_cost = j.value("step_cost", cfg.step_cost);
    cfg.gamma = j.value("gamma", cfg.gamma);
    return build_box_pushing(cfg);
  }
  throw DomainError("unknown domain family in " + path + ": '" + family + "'");
}

DomainModel resolve_domain(const std::string& name_or_path) {
  if (name_or_path.find(".json") != std::string::npos ||
      name_or_path.find('/') != std::string::npos) {
    return load_domain(name_or_path);
  }
  return build_domain(name_or_path);
}

}  // namespace idid
