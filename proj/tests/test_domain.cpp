#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "idid/domain.hpp"
#include "idid/exact.hpp"

using namespace idid;

namespace {

// Independent re-derivation of the grid kinematics used to cross-check the
// one-shot reward claims without touching the library's tables.
int move_cell(int pos, int action, int n) {
  int row = pos / n, col = pos % n;
  if (action == 0 && row > 0) --row;           // MS
  if (action == 1 && row < n - 1) ++row;       // MN
  if (action == 2 && col < n - 1) ++col;       // ME
  if (action == 3 && col > 0) --col;           // MW
  return row * n + col;
}

}  // namespace

TEST_CASE("mabc dimensions") {
  DomainModel m = build_mabc();
  CHECK(m.num_states == 4);
  CHECK(m.num_actions_i == 2);
  CHECK(m.num_actions_j == 2);
  CHECK(m.num_obs_i == 2);
  CHECK(m.num_obs_j == 2);
  CHECK(m.solo_view_j.num_states == 2);
  CHECK(m.solo_view_i.num_states == 2);
  m.validate();
}

TEST_CASE("grid3 dimensions and labels") {
  DomainModel m = build_grid();
  CHECK(m.solo_view_j.num_states == 9);
  CHECK(m.num_states == 81);
  CHECK(m.num_actions_i == 5);
  CHECK(m.num_obs_i == 3);
  REQUIRE(m.action_labels_i.size() == 5);
  CHECK(m.action_labels_i[0] == "MS");
  CHECK(m.action_labels_i[1] == "MN");
  CHECK(m.action_labels_i[2] == "ME");
  CHECK(m.action_labels_i[3] == "MW");
  CHECK(m.action_labels_i[4] == "ST");
  CHECK(m.obs_labels_i == std::vector<std::string>{"RW", "LW", "NW"});
  m.validate();
}

TEST_CASE("box pushing dimensions") {
  DomainModel m = build_box_pushing();
  CHECK(m.num_states == 50);
  CHECK(m.num_actions_i == 4);
  CHECK(m.num_obs_i == 5);
  m.validate();
}

TEST_CASE("grid meeting doubles the summed cell reward") {
  DomainModel m = build_grid();
  const std::vector<double> cells = {0, 1, 15, 1, 3, 2, 15, 2, 10};
  // from (cell 4, cell 4), both stay: meeting in cell 4
  int s = 4 * 9 + 4;
  CHECK(m.rew(s, 4, 4) == doctest::Approx(2.0 * (cells[4] + cells[4])));
  // from (cell 4, cell 5), both stay: no meeting
  s = 4 * 9 + 5;
  CHECK(m.rew(s, 4, 4) == doctest::Approx(cells[4] + cells[5]));
}

TEST_CASE("one-shot grid reward structure") {
  DomainModel m = build_one_shot_grid();
  const std::vector<double> cells = {0, 1, 15, 1, 3, 2, 15, 2, 10};
  const int start_i = 7, start_j = 5;  // (row 2, col 1) and (row 1, col 2)
  int s0 = start_i * 9 + start_j;
  CHECK(m.initial_state_dist[s0] == doctest::Approx(1.0));

  auto team = [&](int ai, int aj) {
    int di = move_cell(start_i, ai, 3);
    int dj = move_cell(start_j, aj, 3);
    double sum = cells[di] + cells[dj];
    return di == dj ? 2.0 * sum : sum;
  };

  // the two claims, against the independent kinematics
  CHECK(team(3, 0) == doctest::Approx(30.0));  // (MW, MS)
  CHECK(team(2, 1) == doctest::Approx(40.0));  // (ME, MN)
  // and the library's table agrees on all 25 joint actions
  for (int ai = 0; ai < 5; ++ai)
    for (int aj = 0; aj < 5; ++aj) CHECK(m.rew(s0, ai, aj) == doctest::Approx(team(ai, aj)));

  // MS is j's solo greedy move, MW is i's
  for (int a = 0; a < 5; ++a) {
    CHECK(m.solo_view_j.rew(start_j, 0) >= m.solo_view_j.rew(start_j, a));
    CHECK(m.solo_view_i.rew(start_i, 3) >= m.solo_view_i.rew(start_i, a));
  }
  // ME/MN is the unique joint argmax, MW/MS the argmax of the solo sums
  for (int ai = 0; ai < 5; ++ai)
    for (int aj = 0; aj < 5; ++aj) {
      if (ai == 2 && aj == 1) continue;
      CHECK(team(ai, aj) < 40.0);
    }
}

TEST_CASE("validate rejects a broken distribution row") {
  DomainModel m = build_mabc();
  m.trans(0, 0, 0, 0) += 0.5;
  CHECK_THROWS_AS(m.validate(), DomainError);
}

TEST_CASE("build_domain name dispatch") {
  CHECK(build_domain("mabc").num_states == 4);
  CHECK(build_domain("grid3").num_states == 81);
  CHECK(build_domain("grid1shot").name == "grid1shot");
  CHECK(build_domain("box_pushing").num_states == 50);
  CHECK_THROWS_AS(build_domain("no_such_domain"), DomainError);
}

TEST_CASE("load_domain applies JSON overrides") {
  std::string path = "test_domain_cfg.json";
  {
    std::ofstream out(path);
    out << R"({"family": "grid", "size": 2, "cell_rewards": [0, 1, 2, 3],
               "start_i": 0, "start_j": 3})";
  }
  DomainModel m = load_domain(path);
  CHECK(m.num_states == 16);
  CHECK(m.solo_view_i.initial_belief[0] == doctest::Approx(1.0));
  CHECK(resolve_domain(path).num_states == 16);
  std::remove(path.c_str());
}

TEST_CASE("sample_index follows the distribution") {
  std::vector<double> dist = {0.2, 0.5, 0.3};
  Rng rng(42);
  std::vector<int> counts(3, 0);
  const int n = 20000;
  for (int k = 0; k < n; ++k) ++counts[sample_index(dist, rng)];
  for (int s = 0; s < 3; ++s)
    CHECK(counts[s] / static_cast<double>(n) == doctest::Approx(dist[s]).epsilon(0.05));
}
