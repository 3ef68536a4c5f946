// Command-line front end: solve / learn / oracle / simulate / compare.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "idid/adhoc.hpp"
#include "idid/idid.hpp"
#include "idid/mcesp.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace idid;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Common {
  std::string domain = "mabc";
  std::string config_path;
  std::string out_dir = "out";
  uint64_t seed = 0;
  int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--domain", c.domain, "Domain name or JSON config path");
  cmd->add_option("--config", c.config_path, "JSON config file providing flag defaults");
  cmd->add_option("--out", c.out_dir, "Output directory");
  cmd->add_option("--seed", c.seed, "Master random seed");
  cmd->add_option("--workers", c.workers, "Worker threads");
}

/// Config file supplies defaults; flags given on the command line win.
void apply_config(CLI::App* cmd, const std::string& path) {
  if (path.empty()) return;
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open config file: " + path);
  json cfg = json::parse(in);
  for (const auto& [key, value] : cfg.items()) {
    CLI::Option* opt = cmd->get_option_no_throw("--" + key);
    if (!opt) continue;
    if (opt->count() > 0) continue;  // explicit flag wins
    if (value.is_boolean()) {
      if (value.get<bool>()) opt->add_result("true");
    } else if (value.is_string()) {
      opt->add_result(value.get<std::string>());
    } else {
      opt->add_result(value.dump());
    }
    opt->run_callback();
  }
}

void write_manifest(const Common& c, const std::string& command, const json& params) {
  fs::create_directories(c.out_dir);
  json m;
  m["command"] = command;
  m["version"] = kVersion;
  m["domain"] = c.domain;
  m["seed"] = c.seed;
  m["workers"] = c.workers;
  m["params"] = params;
  m["written_at"] = static_cast<long>(::time(nullptr));
  std::ofstream out(fs::path(c.out_dir) / (command + "_manifest.json"));
  out << m.dump(2) << "\n";
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write " + path.string());
  out << text;
}

WeightingScheme parse_weighting(const std::string& w) {
  if (w == "uniform") return WeightingScheme::Uniform;
  if (w == "diverse") return WeightingScheme::Diverse;
  throw DomainError("unknown weighting scheme: " + w);
}

std::vector<int> parse_pattern(const std::string& digits, const DomainModel& d) {
  std::vector<int> out;
  for (char ch : digits) {
    if (ch < '0' || ch > '9') throw DomainError("pattern must be a digit string");
    int a = ch - '0';
    if (a >= d.num_actions_j) throw DomainError("pattern action out of range");
    out.push_back(a);
  }
  return out;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

int cmd_solve(const Common& c, int horizon, int level, int top_k, const std::string& weighting,
              bool augmented, const std::string& true_model, int restarts, double alpha,
              double gamma, bool prune, int priors) {
  DomainModel domain = resolve_domain(c.domain);
  IDID idid = make_traditional_idid(domain, Agent::I, level, horizon, priors,
                                    parse_weighting(weighting), top_k);
  IdidSolveOptions opts;
  opts.prune = prune;
  opts.seed = c.seed;

  IdidSolution sol;
  std::string mode;
  if (!true_model.empty()) {
    // probability 1 on the designated true model of j
    PolicyTree pj;
    if (true_model == "oracle") {
      pj = brute_force_oracle(domain, horizon, c.workers).policy_j;
    } else {
      pj = load_policy(true_model, domain.action_labels_j, domain.obs_labels_j);
    }
    IDID tm = idid;
    tm.model_space = ModelSpace{};
    Level0Model m;
    m.belief = domain.solo_view_j.initial_belief;
    m.frame = PolicyFrame{};
    m.solution = pj;
    tm.model_space.models.push_back(std::move(m));
    sol = solve_idid(tm, opts);
    mode = "true-model";
  } else if (augmented) {
    LearnerConfig lc;
    lc.alpha = alpha;
    lc.gamma = gamma;
    lc.seed = c.seed;
    auto cs = generate_collaborative_set(domain, Agent::J, horizon, restarts, lc);
    sol = solve_augmented_idid(idid, cs.candidates, opts);
    mode = "augmented";
  } else {
    sol = solve_idid(idid, opts);
    mode = "traditional";
  }

  write_text(fs::path(c.out_dir) / "policy.json",
             to_json(sol.policy, domain.action_labels_i, domain.obs_labels_i) + "\n");
  json rep;
  rep["mode"] = mode;
  rep["value"] = sol.expected_utility;
  rep["models_per_step"] = sol.models_per_step;
  rep["models_per_step_unpruned"] = sol.models_per_step_unpruned;
  rep["team_value"] = sol.team_value;
  if (sol.predicted_other) {
    rep["predicted_other"] = json::parse(
        to_json(*sol.predicted_other, domain.action_labels_j, domain.obs_labels_j));
  }
  write_text(fs::path(c.out_dir) / "value_report.json", rep.dump(2) + "\n");
  json params{{"horizon", horizon},   {"level", level},       {"K", top_k},
              {"weighting", weighting}, {"augmented", augmented}, {"true_model", true_model},
              {"restarts", restarts}, {"alpha", alpha},       {"gamma", gamma},
              {"prune", prune},       {"priors", priors}};
  write_manifest(c, "solve", params);
  std::cout << "mode=" << mode << " value=" << sol.expected_utility
            << " team_value=" << sol.team_value << "\n";
  return 0;
}

int cmd_learn(const Common& c, int horizon, int restarts, double alpha, double gamma) {
  DomainModel domain = resolve_domain(c.domain);
  LearnerConfig lc;
  lc.alpha = alpha;
  lc.gamma = gamma;
  lc.seed = c.seed;
  auto cs = generate_collaborative_set(domain, Agent::J, horizon, restarts, lc);

  json bundle = json::array();
  for (const auto& cand : cs.candidates) {
    json entry;
    entry["expected_utility"] = cand.expected_utility;
    entry["policy"] = json::parse(
        to_json(cand.policy, domain.action_labels_j, domain.obs_labels_j));
    bundle.push_back(std::move(entry));
  }
  write_text(fs::path(c.out_dir) / "candidates.json", bundle.dump(2) + "\n");

  std::string trace = "iteration,history,proposed_action,accepted,exact_value\n";
  for (const auto& row : cs.trace) {
    std::string h = "*";
    for (int o : row.perturbed) h += std::to_string(o);
    trace += std::to_string(row.iteration) + "," + h + "," +
             std::to_string(row.proposed_action) + "," + (row.accepted ? "1" : "0") + "," +
             std::to_string(row.exact_value) + "\n";
  }
  write_text(fs::path(c.out_dir) / "learning_trace.csv", trace);
  write_manifest(c, "learn",
                 {{"horizon", horizon}, {"restarts", restarts}, {"alpha", alpha},
                  {"gamma", gamma}});
  std::cout << "candidates=" << cs.candidates.size() << "\n";
  return 0;
}

int cmd_oracle(const Common& c, int horizon) {
  DomainModel domain = resolve_domain(c.domain);
  auto res = brute_force_oracle(domain, horizon, c.workers);
  json rep;
  rep["value"] = res.report.value;
  rep["per_step"] = res.report.per_step;
  rep["policy_i"] = json::parse(to_json(res.policy_i, domain.action_labels_i,
                                        domain.obs_labels_i));
  rep["policy_j"] = json::parse(to_json(res.policy_j, domain.action_labels_j,
                                        domain.obs_labels_j));
  write_text(fs::path(c.out_dir) / "oracle.json", rep.dump(2) + "\n");
  write_manifest(c, "oracle", {{"horizon", horizon}});
  std::cout << "value=" << res.report.value << "\n";
  return 0;
}

int cmd_simulate(const Common& c, const std::string& teammate, int trials, int steps,
                 int lookahead, int restarts, const std::string& pattern, int repetition) {
  DomainModel domain = resolve_domain(c.domain);
  auto candidates = build_candidate_set(domain, Agent::I, lookahead, restarts, 32, c.seed,
                                        /*include_oracle=*/true);
  std::string episodes = "trial,step,state,action_i,action_j,obs_i,obs_j,reward,reset\n";
  std::string beliefs = "trial,step,model,mass\n";
  double total = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    uint64_t trial_seed = c.seed * 1000003ULL + trial;
    auto agent = make_idid_agent(domain, Agent::I, candidates, lookahead);
    std::unique_ptr<Teammate> tm;
    if (teammate == "true-model") {
      tm = make_policy_teammate(brute_force_oracle(domain, lookahead, c.workers).policy_j);
    } else {
      TeammateScript sc;
      sc.kind = teammate;
      sc.seed = trial_seed;
      if (!pattern.empty()) sc.pattern = parse_pattern(pattern, domain);
      if (sc.pattern.empty() && (teammate == "predefined" || teammate == "switching"))
        sc.pattern = {0};
      sc.repetition = repetition;
      sc.switch_step = steps / 2;
      tm = make_teammate(sc, domain, steps, lookahead);
    }
    auto log = run_episode(*agent, *tm, domain, steps, trial_seed + 17);
    total += log.cumulative_reward;
    for (size_t t = 0; t < log.steps.size(); ++t) {
      const auto& st = log.steps[t];
      episodes += std::to_string(trial) + "," + std::to_string(t) + "," +
                  std::to_string(st.state) + "," + std::to_string(st.action_i) + "," +
                  std::to_string(st.action_j) + "," + std::to_string(st.obs_i) + "," +
                  std::to_string(st.obs_j) + "," + std::to_string(st.reward) + "," +
                  (st.reset ? "1" : "0") + "\n";
      for (size_t k = 0; k < st.model_belief.size(); ++k)
        beliefs += std::to_string(trial) + "," + std::to_string(t) + "," +
                   log.model_names[k] + "," + std::to_string(st.model_belief[k]) + "\n";
    }
  }
  write_text(fs::path(c.out_dir) / "episodes.csv", episodes);
  write_text(fs::path(c.out_dir) / "belief_trace.csv", beliefs);
  write_manifest(c, "simulate",
                 {{"teammate", teammate}, {"trials", trials}, {"steps", steps},
                  {"lookahead", lookahead}, {"restarts", restarts}, {"pattern", pattern},
                  {"repetition", repetition}});
  std::cout << "mean_reward=" << total / std::max(1, trials) << "\n";
  return 0;
}

int cmd_compare(const Common& c, const std::string& agents, const std::string& teammates,
                int trials, int steps, int lookahead, int restarts, int rollouts,
                const std::string& pattern, int repetition) {
  DomainModel domain = resolve_domain(c.domain);
  CompareConfig cc;
  cc.agents = split_csv(agents);
  cc.teammates = split_csv(teammates);
  cc.trials = trials;
  cc.steps = steps;
  cc.lookahead = lookahead;
  cc.restarts = restarts;
  cc.rollouts = rollouts;
  if (!pattern.empty()) cc.pattern = parse_pattern(pattern, domain);
  cc.repetition = repetition;
  cc.seed = c.seed;
  cc.workers = c.workers;
  auto table = compare(domain, cc);
  std::string csv = "agent,teammate,trials,mean,stddev,p_vs_baseline\n";
  for (const auto& row : table) {
    csv += row.agent + "," + row.teammate + "," + std::to_string(row.trials) + "," +
           std::to_string(row.mean) + "," + std::to_string(row.stddev) + "," +
           (std::isnan(row.p_vs_baseline) ? "" : std::to_string(row.p_vs_baseline)) + "\n";
    std::cout << row.agent << " vs " << row.teammate << ": " << row.mean << " +- "
              << row.stddev << "\n";
  }
  write_text(fs::path(c.out_dir) / "compare_summary.csv", csv);
  write_manifest(c, "compare",
                 {{"agents", agents}, {"teammates", teammates}, {"trials", trials},
                  {"steps", steps}, {"lookahead", lookahead}, {"restarts", restarts},
                  {"rollouts", rollouts}, {"pattern", pattern}, {"repetition", repetition}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interactive-DID planning with learned level-0 models"};
  app.require_subcommand(1);

  Common c;
  int horizon = 3, level = 1, top_k = 32, restarts = 8, trials = 10, steps = 20,
      lookahead = 3, rollouts = 200, repetition = 1;
  double alpha = 0.9, gamma = 1.0;
  bool augmented = false, prune = true;
  std::string weighting = "uniform", true_model, teammate = "random", pattern;
  std::string agents = "aug-idid,opat-po", teammates = "random,predefined,optimal";

  auto* solve = app.add_subcommand("solve", "Solve an I-DID (traditional or augmented)");
  add_common(solve, c);
  solve->add_option("--horizon", horizon);
  solve->add_option("--level", level);
  solve->add_option("--K", top_k);
  solve->add_option("--weighting", weighting)->check(CLI::IsMember({"uniform", "diverse"}));
  solve->add_flag("--augmented", augmented);
  solve->add_option("--true-model", true_model,
                    "'oracle' or a policy file; places probability 1 on it");
  solve->add_option("--restarts", restarts);
  solve->add_option("--alpha", alpha);
  solve->add_option("--gamma", gamma);
  solve->add_flag("--prune,!--no-prune", prune);
  int priors = 1;
  solve->add_option("--priors", priors,
                    "Size of the documented level-0 model prior (1 = solo planner at the "
                    "true initial belief)");

  auto* learn = app.add_subcommand("learn", "Generate collaborative level-0 policies");
  add_common(learn, c);
  learn->add_option("--horizon", horizon);
  learn->add_option("--restarts", restarts);
  learn->add_option("--alpha", alpha);
  learn->add_option("--gamma", gamma);

  auto* oracle = app.add_subcommand("oracle", "Brute-force joint optimum");
  add_common(oracle, c);
  oracle->add_option("--horizon", horizon);

  auto* simulate = app.add_subcommand("simulate", "Run ad hoc episodes, log belief traces");
  add_common(simulate, c);
  simulate->add_option("--teammate", teammate)
      ->check(CLI::IsMember({"random", "predefined", "optimal", "switching", "true-model"}));
  simulate->add_option("--trials", trials);
  simulate->add_option("--steps", steps);
  simulate->add_option("--lookahead", lookahead);
  simulate->add_option("--restarts", restarts);
  simulate->add_option("--pattern", pattern);
  simulate->add_option("--repetition", repetition);

  auto* cmp = app.add_subcommand("compare", "Agents x teammates summary table");
  add_common(cmp, c);
  cmp->add_option("--agents", agents);
  cmp->add_option("--teammates", teammates);
  cmp->add_option("--trials", trials);
  cmp->add_option("--steps", steps);
  cmp->add_option("--lookahead", lookahead);
  cmp->add_option("--restarts", restarts);
  cmp->add_option("--rollouts", rollouts);
  cmp->add_option("--pattern", pattern);
  cmp->add_option("--repetition", repetition);

  try {
    app.parse(argc, argv);
    CLI::App* sub = app.get_subcommands().front();
    apply_config(sub, c.config_path);
    if (sub == solve)
      return cmd_solve(c, horizon, level, top_k, weighting, augmented, true_model, restarts,
                       alpha, gamma, prune, priors);
    if (sub == learn) return cmd_learn(c, horizon, restarts, alpha, gamma);
    if (sub == oracle) return cmd_oracle(c, horizon);
    if (sub == simulate)
      return cmd_simulate(c, teammate, trials, steps, lookahead, restarts, pattern, repetition);
    return cmd_compare(c, agents, teammates, trials, steps, lookahead, restarts, rollouts,
                       pattern, repetition);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const InstanceTooLarge& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
