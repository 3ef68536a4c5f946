#include "idid/policy.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace idid {

int PolicyTree::depth() const {
  if (children.empty()) return 1;
  return 1 + children.front().depth();
}

size_t PolicyTree::node_count() const {
  size_t n = 1;
  for (const auto& c : children) n += c.node_count();
  return n;
}

bool PolicyTree::complete(int num_obs) const {
  if (children.empty()) return true;
  if (static_cast<int>(children.size()) != num_obs) return false;
  int d = children.front().depth();
  for (const auto& c : children) {
    if (c.depth() != d || !c.complete(num_obs)) return false;
  }
  return true;
}

bool PolicyTree::same_behavior(const PolicyTree& other) const {
  if (action != other.action) return false;
  if (children.size() != other.children.size()) return false;
  for (size_t k = 0; k < children.size(); ++k)
    if (!children[k].same_behavior(other.children[k])) return false;
  return true;
}

std::string PolicyTree::behavior_key() const {
  std::string key = std::to_string(action);
  if (!children.empty()) {
    key += '(';
    for (const auto& c : children) {
      key += c.behavior_key();
      key += ',';
    }
    key += ')';
  }
  return key;
}

PolicyTree PolicyTree::constant(int action, int num_obs, int horizon) {
  PolicyTree t;
  t.action = action;
  if (horizon > 1) {
    t.children.assign(num_obs, constant(action, num_obs, horizon - 1));
    t.child_reachable.assign(num_obs, true);
  }
  return t;
}

PolicyTree PolicyTree::random(int num_actions, int num_obs, int horizon, Rng& rng) {
  std::uniform_int_distribution<int> pick(0, num_actions - 1);
  PolicyTree t;
  t.action = pick(rng);
  if (horizon > 1) {
    t.children.reserve(num_obs);
    for (int o = 0; o < num_obs; ++o)
      t.children.push_back(random(num_actions, num_obs, horizon - 1, rng));
    t.child_reachable.assign(num_obs, true);
  }
  return t;
}

namespace {

nlohmann::json tree_to_json(const PolicyTree& t, const std::vector<std::string>& al,
                            const std::vector<std::string>& ol) {
  nlohmann::json j;
  j["action"] = al.empty() ? std::to_string(t.action) : al.at(t.action);
  j["value"] = t.value;
  if (!t.children.empty()) {
    nlohmann::json kids = nlohmann::json::object();
    for (size_t o = 0; o < t.children.size(); ++o) {
      std::string label = ol.empty() ? std::to_string(o) : ol.at(o);
      kids[label] = tree_to_json(t.children[o], al, ol);
      if (!t.child_reachable.empty() && !t.child_reachable[o])
        kids[label]["unreachable"] = true;
    }
    j["children"] = std::move(kids);
  }
  return j;
}

int label_index(const std::string& label, const std::vector<std::string>& labels) {
  if (labels.empty()) return std::stoi(label);
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) throw DomainError("unknown label in policy file: " + label);
  return static_cast<int>(it - labels.begin());
}

PolicyTree tree_from_json(const nlohmann::json& j, const std::vector<std::string>& al,
                          const std::vector<std::string>& ol) {
  PolicyTree t;
  t.action = label_index(j.at("action").get<std::string>(), al);
  t.value = j.value("value", 0.0);
  if (j.contains("children")) {
    const auto& kids = j.at("children");
    t.children.resize(kids.size());
    t.child_reachable.assign(kids.size(), true);
    for (auto it = kids.begin(); it != kids.end(); ++it) {
      int o = label_index(it.key(), ol);
      t.children.at(o) = tree_from_json(it.value(), al, ol);
      if (it.value().value("unreachable", false)) t.child_reachable[o] = false;
    }
  }
  return t;
}

}  // namespace

std::string to_json(const PolicyTree& tree, const std::vector<std::string>& action_labels,
                    const std::vector<std::string>& obs_labels) {
  return tree_to_json(tree, action_labels, obs_labels).dump(2);
}

PolicyTree policy_from_json(const std::string& text,
                            const std::vector<std::string>& action_labels,
                            const std::vector<std::string>& obs_labels) {
  return tree_from_json(nlohmann::json::parse(text), action_labels, obs_labels);
}

void save_policy(const PolicyTree& tree, const std::string& path,
                 const std::vector<std::string>& action_labels,
                 const std::vector<std::string>& obs_labels) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write policy file: " + path);
  out << to_json(tree, action_labels, obs_labels) << "\n";
}

PolicyTree load_policy(const std::string& path,
                       const std::vector<std::string>& action_labels,
                       const std::vector<std::string>& obs_labels) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open policy file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return policy_from_json(ss.str(), action_labels, obs_labels);
}

double policy_tree_count(int num_actions, int num_obs, int horizon) {
  double nodes = 0.0, layer = 1.0;
  for (int t = 0; t < horizon; ++t) {
    nodes += layer;
    layer *= num_obs;
  }
  return std::pow(static_cast<double>(num_actions), nodes);
}

namespace {

void enumerate_rec(int num_actions, int num_obs, int horizon,
                   std::vector<PolicyTree>& out, size_t guard) {
  if (horizon == 1) {
    for (int a = 0; a < num_actions; ++a) {
      PolicyTree t;
      t.action = a;
      out.push_back(std::move(t));
    }
    return;
  }
  std::vector<PolicyTree> subs;
  enumerate_rec(num_actions, num_obs, horizon - 1, subs, guard);
  // cartesian product over (action, child per observation)
  size_t combos = 1;
  for (int o = 0; o < num_obs; ++o) {
    combos *= subs.size();
    if (combos > guard) throw DomainError("policy enumeration exceeds guard");
  }
  if (combos * num_actions > guard) throw DomainError("policy enumeration exceeds guard");
  for (int a = 0; a < num_actions; ++a) {
    std::vector<size_t> idx(num_obs, 0);
    while (true) {
      PolicyTree t;
      t.action = a;
      t.children.reserve(num_obs);
      for (int o = 0; o < num_obs; ++o) t.children.push_back(subs[idx[o]]);
      t.child_reachable.assign(num_obs, true);
      out.push_back(std::move(t));
      int o = num_obs - 1;
      while (o >= 0 && ++idx[o] == subs.size()) idx[o--] = 0;
      if (o < 0) break;
    }
  }
}

}  // namespace

std::vector<PolicyTree> enumerate_policy_trees(int num_actions, int num_obs, int horizon,
                                               size_t guard) {
  double count = policy_tree_count(num_actions, num_obs, horizon);
  if (count > static_cast<double>(guard)) {
    std::ostringstream os;
    os << "instance too large: " << count << " policy trees per agent (guard " << guard << ")";
    throw DomainError(os.str());
  }
  std::vector<PolicyTree> out;
  out.reserve(static_cast<size_t>(count));
  enumerate_rec(num_actions, num_obs, horizon, out, guard);
  return out;
}

FlatPolicy FlatPolicy::from_tree(const PolicyTree& tree, int num_obs) {
  FlatPolicy fp;
  fp.num_obs = num_obs;
  struct Item {
    const PolicyTree* t;
    int parent;
    int depth;
  };
  std::deque<Item> queue{{&tree, -1, 0}};
  std::vector<const PolicyTree*> src;
  while (!queue.empty()) {
    auto [t, parent, d] = queue.front();
    queue.pop_front();
    int id = static_cast<int>(fp.nodes.size());
    fp.nodes.push_back({t ? t->action : 0, parent, d, t == nullptr, {}});
    src.push_back(t);
    if (parent >= 0) fp.nodes[parent].child.push_back(id);
    if (t) {
      if (t->children.empty()) {
        // one terminal child shared across observations
        queue.push_back({nullptr, id, d + 1});
      } else {
        for (const auto& c : t->children) queue.push_back({&c, id, d + 1});
      }
    }
  }
  // expand child lists: leaves enqueued a single terminal child, fan it out;
  // terminal nodes self-loop
  for (size_t n = 0; n < fp.nodes.size(); ++n) {
    auto& node = fp.nodes[n];
    if (node.terminal) {
      node.child.assign(num_obs, static_cast<int>(n));
    } else if (static_cast<int>(node.child.size()) == 1 && src[n]->children.empty()) {
      node.child.assign(num_obs, node.child.front());
    }
  }
  return fp;
}

}  // namespace idid
