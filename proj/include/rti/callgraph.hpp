#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rti/term.hpp"

namespace rti {

// ---------------------------------------------------------------------------
// Predicate call graph and its condensation into bottom-up analysis levels.
// ---------------------------------------------------------------------------

struct CallGraph {
  std::set<PredicateId> nodes;
  std::set<std::pair<PredicateId, PredicateId>> edges; // caller -> callee

  std::vector<PredicateId> calleesOf(const PredicateId& p) const {
    std::vector<PredicateId> out;
    for (const auto& e : edges)
      if (e.first == p) out.push_back(e.second);
    return out;
  }
};

using Scc = std::vector<PredicateId>; // sorted members

struct LevelPlan {
  /// levels[k] holds the SCCs of level k+1; level 1 SCCs call nothing
  /// outside themselves, level k SCCs call only into levels below k.
  std::vector<std::vector<Scc>> levels;

  int levelOf(const PredicateId& p) const {
    for (std::size_t i = 0; i < levels.size(); ++i)
      for (const auto& scc : levels[i])
        for (const auto& q : scc)
          if (q == p) return static_cast<int>(i) + 1;
    return 0;
  }
};

/// One edge per distinct caller/callee pair occurring in a clause body.
inline CallGraph buildCallGraph(const Program& prog) {
  CallGraph g;
  for (const auto& p : prog.predicates()) g.nodes.insert(p);
  for (const auto& c : prog.clauses)
    for (const auto& a : c.body)
      if (g.nodes.count(a.id())) g.edges.insert({c.head.id(), a.id()});
  return g;
}

namespace detail {

/// Iterative Tarjan; returns SCCs with members sorted, components ordered
/// lexicographically by their first member.
inline std::vector<Scc> stronglyConnectedComponents(const CallGraph& g) {
  std::vector<PredicateId> order(g.nodes.begin(), g.nodes.end());
  std::map<PredicateId, int> id;
  for (std::size_t i = 0; i < order.size(); ++i) id[order[i]] = static_cast<int>(i);

  std::vector<std::vector<int>> succ(order.size());
  for (const auto& e : g.edges) succ[id[e.first]].push_back(id[e.second]);
  for (auto& s : succ) std::sort(s.begin(), s.end());

  const int n = static_cast<int>(order.size());
  std::vector<int> index(n, -1), low(n, 0);
  std::vector<bool> onStack(n, false);
  std::vector<int> stack;
  std::vector<Scc> sccs;
  int counter = 0;

  struct Frame {
    int v;
    std::size_t child;
  };

  for (int root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    std::vector<Frame> call{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    onStack[root] = true;
    while (!call.empty()) {
      Frame& f = call.back();
      if (f.child < succ[f.v].size()) {
        int w = succ[f.v][f.child++];
        if (index[w] == -1) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          onStack[w] = true;
          call.push_back({w, 0});
        } else if (onStack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
      } else {
        if (low[f.v] == index[f.v]) {
          Scc scc;
          int w;
          do {
            w = stack.back();
            stack.pop_back();
            onStack[w] = false;
            scc.push_back(order[w]);
          } while (w != f.v);
          std::sort(scc.begin(), scc.end());
          sccs.push_back(std::move(scc));
        }
        int v = f.v;
        call.pop_back();
        if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
      }
    }
  }
  std::sort(sccs.begin(), sccs.end());
  return sccs;
}

} // namespace detail

/// Condenses the graph into SCCs and partitions them into levels: the level
/// of an SCC is 1 + the maximum level of the SCCs it calls into (1 when it
/// calls none). Within a level, SCCs are ordered lexicographically.
inline LevelPlan condenseAndLevel(const CallGraph& g) {
  std::vector<Scc> sccs = detail::stronglyConnectedComponents(g);
  std::map<PredicateId, int> sccOf;
  for (std::size_t i = 0; i < sccs.size(); ++i)
    for (const auto& p : sccs[i]) sccOf[p] = static_cast<int>(i);

  std::vector<std::set<int>> out(sccs.size());
  for (const auto& e : g.edges) {
    int a = sccOf[e.first], b = sccOf[e.second];
    if (a != b) out[a].insert(b);
  }

  std::vector<int> level(sccs.size(), 0);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < sccs.size(); ++i) {
      int lvl = 1;
      for (int j : out[i]) lvl = std::max(lvl, level[j] + 1);
      if (lvl != level[i]) {
        level[i] = lvl;
        changed = true;
      }
    }
  }

  LevelPlan plan;
  int maxLevel = 0;
  for (int l : level) maxLevel = std::max(maxLevel, l);
  plan.levels.resize(maxLevel);
  for (std::size_t i = 0; i < sccs.size(); ++i)
    plan.levels[level[i] - 1].push_back(sccs[i]);
  for (auto& lvl : plan.levels) std::sort(lvl.begin(), lvl.end());
  return plan;
}

inline nlohmann::json callGraphToJson(const CallGraph& g, const LevelPlan& plan) {
  nlohmann::json j;
  j["nodes"] = nlohmann::json::array();
  for (const auto& p : g.nodes) j["nodes"].push_back(predicateName(p));
  j["edges"] = nlohmann::json::array();
  for (const auto& e : g.edges)
    j["edges"].push_back({{"from", predicateName(e.first)}, {"to", predicateName(e.second)}});
  j["sccs"] = nlohmann::json::array();
  j["levels"] = nlohmann::json::array();
  for (const auto& lvl : plan.levels) {
    nlohmann::json jl = nlohmann::json::array();
    for (const auto& scc : lvl) {
      nlohmann::json js = nlohmann::json::array();
      for (const auto& p : scc) js.push_back(predicateName(p));
      j["sccs"].push_back(js);
      jl.push_back(js);
    }
    j["levels"].push_back(jl);
  }
  return j;
}

} // namespace rti
