#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "rti/callgraph.hpp"
#include "rti/frontend.hpp"
#include "rti/report.hpp"
#include "rti/solver.hpp"

namespace rti {

struct AnalysisOptions {
  SolveOptions solve;
  /// Treat unknown body predicates as having all-free signatures instead of
  /// rejecting the program.
  bool allowUnknown = false;
};

struct SccRecord {
  std::vector<PredicateId> preds;
  int level = 0;
  EquationSystem initial;   // generated equations before top-level rewriting
  EquationSystem toplevel;  // the frozen system handed to the solver
  EquationSystem solved;
  SolveStats stats;
  std::map<int, std::set<std::string>> clauseVars; // clause id -> owned vars
};

struct AnalysisResult {
  Program program; // renamed apart, heads normalized
  std::map<PredicateId, Signature> signatures;
  std::map<PredicateId, Solution> solutions;
  CallGraph graph;
  LevelPlan plan;
  std::vector<SccRecord> sccs;
  std::set<int> deadClauses;
  std::vector<std::string> bindings;  // all BIND decisions, in order
  std::size_t memoEntries = 0;
  std::size_t baseVars = 0;
  int maxOuterIterations = 0;

  const Solution& solutionOf(const PredicateId& p) const {
    auto it = solutions.find(p);
    if (it == solutions.end()) throw InternalError("no solution for " + predicateName(p));
    return it->second;
  }
};

/// Runs the full pipeline: frontend passes, call graph leveling, then one
/// generate/solve/project round per SCC, bottom-up.
inline AnalysisResult analyze(const Program& parsed, const AnalysisOptions& opts = {}) {
  AnalysisResult result;
  NameSupply supply;

  std::set<PredicateId> unknown = undefinedPredicates(parsed);
  if (!unknown.empty() && !opts.allowUnknown) requireDefinedPredicates(parsed);

  Program renamed = renameApart(parsed, &supply);
  result.program = normalizeHeads(renamed, supply);
  result.signatures = makeSignatures(result.program, supply);

  // Unknown predicates get an all-free signature so their calls constrain
  // nothing.
  for (const auto& p : unknown) {
    Signature sig;
    sig.predicate = p;
    for (int j = 1; j <= p.second; ++j) sig.vars.push_back(supply.fresh("Any"));
    Solution sol;
    sol.sig = sig;
    result.solutions[p] = std::move(sol);
  }

  result.graph = buildCallGraph(result.program);
  result.plan = condenseAndLevel(result.graph);

  int siteCounter = 0;
  for (std::size_t lvl = 0; lvl < result.plan.levels.size(); ++lvl) {
    for (const auto& scc : result.plan.levels[lvl]) {
      LevelContext ctx = generateEquations(scc, result.program, result.signatures,
                                           result.solutions, supply, siteCounter);
      SccRecord record;
      record.preds = scc;
      record.level = static_cast<int>(lvl) + 1;
      record.initial = ctx.initial;
      record.toplevel = ctx.eqP;

      Solver solver(ctx, opts.solve, record.stats);
      record.solved = solver.solve();

      for (const auto& info : ctx.clauses) record.clauseVars[info.id] = info.vars;
      for (int id : solver.deadClauses()) result.deadClauses.insert(id);

      // project the whole SCC at once so parameters shared between its
      // predicates keep one name, then publish per-predicate restrictions
      std::vector<std::string> sccRoots;
      for (const auto& p : scc)
        for (const auto& v : result.signatures.at(p).vars) sccRoots.push_back(v);
      EquationSystem projected = project(record.solved, sccRoots);

      for (const auto& p : scc) {
        Solution sol;
        sol.sig = result.signatures.at(p);
        sol.allClausesDead = solver.deadPredicates().count(p) != 0;
        EquationSystem restricted = project(projected, sol.sig.vars);
        sol.types = std::move(restricted);
        result.solutions[p] = std::move(sol);
      }

      result.memoEntries += record.stats.memoEntries;
      result.baseVars += record.stats.baseVars;
      result.maxOuterIterations =
          std::max(result.maxOuterIterations, record.stats.outerIterations);
      for (const auto& b : record.stats.bindings) result.bindings.push_back(b);
      result.sccs.push_back(std::move(record));
    }
  }
  return result;
}

/// Builds the report over all program predicates, alphabetical order.
inline TypeReport reportOf(const AnalysisResult& result) {
  std::vector<std::pair<Signature, const EquationSystem*>> inputs;
  for (const auto& [pred, sol] : result.solutions) {
    if (!result.program.predicates().count(pred)) continue; // skip injected "any" preds
    inputs.emplace_back(sol.sig, &sol.types);
  }
  return buildReport(inputs);
}

// ---------------------------------------------------------------------------
// Check mode: analyze the program extended with a goal clause for the query
// and decide whether the call is guaranteed to fail.
// ---------------------------------------------------------------------------

struct CheckResult {
  bool detected = false; // the goal clause can never succeed
  std::vector<std::string> emptyGoalVars;
  int goalClauseId = -1;
  std::string goalPredicate;
  AnalysisResult analysis;
};

inline CheckResult check(const Program& parsed, const Atom& query,
                         const AnalysisOptions& opts = {}) {
  std::set<PredicateId> preds = parsed.predicates();
  if (!preds.count(query.id()) && !opts.allowUnknown)
    throw UnknownPredicateError("query predicate " + predicateName(query.id()) +
                                " is not defined");

  std::set<std::string> names;
  for (const auto& p : preds) names.insert(p.first);
  std::string goalName = "goal";
  for (int i = 1; names.count(goalName); ++i) goalName = "goal_" + std::to_string(i);

  Program extended = parsed;
  Clause goal;
  goal.head = Atom{goalName, {}};
  goal.body.push_back(query);
  extended.clauses.push_back(std::move(goal));
  int goalId = static_cast<int>(extended.clauses.size()) - 1;

  CheckResult res;
  res.goalPredicate = goalName;
  res.goalClauseId = goalId;
  res.analysis = analyze(extended, opts);
  res.detected = res.analysis.deadClauses.count(goalId) != 0;

  // report which goal-clause variables came out empty
  for (const auto& scc : res.analysis.sccs) {
    auto it = scc.clauseVars.find(goalId);
    if (it == scc.clauseVars.end()) continue;
    for (const auto& v : it->second) {
      const ExprPtr* rhs = scc.solved.lookup(v);
      if (rhs && (*rhs)->isEmpty()) res.emptyGoalVars.push_back(v);
    }
  }
  return res;
}

} // namespace rti
