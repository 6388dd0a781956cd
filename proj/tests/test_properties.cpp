#include <catch2/catch_amalgamated.hpp>

#include "rti/analysis.hpp"
#include "support/generators.hpp"
#include "support/helpers.hpp"

using namespace rti;
using namespace rti::testing;

// ---------------------------------------------------------------------------
// SCC partition against pairwise mutual reachability on small random graphs.
// ---------------------------------------------------------------------------
TEST_CASE("scc partition equals mutual reachability on random graphs") {
  Rng rng(1234);
  for (int round = 0; round < 200; ++round) {
    int n = 1 + rng.below(8);
    CallGraph g;
    std::vector<PredicateId> nodes;
    for (int i = 0; i < n; ++i) {
      nodes.push_back({"n" + std::to_string(i), 1});
      g.nodes.insert(nodes.back());
    }
    int edges = rng.below(2 * n + 1);
    for (int e = 0; e < edges; ++e)
      g.edges.insert({rng.pick(nodes), rng.pick(nodes)});

    // brute-force reachability
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    auto idx = [&](const PredicateId& p) {
      return std::stoi(p.first.substr(1));
    };
    for (int i = 0; i < n; ++i) reach[i][i] = true;
    for (const auto& e : g.edges) reach[idx(e.first)][idx(e.second)] = true;
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (reach[i][k] && reach[k][j]) reach[i][j] = true;

    LevelPlan plan = condenseAndLevel(g);
    std::map<PredicateId, int> sccIndex;
    int counter = 0;
    for (const auto& lvl : plan.levels)
      for (const auto& scc : lvl) {
        ++counter;
        for (const auto& p : scc) sccIndex[p] = counter;
      }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        bool together = sccIndex.at(nodes[i]) == sccIndex.at(nodes[j]);
        bool mutual = reach[i][j] && reach[j][i];
        REQUIRE(together == mutual);
      }
    // topological soundness
    for (const auto& e : g.edges)
      if (sccIndex.at(e.first) != sccIndex.at(e.second))
        REQUIRE(plan.levelOf(e.first) > plan.levelOf(e.second));
  }
}

// ---------------------------------------------------------------------------
// Rewrite preservation on random equations (small instance of the
// acceptance-scale suite).
// ---------------------------------------------------------------------------
TEST_CASE("dnf and simp preserve bounded-depth meaning") {
  Rng rng(99);
  std::vector<std::string> vars{"v1", "v2", "v3", "v4", "v5"};
  TermSet universe = herbrandUniverse(exprFunctors(), 3);
  for (int round = 0; round < 150; ++round) {
    ExprPtr e = randomExpr(rng, vars, 3);
    Equation q{"lhs", e};
    Equation d = dnf(q);

    MemoTable memo;
    NameSupply supply;
    for (const auto& v : vars) supply.reserve(v);
    EquationSystem solved;
    auto [s, fresh] = simp(d, memo, supply, solved);
    EquationSystem freshSys;
    for (const auto& nq : fresh) freshSys.add(nq);

    std::set<std::string> freeVars(vars.begin(), vars.end());
    for (int trial = 0; trial < 4; ++trial) {
      Assignment sigma = randomAssignment(rng, freeVars, universe);
      for (int depth = 1; depth <= 3; ++depth) {
        TermSet before = meaning(e, sigma, depth);
        REQUIRE(equalTermSets(meaning(d.rhs, sigma, depth), before));
        REQUIRE(equalTermSets(meaning(s.rhs, sigma, freshSys, depth), before));
      }
    }
    // idempotence
    REQUIRE(equalExprs(dnf(d).rhs, d.rhs));
    auto [s2, fresh2] = simp(dnf(s), memo, supply, solved);
    REQUIRE(fresh2.empty());
    REQUIRE(equalExprs(s2.rhs, s.rhs));
  }
}

TEST_CASE("top-level rewriting preserves meaning") {
  Rng rng(7);
  std::vector<std::string> vars{"v1", "v2", "v3"};
  TermSet universe = herbrandUniverse(exprFunctors(), 3);
  for (int round = 0; round < 100; ++round) {
    EquationSystem sys;
    int defined = 1 + rng.below(3);
    for (int i = 0; i < defined; ++i)
      sys.set("d" + std::to_string(i), randomExpr(rng, vars, 2));
    EquationSystem flat = toTopLevelForm(sys);
    for (const auto& [lhs, rhs] : flat.equations()) REQUIRE(isTopLevelForm(rhs));

    std::set<std::string> freeVars(vars.begin(), vars.end());
    for (int trial = 0; trial < 3; ++trial) {
      Assignment sigma = randomAssignment(rng, freeVars, universe);
      for (int i = 0; i < defined; ++i) {
        std::string d = "d" + std::to_string(i);
        for (int depth = 1; depth <= 3; ++depth)
          REQUIRE(equalTermSets(meaning(SetExpr::var(d), sigma, sys, depth),
                               meaning(SetExpr::var(d), sigma, flat, depth)));
      }
    }
  }
}

TEST_CASE("projection preserves meaning on random solved systems") {
  Rng rng(41);
  TermSet universe = herbrandUniverse(exprFunctors(), 3);
  for (int round = 0; round < 120; ++round) {
    EquationSystem sys = randomSolvedSystem(rng, 2 + rng.below(3), 1 + rng.below(3));
    std::vector<std::string> roots{"d1", "d2"};
    EquationSystem projected = project(sys, roots);

    std::set<std::string> params = sys.freeVars();
    auto projParams = projected.freeVars();
    params.insert(projParams.begin(), projParams.end());
    for (int trial = 0; trial < 3; ++trial) {
      Assignment sigma = randomAssignment(rng, params, universe);
      // renamed parameters keep their sets: roots donating names to frees
      for (const auto& r : roots)
        if (!sigma.count(r)) sigma[r] = randomAssignment(rng, {r}, universe)[r];
      for (const auto& r : roots)
        for (int depth = 1; depth <= 3; ++depth)
          REQUIRE(equalTermSets(meaning(SetExpr::var(r), sigma, sys, depth),
                               meaning(SetExpr::var(r), sigma, projected, depth)));
    }
  }
}

// ---------------------------------------------------------------------------
// Frontend invariants on random programs.
// ---------------------------------------------------------------------------
TEST_CASE("random programs round-trip and normalize cleanly") {
  Rng rng(2024);
  for (int round = 0; round < 100; ++round) {
    Program prog = randomProgram(rng);
    REQUIRE(alphaEqualPrograms(prog, parseProgram(prog.str())));

    NameSupply supply;
    Program renamed = renameApart(prog, &supply);
    std::set<std::string> seen;
    for (const auto& c : renamed.clauses) {
      std::set<std::string> clauseVars;
      for (const auto& a : c.head.args)
        for (const auto& v : a->variables()) clauseVars.insert(v);
      for (const auto& at : c.body)
        for (const auto& a : at.args)
          for (const auto& v : a->variables()) clauseVars.insert(v);
      for (const auto& v : clauseVars) REQUIRE(seen.insert(v).second);
    }

    Program norm = normalizeHeads(renamed, supply);
    for (const auto& c : norm.clauses)
      for (const auto& arg : c.head.args) REQUIRE(!arg->variables().empty());
  }
}

// ---------------------------------------------------------------------------
// Soundness on a small random-program sample (the acceptance suite runs the
// full 500); also exercises solver termination on arbitrary shapes.
// ---------------------------------------------------------------------------
TEST_CASE("inferred types over-approximate the success set") {
  Rng rng(5150);
  for (int round = 0; round < 60; ++round) {
    Program prog = randomProgram(rng);
    std::string violation = soundnessViolation(prog, 4, 2);
    INFO(violation);
    REQUIRE(violation.empty());
  }
}

// ---------------------------------------------------------------------------
// Memo accounting: repeated solving never allocates two variables for one
// canonical key (the memo table would throw), and the solver variable count
// stays bounded.
// ---------------------------------------------------------------------------
TEST_CASE("memo reuse keeps the variable population bounded") {
  std::string src = std::string(kNrevSrc) + "same(L1,L2):- nrev(L1,L), nrev(L,L2).\n";
  AnalysisResult result = analyzeSrc(src);
  CHECK(result.memoEntries <= 4 * result.baseVars);
  for (const auto& scc : result.sccs) {
    std::set<std::string> lhs;
    for (const auto& [l, r] : scc.solved.equations()) REQUIRE(lhs.insert(l).second);
  }
}

TEST_CASE("bind is idempotent at the fixpoint") {
  // second analysis of the solved output binds nothing new: the bindings of
  // a re-run equal the first run's
  std::string src = std::string(kAppendSrc) + "appself(A,B):- append(A,[],B).\n";
  AnalysisResult once = analyzeSrc(src);
  AnalysisResult twice = analyzeSrc(src);
  CHECK(once.bindings == twice.bindings);
}
