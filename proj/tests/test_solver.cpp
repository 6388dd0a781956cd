#include <catch2/catch_amalgamated.hpp>

#include "rti/analysis.hpp"
#include "rti/parser.hpp"
#include "support/helpers.hpp"

using namespace rti;
using namespace rti::testing;

namespace {
ExprPtr v(const std::string& n) { return SetExpr::var(n); }
ExprPtr c0(const std::string& f) { return SetExpr::cons(f); }
ExprPtr listCell(ExprPtr h, ExprPtr t) {
  return SetExpr::cons(kConsFunctor, {std::move(h), std::move(t)});
}
} // namespace

// ---------------------------------------------------------------------------
// CASE
// ---------------------------------------------------------------------------

TEST_CASE("case reduces the four recurrence shapes to least solutions") {
  std::string rule;
  Equation r1 = caseReduce({"P", v("P")}, &rule);
  CHECK(r1.rhs->isEmpty());
  CHECK(rule == "1");

  Equation r2 = caseReduce({"X", makeInter2(v("X"), v("E"))}, &rule);
  CHECK(r2.rhs->isEmpty());
  CHECK(rule == "2");

  Equation r3 = caseReduce({"Q", makeUnion2(c0("a"), v("Q"))}, &rule);
  CHECK(exprToString(r3.rhs) == "a");
  CHECK(rule == "3");

  Equation r4 = caseReduce({"R", makeUnion2(c0("b"), makeInter2(v("Q"), v("R")))}, &rule);
  CHECK(exprToString(r4.rhs) == "b");
  CHECK(rule == "4");
}

TEST_CASE("case leaves non-recurrences alone") {
  Equation q{"A", makeUnion2(c0(kNilFunctor), listCell(v("X"), v("A")))};
  std::string rule;
  Equation r = caseReduce(q, &rule);
  CHECK(rule.empty());
  CHECK(equalExprs(r.rhs, q.rhs));
}

TEST_CASE("case generalizes to multi-disjunct recurrences") {
  // every disjunct containing the lhs has it as a factor; the rest survive
  Equation q{"x", makeUnion({makeInter2(v("x"), v("a")), makeInter2(v("x"), v("b")), v("c")})};
  Equation r = caseReduce(q);
  CHECK(exprToString(r.rhs) == "c");
  // no x-free disjunct: least solution is empty
  Equation q2{"x", makeUnion2(makeInter2(v("x"), v("a")), makeInter2(v("x"), v("b")))};
  CHECK(caseReduce(q2).rhs->isEmpty());
}

// ---------------------------------------------------------------------------
// Solution copies
// ---------------------------------------------------------------------------

TEST_CASE("instantiating a solution renames every variable, parameters included") {
  Solution sol;
  sol.sig.predicate = {"nrev", 2};
  sol.sig.vars = {"N1", "N2"};
  sol.types.set("N1", makeUnion2(c0(kNilFunctor), listCell(v("X"), v("N1"))));
  sol.types.set("N2", makeUnion2(c0(kNilFunctor), listCell(v("X"), v("N2"))));

  NameSupply supply;
  Solution copy1 = instantiateSolution(sol, 1, supply);
  CHECK(copy1.sig.vars == std::vector<std::string>{"N1_s1", "N2_s1"});
  CHECK(exprToString(copy1.types.rhs("N1_s1")) == "[] \\/ cons(X_s1,N1_s1)");

  Solution copy2 = instantiateSolution(sol, 2, supply);
  CHECK(copy2.sig.vars == std::vector<std::string>{"N1_s2", "N2_s2"});

  // deterministic: a fresh supply with the same site gives the same output
  NameSupply supply2;
  Solution again = instantiateSolution(sol, 1, supply2);
  CHECK(again.types.str() == copy1.types.str());
}

// ---------------------------------------------------------------------------
// Equation generation goldens
// ---------------------------------------------------------------------------

TEST_CASE("generated system for nrev matches the worked example") {
  NameSupply supply;
  Program norm = normalizeHeads(renameApart(parseProgram(kNrevSrc), &supply), supply);
  auto sigs = makeSignatures(norm, supply);

  // solve the lower level for real, then generate the nrev level
  int site = 0;
  std::map<PredicateId, Solution> sols;
  {
    LevelContext ctx = generateEquations({{"append", 3}}, norm, sigs, sols, supply, site);
    SolveStats stats;
    EquationSystem s = solve(ctx, {}, stats);
    Solution sol;
    sol.sig = sigs.at({"append", 3});
    sol.types = project(s, sol.sig.vars);
    sols[{"append", 3}] = sol;
  }
  LevelContext ctx = generateEquations({{"nrev", 2}}, norm, sigs, sols, supply, site);

  const Clause& fact = norm.clauses[2]; // nrev([],[]).
  REQUIRE(fact.headBindings.size() == 2);
  std::string y1 = fact.headBindings[0].first;
  std::string y2 = fact.headBindings[1].first;

  // C_Head
  CHECK(exprToString(ctx.initial.rhs("N1")) == y1 + " \\/ cons(X_c4,Xs_c4)");
  CHECK(exprToString(ctx.initial.rhs("N2")) == y2 + " \\/ Ys_c4");
  // head-normalization bindings
  CHECK(exprToString(ctx.initial.rhs(y1)) == "[]");
  CHECK(exprToString(ctx.initial.rhs(y2)) == "[]");
  // C_Body: body variables against signature positions (recursive call uses
  // the level's own signature, the append call uses the site copy)
  CHECK(exprToString(ctx.initial.rhs("Xs_c4")) == "N1");
  CHECK(exprToString(ctx.initial.rhs("Zs_c4")) == "A1_s1 /\\ N2");
  CHECK(exprToString(ctx.initial.rhs("Ys_c4")) == "A3_s1");
  // C_Body: the non-variable argument [X] of the append call
  std::string wVar;
  for (const auto& [lhs, rhs] : ctx.initial.equations())
    if (lhs[0] == 'W') wVar = lhs;
  REQUIRE(!wVar.empty());
  CHECK(exprToString(ctx.initial.rhs(wVar)) == "A2_s1 /\\ cons(X_c4,[])");
  // and in the frozen top-level system the list tail is hoisted
  const ExprPtr& w = ctx.eqP.rhs(wVar);
  REQUIRE(w->isInter());
  REQUIRE(w->kids[1]->isCons());
  std::string hoisted = w->kids[1]->kids[1]->sym;
  CHECK(exprToString(ctx.eqP.rhs(hoisted)) == "[]");
  // copies of the append solution are part of the system
  CHECK(ctx.eqP.defines("A1_s1"));
  CHECK(ctx.eqP.defines("A3_s1"));
}

TEST_CASE("generated system for same/2 uses one copy per call site") {
  std::string src = std::string(kNrevSrc) + "same(L1,L2):- nrev(L1,L), nrev(L,L2).\n";
  NameSupply supply;
  Program norm = normalizeHeads(renameApart(parseProgram(src), &supply), supply);
  auto sigs = makeSignatures(norm, supply);

  // hand the generator the published nrev solution from the paper
  std::map<PredicateId, Solution> sols;
  Solution nrev;
  nrev.sig = sigs.at({"nrev", 2});
  const auto& nv = nrev.sig.vars;
  nrev.types.set(nv[0], makeUnion2(c0(kNilFunctor), listCell(v("X"), v(nv[0]))));
  nrev.types.set(nv[1], makeUnion2(c0(kNilFunctor), listCell(v("X"), v(nv[1]))));
  sols[{"nrev", 2}] = nrev;

  int site = 0;
  LevelContext ctx = generateEquations({{"same", 2}}, norm, sigs, sols, supply, site);

  CHECK(exprToString(ctx.initial.rhs("S1")) == "L1_c5");
  CHECK(exprToString(ctx.initial.rhs("S2")) == "L2_c5");
  CHECK(exprToString(ctx.initial.rhs("L1_c5")) == "N1_s1");
  CHECK(exprToString(ctx.initial.rhs("L2_c5")) == "N2_s2");
  CHECK(exprToString(ctx.initial.rhs("L_c5")) == "N1_s2 /\\ N2_s1");
  // two renamed copies with disjoint variables
  CHECK(exprToString(ctx.eqP.rhs("N1_s1")) == "[] \\/ cons(X_s1,N1_s1)");
  CHECK(exprToString(ctx.eqP.rhs("N2_s2")) == "[] \\/ cons(X_s2,N2_s2)");
}

TEST_CASE("fact-only predicates solve to the union of their heads") {
  AnalysisResult result = analyzeSrc("k(a). k(b).");
  CHECK(typesOf(result, {"k", 1}) ==
        "% k/1\n"
        ":- typing k(K).\n"
        ":- type K -> a | b.\n");
}

// ---------------------------------------------------------------------------
// SOLVE goldens
// ---------------------------------------------------------------------------

TEST_CASE("append/3 solves to the open-ended list types") {
  CHECK(typesOf(kAppendSrc, {"append", 3}) ==
        "% append/3\n"
        ":- typing append(A1,A2,A3).\n"
        ":- type A1 -> [] | [X|A1].\n"
        ":- type A3 -> A2 | [X|A3].\n");
}

TEST_CASE("nrev/2 infers list types sharing one element parameter") {
  CHECK(typesOf(kNrevSrc, {"nrev", 2}) ==
        "% nrev/2\n"
        ":- typing nrev(N1,N2).\n"
        ":- type N1 -> [] | [X|N1].\n"
        ":- type N2 -> [] | [X|N2].\n");
}

TEST_CASE("appself binds the free tail parameter to nil") {
  std::string src = std::string(kAppendSrc) + "appself(A,B):- append(A,[],B).\n";
  AnalysisResult result = analyzeSrc(src);
  CHECK(typesOf(result, {"appself", 2}) ==
        "% appself/2\n"
        ":- typing appself(Ap1,Ap2).\n"
        ":- type Ap1 -> [] | [X|Ap1].\n"
        ":- type Ap2 -> [] | [X|Ap2].\n");
  CHECK(containsBinding(result, "A2_s", "[]"));
}

TEST_CASE("recurrence example solves to P empty, Q = a, R = b") {
  std::string src =
      "p(X):- p(X).\n"
      "q(a).\n"
      "q(Y):- q(Y).\n"
      "r(b).\n"
      "r(Z):- q(Z), r(Z).\n";
  AnalysisResult result = analyzeSrc(src);
  CHECK(typesOf(result, {"p", 1}) ==
        "% p/1\n"
        ":- typing p(P).\n"
        ":- type P -> 0.\n");
  CHECK(typesOf(result, {"q", 1}) ==
        "% q/1\n"
        ":- typing q(Q).\n"
        ":- type Q -> a.\n");
  CHECK(typesOf(result, {"r", 1}) ==
        "% r/1\n"
        ":- typing r(R).\n"
        ":- type R -> b.\n");
}

TEST_CASE("failure propagates to heads only when the loop is enabled") {
  std::string src = "p(X):- q(b,X). q(a,a).\n";
  AnalysisResult on = analyzeSrc(src);
  CHECK(typesOf(on, {"p", 1}) ==
        "% p/1\n"
        ":- typing p(P).\n"
        ":- type P -> 0.\n");
  CHECK(on.deadClauses.count(0));

  AnalysisOptions off;
  off.solve.propagateFailure = false;
  AnalysisResult withoutLoop = analyzeSrc(src, off);
  const Solution& sol = withoutLoop.solutionOf({"p", 1});
  CHECK(!isEmptyVar(sol.sig.vars[0], sol.types));
}

TEST_CASE("alternate/2 solves to shared free parameters") {
  std::string src =
      "alternate(A1,B1).\n"
      "alternate(A2,B2):- alternate(B2,A2).\n";
  AnalysisResult result = analyzeSrc(src);
  // both argument positions are the union of the two (free) fact variables
  CHECK(typesOf(result, {"alternate", 2}) ==
        "% alternate/2\n"
        ":- typing alternate(A1,A2).\n"
        ":- type A1 -> X | Y.\n"
        ":- type A2 -> X | Y.\n");
}

TEST_CASE("bind synthesizes the union cover for alternate(a,b)") {
  std::string src =
      "alternate(A1,B1).\n"
      "alternate(A2,B2):- alternate(B2,A2).\n";
  CheckResult res = check(parseProgram(src), parseAtomText("alternate(a,b)"));
  CHECK(!res.detected);
  CHECK(containsBinding(res.analysis, "A1_c1_s", "a \\/ b"));
  CHECK(containsBinding(res.analysis, "B1_c1_s", "a \\/ b"));
}

TEST_CASE("check detects the failing append call") {
  CheckResult res = check(parseProgram(kAppendSrc), parseAtomText("append(A,a,A)"));
  CHECK(res.detected);
  CHECK(!res.emptyGoalVars.empty());
}

TEST_CASE("check accepts satisfiable calls") {
  CheckResult res = check(parseProgram(kAppendSrc), parseAtomText("append(A,b,B)"));
  CHECK(!res.detected);
  CheckResult ground = check(parseProgram(kAppendSrc), parseAtomText("append([a],[b],[a,b])"));
  CHECK(!ground.detected);
}

TEST_CASE("same/2 recovers the shared element parameter through bind") {
  std::string src = std::string(kNrevSrc) + "same(L1,L2):- nrev(L1,L), nrev(L,L2).\n";
  CHECK(typesOf(src, {"same", 2}) ==
        "% same/2\n"
        ":- typing same(S1,S2).\n"
        ":- type S1 -> [] | [X|S1].\n"
        ":- type S2 -> [] | [X|S2].\n");
}

TEST_CASE("solver runs are deterministic") {
  std::string src = std::string(kNrevSrc) + "same(L1,L2):- nrev(L1,L), nrev(L,L2).\n";
  AnalysisResult a = analyzeSrc(src);
  AnalysisResult b = analyzeSrc(src);
  REQUIRE(a.sccs.size() == b.sccs.size());
  for (std::size_t i = 0; i < a.sccs.size(); ++i)
    CHECK(a.sccs[i].solved.str() == b.sccs[i].solved.str());
  CHECK(a.bindings == b.bindings);
}

TEST_CASE("solved systems are leaf-linear") {
  for (const char* src :
       {kAppendSrc, kNrevSrc, "k(a). k(b).", "p(X):- q(b,X). q(a,a).\n"}) {
    AnalysisResult result = analyzeSrc(src);
    for (const auto& scc : result.sccs) {
      FormClass f = classifySystem(scc.solved);
      bool ok = f == FormClass::LeafLinear || f == FormClass::Regular;
      CHECK(ok);
    }
  }
}

TEST_CASE("unknown predicates can be treated as any") {
  std::string src = "p(X):- mystery(X).\n";
  CHECK_THROWS_AS(analyzeSrc(src), UnknownPredicateError);
  AnalysisOptions opts;
  opts.allowUnknown = true;
  AnalysisResult result = analyzeSrc(src, opts);
  const Solution& sol = result.solutionOf({"p", 1});
  // p's argument is unconstrained
  std::vector<std::pair<Signature, const EquationSystem*>> inputs{{sol.sig, &sol.types}};
  TypeReport report = buildReport(inputs);
  CHECK(report.predicates[0].args[0].any);
}

TEST_CASE("dead zero-arity callees kill their callers") {
  std::string src =
      "never :- impossible(a).\n"
      "impossible(b).\n"
      "user(X) :- never, q(X).\n"
      "q(a).\n";
  AnalysisResult result = analyzeSrc(src);
  CHECK(typesOf(result, {"user", 1}) ==
        "% user/1\n"
        ":- typing user(U).\n"
        ":- type U -> 0.\n");
}
