#include <catch2/catch_amalgamated.hpp>

#include "rti/frontend.hpp"
#include "rti/parser.hpp"

using namespace rti;

TEST_CASE("facts parse with list sugar") {
  Program p = parseProgram("append([],L,L).");
  REQUIRE(p.clauses.size() == 1);
  const Clause& c = p.clauses[0];
  REQUIRE(c.head.predicate == "append");
  REQUIRE(c.head.args.size() == 3);
  REQUIRE(c.body.empty());
  CHECK(c.head.args[0]->isCompound());
  CHECK(c.head.args[0]->name() == kNilFunctor);
  CHECK(c.head.args[1]->isVariable());
  CHECK(c.head.args[1]->name() == "L");
  CHECK(equalTerms(c.head.args[1], c.head.args[2]));
}

TEST_CASE("rules parse with body atoms in order") {
  Program p = parseProgram("nrev([X|Xs],Ys):- nrev(Xs,Zs), append(Zs,[X],Ys).");
  REQUIRE(p.clauses.size() == 1);
  const Clause& c = p.clauses[0];
  REQUIRE(c.body.size() == 2);
  CHECK(c.body[0].predicate == "nrev");
  CHECK(c.body[1].predicate == "append");
  // head arg 1 is a cons cell over variables X and Xs
  const TermPtr& arg1 = c.head.args[0];
  REQUIRE(arg1->isCompound());
  CHECK(arg1->name() == kConsFunctor);
  REQUIRE(arg1->arity() == 2);
  CHECK(arg1->args()[0]->name() == "X");
  CHECK(arg1->args()[1]->name() == "Xs");
}

TEST_CASE("syntax errors carry positions") {
  try {
    parseProgram("p(X):- q(X");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line == 1);
    CHECK(std::string(e.what()).find("expected") != std::string::npos);
  }
}

TEST_CASE("comments, integers and strings") {
  Program p = parseProgram(
      "% a comment\n"
      "digits([1,2,3]).\n"
      "word(\"ab\"). % trailing\n");
  REQUIRE(p.clauses.size() == 2);
  CHECK(p.clauses[0].head.args[0]->str() == "[1,2,3]");
  CHECK(p.clauses[1].head.args[0]->str() == "[a,b]");
}

TEST_CASE("partial lists and anonymous variables") {
  Program p = parseProgram("first([H|_],H). pair([A,B|T],A,B,T).");
  const TermPtr& t = p.clauses[0].head.args[0];
  REQUIRE(t->name() == kConsFunctor);
  CHECK(t->args()[1]->isVariable());
  // each underscore is a distinct variable
  Program q = parseProgram("p(_,_).");
  CHECK(q.clauses[0].head.args[0]->name() != q.clauses[0].head.args[1]->name());
}

TEST_CASE("entry directive is recorded") {
  Program p = parseProgram(":- entry append(A,a,A).\nappend([],L,L).");
  REQUIRE(p.entry.has_value());
  CHECK(p.entry->predicate == "append");
  CHECK(p.entry->args.size() == 3);
  CHECK_THROWS_AS(parseProgram(":- typing p(A).\np(a)."), ParseError);
  CHECK_THROWS_AS(parseProgram(":- entry p(A).\n:- entry p(B).\np(a)."), ParseError);
}

TEST_CASE("unknown body predicates are reported") {
  Program p = parseProgram("p(X) :- q(X).");
  auto unknown = undefinedPredicates(p);
  REQUIRE(unknown.size() == 1);
  CHECK(unknown.begin()->first == "q");
  CHECK_THROWS_AS(requireDefinedPredicates(p), UnknownPredicateError);
  Program ok = parseProgram("p(X) :- q(X). q(a).");
  CHECK(undefinedPredicates(ok).empty());
}

TEST_CASE("printing and re-parsing round-trips") {
  std::string src =
      "append([],L,L).\n"
      "append([X|Xs],Ys,[X|Zs]):- append(Xs,Ys,Zs).\n"
      "nrev([],[]).\n"
      "nrev([X|Xs],Ys):- nrev(Xs,Zs), append(Zs,[X],Ys).\n";
  Program p = parseProgram(src);
  Program q = parseProgram(p.str());
  CHECK(alphaEqualPrograms(p, q));
}

TEST_CASE("query atoms parse") {
  Atom a = parseAtomText("append(A,a,A)");
  CHECK(a.predicate == "append");
  REQUIRE(a.args.size() == 3);
  CHECK(a.args[0]->isVariable());
  CHECK(a.args[1]->isConstant());
}
