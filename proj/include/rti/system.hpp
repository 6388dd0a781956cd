#pragma once

#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rti/frontend.hpp"
#include "rti/setexpr.hpp"
#include "rti/term.hpp"

namespace rti {

// ---------------------------------------------------------------------------
// Standard set equation systems: a map from variables to right-hand sides,
// at most one equation per variable. Variables without an equation are free.
// ---------------------------------------------------------------------------

struct Equation {
  std::string lhs;
  ExprPtr rhs;
};

class EquationSystem {
public:
  bool defines(const std::string& v) const { return eqs_.count(v) != 0; }

  const ExprPtr* lookup(const std::string& v) const {
    auto it = eqs_.find(v);
    return it == eqs_.end() ? nullptr : &it->second;
  }

  const ExprPtr& rhs(const std::string& v) const {
    auto it = eqs_.find(v);
    if (it == eqs_.end()) throw InternalError("no equation for " + v);
    return it->second;
  }

  void set(const std::string& v, ExprPtr e) { eqs_[v] = std::move(e); }

  void add(const Equation& q) {
    if (defines(q.lhs)) throw InternalError("duplicate equation for " + q.lhs);
    eqs_[q.lhs] = q.rhs;
  }

  void erase(const std::string& v) { eqs_.erase(v); }

  std::size_t size() const { return eqs_.size(); }
  bool empty() const { return eqs_.empty(); }

  const std::map<std::string, ExprPtr>& equations() const { return eqs_; }

  /// Variables mentioned anywhere that have no defining equation.
  std::set<std::string> freeVars() const {
    std::set<std::string> seen;
    for (const auto& [lhs, rhs] : eqs_) collectExprVars(rhs, seen);
    std::set<std::string> free;
    for (const auto& v : seen)
      if (!defines(v)) free.insert(v);
    return free;
  }

  std::string str() const {
    std::ostringstream os;
    for (const auto& [lhs, rhs] : eqs_) os << lhs << " = " << exprToString(rhs) << ".\n";
    return os.str();
  }

private:
  std::map<std::string, ExprPtr> eqs_;
};

/// Leaf-linear check for whole systems: all right-hand sides in
/// parameterized form and every top-level variable free.
inline FormClass classifySystem(const EquationSystem& sys) {
  bool allRegular = true, allParam = true, allTop = true, leafLinear = true;
  for (const auto& [lhs, rhs] : sys.equations()) {
    allRegular = allRegular && isRegularForm(rhs);
    allParam = allParam && isParameterizedForm(rhs);
    allTop = allTop && isTopLevelForm(rhs);
    std::set<std::string> tops;
    collectTopLevelVars(rhs, tops);
    for (const auto& v : tops)
      if (sys.defines(v)) leafLinear = false;
  }
  if (allParam && leafLinear) return FormClass::LeafLinear;
  if (allRegular) return FormClass::Regular;
  if (allParam) return FormClass::Parameterized;
  if (allTop) return FormClass::TopLevel;
  return FormClass::General;
}

// ---------------------------------------------------------------------------
// Bounded-depth semantics. Assignments map free variables to finite sets of
// ground terms; defined variables take their least-fixpoint value under the
// system, restricted to terms of depth <= the bound.
// ---------------------------------------------------------------------------

using Assignment = std::map<std::string, TermSet>;

namespace detail {

inline TermSet evalExpr(const ExprPtr& e, const Assignment& sigma,
                        const std::map<std::string, TermSet>& current,
                        const EquationSystem& sys, int depth) {
  switch (e->kind) {
    case ExprKind::Empty:
      return {};
    case ExprKind::Var: {
      const TermSet* source = nullptr;
      auto it = current.find(e->sym);
      if (it != current.end()) {
        source = &it->second;
      } else {
        auto is = sigma.find(e->sym);
        if (is == sigma.end()) throw Error("unbound free variable " + e->sym);
        source = &is->second;
      }
      TermSet out;
      for (const auto& t : *source)
        if (t->depth() <= depth) out.insert(t);
      return out;
    }
    case ExprKind::Cons: {
      if (depth < 1) return {};
      std::vector<TermSet> argSets;
      for (const auto& k : e->kids)
        argSets.push_back(evalExpr(k, sigma, current, sys, depth - 1));
      TermSet out;
      std::vector<TermPtr> tuple(argSets.size());
      std::function<void(std::size_t)> build = [&](std::size_t i) {
        if (i == argSets.size()) {
          std::vector<TermPtr> args = tuple;
          out.insert(Term::compound(e->sym, std::move(args)));
          return;
        }
        for (const auto& t : argSets[i]) {
          tuple[i] = t;
          build(i + 1);
        }
      };
      build(0);
      return out;
    }
    case ExprKind::Union: {
      TermSet out;
      for (const auto& k : e->kids) {
        TermSet s = evalExpr(k, sigma, current, sys, depth);
        out.insert(s.begin(), s.end());
      }
      return out;
    }
    case ExprKind::Inter: {
      TermSet out = evalExpr(e->kids[0], sigma, current, sys, depth);
      for (std::size_t i = 1; i < e->kids.size() && !out.empty(); ++i) {
        TermSet s = evalExpr(e->kids[i], sigma, current, sys, depth);
        TermSet cut;
        std::set_intersection(out.begin(), out.end(), s.begin(), s.end(),
                              std::inserter(cut, cut.begin()), TermLess{});
        out = std::move(cut);
      }
      return out;
    }
  }
  return {};
}

} // namespace detail

/// The semantic oracle: evaluates `e` under assignment `sigma`, unfolding
/// defined variables to their least solution, restricted to terms of depth
/// <= `depth`. Monotone in `depth`.
inline TermSet meaning(const ExprPtr& e, const Assignment& sigma, const EquationSystem& sys,
                       int depth) {
  std::map<std::string, TermSet> current;
  for (const auto& [lhs, rhs] : sys.equations()) current[lhs] = {};
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& [lhs, rhs] : sys.equations()) {
      TermSet next = detail::evalExpr(rhs, sigma, current, sys, depth);
      if (next.size() != current[lhs].size()) {
        current[lhs] = std::move(next);
        changed = true;
      }
    }
  }
  return detail::evalExpr(e, sigma, current, sys, depth);
}

inline TermSet meaning(const ExprPtr& e, const Assignment& sigma, int depth) {
  return meaning(e, sigma, EquationSystem{}, depth);
}

/// All ground terms of depth <= `depth` over the given functor alphabet.
inline TermSet herbrandUniverse(const std::vector<std::pair<std::string, int>>& functors,
                                int depth) {
  TermSet universe;
  for (int d = 1; d <= depth; ++d) {
    TermSet layer;
    for (const auto& [f, n] : functors) {
      if (n == 0) {
        layer.insert(Term::compound(f));
        continue;
      }
      std::vector<TermPtr> pool(universe.begin(), universe.end());
      if (pool.empty()) continue;
      std::vector<TermPtr> tuple(n);
      std::function<void(int)> build = [&](int i) {
        if (i == n) {
          std::vector<TermPtr> args = tuple;
          layer.insert(Term::compound(f, std::move(args)));
          return;
        }
        for (const auto& t : pool) {
          tuple[i] = t;
          build(i + 1);
        }
      };
      build(0);
    }
    universe.insert(layer.begin(), layer.end());
  }
  return universe;
}

// ---------------------------------------------------------------------------
// Top-level form rewriting: every constructor argument that is not a
// variable is hoisted into a fresh equation.
// ---------------------------------------------------------------------------

/// Flattens one expression; new equations are appended to `out`.
inline ExprPtr toTopLevelExpr(const ExprPtr& e, NameSupply& supply, std::vector<Equation>& out) {
  switch (e->kind) {
    case ExprKind::Empty:
    case ExprKind::Var:
      return e;
    case ExprKind::Cons: {
      std::vector<ExprPtr> args;
      args.reserve(e->kids.size());
      for (const auto& k : e->kids) {
        if (k->isVar()) {
          args.push_back(k);
        } else {
          ExprPtr flat = toTopLevelExpr(k, supply, out);
          std::string y = supply.fresh("Y");
          out.push_back({y, flat});
          args.push_back(SetExpr::var(y));
        }
      }
      return SetExpr::cons(e->sym, std::move(args));
    }
    case ExprKind::Union: {
      std::vector<ExprPtr> ops;
      for (const auto& k : e->kids) ops.push_back(toTopLevelExpr(k, supply, out));
      return makeUnion(std::move(ops));
    }
    case ExprKind::Inter: {
      std::vector<ExprPtr> ops;
      for (const auto& k : e->kids) ops.push_back(toTopLevelExpr(k, supply, out));
      return makeInter(std::move(ops));
    }
  }
  return e;
}

inline EquationSystem toTopLevelForm(const EquationSystem& sys, NameSupply& supply) {
  EquationSystem out;
  for (const auto& [lhs, rhs] : sys.equations()) {
    std::vector<Equation> fresh;
    ExprPtr flat = toTopLevelExpr(rhs, supply, fresh);
    out.set(lhs, flat);
    for (const auto& q : fresh) out.add(q);
  }
  return out;
}

inline EquationSystem toTopLevelForm(const EquationSystem& sys) {
  NameSupply supply;
  for (const auto& [lhs, rhs] : sys.equations()) {
    supply.reserve(lhs);
    std::set<std::string> vs;
    collectExprVars(rhs, vs);
    for (const auto& v : vs) supply.reserve(v);
  }
  return toTopLevelForm(sys, supply);
}

// ---------------------------------------------------------------------------
// Disjunctive normal form over the top-level union/intersection algebra.
// Constructor arguments are not entered.
// ---------------------------------------------------------------------------

namespace detail {

/// Expands to a list of conjuncts, each a list of Var/Cons atoms. An empty
/// conjunct list denotes the empty set; the empty-set atom never appears.
inline std::vector<std::vector<ExprPtr>> dnfExpand(const ExprPtr& e) {
  switch (e->kind) {
    case ExprKind::Empty:
      return {};
    case ExprKind::Var:
    case ExprKind::Cons:
      return {{e}};
    case ExprKind::Union: {
      std::vector<std::vector<ExprPtr>> out;
      for (const auto& k : e->kids) {
        auto sub = dnfExpand(k);
        out.insert(out.end(), sub.begin(), sub.end());
      }
      return out;
    }
    case ExprKind::Inter: {
      std::vector<std::vector<ExprPtr>> acc{{}};
      for (const auto& k : e->kids) {
        auto sub = dnfExpand(k);
        std::vector<std::vector<ExprPtr>> next;
        for (const auto& lhsPart : acc)
          for (const auto& rhsPart : sub) {
            std::vector<ExprPtr> merged = lhsPart;
            merged.insert(merged.end(), rhsPart.begin(), rhsPart.end());
            next.push_back(std::move(merged));
          }
        acc = std::move(next);
        if (acc.size() > 200000) throw SolveError("dnf expansion too large");
      }
      return acc;
    }
  }
  return {};
}

} // namespace detail

/// Puts the right-hand side into disjunctive normal form: a union of
/// intersections of variable/constructor leaves.
inline ExprPtr dnfExpr(const ExprPtr& e) {
  auto conjuncts = detail::dnfExpand(e);
  std::vector<ExprPtr> disjuncts;
  for (auto& atoms : conjuncts) {
    if (atoms.empty()) continue;
    disjuncts.push_back(makeInter(std::move(atoms)));
  }
  return makeUnion(std::move(disjuncts));
}

inline Equation dnf(const Equation& q) { return {q.lhs, dnfExpr(q.rhs)}; }

// ---------------------------------------------------------------------------
// SIMP. Rules 1-4 hold by representation; this pass applies subsumption,
// clash, intersection distribution with memoized fresh variables, and the
// emptiness collapse, to a fixpoint. New equations produced by rule 7 are
// returned so the solver can queue them, and each carries a provenance link
// to the equation it was derived from.
// ---------------------------------------------------------------------------

/// Memo table for intersection variables: one variable per canonical
/// unordered operand pair, shared across the whole solve so repeated
/// intersections reuse the same name.
class MemoTable {
public:
  const std::string* find(const ExprPtr& a, const ExprPtr& b) const {
    auto it = table_.find(key(a, b));
    return it == table_.end() ? nullptr : &it->second;
  }

  void insert(const ExprPtr& a, const ExprPtr& b, const std::string& var) {
    auto k = key(a, b);
    auto [it, fresh] = table_.emplace(k, var);
    if (!fresh) throw InternalError("memo table already holds a variable for " + k.first +
                                    " /\\ " + k.second);
  }

  std::size_t size() const { return table_.size(); }

  const std::map<std::pair<std::string, std::string>, std::string>& entries() const {
    return table_;
  }

private:
  static std::pair<std::string, std::string> key(const ExprPtr& a, const ExprPtr& b) {
    std::string ka = exprToString(a), kb = exprToString(b);
    if (kb < ka) std::swap(ka, kb);
    return {ka, kb};
  }

  std::map<std::pair<std::string, std::string>, std::string> table_;
};

struct SimpContext {
  MemoTable& memo;
  NameSupply& supply;
  /// provenance: new intersection variable -> lhs of the equation it came from
  std::map<std::string, std::string>& provenance;
  /// emptiness oracle over the solved context (rule 8); may be null
  std::function<bool(const std::string&)> provablyEmpty;
};

namespace detail {

/// Simplifies one conjunct. Returns nullopt when the conjunct denotes the
/// empty set (clash or emptiness), otherwise the parameterized conjunct.
inline std::optional<ExprPtr> simpConjunct(const std::vector<ExprPtr>& atoms,
                                           const std::string& originLhs, SimpContext& ctx,
                                           std::vector<Equation>& newEqs) {
  std::vector<ExprPtr> vars;
  std::vector<ExprPtr> consExprs;
  for (const auto& a : atoms) {
    if (a->isEmpty()) return std::nullopt;
    if (a->isVar())
      vars.push_back(a);
    else
      consExprs.push_back(a);
  }

  // clash + intersection distribution over constructors
  while (consExprs.size() > 1) {
    ExprPtr a = consExprs[consExprs.size() - 2];
    ExprPtr b = consExprs[consExprs.size() - 1];
    if (a->sym != b->sym || a->kids.size() != b->kids.size()) return std::nullopt;
    std::vector<ExprPtr> args;
    for (std::size_t j = 0; j < a->kids.size(); ++j) {
      const ExprPtr& x = a->kids[j];
      const ExprPtr& y = b->kids[j];
      if (equalExprs(x, y)) {
        args.push_back(x);
        continue;
      }
      if (const std::string* hit = ctx.memo.find(x, y)) {
        args.push_back(SetExpr::var(*hit));
        continue;
      }
      std::string t = ctx.supply.fresh("T");
      ctx.memo.insert(x, y, t);
      ctx.provenance[t] = originLhs;
      newEqs.push_back({t, makeInter2(x, y)});
      args.push_back(SetExpr::var(t));
    }
    consExprs.pop_back();
    consExprs.pop_back();
    consExprs.push_back(SetExpr::cons(a->sym, std::move(args)));
  }

  // emptiness: a constructor with a provably empty argument denotes nothing
  if (!consExprs.empty() && ctx.provablyEmpty) {
    for (const auto& arg : consExprs[0]->kids) {
      if (arg->isEmpty()) return std::nullopt;
      if (arg->isVar() && ctx.provablyEmpty(arg->sym)) return std::nullopt;
    }
  }

  std::vector<ExprPtr> parts(vars.begin(), vars.end());
  parts.insert(parts.end(), consExprs.begin(), consExprs.end());
  if (parts.empty()) return std::nullopt;
  return makeInter(std::move(parts));
}

/// Subsumption at the top union level: a disjunct whose operand set strictly
/// contains another disjunct's operand set is dropped.
inline std::vector<ExprPtr> subsume(std::vector<ExprPtr> disjuncts) {
  auto operands = [](const ExprPtr& d) {
    return d->isInter() ? d->kids : std::vector<ExprPtr>{d};
  };
  std::vector<ExprPtr> kept;
  for (std::size_t i = 0; i < disjuncts.size(); ++i) {
    bool subsumed = false;
    std::vector<ExprPtr> opsI = operands(disjuncts[i]);
    for (std::size_t j = 0; j < disjuncts.size() && !subsumed; ++j) {
      if (i == j) continue;
      std::vector<ExprPtr> opsJ = operands(disjuncts[j]);
      if (opsJ.size() >= opsI.size()) continue;
      subsumed = std::includes(opsI.begin(), opsI.end(), opsJ.begin(), opsJ.end(), ExprLess{});
    }
    if (!subsumed) kept.push_back(disjuncts[i]);
  }
  return kept;
}

} // namespace detail

/// SIMP on one equation whose rhs is in DNF. Returns the simplified
/// equation (rhs in parameterized form or empty) plus the new equations
/// introduced by intersection distribution.
inline std::pair<Equation, std::vector<Equation>> simp(const Equation& q, SimpContext& ctx) {
  std::vector<Equation> newEqs;
  auto conjuncts = detail::dnfExpand(q.rhs);
  std::vector<ExprPtr> disjuncts;
  for (const auto& atoms : conjuncts) {
    auto r = detail::simpConjunct(atoms, q.lhs, ctx, newEqs);
    if (r) disjuncts.push_back(*r);
  }
  detail::sortUnique(disjuncts);
  disjuncts = detail::subsume(std::move(disjuncts));
  return {{q.lhs, makeUnion(std::move(disjuncts))}, std::move(newEqs)};
}

// ---------------------------------------------------------------------------
// Emptiness test. A least-fixpoint non-emptiness marking over the system:
// free variables are non-empty, a conjunct is non-empty when its constructor
// part (if any) has all arguments marked and each defined variable factor is
// marked, a variable is non-empty when some disjunct is. A variable is empty
// iff it is defined and never gets marked. Variables without an equation in
// `sys` (free or pending elsewhere) are assumed non-empty, so the test only
// reports emptiness it can prove from `sys` alone.
// ---------------------------------------------------------------------------

class NonEmptyMarking {
public:
  explicit NonEmptyMarking(const EquationSystem& sys) {
    for (const auto& [lhs, rhs] : sys.equations()) defined_.insert(lhs);
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& [lhs, rhs] : sys.equations()) {
        if (marked_.count(lhs)) continue;
        if (eval(rhs)) {
          marked_.insert(lhs);
          changed = true;
        }
      }
    }
  }

  bool nonEmpty(const std::string& v) const {
    return !defined_.count(v) || marked_.count(v) != 0;
  }

  bool empty(const std::string& v) const { return !nonEmpty(v); }

private:
  bool eval(const ExprPtr& e) const {
    switch (e->kind) {
      case ExprKind::Empty:
        return false;
      case ExprKind::Var:
        return nonEmpty(e->sym);
      case ExprKind::Cons:
        for (const auto& k : e->kids)
          if (!eval(k)) return false;
        return true;
      case ExprKind::Inter:
        for (const auto& k : e->kids)
          if (!eval(k)) return false;
        return true;
      case ExprKind::Union:
        for (const auto& k : e->kids)
          if (eval(k)) return true;
        return false;
    }
    return false;
  }

  std::set<std::string> defined_;
  std::set<std::string> marked_;
};

/// True iff `x` denotes the empty set under every assignment of non-empty
/// sets to the free variables of `sys`.
inline bool isEmptyVar(const std::string& x, const EquationSystem& sys) {
  return NonEmptyMarking(sys).empty(x);
}

/// Convenience wrapper matching the operation signature used in tests: the
/// memo lives on a caller-provided table and rule 8 consults `solved`.
inline std::pair<Equation, std::vector<Equation>> simp(const Equation& q, MemoTable& memo,
                                                       NameSupply& supply,
                                                       const EquationSystem& solved) {
  std::map<std::string, std::string> provenance;
  NonEmptyMarking marking(solved);
  SimpContext ctx{memo, supply, provenance,
                  [&marking](const std::string& v) { return marking.empty(v); }};
  return simp(q, ctx);
}

} // namespace rti
