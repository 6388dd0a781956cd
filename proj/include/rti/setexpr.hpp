#pragma once

#include <algorithm>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "rti/errors.hpp"
#include "rti/term.hpp"

namespace rti {

class SetExpr;
using ExprPtr = std::shared_ptr<const SetExpr>;

enum class ExprKind : unsigned char { Empty, Var, Cons, Inter, Union };

// ---------------------------------------------------------------------------
// Set expressions over the empty set, variables, constructor applications,
// unions and intersections. Unions and intersections are kept flattened, in
// canonical order and duplicate-free, and never contain the empty set, so
// the basic intersection/union simplification and absorption equivalences
// hold by representation.
// ---------------------------------------------------------------------------
class SetExpr {
public:
  ExprKind kind;
  std::string sym;            // variable name or functor
  std::vector<ExprPtr> kids;  // constructor arguments or operands

  static ExprPtr empty() {
    static const ExprPtr instance(new SetExpr{ExprKind::Empty, "", {}});
    return instance;
  }

  static ExprPtr var(std::string name) {
    return ExprPtr(new SetExpr{ExprKind::Var, std::move(name), {}});
  }

  static ExprPtr cons(std::string functor, std::vector<ExprPtr> args = {}) {
    return ExprPtr(new SetExpr{ExprKind::Cons, std::move(functor), std::move(args)});
  }

  bool isEmpty() const { return kind == ExprKind::Empty; }
  bool isVar() const { return kind == ExprKind::Var; }
  bool isCons() const { return kind == ExprKind::Cons; }
  bool isInter() const { return kind == ExprKind::Inter; }
  bool isUnion() const { return kind == ExprKind::Union; }

private:
  friend ExprPtr makeUnion(std::vector<ExprPtr>);
  friend ExprPtr makeInter(std::vector<ExprPtr>);
  SetExpr(ExprKind k, std::string s, std::vector<ExprPtr> c)
      : kind(k), sym(std::move(s)), kids(std::move(c)) {}
};

/// Total structural order: Empty < Var (by name) < Cons (by arity, functor,
/// then arguments) < Inter < Union. Constants therefore sort before compound
/// constructor expressions, which fixes the printed alternative order.
inline int compareExprs(const ExprPtr& a, const ExprPtr& b) {
  auto rank = [](ExprKind k) {
    switch (k) {
      case ExprKind::Empty: return 0;
      case ExprKind::Var: return 1;
      case ExprKind::Cons: return 2;
      case ExprKind::Inter: return 3;
      case ExprKind::Union: return 4;
    }
    return 5;
  };
  if (rank(a->kind) != rank(b->kind)) return rank(a->kind) < rank(b->kind) ? -1 : 1;
  switch (a->kind) {
    case ExprKind::Empty:
      return 0;
    case ExprKind::Var:
      return a->sym.compare(b->sym);
    case ExprKind::Cons:
      if (a->kids.size() != b->kids.size()) return a->kids.size() < b->kids.size() ? -1 : 1;
      if (int c = a->sym.compare(b->sym)) return c;
      break;
    default:
      break;
  }
  for (std::size_t i = 0; i < std::min(a->kids.size(), b->kids.size()); ++i)
    if (int c = compareExprs(a->kids[i], b->kids[i])) return c;
  if (a->kids.size() != b->kids.size()) return a->kids.size() < b->kids.size() ? -1 : 1;
  return 0;
}

inline bool equalExprs(const ExprPtr& a, const ExprPtr& b) { return compareExprs(a, b) == 0; }

struct ExprLess {
  bool operator()(const ExprPtr& a, const ExprPtr& b) const { return compareExprs(a, b) < 0; }
};

namespace detail {
inline void sortUnique(std::vector<ExprPtr>& ops) {
  std::sort(ops.begin(), ops.end(), ExprLess{});
  ops.erase(std::unique(ops.begin(), ops.end(),
                        [](const ExprPtr& a, const ExprPtr& b) { return equalExprs(a, b); }),
            ops.end());
}
} // namespace detail

/// Union constructor: flattens nested unions, drops empty operands, sorts
/// and deduplicates. Zero surviving operands yield the empty set.
inline ExprPtr makeUnion(std::vector<ExprPtr> ops) {
  std::vector<ExprPtr> flat;
  for (auto& op : ops) {
    if (op->isEmpty()) continue;
    if (op->isUnion())
      flat.insert(flat.end(), op->kids.begin(), op->kids.end());
    else
      flat.push_back(std::move(op));
  }
  detail::sortUnique(flat);
  if (flat.empty()) return SetExpr::empty();
  if (flat.size() == 1) return flat[0];
  return ExprPtr(new SetExpr(ExprKind::Union, "", std::move(flat)));
}

/// Intersection constructor: flattens nested intersections, sorts and
/// deduplicates; any empty operand collapses the whole expression.
inline ExprPtr makeInter(std::vector<ExprPtr> ops) {
  std::vector<ExprPtr> flat;
  for (auto& op : ops) {
    if (op->isEmpty()) return SetExpr::empty();
    if (op->isInter())
      flat.insert(flat.end(), op->kids.begin(), op->kids.end());
    else
      flat.push_back(std::move(op));
  }
  detail::sortUnique(flat);
  if (flat.empty()) throw InternalError("intersection of zero operands");
  if (flat.size() == 1) return flat[0];
  return ExprPtr(new SetExpr(ExprKind::Inter, "", std::move(flat)));
}

inline ExprPtr makeUnion2(ExprPtr a, ExprPtr b) { return makeUnion({std::move(a), std::move(b)}); }
inline ExprPtr makeInter2(ExprPtr a, ExprPtr b) { return makeInter({std::move(a), std::move(b)}); }

// ---------------------------------------------------------------------------
// Printing. The textual grammar used in dumps: `0` for the empty set,
// `\/` and `/\` for union and intersection, `cons(H,T)` for list cells.
// ---------------------------------------------------------------------------
inline void printExpr(std::ostream& os, const ExprPtr& e, bool parenUnion = false) {
  switch (e->kind) {
    case ExprKind::Empty:
      os << '0';
      return;
    case ExprKind::Var:
      os << e->sym;
      return;
    case ExprKind::Cons: {
      std::string f = e->sym == kConsFunctor && e->kids.size() == 2 ? "cons" : e->sym;
      os << f;
      if (!e->kids.empty()) {
        os << '(';
        for (std::size_t i = 0; i < e->kids.size(); ++i) {
          if (i) os << ',';
          printExpr(os, e->kids[i]);
        }
        os << ')';
      }
      return;
    }
    case ExprKind::Inter: {
      for (std::size_t i = 0; i < e->kids.size(); ++i) {
        if (i) os << " /\\ ";
        printExpr(os, e->kids[i], true);
      }
      return;
    }
    case ExprKind::Union: {
      if (parenUnion) os << '(';
      for (std::size_t i = 0; i < e->kids.size(); ++i) {
        if (i) os << " \\/ ";
        printExpr(os, e->kids[i]);
      }
      if (parenUnion) os << ')';
      return;
    }
  }
}

inline std::string exprToString(const ExprPtr& e) {
  std::ostringstream os;
  printExpr(os, e);
  return os.str();
}

/// Converts a program term to a set expression (variables stay variables).
inline ExprPtr exprFromTerm(const TermPtr& t) {
  if (t->isVariable()) return SetExpr::var(t->name());
  std::vector<ExprPtr> args;
  args.reserve(t->arity());
  for (const auto& a : t->args()) args.push_back(exprFromTerm(a));
  return SetExpr::cons(t->name(), std::move(args));
}

// ---------------------------------------------------------------------------
// Traversals.
// ---------------------------------------------------------------------------

/// Variables occurring anywhere in the expression.
inline void collectExprVars(const ExprPtr& e, std::set<std::string>& out) {
  if (e->isVar()) {
    out.insert(e->sym);
    return;
  }
  for (const auto& k : e->kids) collectExprVars(k, out);
}

/// Variables occurring outside the scope of any constructor.
inline void collectTopLevelVars(const ExprPtr& e, std::set<std::string>& out) {
  switch (e->kind) {
    case ExprKind::Var:
      out.insert(e->sym);
      return;
    case ExprKind::Union:
    case ExprKind::Inter:
      for (const auto& k : e->kids) collectTopLevelVars(k, out);
      return;
    default:
      return;
  }
}

inline bool occursTopLevel(const ExprPtr& e, const std::string& var) {
  switch (e->kind) {
    case ExprKind::Var:
      return e->sym == var;
    case ExprKind::Union:
    case ExprKind::Inter:
      for (const auto& k : e->kids)
        if (occursTopLevel(k, var)) return true;
      return false;
    default:
      return false;
  }
}

/// Replaces top-level occurrences of `var` by `repl`; constructor arguments
/// are left untouched. The result is re-canonicalized.
inline ExprPtr substTopLevel(const ExprPtr& e, const std::string& var, const ExprPtr& repl) {
  switch (e->kind) {
    case ExprKind::Var:
      return e->sym == var ? repl : e;
    case ExprKind::Union: {
      std::vector<ExprPtr> ops;
      ops.reserve(e->kids.size());
      for (const auto& k : e->kids) ops.push_back(substTopLevel(k, var, repl));
      return makeUnion(std::move(ops));
    }
    case ExprKind::Inter: {
      std::vector<ExprPtr> ops;
      ops.reserve(e->kids.size());
      for (const auto& k : e->kids) ops.push_back(substTopLevel(k, var, repl));
      return makeInter(std::move(ops));
    }
    default:
      return e;
  }
}

/// Replaces every occurrence of `var`, including under constructors. Only
/// used for aliases (replacement by a single variable), which preserves
/// top-level form.
inline ExprPtr substEverywhere(const ExprPtr& e, const std::string& var, const ExprPtr& repl) {
  switch (e->kind) {
    case ExprKind::Var:
      return e->sym == var ? repl : e;
    case ExprKind::Cons: {
      std::vector<ExprPtr> args;
      args.reserve(e->kids.size());
      bool changed = false;
      for (const auto& k : e->kids) {
        args.push_back(substEverywhere(k, var, repl));
        changed = changed || args.back() != k;
      }
      return changed ? SetExpr::cons(e->sym, std::move(args)) : e;
    }
    case ExprKind::Union: {
      std::vector<ExprPtr> ops;
      for (const auto& k : e->kids) ops.push_back(substEverywhere(k, var, repl));
      return makeUnion(std::move(ops));
    }
    case ExprKind::Inter: {
      std::vector<ExprPtr> ops;
      for (const auto& k : e->kids) ops.push_back(substEverywhere(k, var, repl));
      return makeInter(std::move(ops));
    }
    default:
      return e;
  }
}

// ---------------------------------------------------------------------------
// Form classification against the expression grammars.
// ---------------------------------------------------------------------------
enum class FormClass { General, TopLevel, Regular, Parameterized, LeafLinear };

inline const char* formClassName(FormClass f) {
  switch (f) {
    case FormClass::General: return "general";
    case FormClass::TopLevel: return "top-level";
    case FormClass::Regular: return "regular";
    case FormClass::Parameterized: return "parameterized";
    case FormClass::LeafLinear: return "leaf-linear";
  }
  return "?";
}

inline bool isFlatCons(const ExprPtr& e) {
  if (!e->isCons()) return false;
  for (const auto& k : e->kids)
    if (!k->isVar()) return false;
  return true;
}

/// Top-level form: all constructor arguments are variables.
inline bool isTopLevelForm(const ExprPtr& e) {
  switch (e->kind) {
    case ExprKind::Empty:
    case ExprKind::Var:
      return true;
    case ExprKind::Cons:
      return isFlatCons(e);
    default:
      for (const auto& k : e->kids)
        if (!isTopLevelForm(k)) return false;
      return true;
  }
}

/// Regular form: empty, or a union of variables and flat constructors.
inline bool isRegularForm(const ExprPtr& e) {
  if (e->isEmpty()) return true;
  std::vector<ExprPtr> disjuncts = e->isUnion() ? e->kids : std::vector<ExprPtr>{e};
  for (const auto& d : disjuncts)
    if (!d->isVar() && !isFlatCons(d)) return false;
  return true;
}

/// A parameterized conjunct: variables intersected with at most one flat
/// constructor expression.
inline bool isParameterizedConjunct(const ExprPtr& e) {
  if (e->isVar() || isFlatCons(e)) return true;
  if (!e->isInter()) return false;
  int consCount = 0;
  for (const auto& k : e->kids) {
    if (k->isVar()) continue;
    if (isFlatCons(k)) {
      ++consCount;
      continue;
    }
    return false;
  }
  return consCount <= 1;
}

/// Parameterized form: empty, or a union of parameterized conjuncts.
inline bool isParameterizedForm(const ExprPtr& e) {
  if (e->isEmpty()) return true;
  std::vector<ExprPtr> disjuncts = e->isUnion() ? e->kids : std::vector<ExprPtr>{e};
  for (const auto& d : disjuncts)
    if (!isParameterizedConjunct(d)) return false;
  return true;
}

inline FormClass classifyExpr(const ExprPtr& e) {
  if (isRegularForm(e)) return FormClass::Regular;
  if (isParameterizedForm(e)) return FormClass::Parameterized;
  if (isTopLevelForm(e)) return FormClass::TopLevel;
  return FormClass::General;
}

} // namespace rti
