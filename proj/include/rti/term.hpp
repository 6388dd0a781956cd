#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rti/errors.hpp"

namespace rti {

class Term;
using TermPtr = std::shared_ptr<const Term>;

/// The functor used for list cells and the nil constant.
inline const std::string kConsFunctor = ".";
inline const std::string kNilFunctor = "[]";

// ---------------------------------------------------------------------------
// Terms of the analyzed program. A term is either a variable or a compound
// f(t1,...,tn); constants are compounds of arity zero. Lists are cells of
// the "." functor terminated by the "[]" constant.
// ---------------------------------------------------------------------------
class Term {
public:
  static TermPtr variable(std::string name) {
    return TermPtr(new Term(true, std::move(name), {}));
  }

  static TermPtr compound(std::string functor, std::vector<TermPtr> args = {}) {
    return TermPtr(new Term(false, std::move(functor), std::move(args)));
  }

  static TermPtr nil() { return compound(kNilFunctor); }

  static TermPtr cons(TermPtr head, TermPtr tail) {
    return compound(kConsFunctor, {std::move(head), std::move(tail)});
  }

  static TermPtr list(const std::vector<TermPtr>& items) {
    TermPtr t = nil();
    for (auto it = items.rbegin(); it != items.rend(); ++it) t = cons(*it, t);
    return t;
  }

  bool isVariable() const { return variable_; }
  bool isCompound() const { return !variable_; }
  bool isConstant() const { return !variable_ && args_.empty(); }
  const std::string& name() const { return name_; }
  const std::vector<TermPtr>& args() const { return args_; }
  std::size_t arity() const { return args_.size(); }

  bool isGround() const {
    if (variable_) return false;
    for (const auto& a : args_)
      if (!a->isGround()) return false;
    return true;
  }

  /// Term depth: 1 for variables and constants, 1 + max arg depth otherwise.
  int depth() const {
    int d = 0;
    for (const auto& a : args_) d = std::max(d, a->depth());
    return d + 1;
  }

  void collectVariables(std::vector<std::string>& out) const {
    if (variable_) {
      out.push_back(name_);
      return;
    }
    for (const auto& a : args_) a->collectVariables(out);
  }

  std::set<std::string> variables() const {
    std::vector<std::string> vs;
    collectVariables(vs);
    return std::set<std::string>(vs.begin(), vs.end());
  }

  std::string str() const {
    std::ostringstream os;
    print(os);
    return os.str();
  }

  void print(std::ostream& os) const {
    if (variable_) {
      os << name_;
      return;
    }
    if (name_ == kNilFunctor && args_.empty()) {
      os << "[]";
      return;
    }
    if (name_ == kConsFunctor && args_.size() == 2) {
      os << '[';
      args_[0]->print(os);
      const Term* tail = args_[1].get();
      while (tail->isCompound() && tail->name() == kConsFunctor && tail->arity() == 2) {
        os << ',';
        tail->args()[0]->print(os);
        tail = tail->args()[1].get();
      }
      if (!(tail->isCompound() && tail->name() == kNilFunctor && tail->arity() == 0)) {
        os << '|';
        tail->print(os);
      }
      os << ']';
      return;
    }
    os << name_;
    if (!args_.empty()) {
      os << '(';
      for (std::size_t i = 0; i < args_.size(); ++i) {
        if (i) os << ',';
        args_[i]->print(os);
      }
      os << ')';
    }
  }

private:
  Term(bool v, std::string n, std::vector<TermPtr> a)
      : variable_(v), name_(std::move(n)), args_(std::move(a)) {}

  bool variable_;
  std::string name_;
  std::vector<TermPtr> args_;
};

/// Total structural order; variables sort before compounds, compounds by
/// (arity, functor, arguments).
inline int compareTerms(const TermPtr& a, const TermPtr& b) {
  if (a->isVariable() != b->isVariable()) return a->isVariable() ? -1 : 1;
  if (a->isVariable()) return a->name().compare(b->name());
  if (a->arity() != b->arity()) return a->arity() < b->arity() ? -1 : 1;
  if (int c = a->name().compare(b->name())) return c;
  for (std::size_t i = 0; i < a->arity(); ++i)
    if (int c = compareTerms(a->args()[i], b->args()[i])) return c;
  return 0;
}

inline bool equalTerms(const TermPtr& a, const TermPtr& b) { return compareTerms(a, b) == 0; }

struct TermLess {
  bool operator()(const TermPtr& a, const TermPtr& b) const { return compareTerms(a, b) < 0; }
};

using TermSet = std::set<TermPtr, TermLess>;

/// Structural set equality (std::set's operator== would compare pointers).
inline bool equalTermSets(const TermSet& a, const TermSet& b) {
  if (a.size() != b.size()) return false;
  auto it = b.begin();
  for (const auto& t : a) {
    if (compareTerms(t, *it) != 0) return false;
    ++it;
  }
  return true;
}

/// Applies a variable renaming to a term.
inline TermPtr renameTerm(const TermPtr& t, const std::map<std::string, std::string>& ren) {
  if (t->isVariable()) {
    auto it = ren.find(t->name());
    return it == ren.end() ? t : Term::variable(it->second);
  }
  if (t->isGround()) return t;
  std::vector<TermPtr> args;
  args.reserve(t->arity());
  for (const auto& a : t->args()) args.push_back(renameTerm(a, ren));
  return Term::compound(t->name(), std::move(args));
}

// ---------------------------------------------------------------------------
// Atoms, clauses, programs.
// ---------------------------------------------------------------------------

using PredicateId = std::pair<std::string, int>; // name / arity

inline std::string predicateName(const PredicateId& p) {
  return p.first + "/" + std::to_string(p.second);
}

struct Atom {
  std::string predicate;
  std::vector<TermPtr> args;

  PredicateId id() const { return {predicate, static_cast<int>(args.size())}; }

  std::string str() const {
    std::ostringstream os;
    os << predicate;
    if (!args.empty()) {
      os << '(';
      for (std::size_t i = 0; i < args.size(); ++i) {
        if (i) os << ',';
        args[i]->print(os);
      }
      os << ')';
    }
    return os.str();
  }
};

struct Clause {
  Atom head;
  std::vector<Atom> body;
  /// Bindings recorded by head normalization: the fresh head variable and
  /// the ground term it replaced. Emitted as body equations.
  std::vector<std::pair<std::string, TermPtr>> headBindings;

  bool isFact() const { return body.empty(); }

  std::string str() const {
    std::ostringstream os;
    os << head.str();
    if (!body.empty()) {
      os << " :- ";
      for (std::size_t i = 0; i < body.size(); ++i) {
        if (i) os << ", ";
        os << body[i].str();
      }
    }
    os << '.';
    return os.str();
  }
};

struct Program {
  std::vector<Clause> clauses;
  std::optional<Atom> entry; // from an ":- entry p(...)" directive

  std::set<PredicateId> predicates() const {
    std::set<PredicateId> out;
    for (const auto& c : clauses) out.insert(c.head.id());
    return out;
  }

  std::vector<const Clause*> clausesOf(const PredicateId& p) const {
    std::vector<const Clause*> out;
    for (const auto& c : clauses)
      if (c.head.id() == p) out.push_back(&c);
    return out;
  }

  std::string str() const {
    std::ostringstream os;
    for (const auto& c : clauses) os << c.str() << '\n';
    return os.str();
  }
};

/// A predicate signature: one fresh set variable per argument position.
struct Signature {
  PredicateId predicate;
  std::vector<std::string> vars;
};

} // namespace rti
