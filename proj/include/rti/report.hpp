#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rti/system.hpp"

namespace rti {

// ---------------------------------------------------------------------------
// Projection. Restricts a solved system to the equations reachable from the
// signature variables and normalizes it for output: alias equations are
// chased, a signature variable that aliases a free parameter donates its
// name to the parameter, variables with equal definitions are merged (the
// signature variables survive as representatives), and unions of
// constructor alternatives differing in a single argument are folded
// together. All steps preserve the least-solution meaning of the roots.
// ---------------------------------------------------------------------------

namespace detail {

inline std::set<std::string> reachableFrom(const EquationSystem& sys,
                                           const std::vector<std::string>& roots) {
  std::set<std::string> seen;
  std::vector<std::string> work(roots.begin(), roots.end());
  while (!work.empty()) {
    std::string v = work.back();
    work.pop_back();
    if (seen.count(v)) continue;
    seen.insert(v);
    if (const ExprPtr* rhs = sys.lookup(v)) {
      std::set<std::string> vs;
      collectExprVars(*rhs, vs);
      for (const auto& w : vs)
        if (!seen.count(w)) work.push_back(w);
    }
  }
  return seen;
}

class Projector {
public:
  Projector(const EquationSystem& solved, const std::vector<std::string>& roots)
      : roots_(roots) {
    for (const auto& v : reachableFrom(solved, roots))
      if (const ExprPtr* rhs = solved.lookup(v)) sys_.set(v, *rhs);
  }

  EquationSystem run() {
    for (int guard = 0; guard < 1000; ++guard) {
      bool changed = chaseAliases();
      changed = mergeIdentical() || changed;
      changed = mergeUnions() || changed;
      if (!changed) break;
    }
    dropUnreachable();
    return sys_;
  }

private:
  bool isRoot(const std::string& v) const {
    return std::find(roots_.begin(), roots_.end(), v) != roots_.end();
  }

  void replaceVar(const std::string& from, const std::string& to) {
    renamed_[from] = to;
    ExprPtr repl = SetExpr::var(to);
    std::vector<std::pair<std::string, ExprPtr>> updates;
    for (const auto& [lhs, rhs] : sys_.equations()) {
      ExprPtr next = substEverywhere(rhs, from, repl);
      if (!equalExprs(next, rhs)) updates.emplace_back(lhs, next);
    }
    for (auto& [lhs, next] : updates) sys_.set(lhs, std::move(next));
  }

  /// Follows merges: the variable a memo entry points to may have been
  /// folded into another one since.
  std::string currentName(std::string n) const {
    while (renamed_.count(n)) n = renamed_.at(n);
    return n;
  }

  bool chaseAliases() {
    bool changed = false;
    std::vector<std::string> names;
    for (const auto& [lhs, rhs] : sys_.equations()) names.push_back(lhs);
    for (const auto& x : names) {
      if (!sys_.defines(x)) continue;
      const ExprPtr& rhs = sys_.rhs(x);
      if (!rhs->isVar()) continue;
      std::string v = rhs->sym;
      if (v == x) continue;
      if (sys_.defines(v)) {
        sys_.set(x, sys_.rhs(v)); // alias to a defined variable: take its definition
        changed = true;
      } else if (isRoot(x) && !isRoot(v) && !claimed_.count(v)) {
        // a signature variable aliasing a free parameter donates its name
        claimed_.insert(x);
        sys_.erase(x);
        replaceVar(v, x);
        changed = true;
      } else if (!isRoot(x)) {
        // an internal alias of a parameter disappears into the parameter
        sys_.erase(x);
        replaceVar(x, v);
        changed = true;
      }
    }
    return changed;
  }

  std::string mergeKey(const std::string& lhs, const ExprPtr& rhs, bool placeholder) const {
    ExprPtr e = rhs;
    if (placeholder) e = substEverywhere(e, lhs, SetExpr::var("\x01self"));
    return exprToString(e);
  }

  bool mergeIdentical() {
    for (bool placeholder : {false, true}) {
      std::map<std::string, std::string> byKey;
      std::vector<std::string> order = preferenceOrder();
      for (const auto& x : order) {
        if (!sys_.defines(x)) continue;
        std::string key = mergeKey(x, sys_.rhs(x), placeholder);
        auto it = byKey.find(key);
        if (it == byKey.end()) {
          byKey.emplace(std::move(key), x);
          continue;
        }
        if (isRoot(x)) continue; // roots keep their own equations
        sys_.erase(x);
        replaceVar(x, it->second);
        return true;
      }
    }
    return false;
  }

  /// Preference: roots in their given order, then remaining names sorted.
  std::vector<std::string> preferenceOrder() const {
    std::vector<std::string> order;
    for (const auto& r : roots_)
      if (sys_.defines(r)) order.push_back(r);
    for (const auto& [lhs, rhs] : sys_.equations())
      if (!isRoot(lhs)) order.push_back(lhs);
    return order;
  }

  /// Folds two plain constructor alternatives differing in exactly one
  /// argument position into one, introducing (or reusing) a variable for
  /// the union of the two argument types.
  bool mergeUnions() {
    std::vector<std::string> names;
    for (const auto& [lhs, rhs] : sys_.equations()) names.push_back(lhs);
    for (const auto& x : names) {
      const ExprPtr& rhs = sys_.rhs(x);
      if (!rhs->isUnion()) continue;
      const auto& ds = rhs->kids;
      for (std::size_t i = 0; i < ds.size(); ++i) {
        if (!ds[i]->isCons()) continue;
        for (std::size_t j = i + 1; j < ds.size(); ++j) {
          if (!ds[j]->isCons()) continue;
          if (ds[i]->sym != ds[j]->sym || ds[i]->kids.size() != ds[j]->kids.size()) continue;
          int diff = -1;
          bool mergeable = true;
          for (std::size_t k = 0; k < ds[i]->kids.size(); ++k) {
            if (equalExprs(ds[i]->kids[k], ds[j]->kids[k])) continue;
            if (diff != -1 || !ds[i]->kids[k]->isVar() || !ds[j]->kids[k]->isVar()) {
              mergeable = false;
              break;
            }
            diff = static_cast<int>(k);
          }
          if (!mergeable || diff == -1) continue;
          std::string u =
              unionVar(ds[i]->kids[diff]->sym, ds[j]->kids[diff]->sym);
          std::vector<ExprPtr> args = ds[i]->kids;
          args[diff] = SetExpr::var(u);
          std::vector<ExprPtr> next;
          for (std::size_t k = 0; k < ds.size(); ++k)
            if (k != i && k != j) next.push_back(ds[k]);
          next.push_back(SetExpr::cons(ds[i]->sym, std::move(args)));
          sys_.set(x, makeUnion(std::move(next)));
          return true;
        }
      }
    }
    return false;
  }

  std::string unionVar(const std::string& a, const std::string& b) {
    std::pair<std::string, std::string> key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
    auto it = unionMemo_.find(key);
    if (it != unionMemo_.end()) return currentName(it->second);
    std::string u = "U" + std::to_string(++unionCounter_) + "_" + key.first;
    unionMemo_.emplace(key, u);
    auto inline_ = [this](const std::string& v) {
      return sys_.defines(v) ? sys_.rhs(v) : SetExpr::var(v);
    };
    sys_.set(u, makeUnion2(inline_(a), inline_(b)));
    return u;
  }

  void dropUnreachable() {
    std::set<std::string> keep = reachableFrom(sys_, roots_);
    std::vector<std::string> gone;
    for (const auto& [lhs, rhs] : sys_.equations())
      if (!keep.count(lhs)) gone.push_back(lhs);
    for (const auto& v : gone) sys_.erase(v);
  }

  EquationSystem sys_;
  std::vector<std::string> roots_;
  std::set<std::string> claimed_;
  std::map<std::string, std::string> renamed_;
  std::map<std::pair<std::string, std::string>, std::string> unionMemo_;
  int unionCounter_ = 0;
};

} // namespace detail

/// Projects a solved system onto the given signature variables.
inline EquationSystem project(const EquationSystem& solved,
                              const std::vector<std::string>& sigVars) {
  return detail::Projector(solved, sigVars).run();
}

inline EquationSystem project(const EquationSystem& solved, const Signature& sig) {
  return project(solved, sig.vars);
}

// ---------------------------------------------------------------------------
// Type report: display renaming, pretty-printing and per-argument flags.
// ---------------------------------------------------------------------------

struct ArgReport {
  int position = 0;            // 1-based
  std::string typeSymbol;
  bool any = false;
  bool empty = false;
};

struct TypeDefLine {
  std::string symbol;
  std::vector<std::string> alternatives;
};

struct PredicateReport {
  PredicateId predicate;
  std::vector<std::string> sigVars;     // display names, arg order
  std::vector<ArgReport> args;
  std::vector<TypeDefLine> types;
};

struct TypeReport {
  std::vector<PredicateReport> predicates;
  std::vector<std::string> parameters; // display names of free parameters
  int descriptors = 0;
  int nonAny = 0;
  int emptyDetected = 0;
};

namespace detail {

/// Deterministic display names: signature variables keep their names, free
/// parameters become X, Y, Z, X1, ... and other defined variables T1, T2...
class DisplayNames {
public:
  void reserveSignature(const std::vector<std::string>& sigVars) {
    for (const auto& v : sigVars) names_[v] = v;
  }

  std::string paramName(const std::string& v) {
    auto it = names_.find(v);
    if (it != names_.end()) return it->second;
    static const char* wheel[] = {"X", "Y", "Z"};
    std::string name = paramCount_ < 3 ? wheel[paramCount_]
                                       : "X" + std::to_string(paramCount_ - 2);
    ++paramCount_;
    names_[v] = name;
    params_.push_back(name);
    return name;
  }

  std::string internalName(const std::string& v) {
    auto it = names_.find(v);
    if (it != names_.end()) return it->second;
    std::string name = "T" + std::to_string(++internalCount_);
    names_[v] = name;
    return name;
  }

  const std::vector<std::string>& params() const { return params_; }

private:
  std::map<std::string, std::string> names_;
  std::vector<std::string> params_;
  int paramCount_ = 0;
  int internalCount_ = 0;
};

inline std::string renderAlt(const ExprPtr& e, const std::map<std::string, std::string>& names) {
  auto display = [&](const std::string& v) {
    auto it = names.find(v);
    return it == names.end() ? v : it->second;
  };
  switch (e->kind) {
    case ExprKind::Empty:
      return "0";
    case ExprKind::Var:
      return display(e->sym);
    case ExprKind::Cons: {
      if (e->sym == kNilFunctor && e->kids.empty()) return "[]";
      if (e->sym == kConsFunctor && e->kids.size() == 2)
        return "[" + renderAlt(e->kids[0], names) + "|" + renderAlt(e->kids[1], names) + "]";
      std::string out = e->sym;
      if (!e->kids.empty()) {
        out += "(";
        for (std::size_t i = 0; i < e->kids.size(); ++i) {
          if (i) out += ",";
          out += renderAlt(e->kids[i], names);
        }
        out += ")";
      }
      return out;
    }
    case ExprKind::Inter: {
      std::string out;
      for (std::size_t i = 0; i < e->kids.size(); ++i) {
        if (i) out += " /\\ ";
        out += renderAlt(e->kids[i], names);
      }
      return out;
    }
    case ExprKind::Union: {
      std::string out;
      for (std::size_t i = 0; i < e->kids.size(); ++i) {
        if (i) out += " | ";
        out += renderAlt(e->kids[i], names);
      }
      return out;
    }
  }
  return "?";
}

} // namespace detail

/// Builds the report for the given predicates. Each predicate comes with
/// its signature and its projected system; parameter names are assigned
/// program-wide so shared parameters keep one name everywhere.
inline TypeReport buildReport(
    const std::vector<std::pair<Signature, const EquationSystem*>>& inputs) {
  TypeReport report;
  detail::DisplayNames display;
  std::map<std::string, std::string> nameMap;

  for (const auto& [sig, sys] : inputs) display.reserveSignature(sig.vars);

  // Pass 1: classify parameters vs internal symbols in deterministic order.
  for (const auto& [sig, sys] : inputs) {
    std::set<std::string> seen;
    std::vector<std::string> frontier = sig.vars;
    std::vector<std::string> bfs;
    while (!frontier.empty()) {
      std::vector<std::string> next;
      for (const auto& v : frontier) {
        if (seen.count(v)) continue;
        seen.insert(v);
        bfs.push_back(v);
        if (const ExprPtr* rhs = sys->lookup(v)) {
          std::set<std::string> vs;
          collectExprVars(*rhs, vs);
          for (const auto& w : vs) next.push_back(w);
        }
      }
      frontier = std::move(next);
    }
    for (const auto& v : bfs) {
      bool isSig = std::find(sig.vars.begin(), sig.vars.end(), v) != sig.vars.end();
      std::string name;
      if (isSig)
        name = v;
      else if (!sys->defines(v))
        name = display.paramName(v);
      else
        name = display.internalName(v);
      nameMap.emplace(v, name);
    }
  }

  for (const auto& [sig, sys] : inputs) {
    PredicateReport pr;
    pr.predicate = sig.predicate;
    NonEmptyMarking marking(*sys);
    for (std::size_t j = 0; j < sig.vars.size(); ++j) {
      const std::string& v = sig.vars[j];
      pr.sigVars.push_back(nameMap.count(v) ? nameMap.at(v) : v);
      ArgReport arg;
      arg.position = static_cast<int>(j) + 1;
      // chase single-variable definitions to the representative
      std::string rep = v;
      std::set<std::string> seen;
      while (sys->defines(rep) && sys->rhs(rep)->isVar() && !seen.count(rep)) {
        seen.insert(rep);
        rep = sys->rhs(rep)->sym;
      }
      arg.any = !sys->defines(rep);
      arg.empty = sys->defines(rep) && marking.empty(rep);
      arg.typeSymbol = nameMap.count(rep) ? nameMap.at(rep) : rep;
      pr.args.push_back(arg);
      ++report.descriptors;
      if (!arg.any) ++report.nonAny;
      if (arg.empty) ++report.emptyDetected;
    }
    // type definition lines: signature variables first, then the rest of
    // the reachable definitions in display order
    std::vector<std::string> lineVars;
    for (const auto& v : sig.vars)
      if (sys->defines(v)) lineVars.push_back(v);
    std::vector<std::pair<std::string, std::string>> rest; // display -> internal
    for (const auto& [lhs, rhs] : sys->equations())
      if (std::find(sig.vars.begin(), sig.vars.end(), lhs) == sig.vars.end())
        rest.emplace_back(nameMap.count(lhs) ? nameMap.at(lhs) : lhs, lhs);
    std::sort(rest.begin(), rest.end());
    for (const auto& [disp, v] : rest) lineVars.push_back(v);

    for (const auto& v : lineVars) {
      TypeDefLine line;
      line.symbol = nameMap.count(v) ? nameMap.at(v) : v;
      const ExprPtr& rhs = sys->rhs(v);
      if (rhs->isUnion())
        for (const auto& d : rhs->kids) line.alternatives.push_back(detail::renderAlt(d, nameMap));
      else
        line.alternatives.push_back(detail::renderAlt(rhs, nameMap));
      pr.types.push_back(std::move(line));
    }
    report.predicates.push_back(std::move(pr));
  }
  report.parameters = display.params();
  return report;
}

/// The `:- type` declaration view of a report.
inline std::string prettify(const TypeReport& report) {
  std::ostringstream os;
  bool first = true;
  for (const auto& pr : report.predicates) {
    if (!first) os << '\n';
    first = false;
    os << "% " << predicateName(pr.predicate) << '\n';
    os << ":- typing " << pr.predicate.first;
    if (!pr.sigVars.empty()) {
      os << '(';
      for (std::size_t i = 0; i < pr.sigVars.size(); ++i) {
        if (i) os << ',';
        os << pr.sigVars[i];
      }
      os << ')';
    }
    os << ".\n";
    for (const auto& line : pr.types) {
      os << ":- type " << line.symbol << " -> ";
      for (std::size_t i = 0; i < line.alternatives.size(); ++i) {
        if (i) os << " | ";
        os << line.alternatives[i];
      }
      os << ".\n";
    }
  }
  return os.str();
}

inline nlohmann::json reportToJson(const TypeReport& report) {
  nlohmann::json out;
  out["predicates"] = nlohmann::json::array();
  for (const auto& pr : report.predicates) {
    nlohmann::json jp;
    jp["predicate"] = pr.predicate.first;
    jp["arity"] = pr.predicate.second;
    jp["args"] = nlohmann::json::array();
    for (const auto& a : pr.args)
      jp["args"].push_back({{"position", a.position},
                            {"typeSymbol", a.typeSymbol},
                            {"any", a.any},
                            {"empty", a.empty}});
    jp["types"] = nlohmann::json::array();
    for (const auto& t : pr.types)
      jp["types"].push_back({{"symbol", t.symbol}, {"alternatives", t.alternatives}});
    out["predicates"].push_back(std::move(jp));
  }
  out["parameters"] = report.parameters;
  out["stats"] = {{"descriptors", report.descriptors},
                  {"nonAny", report.nonAny},
                  {"emptyDetected", report.emptyDetected}};
  return out;
}

} // namespace rti
