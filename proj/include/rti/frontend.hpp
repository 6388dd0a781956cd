#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "rti/parser.hpp"
#include "rti/term.hpp"

namespace rti {

// ---------------------------------------------------------------------------
// Variable name supply. All set variables created during an analysis come
// from one supply so they are globally unique and runs are deterministic.
// ---------------------------------------------------------------------------
class NameSupply {
public:
  void reserve(const std::string& name) { used_.insert(name); }

  bool isUsed(const std::string& name) const { return used_.count(name) != 0; }

  /// Next unused name with the given prefix and a per-prefix counter.
  std::string fresh(const std::string& prefix) {
    int& n = counters_[prefix];
    std::string name;
    do {
      name = prefix + std::to_string(++n);
    } while (used_.count(name));
    used_.insert(name);
    return name;
  }

  /// Reserves a specific name, derives a unique variant if it is taken.
  std::string claim(const std::string& name) {
    if (!used_.count(name)) {
      used_.insert(name);
      return name;
    }
    int n = 0;
    std::string variant;
    do {
      variant = name + "_" + std::to_string(++n);
    } while (used_.count(variant));
    used_.insert(variant);
    return variant;
  }

private:
  std::set<std::string> used_;
  std::map<std::string, int> counters_;
};

// ---------------------------------------------------------------------------
// Frontend passes.
// ---------------------------------------------------------------------------

/// Checks that every body atom resolves to a defined predicate. Returns the
/// set of unknown predicates; callers decide whether that is fatal.
inline std::set<PredicateId> undefinedPredicates(const Program& prog) {
  std::set<PredicateId> defined = prog.predicates();
  std::set<PredicateId> unknown;
  for (const auto& c : prog.clauses)
    for (const auto& a : c.body)
      if (!defined.count(a.id())) unknown.insert(a.id());
  if (prog.entry && !defined.count(prog.entry->id())) unknown.insert(prog.entry->id());
  return unknown;
}

inline void requireDefinedPredicates(const Program& prog) {
  auto unknown = undefinedPredicates(prog);
  if (unknown.empty()) return;
  std::string msg = "unknown predicate(s):";
  for (const auto& p : unknown) msg += " " + predicateName(p);
  throw UnknownPredicateError(msg);
}

/// Renames clauses apart: variables of clause k get the suffix "_c<k>".
/// Clause indices are 1-based in source order.
inline Program renameApart(const Program& prog, NameSupply* supply = nullptr) {
  Program out;
  out.entry = prog.entry;
  int index = 0;
  for (const auto& clause : prog.clauses) {
    ++index;
    std::map<std::string, std::string> ren;
    auto renameAtom = [&](const Atom& a) {
      Atom r;
      r.predicate = a.predicate;
      for (const auto& t : a.args) {
        std::vector<std::string> vars;
        t->collectVariables(vars);
        for (const auto& v : vars)
          if (!ren.count(v)) {
            std::string fresh = v + "_c" + std::to_string(index);
            ren[v] = fresh;
            if (supply) supply->reserve(fresh);
          }
        r.args.push_back(renameTerm(t, ren));
      }
      return r;
    };
    Clause c;
    c.head = renameAtom(clause.head);
    for (const auto& a : clause.body) c.body.push_back(renameAtom(a));
    out.clauses.push_back(std::move(c));
  }
  return out;
}

/// Replaces every fully ground head argument t by a fresh variable Y and
/// records the binding (Y, t) on the clause; equation generation later emits
/// Y = t as a body equation. After this pass every head argument contains at
/// least one variable, which failure propagation relies on.
inline Program normalizeHeads(const Program& prog, NameSupply& supply) {
  Program out;
  out.entry = prog.entry;
  for (const auto& clause : prog.clauses) {
    Clause c = clause;
    for (auto& arg : c.head.args) {
      if (arg->isGround()) {
        std::string y = supply.fresh("Y");
        c.headBindings.emplace_back(y, arg);
        arg = Term::variable(y);
      }
    }
    out.clauses.push_back(std::move(c));
  }
  return out;
}

/// One signature per predicate: fresh variables named from the predicate.
/// An arity-1 predicate p gets the single variable P; higher arities are
/// numbered (append/3 -> A1,A2,A3). Prefixes are extended on collision.
inline std::map<PredicateId, Signature> makeSignatures(const Program& prog, NameSupply& supply) {
  std::map<PredicateId, Signature> sigs;
  for (const auto& pred : prog.predicates()) {
    Signature sig;
    sig.predicate = pred;
    const std::string& name = pred.first;
    std::vector<std::string> chosen;
    for (std::size_t len = 1; len <= name.size() && chosen.empty(); ++len) {
      std::string prefix = name.substr(0, len);
      prefix[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(prefix[0])));
      std::vector<std::string> candidate;
      bool ok = true;
      for (int j = 1; j <= pred.second; ++j) {
        std::string v = pred.second == 1 ? prefix : prefix + std::to_string(j);
        if (supply.isUsed(v)) {
          ok = false;
          break;
        }
        candidate.push_back(v);
      }
      if (ok) chosen = candidate;
    }
    if (chosen.empty() && pred.second > 0) {
      for (int j = 1; j <= pred.second; ++j) {
        std::string base = name;
        base[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(base[0])));
        chosen.push_back(supply.claim(base + "v" + std::to_string(j)));
      }
    } else {
      for (const auto& v : chosen) supply.reserve(v);
    }
    sig.vars = chosen;
    sigs[pred] = std::move(sig);
  }
  return sigs;
}

// ---------------------------------------------------------------------------
// Structural equality modulo variable renaming, used for round-trip tests.
// ---------------------------------------------------------------------------
inline bool alphaEqualTerms(const TermPtr& a, const TermPtr& b,
                            std::map<std::string, std::string>& fwd,
                            std::map<std::string, std::string>& bwd) {
  if (a->isVariable() != b->isVariable()) return false;
  if (a->isVariable()) {
    auto f = fwd.find(a->name());
    auto g = bwd.find(b->name());
    if (f == fwd.end() && g == bwd.end()) {
      fwd[a->name()] = b->name();
      bwd[b->name()] = a->name();
      return true;
    }
    return f != fwd.end() && g != bwd.end() && f->second == b->name() && g->second == a->name();
  }
  if (a->name() != b->name() || a->arity() != b->arity()) return false;
  for (std::size_t i = 0; i < a->arity(); ++i)
    if (!alphaEqualTerms(a->args()[i], b->args()[i], fwd, bwd)) return false;
  return true;
}

inline bool alphaEqualClauses(const Clause& a, const Clause& b) {
  if (a.head.predicate != b.head.predicate || a.head.args.size() != b.head.args.size())
    return false;
  if (a.body.size() != b.body.size()) return false;
  std::map<std::string, std::string> fwd, bwd;
  for (std::size_t i = 0; i < a.head.args.size(); ++i)
    if (!alphaEqualTerms(a.head.args[i], b.head.args[i], fwd, bwd)) return false;
  for (std::size_t i = 0; i < a.body.size(); ++i) {
    if (a.body[i].predicate != b.body[i].predicate || a.body[i].args.size() != b.body[i].args.size())
      return false;
    for (std::size_t j = 0; j < a.body[i].args.size(); ++j)
      if (!alphaEqualTerms(a.body[i].args[j], b.body[i].args[j], fwd, bwd)) return false;
  }
  return true;
}

inline bool alphaEqualPrograms(const Program& a, const Program& b) {
  if (a.clauses.size() != b.clauses.size()) return false;
  for (std::size_t i = 0; i < a.clauses.size(); ++i)
    if (!alphaEqualClauses(a.clauses[i], b.clauses[i])) return false;
  return true;
}

} // namespace rti
