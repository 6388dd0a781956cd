#pragma once

#include <deque>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "rti/callgraph.hpp"
#include "rti/frontend.hpp"
#include "rti/system.hpp"

namespace rti {

struct SolveOptions {
  bool bind = true;
  bool propagateFailure = true;
  int maxIterations = 100;
  int bindDnfLimit = 4096;
  std::ostream* trace = nullptr;
};

struct SolveStats {
  int outerIterations = 0;
  std::size_t memoEntries = 0;
  std::size_t baseVars = 0;
  std::vector<std::string> bindings;  // synthesized by BIND, printed form
  std::vector<std::string> caseRules; // recurrence reductions, printed form
  bool bindOverflow = false;
};

/// Published result for one predicate: its signature and the projected
/// solved system defining the signature variables.
struct Solution {
  Signature sig;
  EquationSystem types;
  bool allClausesDead = false;
};

// ---------------------------------------------------------------------------
// Per-level generation context. Equation generation attributes every
// generated variable to the clause it came from; failure propagation uses
// that attribution to find clauses that can never succeed.
// ---------------------------------------------------------------------------

struct ClauseInfo {
  int id = -1; // index into the analyzed program's clause list
  const Clause* clause = nullptr;
  std::set<std::string> vars;        // clause variables plus generated ones
  std::vector<std::string> headVars; // variables of the (normalized) head
  std::vector<PredicateId> bodyPreds;
};

struct LevelContext {
  std::vector<PredicateId> preds;
  EquationSystem initial; // before top-level rewriting, for dumps
  EquationSystem eqP;     // frozen top-level system the solver starts from
  std::vector<std::string> order;
  std::vector<ClauseInfo> clauses;
  std::map<std::string, std::vector<std::pair<int, ExprPtr>>> headDisjuncts;
  std::map<PredicateId, std::vector<std::string>> sigVarsOf; // per level predicate
  /// Clause a variable belongs to. Clause variables, generated helper
  /// variables and all variables of a call site's solution copy belong to
  /// the clause of that call site; signature variables belong to none.
  std::map<std::string, int> varOwner;
  /// Clause an original equation was generated from (-1 for head equations).
  std::map<std::string, int> eqClause;
  NameSupply* supply = nullptr;
};

/// Renames a published solution apart for one call site: every variable,
/// including free parameters, gets the suffix "_s<site>".
inline Solution instantiateSolution(const Solution& sol, int siteIndex, NameSupply& supply) {
  std::set<std::string> names(sol.sig.vars.begin(), sol.sig.vars.end());
  for (const auto& [lhs, rhs] : sol.types.equations()) {
    names.insert(lhs);
    collectExprVars(rhs, names);
  }
  std::map<std::string, std::string> ren;
  for (const auto& n : names) ren[n] = supply.claim(n + "_s" + std::to_string(siteIndex));

  auto renameExpr = [&](const ExprPtr& e) {
    ExprPtr r = e;
    for (const auto& [from, to] : ren) r = substEverywhere(r, from, SetExpr::var(to));
    return r;
  };

  Solution out;
  out.allClausesDead = sol.allClausesDead;
  out.sig.predicate = sol.sig.predicate;
  for (const auto& v : sol.sig.vars) out.sig.vars.push_back(ren.at(v));
  for (const auto& [lhs, rhs] : sol.types.equations()) out.types.set(ren.at(lhs), renameExpr(rhs));
  return out;
}

/// Builds the equation system for one SCC of the call graph. Lower-level
/// callees must have published solutions; one renamed copy is added per
/// body atom occurrence. `siteCounter` numbers those copies across the
/// whole analysis so runs are reproducible.
inline LevelContext generateEquations(const std::vector<PredicateId>& levelPreds,
                                      const Program& prog,
                                      const std::map<PredicateId, Signature>& sigs,
                                      const std::map<PredicateId, Solution>& lowerSolutions,
                                      NameSupply& supply, int& siteCounter) {
  LevelContext ctx;
  ctx.preds = levelPreds;
  ctx.supply = &supply;
  std::set<PredicateId> level(levelPreds.begin(), levelPreds.end());
  for (const auto& p : levelPreds) ctx.sigVarsOf[p] = sigs.at(p).vars;

  struct AtomSite {
    std::vector<std::string> sigVars;
  };

  // Clause bookkeeping and per-atom signatures (copies for lower levels).
  std::map<int, std::vector<AtomSite>> atomSigs;
  std::vector<std::pair<Solution, int>> copies; // copy + owning clause
  std::vector<std::pair<Equation, int>> deadMarkers;
  for (int ci = 0; ci < static_cast<int>(prog.clauses.size()); ++ci) {
    const Clause& clause = prog.clauses[ci];
    if (!level.count(clause.head.id())) continue;
    ClauseInfo info;
    info.id = ci;
    info.clause = &clause;
    for (const auto& arg : clause.head.args) {
      for (const auto& v : arg->variables()) info.vars.insert(v);
      std::vector<std::string> hv;
      arg->collectVariables(hv);
      for (const auto& v : hv) info.headVars.push_back(v);
    }
    for (const auto& [y, t] : clause.headBindings) info.vars.insert(y);
    std::vector<AtomSite>& sites = atomSigs[ci];
    for (const auto& atom : clause.body) {
      for (const auto& arg : atom.args)
        for (const auto& v : arg->variables()) info.vars.insert(v);
      info.bodyPreds.push_back(atom.id());
      AtomSite site;
      if (level.count(atom.id())) {
        site.sigVars = sigs.at(atom.id()).vars;
      } else {
        auto it = lowerSolutions.find(atom.id());
        if (it == lowerSolutions.end())
          throw InternalError("no solution for " + predicateName(atom.id()));
        Solution copy = instantiateSolution(it->second, ++siteCounter, supply);
        site.sigVars = copy.sig.vars;
        for (const auto& v : copy.sig.vars) ctx.varOwner[v] = ci;
        for (const auto& [lhs, rhs] : copy.types.equations()) {
          ctx.varOwner[lhs] = ci;
          std::set<std::string> vs;
          collectExprVars(rhs, vs);
          for (const auto& v : vs) ctx.varOwner[v] = ci;
        }
        if (copy.allClausesDead) {
          std::string w = supply.fresh("W");
          info.vars.insert(w);
          deadMarkers.push_back({{w, SetExpr::empty()}, ci});
        }
        copies.push_back({std::move(copy), ci});
      }
      sites.push_back(std::move(site));
    }
    for (const auto& v : info.vars) ctx.varOwner[v] = ci;
    ctx.clauses.push_back(std::move(info));
  }

  auto clauseInfoOf = [&](int id) -> ClauseInfo& {
    for (auto& c : ctx.clauses)
      if (c.id == id) return c;
    throw InternalError("clause lookup failed");
  };

  auto addEquation = [&](const std::string& lhs, const ExprPtr& raw, int clauseId) {
    ctx.initial.add({lhs, raw});
    ctx.eqClause[lhs] = clauseId;
    if (clauseId >= 0 && !ctx.varOwner.count(lhs)) ctx.varOwner[lhs] = clauseId;
    std::vector<Equation> fresh;
    ExprPtr flat = toTopLevelExpr(raw, supply, fresh);
    ctx.eqP.add({lhs, flat});
    ctx.order.push_back(lhs);
    for (const auto& q : fresh) {
      ctx.eqP.add(q);
      ctx.initial.add(q);
      ctx.order.push_back(q.lhs);
      ctx.eqClause[q.lhs] = clauseId;
      if (clauseId >= 0) {
        clauseInfoOf(clauseId).vars.insert(q.lhs);
        ctx.varOwner[q.lhs] = clauseId;
      }
    }
    return flat;
  };

  // Head equations: one per signature variable, the union over the
  // predicate's clauses of the respective head argument.
  for (const auto& pred : levelPreds) {
    const Signature& sig = sigs.at(pred);
    auto clausesOf = prog.clausesOf(pred);
    for (std::size_t j = 0; j < sig.vars.size(); ++j) {
      std::vector<ExprPtr> rawDisjuncts;
      for (const Clause* c : clausesOf) rawDisjuncts.push_back(exprFromTerm(c->head.args[j]));
      ExprPtr raw = makeUnion(rawDisjuncts);
      ctx.initial.add({sig.vars[j], raw});

      std::vector<ExprPtr> flatDisjuncts;
      int clauseIdx = -1;
      for (const Clause* c : clausesOf) {
        ++clauseIdx;
        int id = -1;
        for (int ci = 0; ci < static_cast<int>(prog.clauses.size()); ++ci)
          if (&prog.clauses[ci] == c) id = ci;
        std::vector<Equation> fresh;
        ExprPtr flat = toTopLevelExpr(exprFromTerm(c->head.args[j]), supply, fresh);
        flatDisjuncts.push_back(flat);
        ctx.headDisjuncts[sig.vars[j]].push_back({id, flat});
        for (const auto& q : fresh) {
          ctx.eqP.add(q);
          ctx.initial.add(q);
          ctx.eqClause[q.lhs] = id;
          clauseInfoOf(id).vars.insert(q.lhs);
          ctx.varOwner[q.lhs] = id;
        }
      }
      ctx.eqP.add({sig.vars[j], makeUnion(flatDisjuncts)});
      ctx.order.push_back(sig.vars[j]);
      ctx.eqClause[sig.vars[j]] = -1;
    }
  }

  // The hoisted equations were added to eqP but not ordered yet; queue any
  // missing ones in name order right after the heads they came from.
  {
    std::set<std::string> queued(ctx.order.begin(), ctx.order.end());
    for (const auto& [lhs, rhs] : ctx.eqP.equations())
      if (!queued.count(lhs)) ctx.order.push_back(lhs);
  }

  // Body equations, clause by clause.
  for (auto& info : ctx.clauses) {
    const Clause& clause = *info.clause;
    const std::vector<AtomSite>& sites = atomSigs[info.id];

    // head-normalization bindings Y = t
    for (const auto& [y, t] : clause.headBindings) addEquation(y, exprFromTerm(t), info.id);

    // per body variable: the intersection of the signature positions where
    // it occurs as a direct argument
    std::vector<std::string> bodyVarOrder;
    std::map<std::string, std::vector<ExprPtr>> occurrences;
    for (std::size_t ai = 0; ai < clause.body.size(); ++ai) {
      const Atom& atom = clause.body[ai];
      for (std::size_t i = 0; i < atom.args.size(); ++i) {
        const TermPtr& arg = atom.args[i];
        if (!arg->isVariable()) continue;
        const std::string& v = arg->name();
        if (!occurrences.count(v)) bodyVarOrder.push_back(v);
        occurrences[v].push_back(SetExpr::var(sites[ai].sigVars[i]));
      }
    }
    for (const auto& v : bodyVarOrder) addEquation(v, makeInter(occurrences[v]), info.id);

    // per non-variable body argument: a fresh variable constrained to the
    // signature position intersected with the term
    for (std::size_t ai = 0; ai < clause.body.size(); ++ai) {
      const Atom& atom = clause.body[ai];
      for (std::size_t i = 0; i < atom.args.size(); ++i) {
        const TermPtr& arg = atom.args[i];
        if (arg->isVariable()) continue;
        std::string w = supply.fresh("W");
        info.vars.insert(w);
        addEquation(w, makeInter2(SetExpr::var(sites[ai].sigVars[i]), exprFromTerm(arg)),
                    info.id);
      }
    }
  }

  // Copies of lower-level solutions and markers for dead callees.
  for (const auto& [copy, clauseId] : copies)
    for (const auto& [lhs, rhs] : copy.types.equations()) {
      ctx.initial.add({lhs, rhs});
      ctx.eqP.add({lhs, rhs});
      ctx.order.push_back(lhs);
      ctx.eqClause[lhs] = clauseId;
    }
  for (const auto& [q, clauseId] : deadMarkers) {
    ctx.initial.add(q);
    ctx.eqP.add(q);
    ctx.order.push_back(q.lhs);
    ctx.eqClause[q.lhs] = clauseId;
    ctx.varOwner[q.lhs] = clauseId;
  }

  return ctx;
}

// ---------------------------------------------------------------------------
// CASE: recurrence reduction. An equation x = e where x occurs top-level in
// e is replaced by its least solution: every disjunct having x as a factor
// is dropped (x = x and x = x /\ e collapse to the empty set, x = x \/ e and
// x = (x /\ e1) \/ e2 keep the x-free disjuncts).
// ---------------------------------------------------------------------------
inline Equation caseReduce(const Equation& q, std::string* ruleTag = nullptr) {
  if (!occursTopLevel(q.rhs, q.lhs)) return q;
  std::vector<ExprPtr> disjuncts = q.rhs->isUnion() ? q.rhs->kids : std::vector<ExprPtr>{q.rhs};
  std::vector<ExprPtr> kept;
  bool droppedBareOnly = true;
  for (const auto& d : disjuncts) {
    bool hasFactor = false;
    if (d->isVar() && d->sym == q.lhs) {
      hasFactor = true;
    } else if (d->isInter()) {
      for (const auto& op : d->kids)
        if (op->isVar() && op->sym == q.lhs) hasFactor = true;
      if (hasFactor) droppedBareOnly = false;
    }
    if (hasFactor) continue;
    if (occursTopLevel(d, q.lhs))
      throw SolveError("recurrence shape not covered for " + q.lhs + " = " +
                       exprToString(q.rhs));
    kept.push_back(d);
  }
  if (ruleTag) {
    if (q.rhs->isVar())
      *ruleTag = "1";
    else if (!q.rhs->isUnion())
      *ruleTag = "2";
    else if (droppedBareOnly)
      *ruleTag = "3";
    else
      *ruleTag = "4";
  }
  return {q.lhs, makeUnion(std::move(kept))};
}

/// Spec-facing emptiness test (see NonEmptyMarking).
inline bool isEmpty(const std::string& x, const EquationSystem& solved) {
  return isEmptyVar(x, solved);
}

// ---------------------------------------------------------------------------
// The solver for one level.
// ---------------------------------------------------------------------------
class Solver {
public:
  Solver(LevelContext& ctx, const SolveOptions& opts, SolveStats& stats)
      : ctx_(ctx), opts_(opts), stats_(stats) {}

  EquationSystem solve() {
    E_ = ctx_.eqP;
    eQueue_.assign(ctx_.order.begin(), ctx_.order.end());
    stats_.baseVars = countBaseVars();

    for (int iter = 1; iter <= opts_.maxIterations; ++iter) {
      stats_.outerIterations = iter;
      mainLoop();
      bool changed = true;
      while (changed) {
        changed = emptinessPass();
        if (opts_.propagateFailure && failurePass()) changed = true;
      }
      moveCToE();
      if (eQueue_.empty() && opts_.bind) runBind();
      if (eQueue_.empty()) {
        stats_.memoEntries = memo_.size();
        checkSolvedShape();
        return S_;
      }
    }
    throw SolveError("iteration limit exceeded while solving level containing " +
                     (ctx_.preds.empty() ? std::string("?") : predicateName(ctx_.preds[0])) +
                     "\n" + S_.str());
  }

  const std::set<int>& deadClauses() const { return deadClauses_; }
  const std::set<PredicateId>& deadPredicates() const { return deadPreds_; }
  const MemoTable& memo() const { return memo_; }

private:
  std::size_t countBaseVars() const {
    std::set<std::string> vars;
    for (const auto& [lhs, rhs] : ctx_.eqP.equations()) {
      vars.insert(lhs);
      collectExprVars(rhs, vars);
    }
    return vars.size();
  }

  void trace(const std::string& line) {
    if (opts_.trace) *opts_.trace << line << '\n';
  }

  bool provablyEmpty(const std::string& v) {
    if (!marking_) marking_.emplace(S_);
    return marking_->empty(v);
  }

  void invalidateMarking() { marking_.reset(); }

  std::pair<Equation, std::vector<Equation>> simpEq(const Equation& q) {
    SimpContext sctx{memo_, *ctx_.supply, provenance_,
                     [this](const std::string& v) { return provablyEmpty(v); }};
    return simp(q, sctx);
  }

  /// New equations reference variables as they were named inside the
  /// simplified equation; solutions already in S must be substituted in
  /// (later solutions reach C through the shared substitution path).
  void queueToC(const std::vector<Equation>& eqs) {
    for (const auto& q : eqs) {
      ExprPtr rhs = q.rhs;
      for (const auto& [x, e] : S_.equations())
        rhs = e->isVar() ? substEverywhere(rhs, x, e) : substTopLevel(rhs, x, e);
      C_.add({q.lhs, rhs});
      cQueue_.push_back(q.lhs);
    }
  }

  /// Replaces occurrences of x in E, S and C. Aliases (single-variable
  /// right-hand sides) substitute everywhere, which keeps top-level form;
  /// everything else replaces top-level occurrences only.
  void substitute(const std::string& x, const ExprPtr& e) {
    bool alias = e->isVar();
    auto apply = [&](EquationSystem& sys) {
      std::vector<std::pair<std::string, ExprPtr>> updates;
      for (const auto& [lhs, rhs] : sys.equations()) {
        if (lhs == x) continue;
        ExprPtr next = alias ? substEverywhere(rhs, x, e) : substTopLevel(rhs, x, e);
        if (next != rhs && !equalExprs(next, rhs)) updates.emplace_back(lhs, next);
      }
      for (auto& [lhs, next] : updates) sys.set(lhs, std::move(next));
    };
    apply(E_);
    apply(S_);
    apply(C_);
    invalidateMarking();
  }

  void mainLoop() {
    while (!eQueue_.empty()) {
      std::string x = eQueue_.front();
      eQueue_.pop_front();
      if (!E_.defines(x)) continue;
      Equation q{x, E_.rhs(x)};
      E_.erase(x);
      auto [q1, newEqs] = simpEq(dnf(q));
      queueToC(newEqs);
      std::string rule;
      Equation q2 = caseReduce(q1, &rule);
      if (!rule.empty()) {
        stats_.caseRules.push_back(x + ": rule " + rule);
        trace("case " + x + " rule " + rule + " -> " + exprToString(q2.rhs));
      }
      trace("take " + x + " = " + exprToString(q.rhs) + "  ==>  " + exprToString(q2.rhs));
      substitute(q2.lhs, q2.rhs);
      S_.add(q2);
      invalidateMarking();
    }
  }

  /// Re-simplifies all of S and forces provably empty variables to the
  /// empty set until stable. Returns true when anything changed.
  bool emptinessPass() {
    bool any = false;
    for (int guard = 0; guard < 10000; ++guard) {
      bool changed = false;
      std::vector<std::string> names;
      for (const auto& [lhs, rhs] : S_.equations()) names.push_back(lhs);
      for (const auto& x : names) {
        const ExprPtr& rhs = S_.rhs(x);
        if (rhs->isEmpty()) continue;
        auto [q1, newEqs] = simpEq(dnf({x, rhs}));
        queueToC(newEqs);
        if (!equalExprs(q1.rhs, rhs)) {
          S_.set(x, q1.rhs);
          invalidateMarking();
          changed = true;
        }
      }
      NonEmptyMarking marking(S_);
      for (const auto& x : names) {
        if (S_.rhs(x)->isEmpty()) continue;
        if (marking.empty(x)) {
          trace("force " + x + " = 0");
          S_.set(x, SetExpr::empty());
          substitute(x, SetExpr::empty());
          changed = true;
        }
      }
      if (!changed) return any;
      any = true;
    }
    throw SolveError("emptiness propagation did not stabilize");
  }

  /// Failure propagation: a clause one of whose variables denotes the empty
  /// set can never succeed. Its head variables are forced empty and the
  /// signature equations of its predicate are rebuilt from the frozen head
  /// disjuncts of the remaining clauses.
  bool failurePass() {
    bool changed = false;
    std::set<int> newlyDead;
    bool progress = true;
    while (progress) {
      progress = false;
      for (const auto& info : ctx_.clauses) {
        if (deadClauses_.count(info.id)) continue;
        bool dead = false;
        for (const auto& v : info.vars) {
          const ExprPtr* rhs = S_.lookup(v);
          if (rhs && (*rhs)->isEmpty()) {
            dead = true;
            break;
          }
        }
        if (!dead)
          for (const auto& p : info.bodyPreds)
            if (deadPreds_.count(p)) dead = true;
        if (dead) {
          deadClauses_.insert(info.id);
          newlyDead.insert(info.id);
          progress = true;
        }
      }
      for (const auto& pred : ctx_.preds) {
        if (deadPreds_.count(pred)) continue;
        bool all = true;
        for (const auto& info : ctx_.clauses)
          if (info.clause->head.id() == pred && !deadClauses_.count(info.id)) all = false;
        if (all) {
          deadPreds_.insert(pred);
          progress = true;
        }
      }
    }
    if (newlyDead.empty()) return false;

    std::set<PredicateId> affected;
    for (int id : newlyDead) {
      for (const auto& info : ctx_.clauses) {
        if (info.id != id) continue;
        trace("dead clause: " + info.clause->str());
        affected.insert(info.clause->head.id());
        for (const auto& y : info.headVars) {
          const ExprPtr* rhs = S_.lookup(y);
          if (rhs && !(*rhs)->isEmpty()) {
            S_.set(y, SetExpr::empty());
            substitute(y, SetExpr::empty());
            changed = true;
          }
        }
      }
    }

    // Rebuild the signature equations of affected predicates from the
    // surviving head disjuncts; bare-variable disjuncts have been
    // substituted through S already, so chase their current definitions.
    for (const auto& pred : affected) {
      for (const auto& x : ctx_.sigVarsOf.at(pred)) {
        auto it = ctx_.headDisjuncts.find(x);
        if (it == ctx_.headDisjuncts.end()) continue;
        std::vector<ExprPtr> alts;
        for (const auto& [clauseId, disjunct] : it->second) {
          if (deadClauses_.count(clauseId)) continue;
          alts.push_back(chaseDefinition(disjunct));
        }
        ExprPtr rebuilt = makeUnion(std::move(alts));
        if (!S_.defines(x) || !equalExprs(S_.rhs(x), rebuilt)) {
          trace("rebuild " + x + " = " + exprToString(rebuilt));
          S_.set(x, rebuilt);
          invalidateMarking();
          changed = true;
        }
      }
    }
    return changed;
  }

  ExprPtr chaseDefinition(const ExprPtr& d) const {
    ExprPtr cur = d;
    std::set<std::string> seen;
    while (cur->isVar() && S_.defines(cur->sym) && !seen.count(cur->sym)) {
      seen.insert(cur->sym);
      cur = S_.rhs(cur->sym);
    }
    return cur;
  }

  void moveCToE() {
    for (const auto& x : cQueue_) {
      E_.add({x, C_.rhs(x)});
      eQueue_.push_back(x);
    }
    C_ = EquationSystem{};
    cQueue_.clear();
  }

  std::string rootOf(std::string v) const {
    std::set<std::string> seen;
    while (!ctx_.eqP.defines(v)) {
      auto it = provenance_.find(v);
      if (it == provenance_.end() || seen.count(v)) break;
      seen.insert(v);
      v = it->second;
    }
    return v;
  }

  /// BIND: proposes minimal values for free variables occurring in
  /// intersections. Candidate sets are grouped by the original equation
  /// their conjunct descends from; the conjunction over originals of the
  /// disjunction of candidate sets is put in DNF and equations are
  /// synthesized per variable, disjunction turning into union and
  /// conjunction into intersection.
  int ownerOf(const std::string& v) const {
    auto it = ctx_.varOwner.find(v);
    return it == ctx_.varOwner.end() ? -1 : it->second;
  }

  void runBind() {
    struct CandidateSet {
      std::vector<std::pair<std::string, ExprPtr>> bindings;
      bool bindable = true;
    };
    std::map<std::string, std::vector<CandidateSet>> byRoot;
    std::map<std::string, ExprPtr> freshShared; // per-conjunct shared variable

    for (const auto& [lhs, rhs] : S_.equations()) {
      std::vector<ExprPtr> disjuncts = rhs->isUnion() ? rhs->kids : std::vector<ExprPtr>{rhs};
      std::string root = rootOf(lhs);
      auto rc = ctx_.eqClause.find(root);
      int rootClause = rc == ctx_.eqClause.end() ? -1 : rc->second;
      for (const auto& d : disjuncts) {
        if (!d->isInter()) continue;
        std::vector<std::string> freeVars;
        ExprPtr consPart;
        for (const auto& op : d->kids) {
          if (op->isVar() && !S_.defines(op->sym) && !boundFree_.count(op->sym))
            freeVars.push_back(op->sym);
          else if (op->isCons())
            consPart = op;
        }
        if (freeVars.empty()) continue;
        CandidateSet cand;
        // A binding is a sound refinement only when the demanding equation
        // and every occurrence of the variable live in one clause; an open
        // parameter of some other clause must stay free, which satisfies
        // the conjunct without any binding at all.
        cand.bindable = rootClause >= 0;
        for (const auto& v : freeVars)
          if (ownerOf(v) != rootClause) cand.bindable = false;
        ExprPtr e = consPart;
        if (!e) {
          std::string key = exprToString(d);
          auto it = freshShared.find(key);
          if (it == freshShared.end()) {
            std::string t = ctx_.supply->fresh("T");
            if (cand.bindable) ctx_.varOwner[t] = rootClause;
            it = freshShared.emplace(key, SetExpr::var(t)).first;
          }
          e = it->second;
        }
        for (const auto& v : freeVars) cand.bindings.emplace_back(v, e);
        byRoot[root].push_back(std::move(cand));
      }
    }

    // an unbindable candidate set means the root's demand is met by a free
    // variable as it stands; that root constrains nothing
    for (auto it = byRoot.begin(); it != byRoot.end();) {
      bool keep = true;
      for (const auto& cand : it->second)
        if (!cand.bindable) keep = false;
      it = keep ? std::next(it) : byRoot.erase(it);
    }
    if (byRoot.empty()) return;

    // DNF of the binding formula, one candidate choice per original equation.
    std::vector<std::vector<CandidateSet>> groups;
    for (auto& [root, cands] : byRoot) groups.push_back(std::move(cands));
    std::size_t dnfSize = 1;
    bool overflow = false;
    for (const auto& g : groups) {
      dnfSize *= g.size();
      if (dnfSize > static_cast<std::size_t>(opts_.bindDnfLimit)) {
        overflow = true;
        break;
      }
    }

    std::map<std::string, std::vector<ExprPtr>> perVar;
    if (!overflow) {
      // Enumerate the DNF of the formula: one candidate choice per original
      // equation. A disjunct binding one variable to clashing constructors
      // has no solutions and is dropped. The synthesized cover may only
      // constrain a variable that every surviving disjunct binds; one left
      // open anywhere can take any value and must stay free.
      std::set<std::string> allVars;
      for (const auto& g : groups)
        for (const auto& cand : g)
          for (const auto& [v, e] : cand.bindings) allVars.insert(v);

      auto clashes = [](const std::vector<ExprPtr>& es) {
        for (std::size_t i = 0; i < es.size(); ++i)
          for (std::size_t j = i + 1; j < es.size(); ++j)
            if (es[i]->isCons() && es[j]->isCons() &&
                (es[i]->sym != es[j]->sym || es[i]->kids.size() != es[j]->kids.size()))
              return true;
        return false;
      };

      std::vector<std::map<std::string, std::vector<ExprPtr>>> satisfiable;
      std::vector<std::size_t> choice(groups.size(), 0);
      while (true) {
        std::map<std::string, std::vector<ExprPtr>> inDisjunct;
        for (std::size_t g = 0; g < groups.size(); ++g)
          for (const auto& [v, e] : groups[g][choice[g]].bindings) inDisjunct[v].push_back(e);
        bool sat = true;
        for (const auto& [v, es] : inDisjunct)
          if (clashes(es)) sat = false;
        if (sat) satisfiable.push_back(std::move(inDisjunct));
        std::size_t g = 0;
        for (; g < groups.size(); ++g) {
          if (++choice[g] < groups[g].size()) break;
          choice[g] = 0;
        }
        if (g == groups.size()) break;
      }

      if (satisfiable.empty()) {
        // the required unifications cannot all succeed: the involved
        // variables denote nothing
        for (const auto& v : allVars) perVar[v] = {};
      } else {
        for (const auto& v : allVars) {
          bool everywhere = true;
          for (const auto& d : satisfiable)
            if (!d.count(v)) everywhere = false;
          if (!everywhere) continue;
          for (const auto& d : satisfiable) perVar[v].push_back(makeInter(d.at(v)));
        }
        if (perVar.empty()) return;
      }
    } else {
      // Fallback for oversized formulas: use only single-variable candidate
      // sets and take the plain union per variable. Larger bindings mean
      // larger types, so this only costs precision.
      stats_.bindOverflow = true;
      trace("bind: formula too large, binding singleton candidates only");
      for (const auto& g : groups)
        for (const auto& cand : g)
          if (cand.bindings.size() == 1)
            perVar[cand.bindings[0].first].push_back(cand.bindings[0].second);
      if (perVar.empty()) return;
    }

    for (const auto& [v, values] : perVar) {
      // conjunction turned into intersection may leave clashing constructor
      // pairs; normalize before queueing
      auto [q, newEqs] = simpEq(dnf({v, makeUnion(values)}));
      queueToC(newEqs);
      E_.add(q);
      eQueue_.push_back(v);
      boundFree_.insert(v);
      std::string printed = v + " = " + exprToString(q.rhs);
      stats_.bindings.push_back(printed);
      trace("bind " + printed);
    }
  }

  void checkSolvedShape() const {
    FormClass f = classifySystem(S_);
    if (f != FormClass::LeafLinear && f != FormClass::Regular)
      throw InternalError("solver produced a non leaf-linear system:\n" + S_.str());
  }

  LevelContext& ctx_;
  SolveOptions opts_;
  SolveStats& stats_;
  EquationSystem E_, S_, C_;
  std::deque<std::string> eQueue_;
  std::vector<std::string> cQueue_;
  MemoTable memo_;
  std::map<std::string, std::string> provenance_;
  std::set<std::string> boundFree_;
  std::set<int> deadClauses_;
  std::set<PredicateId> deadPreds_;
  std::optional<NonEmptyMarking> marking_;
};

/// Solves one generated level context.
inline EquationSystem solve(LevelContext& ctx, const SolveOptions& opts, SolveStats& stats) {
  Solver solver(ctx, opts, stats);
  return solver.solve();
}

} // namespace rti
