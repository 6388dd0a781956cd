#pragma once

#include <string>

#include "rti/analysis.hpp"
#include "rti/parser.hpp"
#include "rti/report.hpp"

namespace rti::testing {

inline AnalysisResult analyzeSrc(const std::string& src, AnalysisOptions opts = {}) {
  return analyze(parseProgram(src), opts);
}

/// Pretty-printed types of one predicate, deterministic display names.
inline std::string typesOf(const AnalysisResult& result, const PredicateId& pred) {
  const Solution& sol = result.solutionOf(pred);
  std::vector<std::pair<Signature, const EquationSystem*>> inputs{{sol.sig, &sol.types}};
  return prettify(buildReport(inputs));
}

inline std::string typesOf(const std::string& src, const PredicateId& pred,
                           AnalysisOptions opts = {}) {
  return typesOf(analyzeSrc(src, opts), pred);
}

inline bool containsBinding(const AnalysisResult& result, const std::string& lhsPart,
                            const std::string& rhsPart) {
  for (const auto& b : result.bindings) {
    auto eq = b.find(" = ");
    if (eq == std::string::npos) continue;
    std::string lhs = b.substr(0, eq);
    std::string rhs = b.substr(eq + 3);
    if (lhs.find(lhsPart) != std::string::npos && rhs == rhsPart) return true;
  }
  return false;
}

inline const SccRecord& sccOf(const AnalysisResult& result, const PredicateId& pred) {
  for (const auto& scc : result.sccs)
    for (const auto& p : scc.preds)
      if (p == pred) return scc;
  throw InternalError("no scc for " + predicateName(pred));
}

inline const char* kNrevSrc =
    "append([],L,L).\n"
    "append([X|Xs],Ys,[X|Zs]):- append(Xs,Ys,Zs).\n"
    "nrev([],[]).\n"
    "nrev([X|Xs],Ys):- nrev(Xs,Zs), append(Zs,[X],Ys).\n";

inline const char* kAppendSrc =
    "append([],L,L).\n"
    "append([X|Xs],Ys,[X|Zs]):- append(Xs,Ys,Zs).\n";

} // namespace rti::testing
