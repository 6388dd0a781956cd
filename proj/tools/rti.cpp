// rti - parameterized regular type inference for pure logic programs.
//
// Subcommands:
//   rti infer FILE    infer types and print them as :- type declarations
//   rti check FILE    decide whether a call pattern is guaranteed to fail
//   rti corpus DIR    run every *.pl file in DIR and summarize the results

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rti/analysis.hpp"
#include "rti/parser.hpp"
#include "rti/report.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitParse = 2;
constexpr int kExitSolve = 3;

std::string readFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw rti::Error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct CommonFlags {
  std::string format = "text";
  std::string bind = "on";
  std::string propagate = "on";
  bool trace = false;
  bool allowUnknown = false;
  int maxIterations = 100;
  int bindDnfLimit = 4096;
  std::string dumpEquations;
  bool dumpCallgraph = false;
};

void addCommonFlags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--format", flags.format, "output format")
      ->check(CLI::IsMember({"text", "json"}));
  cmd->add_option("--bind", flags.bind, "enable the BIND step")
      ->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--propagate-failure", flags.propagate, "enable the failure propagation loop")
      ->check(CLI::IsMember({"on", "off"}));
  cmd->add_flag("--trace", flags.trace, "stream solver steps to stderr");
  cmd->add_flag("--allow-unknown", flags.allowUnknown,
                "treat unknown body predicates as having type any");
  cmd->add_option("--max-iterations", flags.maxIterations, "solver iteration cap");
  cmd->add_option("--bind-dnf-limit", flags.bindDnfLimit, "BIND formula size limit");
  cmd->add_option("--dump-equations", flags.dumpEquations,
                  "print equation systems for a phase")
      ->check(CLI::IsMember({"initial", "toplevel", "solved"}));
  cmd->add_flag("--dump-callgraph", flags.dumpCallgraph, "print call graph and level plan");
}

rti::AnalysisOptions toOptions(const CommonFlags& flags) {
  rti::AnalysisOptions opts;
  opts.solve.bind = flags.bind == "on";
  opts.solve.propagateFailure = flags.propagate == "on";
  opts.solve.maxIterations = flags.maxIterations;
  opts.solve.bindDnfLimit = flags.bindDnfLimit;
  opts.solve.trace = flags.trace ? &std::cerr : nullptr;
  opts.allowUnknown = flags.allowUnknown;
  if (const char* env = std::getenv("RTI_MAX_ITER")) opts.solve.maxIterations = std::atoi(env);
  return opts;
}

void printDumps(const rti::AnalysisResult& result, const std::string& phase) {
  for (const auto& scc : result.sccs) {
    std::cout << "% scc [";
    for (std::size_t i = 0; i < scc.preds.size(); ++i) {
      if (i) std::cout << ',';
      std::cout << rti::predicateName(scc.preds[i]);
    }
    std::cout << "] level " << scc.level << " phase " << phase << "\n";
    const rti::EquationSystem& sys = phase == "initial"    ? scc.initial
                                     : phase == "toplevel" ? scc.toplevel
                                                           : scc.solved;
    std::cout << sys.str();
  }
}

int runInfer(const std::string& file, const CommonFlags& flags) {
  rti::Program prog = rti::parseProgram(readFile(file));
  rti::AnalysisResult result = rti::analyze(prog, toOptions(flags));
  if (flags.dumpCallgraph)
    std::cout << rti::callGraphToJson(result.graph, result.plan).dump(2) << "\n";
  if (!flags.dumpEquations.empty()) printDumps(result, flags.dumpEquations);
  rti::TypeReport report = rti::reportOf(result);
  if (flags.format == "json") {
    std::cout << rti::reportToJson(report).dump(2) << "\n";
  } else {
    std::cout << rti::prettify(report);
    std::cout << "% descriptors: " << report.descriptors << "  non-any: " << report.nonAny
              << "  empty: " << report.emptyDetected << "\n";
  }
  return kExitOk;
}

int runCheck(const std::string& file, const std::string& queryText, const CommonFlags& flags) {
  rti::Program prog = rti::parseProgram(readFile(file));
  rti::Atom query;
  if (!queryText.empty()) {
    query = rti::parseAtomText(queryText);
  } else if (prog.entry) {
    query = *prog.entry;
  } else {
    std::cerr << "error: check mode needs --query or an :- entry directive\n";
    return kExitUsage;
  }
  rti::CheckResult res = rti::check(prog, query, toOptions(flags));
  if (!flags.dumpEquations.empty()) printDumps(res.analysis, flags.dumpEquations);
  if (flags.format == "json") {
    nlohmann::json j;
    j["query"] = query.str();
    j["verdict"] = res.detected ? "FAIL-DETECTED" : "NOT-DETECTED";
    j["emptyGoalVars"] = res.emptyGoalVars;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << (res.detected ? "FAIL-DETECTED" : "NOT-DETECTED") << "\n";
    std::cout << "query: " << query.str() << "\n";
    if (!res.emptyGoalVars.empty()) {
      std::cout << "empty goal variables:";
      for (const auto& v : res.emptyGoalVars) std::cout << ' ' << v;
      std::cout << "\n";
    }
  }
  return kExitOk;
}

struct CorpusRow {
  std::string name;
  std::string badCall;
  int descriptors = 0;
  int precision = 0;
  bool hasCheck = false;
  bool detected = false;
};

int runCorpus(const std::string& dir, const CommonFlags& flags) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".pl") files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  std::vector<CorpusRow> rows;
  for (const auto& path : files) {
    rti::Program prog = rti::parseProgram(readFile(path.string()));
    CorpusRow row;
    row.name = path.stem().string();
    rti::AnalysisResult result = rti::analyze(prog, toOptions(flags));
    if (prog.entry) {
      row.badCall = prog.entry->str();
      const rti::Solution& sol = result.solutionOf(prog.entry->id());
      std::vector<std::pair<rti::Signature, const rti::EquationSystem*>> inputs{
          {sol.sig, &sol.types}};
      rti::TypeReport report = rti::buildReport(inputs);
      row.descriptors = report.descriptors;
      row.precision = report.nonAny;
      row.hasCheck = true;
      row.detected = rti::check(prog, *prog.entry, toOptions(flags)).detected;
    } else {
      rti::TypeReport report = rti::reportOf(result);
      row.descriptors = report.descriptors;
      row.precision = report.nonAny;
    }
    rows.push_back(std::move(row));
  }

  if (flags.format == "json") {
    nlohmann::json j;
    j["benchmarks"] = nlohmann::json::array();
    int d = 0, p = 0, e = 0;
    for (const auto& r : rows) {
      j["benchmarks"].push_back({{"name", r.name},
                                 {"descriptors", r.descriptors},
                                 {"precision", r.precision},
                                 {"error", r.hasCheck ? (r.detected ? "y" : "n") : ""},
                                 {"badCall", r.badCall}});
      d += r.descriptors;
      p += r.precision;
      e += r.hasCheck && r.detected ? 1 : 0;
    }
    j["totals"] = {{"descriptors", d}, {"precision", p}, {"errorsDetected", e}};
    std::cout << j.dump(2) << "\n";
  } else {
    std::printf("%-12s %6s %6s %6s  %s\n", "benchmark", "desc", "prec", "error", "bad call");
    int d = 0, p = 0, e = 0;
    for (const auto& r : rows) {
      std::printf("%-12s %6d %6d %6s  %s\n", r.name.c_str(), r.descriptors, r.precision,
                  r.hasCheck ? (r.detected ? "y" : "n") : "-", r.badCall.c_str());
      d += r.descriptors;
      p += r.precision;
      e += r.hasCheck && r.detected ? 1 : 0;
    }
    std::printf("%-12s %6d %6d %6d\n", "total", d, p, e);
  }
  return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"parameterized regular type inference for logic programs"};
  app.require_subcommand(1);

  CommonFlags inferFlags, checkFlags, corpusFlags;
  std::string inferFile, checkFile, corpusDir, queryText;

  CLI::App* infer = app.add_subcommand("infer", "infer types for a program");
  infer->add_option("file", inferFile, "input program")->required();
  addCommonFlags(infer, inferFlags);

  CLI::App* chk = app.add_subcommand("check", "check a call pattern for guaranteed failure");
  chk->add_option("file", checkFile, "input program")->required();
  chk->add_option("--query", queryText, "call pattern, e.g. 'append(A,a,A)'");
  addCommonFlags(chk, checkFlags);

  CLI::App* corpus = app.add_subcommand("corpus", "summarize a directory of benchmarks");
  corpus->add_option("dir", corpusDir, "directory with *.pl files")->required();
  addCommonFlags(corpus, corpusFlags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (infer->parsed()) return runInfer(inferFile, inferFlags);
    if (chk->parsed()) return runCheck(checkFile, queryText, checkFlags);
    if (corpus->parsed()) return runCorpus(corpusDir, corpusFlags);
  } catch (const rti::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const rti::UnknownPredicateError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const rti::SolveError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolve;
  } catch (const rti::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
