#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "shiq/engine.hpp"
#include "shiq/errors.hpp"
#include "shiq/frontend.hpp"
#include "shiq/model.hpp"
#include "shiq/reduction.hpp"

namespace shiq {
namespace {

struct Request {
  std::string command;
  std::string file;
  std::string concept_text;
  std::string sub_text;
  std::string super_text;
  std::string trace_path;
  std::string dot_path;
  std::string model_path;
  std::size_t max_nodes = 100000;
  std::optional<std::uint64_t> seed;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << content)) throw ValidationError("cannot write '" + path + "'");
}

int run(const Request& req, std::ostream& out, std::ostream& err) {
  const KnowledgeBase kb = parse_kb(read_file(req.file));
  ReducedProblem problem;
  if (req.command == "consistent") {
    problem = reduce_abox_consistency(kb);
  } else if (req.command == "sat") {
    const Concept c = parse_concept(req.concept_text);
    problem = reduce_concept_sat(c, kb);
    check_simple_roles(c, problem.rbox);
  } else {
    const Concept c = parse_concept(req.sub_text);
    const Concept d = parse_concept(req.super_text);
    problem = reduce_subsumption(c, d, kb);
    check_simple_roles(c, problem.rbox);
    check_simple_roles(d, problem.rbox);
  }

  std::ofstream trace;
  SolveOptions options;
  options.max_nodes = req.max_nodes;
  options.seed = req.seed;
  if (!req.trace_path.empty()) {
    trace.open(req.trace_path, std::ios::binary);
    if (!trace) throw ValidationError("cannot write '" + req.trace_path + "'");
    options.trace = [&trace](const TraceRecord& r) { trace << format_trace(r) << '\n'; };
  }
  const SolveResult result = solve(problem, options);

  if (!req.dot_path.empty()) {
    if (result.forest) write_file(req.dot_path, to_dot(*result.forest));
    else err << "no forest to render: every branch closed\n";
  }
  if (!req.model_path.empty()) {
    if (!result.forest) {
      err << "no model: problem is inconsistent\n";
    } else {
      try {
        write_file(req.model_path, serialize_interpretation(extract_model(*result.forest)));
      } catch (const UnsupportedError& e) {
        err << "no model written: " << e.what() << '\n';
      }
    }
  }

  bool positive = result.consistent;
  if (req.command == "consistent") {
    out << (positive ? "CONSISTENT" : "INCONSISTENT") << '\n';
  } else if (req.command == "sat") {
    out << (positive ? "SAT" : "UNSAT") << '\n';
  } else {
    positive = !result.consistent;
    out << (positive ? "YES" : "NO") << '\n';
  }
  return positive ? 0 : 1;
}

}  // namespace

int cli_dispatch(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  Request req;
  CLI::App app{"SHIQ tableau reasoner", "shiq"};
  app.require_subcommand(1);

  auto common = [&req](CLI::App* sub) {
    sub->add_option("file", req.file, "knowledge base file")->required();
    sub->add_option("--trace", req.trace_path, "write the rule-application log");
    sub->add_option("--dot", req.dot_path, "write the final completion forest as DOT");
    sub->add_option("--model", req.model_path, "write the extracted model");
    sub->add_option("--max-nodes", req.max_nodes, "node budget")->check(CLI::PositiveNumber);
    sub->add_option("--seed", req.seed, "shuffle choice-point alternatives");
  };
  auto* consistent = app.add_subcommand("consistent", "ABox consistency");
  common(consistent);
  auto* sat = app.add_subcommand("sat", "concept satisfiability");
  common(sat);
  sat->add_option("--concept", req.concept_text, "concept expression")->required();
  auto* subsumes = app.add_subcommand("subsumes", "concept subsumption");
  common(subsumes);
  subsumes->add_option("--sub", req.sub_text, "subsumee")->required();
  subsumes->add_option("--super", req.super_text, "subsumer")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return 2;
  }
  req.command = app.get_subcommands().front()->get_name();

  try {
    return run(req, out, err);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError& e) {
    err << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const SignatureError& e) {
    err << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const BudgetError& e) {
    err << "budget exhausted: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace shiq
