// Tableau expansion rules and the backtracking search that decides
// consistency of a reduced problem.

#ifndef SHIQ_ENGINE_HPP_
#define SHIQ_ENGINE_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "shiq/forest.hpp"
#include "shiq/reduction.hpp"

namespace shiq {

// Listed in application priority.
enum class RuleKind {
  kAtMostRoot,
  kAtMost,
  kConjunction,
  kForall,
  kForallPlus,
  kChoose,
  kDisjunction,
  kAtLeast,
  kExists,
};

std::string_view rule_name(RuleKind kind);

// One way to apply a rule instance. Deterministic rules have exactly one.
struct Alternative {
  enum class Effect { kAddConcepts, kCreateChildren, kMergeTree, kMergeRoots };

  Effect effect = Effect::kAddConcepts;
  // kAddConcepts: concepts added to `target`.
  std::vector<ConceptId> concepts;
  NodeId target{};
  // Merges: `from` is merged into `into`.
  NodeId from{};
  NodeId into{};
};

struct RuleInstance {
  RuleKind kind = RuleKind::kConjunction;
  NodeId node{};
  // The concept in L(node) that triggers the rule.
  ConceptId trigger = kNoConcept;
  std::vector<Alternative> alternatives;

  bool branching() const { return alternatives.size() > 1; }
};

// Highest-priority applicable rule instance (lowest node id, then concept
// id, within a rule), or nullopt for a complete forest. `blocking` must be
// the result of forest.compute_blocking().
std::optional<RuleInstance> applicable_rule(const CompletionForest& forest,
                                            const std::vector<BlockingStatus>& blocking);
std::optional<RuleInstance> applicable_rule(const CompletionForest& forest);

// Applies alternative `which` of `instance` in place.
void apply_rule(CompletionForest& forest, const RuleInstance& instance, std::size_t which);
// One successor forest per alternative.
std::vector<CompletionForest> expand(const CompletionForest& forest, const RuleInstance& instance);

struct TraceRecord {
  std::uint64_t step = 0;
  RuleKind rule = RuleKind::kConjunction;
  NodeId node{};
  std::string concept_text;
  std::size_t depth = 0;
};

// step=<k> rule=<name> node=<id> concept=<expr> depth=<d>
std::string format_trace(const TraceRecord& record);

struct SolveOptions {
  std::size_t max_nodes = 100000;
  // Shuffles the alternatives of every choice point when set.
  std::optional<std::uint64_t> seed;
  std::function<void(const TraceRecord&)> trace;
};

struct SolveStats {
  std::uint64_t steps = 0;
  std::uint64_t choice_points = 0;
  std::uint64_t backtracks = 0;
  std::size_t max_nodes = 0;
  std::size_t max_path_length = 0;
  std::size_t max_out_degree = 0;
};

struct SolveResult {
  bool consistent = false;
  // Complete and clash-free forest when consistent.
  std::optional<CompletionForest> forest;
  SolveStats stats;
  SearchLimits limits;
};

// Depth-first search over choice points with full forest snapshots.
// Throws BudgetError if the node budget or a termination bound is exceeded.
SolveResult solve(const ReducedProblem& problem, const SolveOptions& options = {});

}  // namespace shiq

#endif  // SHIQ_ENGINE_HPP_
