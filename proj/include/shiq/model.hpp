// Semantic oracles: finite interpretations, tableau-condition checking,
// model extraction from forests and a brute-force small-model finder.

#ifndef SHIQ_MODEL_HPP_
#define SHIQ_MODEL_HPP_

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <boost/dynamic_bitset.hpp>

#include "shiq/forest.hpp"
#include "shiq/reduction.hpp"
#include "shiq/syntax.hpp"

namespace shiq {

using Element = std::size_t;
using ElementPair = std::pair<Element, Element>;
using ElementSet = boost::dynamic_bitset<>;

// Finite interpretation over the domain {0, ..., domain_size - 1}. Only role
// names carry a valuation; inverses are obtained by flipping pairs.
struct Interpretation {
  std::size_t domain_size = 0;
  std::map<std::string, std::set<Element>> concepts;
  std::map<std::string, std::set<ElementPair>> roles;
  std::map<std::string, Element> individuals;

  friend bool operator==(const Interpretation&, const Interpretation&) = default;
};

// Extension of `c`. The reserved atom ⊥★ always denotes the empty set.
// Throws SignatureError for atoms or roles without a valuation.
ElementSet eval_concept(const Interpretation& i, const Concept& c);

struct ModelCheck {
  bool ok = true;
  std::string violation;

  explicit operator bool() const { return ok; }
};

// Role hierarchy (inclusions, transitivity), GCIs and assertions.
ModelCheck check_model(const Interpretation& i, const KnowledgeBase& kb);
ModelCheck check_model(const Interpretation& i, const ReducedProblem& p);

// Candidate tableau T = (S, L, E, I) over S = {0, ..., size - 1}.
struct TableauStructure {
  std::size_t size = 0;
  std::vector<std::set<Concept>> labels;
  // Keyed by every role of the signature, inverses included.
  std::map<Role, std::set<ElementPair>> edges;
  std::map<std::string, Element> individuals;
  // Elements at the truncation depth; exempt from the existence conditions.
  std::vector<bool> frontier;
};

struct TableauCheck {
  bool ok = true;
  // 1..14 for the tableau conditions, 0 for a label outside the closure.
  int condition = -1;
  std::string detail;

  explicit operator bool() const { return ok; }
};

TableauCheck check_tableau(const TableauStructure& t, const ReducedProblem& p);

// Model of a complete, clash-free forest with no directly blocked node.
// Subtrees cut off by the ≤-rule are not part of the model.
// Throws UnsupportedError if some node is directly blocked.
Interpretation extract_model(const CompletionForest& forest);

// Tableau built from the paths of a complete, clash-free forest, truncated
// at paths of `depth` pairs beyond the root.
TableauStructure unravel_bounded(const CompletionForest& forest, std::size_t depth,
                                 std::size_t max_elements = 2000000);

struct BruteForceOptions {
  std::size_t max_domain = 4;
  // Search nodes per domain size before giving up on that size.
  std::size_t node_budget = 50000;
};

// Searches interpretations over domains 1..max_domain. A nullopt result is
// not a proof of inconsistency.
std::optional<Interpretation> find_model_bruteforce(const KnowledgeBase& kb,
                                                    const BruteForceOptions& options = {});
std::optional<Interpretation> find_model_bruteforce(const ReducedProblem& p,
                                                    const BruteForceOptions& options = {});

// Line format:
//   domain <n>
//   concept <name> <e>...
//   role <name> <e>:<e>...
//   individual <name> <e>
std::string serialize_interpretation(const Interpretation& i);
Interpretation parse_interpretation(const std::string& text);

}  // namespace shiq

#endif  // SHIQ_MODEL_HPP_
