// Completion forests: nodes labelled with closure concepts, edges labelled
// with roles, and the explicit ≠ / ≐ relations.

#ifndef SHIQ_FOREST_HPP_
#define SHIQ_FOREST_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <ranges>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <boost/dynamic_bitset.hpp>

#include "shiq/reduction.hpp"
#include "shiq/syntax.hpp"

namespace shiq {

using ConceptId = std::uint32_t;
using RoleId = std::uint32_t;
using ConceptSet = boost::dynamic_bitset<>;
using RoleSet = boost::dynamic_bitset<>;

inline constexpr ConceptId kNoConcept = static_cast<ConceptId>(-1);

struct ConceptInfo {
  ConceptKind kind;
  ConceptId first = kNoConcept;
  ConceptId second = kNoConcept;
  RoleId role = 0;
  std::uint32_t number = 0;
  // Id of ~C.
  ConceptId complement = kNoConcept;
};

// Termination bounds for a problem: m = |clos|, n = number of roles
// including inverses, n_max = largest at-least number in clos (at least 1,
// since ∃ generates one successor).
struct SearchLimits {
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t n_max = 1;
  // 2^(2mn), saturated at the largest representable value.
  std::uint64_t max_path_length = 0;
  std::uint64_t max_out_degree = 0;
  std::size_t max_nodes = 100000;
};

// Dense numbering of clos(A) and of the role signature of a reduced problem.
// Concept ids follow the structural order of concepts, so iterating ids
// visits concepts in a deterministic order.
class ProblemIndex {
 public:
  explicit ProblemIndex(const ReducedProblem& problem);

  const ReducedProblem& problem() const { return problem_; }
  const RoleBox& rbox() const { return problem_.rbox; }

  std::size_t concept_count() const { return concepts_.size(); }
  const Concept& concept_at(ConceptId id) const { return concepts_.at(id); }
  const ConceptInfo& info(ConceptId id) const { return info_[id]; }
  std::optional<ConceptId> find(const Concept& c) const;
  // Throws SignatureError when c is outside the closure.
  ConceptId id_of(const Concept& c) const;
  // Id of ∀R.C; the closure contains it whenever ∀₊ can require it.
  ConceptId forall_id(RoleId r, ConceptId filler) const;
  // (atom, negated atom) pairs present in the closure.
  const std::vector<std::pair<ConceptId, ConceptId>>& atom_pairs() const { return atom_pairs_; }

  std::size_t role_count() const { return rbox().role_count(); }
  RoleId role_id(const Role& r) const { return static_cast<RoleId>(rbox().index(r)); }
  Role role_at(RoleId id) const { return rbox().role_at(id); }
  bool subsumes(RoleId r, RoleId s) const { return rbox().subsumes(r, s); }
  bool transitive(RoleId r) const { return transitive_[r]; }
  // Every R with R ⊑* S, as a bitset over role ids.
  const RoleSet& subroles(RoleId s) const { return subroles_[s]; }
  // Every transitive R with R ⊑* S.
  const std::vector<RoleId>& transitive_subroles(RoleId s) const { return transitive_subroles_[s]; }

  ConceptSet empty_concepts() const { return ConceptSet(concepts_.size()); }
  RoleSet empty_roles() const { return RoleSet(role_count()); }

  const SearchLimits& limits() const { return limits_; }

  std::vector<Concept> concepts_of(const ConceptSet& set) const;
  std::vector<Role> roles_of(const RoleSet& set) const;

 private:
  ReducedProblem problem_;
  std::vector<Concept> concepts_;
  std::unordered_map<Concept, ConceptId, ConceptHash> ids_;
  std::vector<ConceptInfo> info_;
  std::map<std::pair<RoleId, ConceptId>, ConceptId> forall_;
  std::vector<std::pair<ConceptId, ConceptId>> atom_pairs_;
  std::vector<bool> transitive_;
  std::vector<RoleSet> subroles_;
  std::vector<std::vector<RoleId>> transitive_subroles_;
  SearchLimits limits_;
};

// Creation-ordered node identifier. Roots are created first.
enum class NodeId : std::uint32_t {};

inline std::uint32_t to_index(NodeId id) { return static_cast<std::uint32_t>(id); }
inline NodeId node_id(std::size_t index) { return static_cast<NodeId>(index); }

struct ForestNode {
  NodeId id{};
  bool root = false;
  std::optional<NodeId> parent;
  std::vector<NodeId> children;
  ConceptSet label;
  // Individuals this root was created for.
  std::vector<std::string> individuals;
  // Set on a root emptied by the ≤r-rule.
  std::optional<NodeId> merged_into;
  std::uint32_t depth = 0;
  // Directed edges, keyed by the other endpoint.
  std::map<NodeId, RoleSet> out;
  std::set<NodeId> in;
  // Nodes related to this one by ≠.
  std::set<NodeId> neq;
};

enum class BlockKind { kUnblocked, kDirect, kIndirect };

struct BlockingStatus {
  BlockKind kind = BlockKind::kUnblocked;
  // For direct blocking: the ancestor y that blocks the node.
  std::optional<NodeId> blocker;

  bool blocked() const { return kind != BlockKind::kUnblocked; }
  bool indirectly() const { return kind == BlockKind::kIndirect; }
};

struct ClashReport {
  NodeId node{};
  // The atom of an {A, ¬A} clash, or the at-most concept.
  ConceptId concept_id = kNoConcept;
  // Pairwise-distinct neighbours for an at-most clash.
  std::vector<NodeId> witnesses;
};

class CompletionForest {
 public:
  // Initial forest: one root per individual, root edges from role
  // assertions, ≠ from distinctness assertions, empty ≐.
  explicit CompletionForest(std::shared_ptr<const ProblemIndex> index);

  const ProblemIndex& index() const { return *index_; }
  std::shared_ptr<const ProblemIndex> shared_index() const { return index_; }

  std::size_t size() const { return size_; }
  const ForestNode& node(NodeId id) const {
    const std::uint32_t i = to_index(id);
    if (i >= size_) throw std::out_of_range("node id");
    return *(*chunks_[i / kChunk])[i % kChunk];
  }
  auto nodes() const {
    return std::views::iota(std::size_t{0}, size_) |
           std::views::transform([this](std::size_t i) -> const ForestNode& { return node(node_id(i)); });
  }

  // Root node for an individual, following ≐ through merged roots.
  NodeId resolve(const std::string& individual) const;
  NodeId initial_root(const std::string& individual) const;

  bool has_edge(NodeId from, NodeId to) const;
  // Label of edge ⟨from,to⟩; null when there is no such edge.
  const RoleSet* edge_label(NodeId from, NodeId to) const;

  bool distinct(NodeId a, NodeId b) const;
  bool equated(NodeId a, NodeId b) const;
  std::set<std::pair<NodeId, NodeId>> inequalities() const;
  const std::set<std::pair<NodeId, NodeId>>& equalities() const { return eq_; }

  // Node has a non-empty label or is an unmerged root.
  bool live(NodeId id) const;
  bool has_concept(NodeId id, ConceptId c) const { return node(id).label.test(c); }

  // S-successors via outgoing edges and Inv(S)-predecessors via incoming
  // edges, sorted by id.
  std::vector<NodeId> s_neighbours(NodeId x, RoleId s) const;
  std::vector<NodeId> s_neighbours(NodeId x, const Role& s) const;
  // S-neighbours whose label contains c.
  std::vector<NodeId> count_set(NodeId x, RoleId s, ConceptId c) const;
  std::vector<NodeId> count_set(NodeId x, const Role& s, const Concept& c) const;

  // Transitive closure of the tree-parent relation: is `a` a proper tree
  // ancestor of `b`?
  bool is_ancestor(NodeId a, NodeId b) const;

  // Blocking status of every node, indexed by node id.
  std::vector<BlockingStatus> compute_blocking() const;
  BlockingStatus blocking_status(NodeId x) const;
  // Status of x given the statuses of its ancestors.
  BlockingStatus blocking_status(NodeId x, const std::vector<BlockingStatus>& ancestors) const;

  std::optional<ClashReport> detect_clash() const;
  // Clash check restricted to the given nodes.
  std::optional<ClashReport> detect_clash(std::span<const NodeId> nodes) const;

  // Searches `candidates` for `size` pairwise-≠ nodes.
  bool has_distinct_subset(const std::vector<NodeId>& candidates, std::size_t size,
                           std::vector<NodeId>* witness = nullptr) const;

  // ---- mutation ----------------------------------------------------------
  // Returns true if the label changed.
  bool add_concept(NodeId x, ConceptId c);
  bool add_concepts(NodeId x, const ConceptSet& concepts);
  // New tree child of x with edge label {role} and label {c}. Enforces the
  // node budget and the path-length and out-degree bounds.
  NodeId add_child(NodeId x, RoleId role, ConceptId c);
  void add_edge_roles(NodeId from, NodeId to, const RoleSet& roles);
  void set_distinct(NodeId a, NodeId b);
  // ≤-rule effect for tree node y merged into z on behalf of x.
  void merge_into(NodeId x, NodeId y, NodeId z);
  // ≤r-rule effect for roots: y is merged into z.
  void merge_roots(NodeId y, NodeId z);

  // Nodes mutated since the last call, in first-touch order with repeats.
  std::vector<NodeId> take_touched() { return std::exchange(touched_, {}); }

  std::size_t max_node_budget() const { return max_nodes_; }
  void set_max_nodes(std::size_t n) { max_nodes_ = n; }

 private:
  static std::pair<NodeId, NodeId> ordered(NodeId a, NodeId b) {
    return a < b ? std::pair{a, b} : std::pair{b, a};
  }
  ForestNode& mut(NodeId id);
  std::optional<ClashReport> clash_at(const ForestNode& n) const;
  BlockingStatus direct_blocking(NodeId x) const;

  std::shared_ptr<const ProblemIndex> index_;
  // Copies of a forest share chunks and nodes; both are cloned on first
  // write, so a copy costs one pointer per chunk.
  static constexpr std::size_t kChunk = 64;
  using Chunk = std::vector<std::shared_ptr<ForestNode>>;
  void push_node(ForestNode node);

  std::vector<std::shared_ptr<Chunk>> chunks_;
  std::size_t size_ = 0;
  std::vector<NodeId> touched_;
  std::set<std::pair<NodeId, NodeId>> eq_;
  std::map<std::string, NodeId> individual_map_;
  std::size_t root_count_ = 0;
  std::size_t max_nodes_ = 100000;
};

// Graphviz rendering: node labels, edge role sets, ≠ dashed and ≐ dotted.
std::string to_dot(const CompletionForest& forest);

}  // namespace shiq

#endif  // SHIQ_FOREST_HPP_
