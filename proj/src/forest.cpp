#include "shiq/forest.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "shiq/errors.hpp"

namespace shiq {

// ---------------------------------------------------------------------------
// ProblemIndex

ProblemIndex::ProblemIndex(const ReducedProblem& problem) : problem_(problem) {
  std::vector<Concept> seeds;
  for (auto& a : problem_.abox) {
    if (auto* inst = std::get_if<InstanceAssertion>(&a)) {
      inst->expr = nnf(inst->expr);
      seeds.push_back(inst->expr);
    }
  }
  const std::set<Concept> clos = closure(seeds, problem_.rbox);
  concepts_.assign(clos.begin(), clos.end());
  for (ConceptId i = 0; i < concepts_.size(); ++i) ids_.emplace(concepts_[i], i);

  info_.resize(concepts_.size());
  for (ConceptId i = 0; i < concepts_.size(); ++i) {
    const Concept& c = concepts_[i];
    ConceptInfo& info = info_[i];
    info.kind = c.kind();
    info.complement = id_of(neg_nnf(c));
    switch (c.kind()) {
      case ConceptKind::kAnd:
      case ConceptKind::kOr:
        info.first = id_of(c.left());
        info.second = id_of(c.right());
        break;
      case ConceptKind::kSome:
      case ConceptKind::kAll:
      case ConceptKind::kAtLeast:
      case ConceptKind::kAtMost:
        info.first = id_of(c.operand());
        info.role = role_id(c.role());
        info.number = c.number();
        break;
      default:
        break;
    }
    if (c.kind() == ConceptKind::kAll) forall_.emplace(std::pair{info.role, info.first}, i);
    if (c.kind() == ConceptKind::kAtom) {
      if (auto neg = find(Concept::negated_atom(c.name()))) atom_pairs_.emplace_back(i, *neg);
    }
  }

  const std::size_t roles = role_count();
  transitive_.resize(roles);
  subroles_.assign(roles, RoleSet(roles));
  transitive_subroles_.resize(roles);
  for (RoleId r = 0; r < roles; ++r) transitive_[r] = rbox().is_transitive(std::size_t{r});
  for (RoleId s = 0; s < roles; ++s) {
    for (RoleId r = 0; r < roles; ++r) {
      if (!rbox().subsumes(r, s)) continue;
      subroles_[s].set(r);
      if (transitive_[r]) transitive_subroles_[s].push_back(r);
    }
  }

  limits_.m = concepts_.size();
  limits_.n = roles;
  std::size_t n_max = 1;
  for (const auto& info : info_) {
    if (info.kind == ConceptKind::kAtLeast) n_max = std::max<std::size_t>(n_max, info.number);
  }
  limits_.n_max = n_max;
  const std::size_t exponent = 2 * limits_.m * limits_.n;
  limits_.max_path_length = exponent >= 64 ? std::numeric_limits<std::uint64_t>::max()
                                           : (std::uint64_t{1} << exponent);
  limits_.max_out_degree = static_cast<std::uint64_t>(limits_.m) * n_max * limits_.n;
}

std::optional<ConceptId> ProblemIndex::find(const Concept& c) const {
  auto it = ids_.find(c);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

ConceptId ProblemIndex::id_of(const Concept& c) const {
  if (auto id = find(c)) return *id;
  throw SignatureError("concept outside the closure: " + to_string(c));
}

ConceptId ProblemIndex::forall_id(RoleId r, ConceptId filler) const {
  auto it = forall_.find({r, filler});
  if (it == forall_.end()) throw SignatureError("∀-concept missing from the closure");
  return it->second;
}

std::vector<Concept> ProblemIndex::concepts_of(const ConceptSet& set) const {
  std::vector<Concept> out;
  for (auto i = set.find_first(); i != ConceptSet::npos; i = set.find_next(i))
    out.push_back(concepts_[i]);
  return out;
}

std::vector<Role> ProblemIndex::roles_of(const RoleSet& set) const {
  std::vector<Role> out;
  for (auto i = set.find_first(); i != RoleSet::npos; i = set.find_next(i))
    out.push_back(role_at(static_cast<RoleId>(i)));
  return out;
}

// ---------------------------------------------------------------------------
// CompletionForest

CompletionForest::CompletionForest(std::shared_ptr<const ProblemIndex> index)
    : index_(std::move(index)), max_nodes_(index_->limits().max_nodes) {
  const ReducedProblem& p = index_->problem();
  for (const auto& ind : p.individuals) {
    ForestNode node;
    node.id = node_id(size_);
    node.root = true;
    node.label = index_->empty_concepts();
    node.individuals.push_back(ind);
    individual_map_.emplace(ind, node.id);
    push_node(std::move(node));
  }
  root_count_ = size_;
  for (const auto& a : p.abox) {
    if (const auto* inst = std::get_if<InstanceAssertion>(&a)) {
      add_concept(initial_root(inst->individual), index_->id_of(inst->expr));
    } else if (const auto* rel = std::get_if<RelatedAssertion>(&a)) {
      RoleSet roles = index_->empty_roles();
      roles.set(index_->role_id(rel->role));
      add_edge_roles(initial_root(rel->from), initial_root(rel->to), roles);
    } else {
      const auto& d = std::get<DistinctAssertion>(a);
      set_distinct(initial_root(d.first), initial_root(d.second));
    }
  }
}

ForestNode& CompletionForest::mut(NodeId id) {
  const std::uint32_t i = to_index(id);
  if (i >= size_) throw std::out_of_range("node id");
  std::shared_ptr<Chunk>& chunk = chunks_[i / kChunk];
  if (chunk.use_count() > 1) chunk = std::make_shared<Chunk>(*chunk);
  std::shared_ptr<ForestNode>& slot = (*chunk)[i % kChunk];
  if (slot.use_count() > 1) slot = std::make_shared<ForestNode>(*slot);
  touched_.push_back(id);
  return *slot;
}

void CompletionForest::push_node(ForestNode node) {
  if (size_ % kChunk == 0) {
    chunks_.push_back(std::make_shared<Chunk>());
    chunks_.back()->reserve(kChunk);
  } else if (chunks_.back().use_count() > 1) {
    auto copy = std::make_shared<Chunk>();
    copy->reserve(kChunk);
    *copy = *chunks_.back();
    chunks_.back() = std::move(copy);
  }
  chunks_.back()->push_back(std::make_shared<ForestNode>(std::move(node)));
  ++size_;
}

NodeId CompletionForest::initial_root(const std::string& individual) const {
  auto it = individual_map_.find(individual);
  if (it == individual_map_.end()) throw SignatureError("unknown individual '" + individual + "'");
  return it->second;
}

NodeId CompletionForest::resolve(const std::string& individual) const {
  NodeId id = initial_root(individual);
  while (node(id).merged_into) id = *node(id).merged_into;
  return id;
}

bool CompletionForest::has_edge(NodeId from, NodeId to) const {
  return node(from).out.contains(to);
}

const RoleSet* CompletionForest::edge_label(NodeId from, NodeId to) const {
  const auto& out = node(from).out;
  auto it = out.find(to);
  return it == out.end() ? nullptr : &it->second;
}

bool CompletionForest::distinct(NodeId a, NodeId b) const { return node(a).neq.contains(b); }

std::set<std::pair<NodeId, NodeId>> CompletionForest::inequalities() const {
  std::set<std::pair<NodeId, NodeId>> out;
  for (const ForestNode& n : nodes()) {
    for (NodeId other : n.neq) out.insert(ordered(n.id, other));
  }
  return out;
}

bool CompletionForest::equated(NodeId a, NodeId b) const { return eq_.contains(ordered(a, b)); }

bool CompletionForest::live(NodeId id) const {
  const ForestNode& n = node(id);
  return n.label.any() || (n.root && !n.merged_into);
}

std::vector<NodeId> CompletionForest::s_neighbours(NodeId x, RoleId s) const {
  std::vector<NodeId> result;
  const RoleSet& forward = index_->subroles(s);
  const RoleSet& backward = index_->subroles(s ^ 1);
  const ForestNode& n = node(x);
  for (const auto& [y, roles] : n.out) {
    if (roles.intersects(forward)) result.push_back(y);
  }
  for (NodeId y : n.in) {
    if (node(y).out.at(x).intersects(backward)) result.push_back(y);
  }
  std::sort(result.begin(), result.end());
  result.erase(std::unique(result.begin(), result.end()), result.end());
  return result;
}

std::vector<NodeId> CompletionForest::s_neighbours(NodeId x, const Role& s) const {
  return s_neighbours(x, index_->role_id(s));
}

std::vector<NodeId> CompletionForest::count_set(NodeId x, RoleId s, ConceptId c) const {
  std::vector<NodeId> result = s_neighbours(x, s);
  std::erase_if(result, [&](NodeId y) { return !node(y).label.test(c); });
  return result;
}

std::vector<NodeId> CompletionForest::count_set(NodeId x, const Role& s, const Concept& c) const {
  auto id = index_->find(c);
  if (!id) return {};
  return count_set(x, index_->role_id(s), *id);
}

bool CompletionForest::is_ancestor(NodeId a, NodeId b) const {
  std::optional<NodeId> cur = node(b).parent;
  while (cur) {
    if (*cur == a) return true;
    cur = node(*cur).parent;
  }
  return false;
}

BlockingStatus CompletionForest::direct_blocking(NodeId x) const {
  const ForestNode& xn = node(x);
  const NodeId xp = *xn.parent;
  const ForestNode& xpn = node(xp);
  const RoleSet& x_edge = xpn.out.at(x);
  for (std::optional<NodeId> y = xn.parent; y && !node(*y).root; y = node(*y).parent) {
    const ForestNode& yn = node(*y);
    const ForestNode& ypn = node(*yn.parent);
    if (yn.label == xn.label && ypn.label == xpn.label && ypn.out.at(*y) == x_edge)
      return {BlockKind::kDirect, *y};
  }
  return {};
}

std::vector<BlockingStatus> CompletionForest::compute_blocking() const {
  std::vector<BlockingStatus> status(size_);
  for (std::size_t i = 0; i < size_; ++i) status[i] = blocking_status(node_id(i), status);
  return status;
}

BlockingStatus CompletionForest::blocking_status(NodeId x,
                                                 const std::vector<BlockingStatus>& ancestors) const {
  const ForestNode& n = node(x);
  if (n.root) return {};
  const NodeId p = *n.parent;
  if (ancestors[to_index(p)].blocked() || node(p).out.at(x).none()) return {BlockKind::kIndirect, std::nullopt};
  return direct_blocking(x);
}

BlockingStatus CompletionForest::blocking_status(NodeId x) const {
  return compute_blocking().at(to_index(x));
}

bool CompletionForest::has_distinct_subset(const std::vector<NodeId>& candidates,
                                           std::size_t size,
                                           std::vector<NodeId>* witness) const {
  if (size == 0) return true;
  if (candidates.size() < size) return false;
  std::vector<NodeId> chosen;
  // Depth-first clique search over the ≠ graph.
  auto search = [&](auto&& self, std::size_t from) -> bool {
    if (chosen.size() == size) return true;
    for (std::size_t i = from; i + (size - chosen.size()) <= candidates.size(); ++i) {
      const NodeId c = candidates[i];
      bool ok = std::all_of(chosen.begin(), chosen.end(),
                            [&](NodeId other) { return distinct(c, other); });
      if (!ok) continue;
      chosen.push_back(c);
      if (self(self, i + 1)) return true;
      chosen.pop_back();
    }
    return false;
  };
  if (!search(search, 0)) return false;
  if (witness) *witness = chosen;
  return true;
}

std::optional<ClashReport> CompletionForest::detect_clash() const {
  for (const ForestNode& n : nodes()) {
    if (n.neq.contains(n.id)) return ClashReport{n.id, kNoConcept, {n.id}};
  }
  for (const ForestNode& n : nodes()) {
    if (auto clash = clash_at(n)) return clash;
  }
  return std::nullopt;
}

std::optional<ClashReport> CompletionForest::detect_clash(std::span<const NodeId> ids) const {
  for (NodeId id : ids) {
    if (node(id).neq.contains(id)) return ClashReport{id, kNoConcept, {id}};
  }
  for (NodeId id : ids) {
    if (auto clash = clash_at(node(id))) return clash;
  }
  return std::nullopt;
}

std::optional<ClashReport> CompletionForest::clash_at(const ForestNode& n) const {
  if (n.label.none()) return std::nullopt;
  for (const auto& [atom, neg] : index_->atom_pairs()) {
    if (n.label.test(atom) && n.label.test(neg)) return ClashReport{n.id, atom, {}};
  }
  for (auto c = n.label.find_first(); c != ConceptSet::npos; c = n.label.find_next(c)) {
    const ConceptInfo& info = index_->info(static_cast<ConceptId>(c));
    if (info.kind != ConceptKind::kAtMost) continue;
    const auto candidates = count_set(n.id, info.role, info.first);
    std::vector<NodeId> witness;
    if (has_distinct_subset(candidates, std::size_t{info.number} + 1, &witness))
      return ClashReport{n.id, static_cast<ConceptId>(c), std::move(witness)};
  }
  return std::nullopt;
}

bool CompletionForest::add_concept(NodeId x, ConceptId c) {
  if (node(x).label.test(c)) return false;
  mut(x).label.set(c);
  return true;
}

bool CompletionForest::add_concepts(NodeId x, const ConceptSet& concepts) {
  if (concepts.is_subset_of(node(x).label)) return false;
  mut(x).label |= concepts;
  return true;
}

NodeId CompletionForest::add_child(NodeId x, RoleId role, ConceptId c) {
  if (size_ >= max_nodes_)
    throw BudgetError("node budget of " + std::to_string(max_nodes_) + " exceeded");
  const SearchLimits& limits = index_->limits();
  const ForestNode& parent = node(x);
  const std::uint64_t depth = std::uint64_t{parent.depth} + 1;
  if (depth > limits.max_path_length)
    throw BudgetError("path length bound 2^(2mn) exceeded");
  const std::uint64_t degree_bound =
      parent.root ? limits.max_out_degree * std::max<std::size_t>(1, root_count_)
                  : limits.max_out_degree;
  if (parent.children.size() + 1 > degree_bound)
    throw BudgetError("out-degree bound m*n_max*n exceeded");

  ForestNode child;
  child.id = node_id(size_);
  child.parent = x;
  child.depth = static_cast<std::uint32_t>(depth);
  child.label = index_->empty_concepts();
  child.label.set(c);
  const NodeId id = child.id;
  push_node(std::move(child));
  touched_.push_back(id);
  mut(x).children.push_back(id);
  RoleSet roles = index_->empty_roles();
  roles.set(role);
  add_edge_roles(x, id, roles);
  return id;
}

void CompletionForest::add_edge_roles(NodeId from, NodeId to, const RoleSet& roles) {
  if (const RoleSet* existing = edge_label(from, to); existing && roles.is_subset_of(*existing)) return;
  auto& out = mut(from).out;
  auto it = out.find(to);
  if (it == out.end()) {
    out.emplace(to, roles);
    mut(to).in.insert(from);
  } else {
    it->second |= roles;
  }
}

void CompletionForest::set_distinct(NodeId a, NodeId b) {
  if (distinct(a, b)) return;
  mut(a).neq.insert(b);
  mut(b).neq.insert(a);
}

void CompletionForest::merge_into(NodeId x, NodeId y, NodeId z) {
  add_concepts(z, node(y).label);
  const RoleSet y_edge = node(x).out.at(y);
  if (has_edge(x, z)) {
    add_edge_roles(x, z, y_edge);
  } else {
    RoleSet inverse = index_->empty_roles();
    for (auto r = y_edge.find_first(); r != RoleSet::npos; r = y_edge.find_next(r))
      inverse.set(r ^ 1);
    add_edge_roles(z, x, inverse);
  }
  mut(x).out.at(y).reset();
  const std::set<NodeId> inherit = node(y).neq;
  for (NodeId u : inherit) set_distinct(u == y ? z : u, z);
}

void CompletionForest::merge_roots(NodeId y, NodeId z) {
  add_concepts(z, node(y).label);
  auto redirect = [&](NodeId w) { return w == y ? z : w; };
  const auto out = node(y).out;
  const auto in = node(y).in;
  for (const auto& [w, roles] : out) {
    add_edge_roles(z, redirect(w), roles);
    ForestNode& wn = mut(w);
    if (!wn.root && wn.parent == y) {
      wn.parent = z;
      auto& kids = mut(z).children;
      kids.insert(std::upper_bound(kids.begin(), kids.end(), w), w);
    }
  }
  for (NodeId w : in) {
    if (w == y) continue;
    add_edge_roles(w, z, node(w).out.at(y));
  }
  // Remove every edge to and from y.
  for (const auto& [w, roles] : out) mut(w).in.erase(y);
  for (NodeId w : in) mut(w).out.erase(y);
  ForestNode& yn = mut(y);
  yn.out.clear();
  yn.in.clear();
  yn.children.clear();
  yn.label.reset();
  yn.merged_into = z;

  const std::set<NodeId> inherit = node(y).neq;
  for (NodeId u : inherit) set_distinct(u == y ? z : u, z);
  eq_.insert(ordered(y, z));
}

// ---------------------------------------------------------------------------
// DOT

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

template <typename T>
std::string join(const std::vector<T>& items) {
  std::string out;
  for (const auto& item : items) {
    if (!out.empty()) out += ", ";
    out += to_string(item);
  }
  return out;
}

}  // namespace

std::string to_dot(const CompletionForest& forest) {
  const ProblemIndex& index = forest.index();
  std::ostringstream os;
  os << "digraph forest {\n  node [shape=box];\n";
  for (const ForestNode& n : forest.nodes()) {
    std::string title = "x" + std::to_string(to_index(n.id));
    for (const auto& ind : n.individuals) title += " " + ind;
    os << "  n" << to_index(n.id) << " [label=\"" << escape(title) << "\\n"
       << escape("{" + join(index.concepts_of(n.label)) + "}") << "\"";
    if (n.root) os << ", peripheries=2";
    os << "];\n";
  }
  for (const ForestNode& n : forest.nodes()) {
    for (const auto& [to, roles] : n.out) {
      os << "  n" << to_index(n.id) << " -> n" << to_index(to) << " [label=\""
         << escape("{" + join(index.roles_of(roles)) + "}") << "\"];\n";
    }
  }
  for (const auto& [a, b] : forest.inequalities())
    os << "  n" << to_index(a) << " -> n" << to_index(b) << " [style=dashed, dir=none, label=\"≠\"];\n";
  for (const auto& [a, b] : forest.equalities())
    os << "  n" << to_index(a) << " -> n" << to_index(b) << " [style=dotted, dir=none, label=\"≐\"];\n";
  os << "}\n";
  return os.str();
}

}  // namespace shiq
