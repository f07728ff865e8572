#include "shiq/model.hpp"

#include <algorithm>
#include <sstream>

#include "shiq/errors.hpp"

namespace shiq {

// ---------------------------------------------------------------------------
// Evaluation

namespace {

std::set<ElementPair> role_pairs(const Interpretation& i, const Role& r) {
  auto it = i.roles.find(r.name);
  if (it == i.roles.end()) throw SignatureError("no valuation for role '" + r.name + "'");
  if (!r.inverted) return it->second;
  std::set<ElementPair> flipped;
  for (const auto& [a, b] : it->second) flipped.emplace(b, a);
  return flipped;
}

// Number of R-successors of every element that lie in `filler`.
std::vector<std::size_t> successor_counts(const Interpretation& i, const Role& r,
                                          const ElementSet& filler) {
  std::vector<std::size_t> counts(i.domain_size, 0);
  for (const auto& [a, b] : role_pairs(i, r)) {
    if (filler.test(b)) ++counts[a];
  }
  return counts;
}

ElementSet atom_extension(const Interpretation& i, const std::string& name) {
  ElementSet out(i.domain_size);
  if (name == kBottomAtom) return out;
  auto it = i.concepts.find(name);
  if (it == i.concepts.end()) throw SignatureError("no valuation for concept '" + name + "'");
  for (Element e : it->second) out.set(e);
  return out;
}

}  // namespace

ElementSet eval_concept(const Interpretation& i, const Concept& c) {
  const std::size_t n = i.domain_size;
  switch (c.kind()) {
    case ConceptKind::kAtom:
      return atom_extension(i, c.name());
    case ConceptKind::kNegatedAtom:
      return ~atom_extension(i, c.name());
    case ConceptKind::kNot:
      return ~eval_concept(i, c.operand());
    case ConceptKind::kAnd:
      return eval_concept(i, c.left()) & eval_concept(i, c.right());
    case ConceptKind::kOr:
      return eval_concept(i, c.left()) | eval_concept(i, c.right());
    case ConceptKind::kSome:
    case ConceptKind::kAtLeast: {
      const auto counts = successor_counts(i, c.role(), eval_concept(i, c.operand()));
      const std::size_t need = c.kind() == ConceptKind::kSome ? 1 : c.number();
      ElementSet out(n);
      for (Element e = 0; e < n; ++e) out[e] = counts[e] >= need;
      return out;
    }
    case ConceptKind::kAll: {
      const auto counts = successor_counts(i, c.role(), ~eval_concept(i, c.operand()));
      ElementSet out(n);
      for (Element e = 0; e < n; ++e) out[e] = counts[e] == 0;
      return out;
    }
    case ConceptKind::kAtMost: {
      const auto counts = successor_counts(i, c.role(), eval_concept(i, c.operand()));
      ElementSet out(n);
      for (Element e = 0; e < n; ++e) out[e] = counts[e] <= c.number();
      return out;
    }
  }
  return ElementSet(n);
}

// ---------------------------------------------------------------------------
// Model checking

namespace {

std::set<ElementPair> transitive_closure(std::set<ElementPair> pairs) {
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<ElementPair> added;
    for (const auto& [a, b] : pairs) {
      for (auto it = pairs.lower_bound({b, 0}); it != pairs.end() && it->first == b; ++it) {
        if (!pairs.contains({a, it->second})) added.emplace_back(a, it->second);
      }
    }
    for (const auto& p : added) changed |= pairs.insert(p).second;
  }
  return pairs;
}

std::string pair_text(const ElementPair& p) {
  return "(" + std::to_string(p.first) + "," + std::to_string(p.second) + ")";
}

ModelCheck fail(std::string why) { return ModelCheck{false, std::move(why)}; }

}  // namespace

ModelCheck check_model(const Interpretation& i, const KnowledgeBase& kb) {
  if (i.domain_size == 0) return fail("empty domain");
  const RoleBox& rbox = kb.rbox();
  for (const auto& name : rbox.names()) {
    if (!i.roles.contains(name)) return fail("role '" + name + "' has no valuation");
  }
  for (const auto& name : rbox.transitive_names()) {
    const auto& pairs = i.roles.at(name);
    if (transitive_closure(pairs) != pairs) return fail("role '" + name + "' is not transitive");
  }
  for (const auto& inc : rbox.inclusions()) {
    const auto sub = role_pairs(i, inc.sub);
    const auto super = role_pairs(i, inc.super);
    for (const auto& p : sub) {
      if (!super.contains(p))
        return fail("inclusion " + to_string(inc.sub) + " ⊑ " + to_string(inc.super) +
                    " violated by " + pair_text(p));
    }
  }
  for (const auto& gci : kb.tbox()) {
    const ElementSet sub = eval_concept(i, gci.sub);
    const ElementSet super = eval_concept(i, gci.super);
    if (!sub.is_subset_of(super))
      return fail("GCI " + to_string(gci.sub) + " ⊑ " + to_string(gci.super) + " violated");
  }
  auto element = [&](const std::string& ind) -> std::optional<Element> {
    auto it = i.individuals.find(ind);
    if (it == i.individuals.end() || it->second >= i.domain_size) return std::nullopt;
    return it->second;
  };
  for (const auto& a : kb.abox()) {
    if (const auto* inst = std::get_if<InstanceAssertion>(&a)) {
      auto e = element(inst->individual);
      if (!e) return fail("individual '" + inst->individual + "' is not interpreted");
      if (!eval_concept(i, inst->expr).test(*e))
        return fail(inst->individual + " : " + to_string(inst->expr) + " violated");
    } else if (const auto* rel = std::get_if<RelatedAssertion>(&a)) {
      auto x = element(rel->from);
      auto y = element(rel->to);
      if (!x || !y) return fail("individual of a role assertion is not interpreted");
      if (!role_pairs(i, rel->role).contains({*x, *y}))
        return fail("(" + rel->from + "," + rel->to + ") : " + to_string(rel->role) + " violated");
    } else {
      const auto& d = std::get<DistinctAssertion>(a);
      auto x = element(d.first);
      auto y = element(d.second);
      if (!x || !y) return fail("individual of a distinctness assertion is not interpreted");
      if (*x == *y) return fail(d.first + " ≠ " + d.second + " violated");
    }
  }
  return {};
}

ModelCheck check_model(const Interpretation& i, const ReducedProblem& p) {
  return check_model(i, as_knowledge_base(p));
}

// ---------------------------------------------------------------------------
// Tableau conditions

namespace {

TableauCheck violated(int condition, std::string detail) {
  return TableauCheck{false, condition, std::move(detail)};
}

}  // namespace

TableauCheck check_tableau(const TableauStructure& t, const ReducedProblem& p) {
  if (t.size == 0) return violated(0, "empty carrier");
  const RoleBox& rbox = p.rbox;
  std::vector<Concept> seeds;
  for (const auto& a : p.abox) {
    if (const auto* inst = std::get_if<InstanceAssertion>(&a)) seeds.push_back(nnf(inst->expr));
  }
  const std::set<Concept> clos = closure(seeds, rbox);

  const std::size_t roles = rbox.role_count();
  std::vector<std::set<ElementPair>> edges(roles);
  for (const auto& [role, pairs] : t.edges) {
    if (!rbox.contains(role)) return violated(0, "edge role outside the signature");
    edges[rbox.index(role)] = pairs;
  }
  // succ[r][s]: elements t with <s,t> in E(r)
  std::vector<std::vector<std::vector<Element>>> succ(roles, std::vector<std::vector<Element>>(t.size));
  for (std::size_t r = 0; r < roles; ++r) {
    for (const auto& [a, b] : edges[r]) succ[r][a].push_back(b);
  }
  auto has = [&](Element s, const Concept& c) { return t.labels[s].contains(c); };
  auto at = [](Element s) { return " at element " + std::to_string(s); };

  for (std::size_t r = 0; r < roles; ++r) {
    for (const auto& [a, b] : edges[r]) {
      if (!edges[r ^ 1].contains({b, a}))
        return violated(7, "E(" + to_string(rbox.role_at(r)) + ") not mirrored by its inverse");
      for (std::size_t s = 0; s < roles; ++s) {
        if (rbox.subsumes(r, s) && !edges[s].contains({a, b}))
          return violated(8, "E(" + to_string(rbox.role_at(r)) + ") ⊄ E(" +
                                 to_string(rbox.role_at(s)) + ")");
      }
    }
  }

  for (Element s = 0; s < t.size; ++s) {
    const bool interior = s >= t.frontier.size() || !t.frontier[s];
    for (const Concept& c : t.labels[s]) {
      if (!clos.contains(c)) return violated(0, to_string(c) + " outside the closure" + at(s));
      switch (c.kind()) {
        case ConceptKind::kAtom:
          if (has(s, Concept::negated_atom(c.name())))
            return violated(1, "{" + c.name() + ", ¬" + c.name() + "}" + at(s));
          break;
        case ConceptKind::kAnd:
          if (!has(s, c.left()) || !has(s, c.right())) return violated(2, to_string(c) + at(s));
          break;
        case ConceptKind::kOr:
          if (!has(s, c.left()) && !has(s, c.right())) return violated(3, to_string(c) + at(s));
          break;
        case ConceptKind::kAll: {
          const std::size_t sr = rbox.index(c.role());
          for (Element u : succ[sr][s]) {
            if (!has(u, c.operand())) return violated(4, to_string(c) + at(s));
          }
          for (std::size_t r = 0; r < roles; ++r) {
            if (!rbox.is_transitive(r) || !rbox.subsumes(r, sr)) continue;
            const Concept needed = Concept::all(rbox.role_at(r), c.operand());
            for (Element u : succ[r][s]) {
              if (!has(u, needed)) return violated(6, to_string(needed) + " missing" + at(u));
            }
          }
          break;
        }
        case ConceptKind::kSome: {
          const std::size_t sr = rbox.index(c.role());
          const auto& next = succ[sr][s];
          if (interior && std::none_of(next.begin(), next.end(),
                                       [&](Element u) { return has(u, c.operand()); }))
            return violated(5, to_string(c) + at(s));
          break;
        }
        case ConceptKind::kAtMost:
        case ConceptKind::kAtLeast: {
          const std::size_t sr = rbox.index(c.role());
          const Concept complement = neg_nnf(c.operand());
          std::size_t count = 0;
          for (Element u : succ[sr][s]) {
            if (has(u, c.operand())) ++count;
            else if (!has(u, complement)) return violated(11, to_string(c) + at(s));
          }
          if (c.kind() == ConceptKind::kAtMost && count > c.number())
            return violated(9, to_string(c) + at(s));
          if (c.kind() == ConceptKind::kAtLeast && interior && count < c.number())
            return violated(10, to_string(c) + at(s));
          break;
        }
        default:
          break;
      }
    }
  }

  auto element = [&](const std::string& ind) -> std::optional<Element> {
    auto it = t.individuals.find(ind);
    if (it == t.individuals.end() || it->second >= t.size) return std::nullopt;
    return it->second;
  };
  for (const auto& a : p.abox) {
    if (const auto* inst = std::get_if<InstanceAssertion>(&a)) {
      auto e = element(inst->individual);
      if (!e || !has(*e, nnf(inst->expr))) return violated(12, inst->individual);
    } else if (const auto* rel = std::get_if<RelatedAssertion>(&a)) {
      auto x = element(rel->from);
      auto y = element(rel->to);
      if (!x || !y || !edges[rbox.index(rel->role)].contains({*x, *y}))
        return violated(13, rel->from + "," + rel->to);
    } else {
      const auto& d = std::get<DistinctAssertion>(a);
      auto x = element(d.first);
      auto y = element(d.second);
      if (!x || !y || *x == *y) return violated(14, d.first + " ≠ " + d.second);
    }
  }
  return {};
}

// ---------------------------------------------------------------------------
// Model extraction

Interpretation extract_model(const CompletionForest& forest) {
  const ProblemIndex& index = forest.index();
  const auto blocking = forest.compute_blocking();
  for (const auto& status : blocking) {
    if (status.kind == BlockKind::kDirect)
      throw UnsupportedError("forest contains a blocked node; use unravel_bounded");
  }

  Interpretation model;
  std::vector<std::optional<Element>> element_of(forest.size());
  std::vector<NodeId> members;
  for (const ForestNode& n : forest.nodes()) {
    const bool member = n.root ? !n.merged_into : !blocking[to_index(n.id)].blocked();
    if (!member) continue;
    element_of[to_index(n.id)] = members.size();
    members.push_back(n.id);
  }
  model.domain_size = members.size();

  for (const Concept& c : index.concepts_of(~index.empty_concepts())) {
    if ((c.kind() == ConceptKind::kAtom || c.kind() == ConceptKind::kNegatedAtom) &&
        c.name() != kBottomAtom)
      model.concepts[c.name()];
  }
  for (NodeId id : members) {
    for (const Concept& c : index.concepts_of(forest.node(id).label)) {
      if (c.kind() == ConceptKind::kAtom && c.name() != kBottomAtom)
        model.concepts[c.name()].insert(*element_of[to_index(id)]);
    }
  }

  // E(R) for every role id: R-neighbour pairs among members.
  const std::size_t roles = index.role_count();
  std::vector<std::set<ElementPair>> base(roles);
  for (NodeId x : members) {
    for (RoleId r = 0; r < roles; ++r) {
      for (NodeId y : forest.s_neighbours(x, r)) {
        if (auto ey = element_of[to_index(y)]) base[r].emplace(*element_of[to_index(x)], *ey);
      }
    }
  }

  // Role names: E(R)^+ if transitive, otherwise E(R) ∪ ⋃ P^I over proper
  // sub-roles P. Computed as a fixpoint so that cyclic hierarchies converge.
  const RoleBox& rbox = index.rbox();
  const std::size_t names = rbox.names().size();
  std::vector<std::set<ElementPair>> value(names);
  auto flipped = [](const std::set<ElementPair>& pairs) {
    std::set<ElementPair> out;
    for (const auto& [a, b] : pairs) out.emplace(b, a);
    return out;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t k = 0; k < names; ++k) {
      const RoleId r = static_cast<RoleId>(2 * k);
      std::set<ElementPair> next = base[r];
      if (index.transitive(r)) {
        next = transitive_closure(std::move(next));
      } else {
        for (RoleId p = 0; p < roles; ++p) {
          if (p == r || !index.subsumes(p, r)) continue;
          const auto& pv = value[p / 2];
          if (p & 1) {
            const auto f = flipped(pv);
            next.insert(f.begin(), f.end());
          } else {
            next.insert(pv.begin(), pv.end());
          }
        }
      }
      next.insert(value[k].begin(), value[k].end());
      if (next != value[k]) {
        value[k] = std::move(next);
        changed = true;
      }
    }
  }
  for (std::size_t k = 0; k < names; ++k) model.roles[rbox.names()[k]] = value[k];

  for (const auto& ind : index.problem().individuals) {
    if (auto e = element_of[to_index(forest.resolve(ind))]) model.individuals[ind] = *e;
  }
  return model;
}

// ---------------------------------------------------------------------------
// Bounded unravelling

TableauStructure unravel_bounded(const CompletionForest& forest, std::size_t depth,
                                 std::size_t max_elements) {
  const ProblemIndex& index = forest.index();
  const auto blocking = forest.compute_blocking();
  const std::size_t roles = index.role_count();

  struct PathElement {
    std::optional<Element> parent;
    NodeId tail;
    NodeId tail_prime;
    std::size_t length;
  };
  std::vector<PathElement> paths;
  std::map<NodeId, Element> root_element;
  for (const ForestNode& n : forest.nodes()) {
    if (!n.root || n.merged_into) continue;
    root_element[n.id] = paths.size();
    paths.push_back({std::nullopt, n.id, n.id, 0});
  }

  TableauStructure t;
  std::vector<std::set<ElementPair>> edges(roles);
  auto add_edge = [&](Element from, Element to, const RoleSet& label) {
    for (RoleId r = 0; r < roles; ++r) {
      if (!label.intersects(index.subroles(r))) continue;
      edges[r].emplace(from, to);
      edges[r ^ 1].emplace(to, from);
    }
  };

  for (Element p = 0; p < paths.size(); ++p) {
    if (paths[p].length >= depth) continue;
    const NodeId tail = paths[p].tail;
    for (const auto& [z, label] : forest.node(tail).out) {
      if (forest.node(z).root || label.none()) continue;
      const BlockingStatus& status = blocking[to_index(z)];
      NodeId head = z;
      if (status.kind == BlockKind::kIndirect) continue;
      if (status.kind == BlockKind::kDirect) head = *status.blocker;
      if (paths.size() >= max_elements) throw BudgetError("unravelling exceeds element budget");
      const Element q = paths.size();
      paths.push_back({p, head, z, paths[p].length + 1});
      add_edge(p, q, label);
    }
  }
  for (const auto& [x, ex] : root_element) {
    for (RoleId r = 0; r < roles; ++r) {
      for (NodeId y : forest.s_neighbours(x, r)) {
        auto it = root_element.find(y);
        if (it != root_element.end()) edges[r].emplace(ex, it->second);
      }
    }
  }

  t.size = paths.size();
  t.labels.reserve(paths.size());
  t.frontier.reserve(paths.size());
  for (const auto& path : paths) {
    const auto concepts = index.concepts_of(forest.node(path.tail).label);
    t.labels.emplace_back(concepts.begin(), concepts.end());
    t.frontier.push_back(path.length >= depth);
  }
  for (RoleId r = 0; r < roles; ++r) t.edges[index.role_at(r)] = std::move(edges[r]);
  for (const auto& ind : index.problem().individuals) {
    auto it = root_element.find(forest.resolve(ind));
    if (it != root_element.end()) t.individuals[ind] = it->second;
  }
  return t;
}

// ---------------------------------------------------------------------------
// Serialization

std::string serialize_interpretation(const Interpretation& i) {
  std::ostringstream os;
  os << "domain " << i.domain_size << "\n";
  for (const auto& [name, elems] : i.concepts) {
    os << "concept " << name;
    for (Element e : elems) os << " " << e;
    os << "\n";
  }
  for (const auto& [name, pairs] : i.roles) {
    os << "role " << name;
    for (const auto& [a, b] : pairs) os << " " << a << ":" << b;
    os << "\n";
  }
  for (const auto& [name, e] : i.individuals) os << "individual " << name << " " << e << "\n";
  return os.str();
}

Interpretation parse_interpretation(const std::string& text) {
  Interpretation i;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  auto element = [&](const std::string& tok) -> Element {
    try {
      std::size_t used = 0;
      const Element e = std::stoul(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      return e;
    } catch (const std::exception&) {
      throw ParseError("bad element '" + tok + "'", line_no, 1);
    }
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string kind;
    if (!(ls >> kind)) continue;
    std::string name;
    if (kind == "domain") {
      std::string n;
      ls >> n;
      i.domain_size = element(n);
      continue;
    }
    if (!(ls >> name)) throw ParseError("missing name", line_no, 1);
    std::string tok;
    if (kind == "concept") {
      auto& set = i.concepts[name];
      while (ls >> tok) set.insert(element(tok));
    } else if (kind == "role") {
      auto& set = i.roles[name];
      while (ls >> tok) {
        const auto colon = tok.find(':');
        if (colon == std::string::npos) throw ParseError("bad pair '" + tok + "'", line_no, 1);
        set.emplace(element(tok.substr(0, colon)), element(tok.substr(colon + 1)));
      }
    } else if (kind == "individual") {
      if (!(ls >> tok)) throw ParseError("missing element", line_no, 1);
      i.individuals[name] = element(tok);
    } else {
      throw ParseError("unknown record '" + kind + "'", line_no, 1);
    }
  }
  return i;
}

}  // namespace shiq
