// Small-model search over partial interpretations. Unassigned atom and role
// bits evaluate to "unknown" under Kleene semantics, so a branch is cut as
// soon as some axiom is definitely false at some element.

#include <algorithm>
#include <cstdint>

#include "shiq/model.hpp"

namespace shiq {
namespace {

enum Truth : std::uint8_t { kFalse = 0, kUnknown = 1, kTrue = 2 };

Truth negate(Truth t) { return static_cast<Truth>(2 - t); }

struct Axiom {
  Concept expr;
  // Element the axiom is asserted at; nullopt for every element.
  std::optional<Element> at;
};

class Search {
 public:
  Search(const KnowledgeBase& kb, std::size_t domain, std::vector<Element> mapping,
         std::size_t budget)
      : kb_(kb), d_(domain), mapping_(std::move(mapping)), budget_(budget) {
    std::set<std::string> atoms;
    for (const auto& g : kb.tbox()) {
      collect_atoms(g.sub, atoms);
      collect_atoms(g.super, atoms);
    }
    for (const auto& a : kb.abox()) {
      if (const auto* inst = std::get_if<InstanceAssertion>(&a)) collect_atoms(inst->expr, atoms);
    }
    atoms.erase(std::string(kBottomAtom));
    atoms_.assign(atoms.begin(), atoms.end());
    roles_ = kb.rbox().names();
    values_.assign(atoms_.size() * d_ + roles_.size() * d_ * d_, kUnknown);

    for (const auto& g : kb.tbox()) {
      axioms_.push_back({Concept::disjunction(Concept::negation(g.sub), g.super), std::nullopt});
    }
    const auto& inds = kb.individuals();
    auto element = [&](const std::string& name) {
      return mapping_[std::find(inds.begin(), inds.end(), name) - inds.begin()];
    };
    for (const auto& a : kb.abox()) {
      if (const auto* inst = std::get_if<InstanceAssertion>(&a)) {
        axioms_.push_back({inst->expr, element(inst->individual)});
      } else if (const auto* rel = std::get_if<RelatedAssertion>(&a)) {
        forced_.push_back(role_var(rel->role, element(rel->from), element(rel->to)));
      } else {
        const auto& dis = std::get<DistinctAssertion>(a);
        if (element(dis.first) == element(dis.second)) impossible_ = true;
      }
    }

    const RoleBox& rbox = kb.rbox();
    for (std::size_t p = 0; p < roles_.size(); ++p) {
      if (rbox.is_transitive(Role{roles_[p], false})) transitive_.push_back(p);
      for (std::size_t q = 0; q < roles_.size(); ++q) {
        if (p == q) continue;
        if (rbox.subsumes(Role{roles_[p], false}, Role{roles_[q], false}))
          inclusions_.push_back({p, q, false});
        if (rbox.subsumes(Role{roles_[p], false}, Role{roles_[q], true}))
          inclusions_.push_back({p, q, true});
      }
    }
  }

  std::optional<Interpretation> run() {
    if (impossible_) return std::nullopt;
    for (std::size_t v : forced_) {
      if (!assign(v, kTrue)) return std::nullopt;
    }
    if (!propagate()) return std::nullopt;
    if (!dfs()) return std::nullopt;
    return build();
  }

 private:
  struct Inclusion {
    std::size_t sub;
    std::size_t super;
    bool flipped;
  };

  std::size_t atom_var(std::size_t atom, Element e) const { return atom * d_ + e; }
  std::size_t name_var(std::size_t role, Element a, Element b) const {
    return atoms_.size() * d_ + (role * d_ + a) * d_ + b;
  }
  std::size_t role_var(const Role& r, Element a, Element b) const {
    const std::size_t k = std::find(roles_.begin(), roles_.end(), r.name) - roles_.begin();
    return r.inverted ? name_var(k, b, a) : name_var(k, a, b);
  }

  bool assign(std::size_t var, Truth t) {
    if (values_[var] == t) return true;
    if (values_[var] != kUnknown) return false;
    values_[var] = t;
    changed_ = true;
    return true;
  }

  // Role inclusions and transitivity, both directions, to a fixpoint.
  bool propagate() {
    do {
      changed_ = false;
      for (const auto& inc : inclusions_) {
        for (Element a = 0; a < d_; ++a) {
          for (Element b = 0; b < d_; ++b) {
            const std::size_t sub = name_var(inc.sub, a, b);
            const std::size_t super = inc.flipped ? name_var(inc.super, b, a) : name_var(inc.super, a, b);
            if (values_[sub] == kTrue && !assign(super, kTrue)) return false;
            if (values_[super] == kFalse && !assign(sub, kFalse)) return false;
          }
        }
      }
      for (std::size_t r : transitive_) {
        for (Element a = 0; a < d_; ++a) {
          for (Element b = 0; b < d_; ++b) {
            const Truth ab = values_[name_var(r, a, b)];
            if (ab != kTrue) continue;
            for (Element c = 0; c < d_; ++c) {
              const Truth bc = values_[name_var(r, b, c)];
              const Truth ac = values_[name_var(r, a, c)];
              if (bc == kTrue && !assign(name_var(r, a, c), kTrue)) return false;
              if (ac == kFalse && !assign(name_var(r, b, c), kFalse)) return false;
            }
            for (Element z = 0; z < d_; ++z) {
              if (values_[name_var(r, z, b)] == kFalse && !assign(name_var(r, z, a), kFalse))
                return false;
            }
          }
        }
      }
    } while (changed_);
    return true;
  }

  Truth role_value(const Role& r, Element a, Element b) const { return values_[role_var(r, a, b)]; }

  Truth eval(const Concept& c, Element e) const {
    switch (c.kind()) {
      case ConceptKind::kAtom:
      case ConceptKind::kNegatedAtom: {
        Truth t = kFalse;
        if (c.name() != kBottomAtom) {
          const std::size_t k = std::lower_bound(atoms_.begin(), atoms_.end(), c.name()) - atoms_.begin();
          t = values_[atom_var(k, e)];
        }
        return c.kind() == ConceptKind::kAtom ? t : negate(t);
      }
      case ConceptKind::kNot:
        return negate(eval(c.operand(), e));
      case ConceptKind::kAnd:
        return std::min(eval(c.left(), e), eval(c.right(), e));
      case ConceptKind::kOr:
        return std::max(eval(c.left(), e), eval(c.right(), e));
      case ConceptKind::kSome:
      case ConceptKind::kAtLeast:
      case ConceptKind::kAtMost: {
        std::size_t sure = 0;
        std::size_t possible = 0;
        for (Element b = 0; b < d_; ++b) {
          const Truth both = std::min(role_value(c.role(), e, b), eval(c.operand(), b));
          if (both == kTrue) ++sure;
          if (both != kFalse) ++possible;
        }
        const std::size_t n = c.kind() == ConceptKind::kSome ? 1 : c.number();
        if (c.kind() == ConceptKind::kAtMost) {
          if (possible <= n) return kTrue;
          return sure > n ? kFalse : kUnknown;
        }
        if (sure >= n) return kTrue;
        return possible < n ? kFalse : kUnknown;
      }
      case ConceptKind::kAll: {
        Truth t = kTrue;
        for (Element b = 0; b < d_; ++b) {
          t = std::min(t, std::max(negate(role_value(c.role(), e, b)), eval(c.operand(), b)));
        }
        return t;
      }
    }
    return kUnknown;
  }

  // Some unassigned variable on which eval(c, e) depends while unknown.
  std::optional<std::size_t> pick(const Concept& c, Element e) const {
    switch (c.kind()) {
      case ConceptKind::kAtom:
      case ConceptKind::kNegatedAtom: {
        const std::size_t k = std::lower_bound(atoms_.begin(), atoms_.end(), c.name()) - atoms_.begin();
        return atom_var(k, e);
      }
      case ConceptKind::kNot:
        return pick(c.operand(), e);
      case ConceptKind::kAnd:
      case ConceptKind::kOr:
        if (eval(c.left(), e) == kUnknown) return pick(c.left(), e);
        return pick(c.right(), e);
      default:
        for (Element b = 0; b < d_; ++b) {
          const std::size_t rv = role_var(c.role(), e, b);
          const Truth filler = eval(c.operand(), b);
          if (values_[rv] == kUnknown && filler != (c.kind() == ConceptKind::kAll ? kTrue : kFalse))
            return rv;
          if (filler == kUnknown && values_[rv] != kFalse) return pick(c.operand(), b);
        }
        for (Element b = 0; b < d_; ++b) {
          if (values_[role_var(c.role(), e, b)] == kUnknown) return role_var(c.role(), e, b);
        }
        return std::nullopt;
    }
  }

  // kFalse on a violated axiom, kTrue when all hold, otherwise kUnknown with
  // `branch` set to a variable to decide next.
  Truth status(std::optional<std::size_t>& branch) const {
    Truth overall = kTrue;
    for (const auto& ax : axioms_) {
      const Element lo = ax.at ? *ax.at : 0;
      const Element hi = ax.at ? *ax.at + 1 : d_;
      for (Element e = lo; e < hi; ++e) {
        const Truth t = eval(ax.expr, e);
        if (t == kFalse) return kFalse;
        if (t == kUnknown && !branch) {
          branch = pick(ax.expr, e);
          overall = kUnknown;
        }
      }
    }
    return branch ? overall : kTrue;
  }

  bool dfs() {
    if (nodes_++ >= budget_) return false;
    std::optional<std::size_t> branch;
    const Truth s = status(branch);
    if (s == kFalse) return false;
    if (s == kTrue) return true;
    const std::vector<Truth> saved = values_;
    for (Truth choice : {kTrue, kFalse}) {
      if (assign(*branch, choice) && propagate() && dfs()) return true;
      values_ = saved;
      if (nodes_ >= budget_) return false;
    }
    return false;
  }

  Interpretation build() const {
    Interpretation i;
    i.domain_size = d_;
    for (std::size_t k = 0; k < atoms_.size(); ++k) {
      auto& set = i.concepts[atoms_[k]];
      for (Element e = 0; e < d_; ++e) {
        if (values_[atom_var(k, e)] == kTrue) set.insert(e);
      }
    }
    for (std::size_t k = 0; k < roles_.size(); ++k) {
      auto& set = i.roles[roles_[k]];
      for (Element a = 0; a < d_; ++a) {
        for (Element b = 0; b < d_; ++b) {
          if (values_[name_var(k, a, b)] == kTrue) set.emplace(a, b);
        }
      }
    }
    const auto& inds = kb_.individuals();
    for (std::size_t k = 0; k < inds.size(); ++k) i.individuals[inds[k]] = mapping_[k];
    return i;
  }

  const KnowledgeBase& kb_;
  std::size_t d_;
  std::vector<Element> mapping_;
  std::size_t budget_;
  std::size_t nodes_ = 0;
  bool impossible_ = false;
  bool changed_ = false;
  std::vector<std::string> atoms_;
  std::vector<std::string> roles_;
  std::vector<Truth> values_;
  std::vector<Axiom> axioms_;
  std::vector<std::size_t> forced_;
  std::vector<std::size_t> transitive_;
  std::vector<Inclusion> inclusions_;
};

// Individual-to-element maps up to renaming of elements: individual k goes
// to an element at most one above the largest used so far.
void mappings(std::size_t count, std::size_t domain, std::vector<Element>& current,
              std::vector<std::vector<Element>>& out) {
  if (current.size() == count) {
    out.push_back(current);
    return;
  }
  Element top = 0;
  for (Element e : current) top = std::max(top, e + 1);
  for (Element e = 0; e <= std::min(top, domain - 1); ++e) {
    current.push_back(e);
    mappings(count, domain, current, out);
    current.pop_back();
  }
}

}  // namespace

std::optional<Interpretation> find_model_bruteforce(const KnowledgeBase& kb,
                                                    const BruteForceOptions& options) {
  for (std::size_t d = 1; d <= options.max_domain; ++d) {
    std::vector<std::vector<Element>> maps;
    std::vector<Element> current;
    mappings(kb.individuals().size(), d, current, maps);
    const std::size_t share = std::max<std::size_t>(1, options.node_budget / maps.size());
    for (const auto& m : maps) {
      Search search(kb, d, m, share);
      if (auto model = search.run(); model && check_model(*model, kb)) return model;
    }
  }
  return std::nullopt;
}

std::optional<Interpretation> find_model_bruteforce(const ReducedProblem& p,
                                                    const BruteForceOptions& options) {
  return find_model_bruteforce(as_knowledge_base(p), options);
}

}  // namespace shiq
