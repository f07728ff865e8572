#include "shiq/reduction.hpp"

#include <set>

namespace shiq {

namespace {

std::vector<std::string> individuals_of(const std::vector<Assertion>& abox) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  auto add = [&](const std::string& n) {
    if (seen.insert(n).second) out.push_back(n);
  };
  for (const auto& a : abox) {
    if (const auto* i = std::get_if<InstanceAssertion>(&a)) {
      add(i->individual);
    } else if (const auto* r = std::get_if<RelatedAssertion>(&a)) {
      add(r->from);
      add(r->to);
    } else {
      const auto& d = std::get<DistinctAssertion>(a);
      add(d.first);
      add(d.second);
    }
  }
  return out;
}

Role universal() { return Role{std::string(kUniversalRole), false}; }

// C_T ⊓ ∀U.C_T
Concept propagated(const Concept& internalized) {
  return Concept::conjunction(internalized, Concept::all(universal(), internalized));
}

}  // namespace

Concept internalized_concept(std::span<const Gci> tbox) {
  if (tbox.empty()) return Concept::top();
  auto axiom = [](const Gci& g) {
    return nnf(Concept::disjunction(Concept::negation(g.sub), g.super));
  };
  Concept result = axiom(tbox.front());
  for (std::size_t i = 1; i < tbox.size(); ++i)
    result = Concept::conjunction(result, axiom(tbox[i]));
  return result;
}

RoleBox universal_role_box(const RoleBox& rbox, const std::set<std::string>& extra_roles) {
  std::vector<std::string> names(extra_roles.begin(), extra_roles.end());
  std::set<std::string> all(rbox.names().begin(), rbox.names().end());
  all.insert(extra_roles.begin(), extra_roles.end());
  std::vector<RoleInclusion> inclusions;
  const Role u = universal();
  for (const auto& name : all) {
    inclusions.push_back({Role{name, false}, u});
    inclusions.push_back({Role{name, true}, u});
  }
  names.push_back(u.name);
  const std::string transitive[] = {u.name};
  return rbox.extended(names, inclusions, transitive);
}

ReducedProblem reduce_concept_sat(const Concept& c, const KnowledgeBase& kb) {
  const Concept internal = internalized_concept(kb.tbox());
  std::set<std::string> roles;
  collect_roles(c, roles);
  ReducedProblem p;
  p.universal_role = std::string(kUniversalRole);
  p.provenance = Provenance::kConceptSatisfiability;
  p.rbox = universal_role_box(kb.rbox(), roles);
  p.abox.push_back(InstanceAssertion{
      std::string(kQueryIndividual),
      nnf(Concept::conjunction(Concept::conjunction(c, internal),
                               Concept::all(universal(), internal)))});
  p.individuals = individuals_of(p.abox);
  return p;
}

ReducedProblem reduce_subsumption(const Concept& c, const Concept& d, const KnowledgeBase& kb) {
  ReducedProblem p = reduce_concept_sat(Concept::conjunction(c, Concept::negation(d)), kb);
  std::set<std::string> roles;
  collect_roles(d, roles);
  p.rbox = universal_role_box(p.rbox, roles);
  p.provenance = Provenance::kSubsumption;
  return p;
}

ReducedProblem reduce_abox_consistency(const KnowledgeBase& kb) {
  const Concept internal = nnf(propagated(internalized_concept(kb.tbox())));
  ReducedProblem p;
  p.universal_role = std::string(kUniversalRole);
  p.provenance = Provenance::kAboxConsistency;
  p.rbox = universal_role_box(kb.rbox(), {});
  for (const auto& a : kb.abox()) {
    if (const auto* inst = std::get_if<InstanceAssertion>(&a)) {
      p.abox.push_back(InstanceAssertion{inst->individual, nnf(inst->expr)});
    } else {
      p.abox.push_back(a);
    }
  }
  std::vector<std::string> individuals = individuals_of(p.abox);
  if (individuals.empty()) individuals.emplace_back(kQueryIndividual);
  for (const auto& ind : individuals) p.abox.push_back(InstanceAssertion{ind, internal});
  p.individuals = individuals_of(p.abox);
  return p;
}

KnowledgeBase as_knowledge_base(const ReducedProblem& p) { return KnowledgeBase({}, p.rbox, p.abox); }

}  // namespace shiq
