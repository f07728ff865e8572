// Internalization of terminologies and reduction of reasoning tasks to ABox
// consistency w.r.t. a role hierarchy.

#ifndef SHIQ_REDUCTION_HPP_
#define SHIQ_REDUCTION_HPP_

#include <span>
#include <string>
#include <vector>

#include "shiq/syntax.hpp"

namespace shiq {

enum class Provenance { kConceptSatisfiability, kSubsumption, kAboxConsistency };

// An ABox in NNF together with a role hierarchy that contains the transitive
// universal role; the terminology has been internalized and is empty.
struct ReducedProblem {
  std::vector<Assertion> abox;
  RoleBox rbox;
  std::string universal_role;
  Provenance provenance = Provenance::kAboxConsistency;
  // Individuals in order of first occurrence in `abox`.
  std::vector<std::string> individuals;
};

// Conjunction of nnf(¬C ⊔ D) over all GCIs; ¬⊥★ for an empty terminology.
Concept internalized_concept(std::span<const Gci> tbox);

// R_U: `rbox` plus the transitive universal role and R ⊑ U, Inv(R) ⊑ U for
// every role name in the signature and in `extra_roles`.
RoleBox universal_role_box(const RoleBox& rbox, const std::set<std::string>& extra_roles);

// {$q0 : nnf(C ⊓ C_T ⊓ ∀U.C_T)} w.r.t. R_U. The KB's ABox is not consulted.
ReducedProblem reduce_concept_sat(const Concept& c, const KnowledgeBase& kb);
// C is subsumed by D iff the reduced problem is inconsistent.
ReducedProblem reduce_subsumption(const Concept& c, const Concept& d, const KnowledgeBase& kb);
// The ABox (concepts in NNF) plus a : nnf(C_T ⊓ ∀U.C_T) for each individual.
ReducedProblem reduce_abox_consistency(const KnowledgeBase& kb);

// View of a reduced problem as a knowledge base with an empty terminology.
KnowledgeBase as_knowledge_base(const ReducedProblem& p);

}  // namespace shiq

#endif  // SHIQ_REDUCTION_HPP_
