// Concepts, roles, role hierarchies and knowledge bases for SHIQ.

#ifndef SHIQ_SYNTAX_HPP_
#define SHIQ_SYNTAX_HPP_

#include <compare>
#include <cstdint>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <boost/dynamic_bitset.hpp>

namespace shiq {

// Names starting with this prefix are reserved for the reasoner.
inline constexpr std::string_view kReservedPrefix = "$";
// Atom used to build the canonical contradiction and the trivially-true concept.
inline constexpr std::string_view kBottomAtom = "$bot";
// Fresh transitive role used to internalize terminologies.
inline constexpr std::string_view kUniversalRole = "$u";
// Individual synthesized for concept queries.
inline constexpr std::string_view kQueryIndividual = "$q0";

bool is_reserved_name(std::string_view name);

// A role name, possibly inverted. Double inversion is never represented.
struct Role {
  std::string name;
  bool inverted = false;

  auto operator<=>(const Role&) const = default;
};

Role inv(const Role& r);
std::string to_string(const Role& r);

struct RoleInclusion {
  Role sub;
  Role super;

  auto operator<=>(const RoleInclusion&) const = default;
};

// Role hierarchy: declared inclusions and transitive role names over a fixed
// signature of role names. The inversion-closed reflexive-transitive closure
// of the inclusions is computed once at construction.
//
// Roles are indexed densely: name i maps to 2*i (plain) and 2*i+1 (inverse),
// so inversion is `index ^ 1`.
class RoleBox {
 public:
  RoleBox() = default;
  // Role names mentioned in `inclusions` or `transitive` are added to the
  // signature even if absent from `names`.
  RoleBox(std::vector<std::string> names, std::vector<RoleInclusion> inclusions,
          std::set<std::string> transitive);

  const std::vector<std::string>& names() const { return names_; }
  const std::vector<RoleInclusion>& inclusions() const { return inclusions_; }
  const std::set<std::string>& transitive_names() const { return transitive_; }

  bool contains(const Role& r) const;
  bool contains_name(std::string_view name) const;

  // Number of roles including inverses.
  std::size_t role_count() const { return 2 * names_.size(); }
  std::size_t index(const Role& r) const;
  Role role_at(std::size_t index) const;

  bool is_transitive(const Role& r) const;
  bool is_transitive(std::size_t index) const;
  // r ⊑* s
  bool subsumes(const Role& r, const Role& s) const;
  bool subsumes(std::size_t r, std::size_t s) const { return closure_[r][s]; }
  // No transitive role p with p ⊑* r (r included).
  bool is_simple(const Role& r) const;

  // Returns a copy extended with additional names, inclusions and
  // transitive declarations.
  RoleBox extended(std::span<const std::string> names,
                   std::span<const RoleInclusion> inclusions,
                   std::span<const std::string> transitive) const;

  friend bool operator==(const RoleBox& a, const RoleBox& b) {
    return a.names_ == b.names_ && a.inclusions_ == b.inclusions_ &&
           a.transitive_ == b.transitive_;
  }

 private:
  std::size_t checked_index(const Role& r) const;

  std::vector<std::string> names_;
  std::vector<RoleInclusion> inclusions_;
  std::set<std::string> transitive_;
  std::vector<boost::dynamic_bitset<>> closure_;
};

enum class ConceptKind : std::uint8_t {
  kAtom,
  kNegatedAtom,
  kNot,
  kAnd,
  kOr,
  kSome,
  kAll,
  kAtLeast,
  kAtMost,
};

namespace detail {
struct ConceptNode;
}

// Immutable SHIQ concept expression with structural equality and ordering.
// Copies share structure.
class Concept {
 public:
  static Concept atom(std::string name);
  static Concept negated_atom(std::string name);
  static Concept negation(Concept c);
  static Concept conjunction(Concept a, Concept b);
  static Concept disjunction(Concept a, Concept b);
  static Concept some(Role r, Concept c);
  static Concept all(Role r, Concept c);
  static Concept at_least(std::uint32_t n, Role r, Concept c);
  static Concept at_most(std::uint32_t n, Role r, Concept c);

  // ¬⊥★, the trivially-true concept.
  static Concept top();
  // ⊥★ ⊓ ¬⊥★, the canonical contradiction.
  static Concept contradiction();

  ConceptKind kind() const;
  // Atom name for kAtom / kNegatedAtom.
  const std::string& name() const;
  // Operand of kNot, filler of quantifiers and number restrictions.
  const Concept& operand() const;
  const Concept& left() const;
  const Concept& right() const;
  const Role& role() const;
  std::uint32_t number() const;

  bool is_nnf() const;
  // Number of AST nodes.
  std::size_t size() const;
  std::size_t hash() const;

  friend bool operator==(const Concept& a, const Concept& b);
  friend std::strong_ordering operator<=>(const Concept& a, const Concept& b);

 private:
  explicit Concept(std::shared_ptr<const detail::ConceptNode> node)
      : node_(std::move(node)) {}

  std::shared_ptr<const detail::ConceptNode> node_;
};

namespace detail {
struct ConceptNode {
  ConceptKind kind;
  std::string name;
  Role role;
  std::uint32_t number = 0;
  // [0] is the operand/filler/left side, [1] the right side of ⊓ and ⊔.
  std::vector<Concept> children;
  std::size_t hash = 0;
  std::size_t size = 1;
  bool nnf = true;
};
}  // namespace detail

struct ConceptHash {
  std::size_t operator()(const Concept& c) const { return c.hash(); }
};

// Concept in the surface syntax used by the KB format.
std::string to_string(const Concept& c);

// Negation normal form. ≤(-1) R.C becomes Concept::contradiction().
Concept nnf(const Concept& c);
// NNF of ¬c for c already in NNF (the ~ operator).
Concept neg_nnf(const Concept& c);

// Collects every role occurring in `c`.
void collect_roles(const Concept& c, std::set<std::string>& out);
void collect_atoms(const Concept& c, std::set<std::string>& out);

// Smallest set containing `seeds`, closed under sub-concepts and ~, and
// containing ∀R.C whenever ∀S.C is a member and R ⊑* S is transitive.
// Seeds must be in NNF.
std::set<Concept> closure(std::span<const Concept> seeds, const RoleBox& rbox);

struct Gci {
  Concept sub;
  Concept super;

  friend bool operator==(const Gci&, const Gci&) = default;
};

struct InstanceAssertion {
  std::string individual;
  Concept expr;

  friend bool operator==(const InstanceAssertion&, const InstanceAssertion&) = default;
};

struct RelatedAssertion {
  std::string from;
  std::string to;
  Role role;

  friend bool operator==(const RelatedAssertion&, const RelatedAssertion&) = default;
};

// a ≠ b; symmetric.
struct DistinctAssertion {
  std::string first;
  std::string second;

  friend bool operator==(const DistinctAssertion&, const DistinctAssertion&) = default;
};

using Assertion = std::variant<InstanceAssertion, RelatedAssertion, DistinctAssertion>;

class KnowledgeBase {
 public:
  KnowledgeBase() = default;
  // Individuals are collected from the assertions in order of first
  // occurrence. Roles used anywhere are added to the role signature.
  KnowledgeBase(std::vector<Gci> tbox, RoleBox rbox, std::vector<Assertion> abox);

  const std::vector<Gci>& tbox() const { return tbox_; }
  const RoleBox& rbox() const { return rbox_; }
  const std::vector<Assertion>& abox() const { return abox_; }
  const std::vector<std::string>& individuals() const { return individuals_; }

  // Throws ValidationError on reserved names in user positions or number
  // restrictions over non-simple roles.
  void validate() const;

  friend bool operator==(const KnowledgeBase&, const KnowledgeBase&) = default;

 private:
  std::vector<Gci> tbox_;
  RoleBox rbox_;
  std::vector<Assertion> abox_;
  std::vector<std::string> individuals_;
};

// Throws ValidationError if a number restriction in `c` uses a non-simple role.
void check_simple_roles(const Concept& c, const RoleBox& rbox);

// clos of every instance assertion, after NNF.
std::set<Concept> closure(const KnowledgeBase& kb);

}  // namespace shiq

#endif  // SHIQ_SYNTAX_HPP_
