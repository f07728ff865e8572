#include "shiq/syntax.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>

#include "shiq/errors.hpp"

namespace shiq {

bool is_reserved_name(std::string_view name) { return name.starts_with(kReservedPrefix); }

Role inv(const Role& r) { return Role{r.name, !r.inverted}; }

std::string to_string(const Role& r) {
  return r.inverted ? "(inv " + r.name + ")" : r.name;
}

// ---------------------------------------------------------------------------
// RoleBox

RoleBox::RoleBox(std::vector<std::string> names, std::vector<RoleInclusion> inclusions,
                 std::set<std::string> transitive)
    : names_(std::move(names)),
      inclusions_(std::move(inclusions)),
      transitive_(std::move(transitive)) {
  auto add_name = [this](const std::string& n) {
    if (std::find(names_.begin(), names_.end(), n) == names_.end()) names_.push_back(n);
  };
  // Deduplicate the caller's list while keeping first-occurrence order.
  std::vector<std::string> given;
  given.swap(names_);
  for (const auto& n : given) add_name(n);
  for (const auto& inc : inclusions_) {
    add_name(inc.sub.name);
    add_name(inc.super.name);
  }
  for (const auto& t : transitive_) add_name(t);

  const std::size_t count = role_count();
  closure_.assign(count, boost::dynamic_bitset<>(count));
  std::vector<std::vector<std::size_t>> succ(count);
  for (const auto& inc : inclusions_) {
    const std::size_t r = index(inc.sub);
    const std::size_t s = index(inc.super);
    succ[r].push_back(s);
    succ[r ^ 1].push_back(s ^ 1);
  }
  for (std::size_t start = 0; start < count; ++start) {
    auto& reach = closure_[start];
    std::vector<std::size_t> stack{start};
    reach.set(start);
    while (!stack.empty()) {
      const std::size_t cur = stack.back();
      stack.pop_back();
      for (std::size_t next : succ[cur]) {
        if (!reach.test(next)) {
          reach.set(next);
          stack.push_back(next);
        }
      }
    }
  }
}

bool RoleBox::contains_name(std::string_view name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

bool RoleBox::contains(const Role& r) const { return contains_name(r.name); }

std::size_t RoleBox::checked_index(const Role& r) const {
  auto it = std::find(names_.begin(), names_.end(), r.name);
  if (it == names_.end()) throw SignatureError("unknown role '" + r.name + "'");
  return 2 * static_cast<std::size_t>(it - names_.begin()) + (r.inverted ? 1 : 0);
}

std::size_t RoleBox::index(const Role& r) const { return checked_index(r); }

Role RoleBox::role_at(std::size_t index) const {
  return Role{names_.at(index / 2), (index & 1) != 0};
}

bool RoleBox::is_transitive(const Role& r) const {
  checked_index(r);
  return transitive_.contains(r.name);
}

bool RoleBox::is_transitive(std::size_t index) const {
  return transitive_.contains(names_.at(index / 2));
}

bool RoleBox::subsumes(const Role& r, const Role& s) const {
  return closure_[checked_index(r)][checked_index(s)];
}

bool RoleBox::is_simple(const Role& r) const {
  const std::size_t target = checked_index(r);
  for (std::size_t p = 0; p < role_count(); ++p) {
    if (closure_[p][target] && is_transitive(p)) return false;
  }
  return true;
}

RoleBox RoleBox::extended(std::span<const std::string> names,
                          std::span<const RoleInclusion> inclusions,
                          std::span<const std::string> transitive) const {
  std::vector<std::string> all_names = names_;
  all_names.insert(all_names.end(), names.begin(), names.end());
  std::vector<RoleInclusion> all_inclusions = inclusions_;
  for (const auto& inc : inclusions) {
    if (std::find(all_inclusions.begin(), all_inclusions.end(), inc) == all_inclusions.end())
      all_inclusions.push_back(inc);
  }
  std::set<std::string> all_transitive = transitive_;
  all_transitive.insert(transitive.begin(), transitive.end());
  return RoleBox(std::move(all_names), std::move(all_inclusions), std::move(all_transitive));
}

// ---------------------------------------------------------------------------
// Concept

namespace {

std::size_t mix(std::size_t seed, std::size_t value) {
  return seed ^ (value + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

std::shared_ptr<const detail::ConceptNode> finish(detail::ConceptNode node) {
  std::size_t h = static_cast<std::size_t>(node.kind);
  h = mix(h, std::hash<std::string>{}(node.name));
  h = mix(h, std::hash<std::string>{}(node.role.name));
  h = mix(h, node.role.inverted ? 1 : 0);
  h = mix(h, node.number);
  bool nnf = node.kind != ConceptKind::kNot;
  for (const auto& child : node.children) {
    h = mix(h, child.hash());
    node.size += child.size();
    nnf = nnf && child.is_nnf();
  }
  node.hash = h;
  node.nnf = nnf;
  return std::make_shared<const detail::ConceptNode>(std::move(node));
}

detail::ConceptNode blank(ConceptKind kind) {
  detail::ConceptNode node;
  node.kind = kind;
  return node;
}

}  // namespace

Concept Concept::atom(std::string name) {
  auto node = blank(ConceptKind::kAtom);
  node.name = std::move(name);
  return Concept(finish(std::move(node)));
}

Concept Concept::negated_atom(std::string name) {
  auto node = blank(ConceptKind::kNegatedAtom);
  node.name = std::move(name);
  return Concept(finish(std::move(node)));
}

Concept Concept::negation(Concept c) {
  if (c.kind() == ConceptKind::kAtom) return negated_atom(c.name());
  auto node = blank(ConceptKind::kNot);
  node.children.push_back(std::move(c));
  return Concept(finish(std::move(node)));
}

Concept Concept::conjunction(Concept a, Concept b) {
  auto node = blank(ConceptKind::kAnd);
  node.children = {std::move(a), std::move(b)};
  return Concept(finish(std::move(node)));
}

Concept Concept::disjunction(Concept a, Concept b) {
  auto node = blank(ConceptKind::kOr);
  node.children = {std::move(a), std::move(b)};
  return Concept(finish(std::move(node)));
}

Concept Concept::some(Role r, Concept c) {
  auto node = blank(ConceptKind::kSome);
  node.role = std::move(r);
  node.children.push_back(std::move(c));
  return Concept(finish(std::move(node)));
}

Concept Concept::all(Role r, Concept c) {
  auto node = blank(ConceptKind::kAll);
  node.role = std::move(r);
  node.children.push_back(std::move(c));
  return Concept(finish(std::move(node)));
}

Concept Concept::at_least(std::uint32_t n, Role r, Concept c) {
  auto node = blank(ConceptKind::kAtLeast);
  node.number = n;
  node.role = std::move(r);
  node.children.push_back(std::move(c));
  return Concept(finish(std::move(node)));
}

Concept Concept::at_most(std::uint32_t n, Role r, Concept c) {
  auto node = blank(ConceptKind::kAtMost);
  node.number = n;
  node.role = std::move(r);
  node.children.push_back(std::move(c));
  return Concept(finish(std::move(node)));
}

Concept Concept::top() { return negated_atom(std::string(kBottomAtom)); }

Concept Concept::contradiction() {
  return conjunction(atom(std::string(kBottomAtom)), negated_atom(std::string(kBottomAtom)));
}

ConceptKind Concept::kind() const { return node_->kind; }
const std::string& Concept::name() const { return node_->name; }
const Concept& Concept::operand() const { return node_->children.at(0); }
const Concept& Concept::left() const { return node_->children.at(0); }
const Concept& Concept::right() const { return node_->children.at(1); }
const Role& Concept::role() const { return node_->role; }
std::uint32_t Concept::number() const { return node_->number; }
bool Concept::is_nnf() const { return node_->nnf; }
std::size_t Concept::size() const { return node_->size; }
std::size_t Concept::hash() const { return node_->hash; }

bool operator==(const Concept& a, const Concept& b) {
  if (a.node_ == b.node_) return true;
  if (a.hash() != b.hash() || a.size() != b.size()) return false;
  return (a <=> b) == std::strong_ordering::equal;
}

std::strong_ordering operator<=>(const Concept& a, const Concept& b) {
  if (a.node_ == b.node_) return std::strong_ordering::equal;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  if (auto c = x.kind <=> y.kind; c != 0) return c;
  if (auto c = x.name <=> y.name; c != 0) return c;
  if (auto c = x.role <=> y.role; c != 0) return c;
  if (auto c = x.number <=> y.number; c != 0) return c;
  for (std::size_t i = 0; i < x.children.size(); ++i) {
    if (auto c = x.children[i] <=> y.children[i]; c != 0) return c;
  }
  return std::strong_ordering::equal;
}

std::string to_string(const Concept& c) {
  switch (c.kind()) {
    case ConceptKind::kAtom:
      return c.name();
    case ConceptKind::kNegatedAtom:
      return "(not " + c.name() + ")";
    case ConceptKind::kNot:
      return "(not " + to_string(c.operand()) + ")";
    case ConceptKind::kAnd:
      return "(and " + to_string(c.left()) + " " + to_string(c.right()) + ")";
    case ConceptKind::kOr:
      return "(or " + to_string(c.left()) + " " + to_string(c.right()) + ")";
    case ConceptKind::kSome:
      return "(some " + to_string(c.role()) + " " + to_string(c.operand()) + ")";
    case ConceptKind::kAll:
      return "(all " + to_string(c.role()) + " " + to_string(c.operand()) + ")";
    case ConceptKind::kAtLeast:
      return "(at-least " + std::to_string(c.number()) + " " + to_string(c.role()) + " " +
             to_string(c.operand()) + ")";
    case ConceptKind::kAtMost:
      return "(at-most " + std::to_string(c.number()) + " " + to_string(c.role()) + " " +
             to_string(c.operand()) + ")";
  }
  return {};
}

// ---------------------------------------------------------------------------
// Normal forms

namespace {

Concept negate(const Concept& c);

Concept to_nnf(const Concept& c) {
  if (c.is_nnf()) return c;
  switch (c.kind()) {
    case ConceptKind::kNot:
      return negate(c.operand());
    case ConceptKind::kAnd:
      return Concept::conjunction(to_nnf(c.left()), to_nnf(c.right()));
    case ConceptKind::kOr:
      return Concept::disjunction(to_nnf(c.left()), to_nnf(c.right()));
    case ConceptKind::kSome:
      return Concept::some(c.role(), to_nnf(c.operand()));
    case ConceptKind::kAll:
      return Concept::all(c.role(), to_nnf(c.operand()));
    case ConceptKind::kAtLeast:
      return Concept::at_least(c.number(), c.role(), to_nnf(c.operand()));
    case ConceptKind::kAtMost:
      return Concept::at_most(c.number(), c.role(), to_nnf(c.operand()));
    case ConceptKind::kAtom:
    case ConceptKind::kNegatedAtom:
      break;
  }
  return c;
}

// NNF of ¬c.
Concept negate(const Concept& c) {
  switch (c.kind()) {
    case ConceptKind::kAtom:
      return Concept::negated_atom(c.name());
    case ConceptKind::kNegatedAtom:
      return Concept::atom(c.name());
    case ConceptKind::kNot:
      return to_nnf(c.operand());
    case ConceptKind::kAnd:
      return Concept::disjunction(negate(c.left()), negate(c.right()));
    case ConceptKind::kOr:
      return Concept::conjunction(negate(c.left()), negate(c.right()));
    case ConceptKind::kSome:
      return Concept::all(c.role(), negate(c.operand()));
    case ConceptKind::kAll:
      return Concept::some(c.role(), negate(c.operand()));
    case ConceptKind::kAtMost:
      return Concept::at_least(c.number() + 1, c.role(), to_nnf(c.operand()));
    case ConceptKind::kAtLeast:
      if (c.number() == 0) return Concept::contradiction();
      return Concept::at_most(c.number() - 1, c.role(), to_nnf(c.operand()));
  }
  return c;
}

}  // namespace

Concept nnf(const Concept& c) { return to_nnf(c); }

Concept neg_nnf(const Concept& c) { return negate(c); }

void collect_roles(const Concept& c, std::set<std::string>& out) {
  switch (c.kind()) {
    case ConceptKind::kSome:
    case ConceptKind::kAll:
    case ConceptKind::kAtLeast:
    case ConceptKind::kAtMost:
      out.insert(c.role().name);
      collect_roles(c.operand(), out);
      break;
    case ConceptKind::kAnd:
    case ConceptKind::kOr:
      collect_roles(c.left(), out);
      collect_roles(c.right(), out);
      break;
    case ConceptKind::kNot:
      collect_roles(c.operand(), out);
      break;
    default:
      break;
  }
}

void collect_atoms(const Concept& c, std::set<std::string>& out) {
  switch (c.kind()) {
    case ConceptKind::kAtom:
    case ConceptKind::kNegatedAtom:
      out.insert(c.name());
      break;
    case ConceptKind::kAnd:
    case ConceptKind::kOr:
      collect_atoms(c.left(), out);
      collect_atoms(c.right(), out);
      break;
    default:
      collect_atoms(c.operand(), out);
      break;
  }
}

std::set<Concept> closure(std::span<const Concept> seeds, const RoleBox& rbox) {
  std::set<Concept> result;
  std::deque<Concept> work(seeds.begin(), seeds.end());
  auto push = [&](const Concept& c) {
    if (!result.contains(c)) work.push_back(c);
  };
  while (!work.empty()) {
    Concept c = std::move(work.front());
    work.pop_front();
    if (!result.insert(c).second) continue;
    push(neg_nnf(c));
    switch (c.kind()) {
      case ConceptKind::kAnd:
      case ConceptKind::kOr:
        push(c.left());
        push(c.right());
        break;
      case ConceptKind::kAll: {
        push(c.operand());
        const std::size_t s = rbox.index(c.role());
        for (std::size_t r = 0; r < rbox.role_count(); ++r) {
          if (r != s && rbox.is_transitive(r) && rbox.subsumes(r, s))
            push(Concept::all(rbox.role_at(r), c.operand()));
        }
        break;
      }
      case ConceptKind::kSome:
      case ConceptKind::kAtLeast:
      case ConceptKind::kAtMost:
      case ConceptKind::kNot:
        push(c.operand());
        break;
      case ConceptKind::kAtom:
      case ConceptKind::kNegatedAtom:
        break;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Knowledge bases

namespace {

void each_concept(const KnowledgeBase& kb, const std::function<void(const Concept&)>& fn) {
  for (const auto& gci : kb.tbox()) {
    fn(gci.sub);
    fn(gci.super);
  }
  for (const auto& a : kb.abox()) {
    if (const auto* inst = std::get_if<InstanceAssertion>(&a)) fn(inst->expr);
  }
}

}  // namespace

KnowledgeBase::KnowledgeBase(std::vector<Gci> tbox, RoleBox rbox, std::vector<Assertion> abox)
    : tbox_(std::move(tbox)), abox_(std::move(abox)) {
  std::set<std::string> seen;
  auto add_individual = [&](const std::string& name) {
    if (seen.insert(name).second) individuals_.push_back(name);
  };
  std::set<std::string> roles;
  for (const auto& a : abox_) {
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, InstanceAssertion>) {
            add_individual(x.individual);
            collect_roles(x.expr, roles);
          } else if constexpr (std::is_same_v<T, RelatedAssertion>) {
            add_individual(x.from);
            add_individual(x.to);
            roles.insert(x.role.name);
          } else {
            add_individual(x.first);
            add_individual(x.second);
          }
        },
        a);
  }
  for (const auto& gci : tbox_) {
    collect_roles(gci.sub, roles);
    collect_roles(gci.super, roles);
  }
  std::vector<std::string> missing;
  for (const auto& r : roles) {
    if (!rbox.contains_name(r)) missing.push_back(r);
  }
  rbox_ = missing.empty() ? std::move(rbox) : rbox.extended(missing, {}, {});
}

void check_simple_roles(const Concept& c, const RoleBox& rbox) {
  switch (c.kind()) {
    case ConceptKind::kAtLeast:
    case ConceptKind::kAtMost:
      if (!rbox.is_simple(c.role()))
        throw ValidationError("number restriction over non-simple role '" +
                              to_string(c.role()) + "' in " + to_string(c));
      check_simple_roles(c.operand(), rbox);
      break;
    case ConceptKind::kSome:
    case ConceptKind::kAll:
    case ConceptKind::kNot:
      check_simple_roles(c.operand(), rbox);
      break;
    case ConceptKind::kAnd:
    case ConceptKind::kOr:
      check_simple_roles(c.left(), rbox);
      check_simple_roles(c.right(), rbox);
      break;
    default:
      break;
  }
}

void KnowledgeBase::validate() const {
  auto reserved = [](const std::string& what, const std::string& name) {
    if (is_reserved_name(name))
      throw ValidationError("reserved name '" + name + "' used as " + what);
  };
  for (const auto& n : rbox_.names()) reserved("role", n);
  for (const auto& n : individuals_) reserved("individual", n);
  each_concept(*this, [&](const Concept& c) {
    std::set<std::string> atoms;
    collect_atoms(c, atoms);
    for (const auto& a : atoms) reserved("concept name", a);
    check_simple_roles(c, rbox_);
  });
}

std::set<Concept> closure(const KnowledgeBase& kb) {
  std::vector<Concept> seeds;
  for (const auto& a : kb.abox()) {
    if (const auto* inst = std::get_if<InstanceAssertion>(&a)) seeds.push_back(nnf(inst->expr));
  }
  return closure(seeds, kb.rbox());
}

}  // namespace shiq
