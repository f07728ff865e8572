// Random concepts, knowledge bases and interpretations for property tests.

#ifndef SHIQ_TESTS_RANDOM_KB_HPP_
#define SHIQ_TESTS_RANDOM_KB_HPP_

#include <algorithm>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "shiq/model.hpp"
#include "shiq/syntax.hpp"

namespace shiq::testing {

struct Vocabulary {
  std::vector<std::string> atoms{"A", "B", "C", "D"};
  // Role names; the first one is declared transitive by random_kb.
  std::vector<std::string> roles{"t", "r", "s"};
  std::vector<std::string> individuals{"a", "b", "c"};
  unsigned max_number = 2;
};

class Generator {
 public:
  explicit Generator(std::uint64_t seed, Vocabulary v = {}) : rng_(seed), v_(std::move(v)) {}

  std::mt19937_64& rng() { return rng_; }
  const Vocabulary& vocabulary() const { return v_; }

  std::size_t uniform(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }

  Role role(const std::vector<std::string>& names) {
    return Role{names[uniform(names.size())], coin(0.3)};
  }

  // Concepts of nesting depth at most `depth`; number restrictions only
  // over `simple` role names.
  Concept concept_of(int depth, const std::vector<std::string>& simple, bool use_not = true) {
    if (depth <= 0 || coin(0.25)) {
      Concept a = Concept::atom(v_.atoms[uniform(v_.atoms.size())]);
      return coin(0.3) ? Concept::negation(a) : a;
    }
    const std::size_t kinds = simple.empty() ? 5 : 7;
    switch (uniform(kinds + (use_not ? 1 : 0))) {
      case 0:
        return Concept::conjunction(concept_of(depth - 1, simple, use_not),
                                    concept_of(depth - 1, simple, use_not));
      case 1:
        return Concept::disjunction(concept_of(depth - 1, simple, use_not),
                                    concept_of(depth - 1, simple, use_not));
      case 2:
      case 3:
        return Concept::some(role(v_.roles), concept_of(depth - 1, simple, use_not));
      case 4:
        return Concept::all(role(v_.roles), concept_of(depth - 1, simple, use_not));
      case 5:
        return Concept::at_least(static_cast<std::uint32_t>(uniform(v_.max_number + 1)),
                                 role(simple), concept_of(depth - 1, simple, use_not));
      case 6:
        return Concept::at_most(static_cast<std::uint32_t>(uniform(v_.max_number + 1)),
                                role(simple), concept_of(depth - 1, simple, use_not));
      default:
        return Concept::negation(concept_of(depth - 1, simple, use_not));
    }
  }

  // Every role is simple when there is no role box to consult.
  Concept concept_of(int depth) { return concept_of(depth, v_.roles); }

  // Small KB: the first role name is transitive, optionally below a second
  // one; the remaining names are simple unless they sit above it.
  KnowledgeBase kb(int depth = 3, std::size_t max_gcis = 1, std::size_t max_assertions = 4) {
    const std::string& trans = v_.roles.front();
    std::vector<RoleInclusion> inclusions;
    std::set<std::string> transitive{trans};
    std::vector<std::string> simple(v_.roles.begin() + 1, v_.roles.end());
    if (v_.roles.size() >= 3 && coin(0.4)) {
      // simple ⊑ simple, keeping both simple.
      inclusions.push_back({Role{v_.roles[1], coin(0.3)}, Role{v_.roles[2], false}});
    }
    if (v_.roles.size() >= 3 && coin(0.3)) {
      inclusions.push_back({Role{trans, false}, Role{v_.roles.back(), coin(0.3)}});
      simple.erase(std::remove(simple.begin(), simple.end(), v_.roles.back()), simple.end());
    }

    std::vector<Gci> tbox;
    const std::size_t gcis = uniform(max_gcis + 1);
    for (std::size_t k = 0; k < gcis; ++k)
      tbox.push_back({concept_of(std::min(depth, 2), simple), concept_of(std::min(depth, 2), simple)});

    std::vector<Assertion> abox;
    const std::size_t inds = 1 + uniform(v_.individuals.size());
    auto individual = [&] { return v_.individuals[uniform(inds)]; };
    const std::size_t count = 1 + uniform(max_assertions);
    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t pick = uniform(10);
      if (pick < 6) {
        abox.push_back(InstanceAssertion{individual(), concept_of(depth, simple)});
      } else if (pick < 9) {
        abox.push_back(RelatedAssertion{individual(), individual(), role(v_.roles)});
      } else {
        const std::string x = individual();
        const std::string y = individual();
        if (x != y) abox.push_back(DistinctAssertion{x, y});
      }
    }
    // Make sure at least one inverse role is in play.
    abox.push_back(InstanceAssertion{v_.individuals[0],
                                     Concept::disjunction(Concept::atom(v_.atoms[0]),
                                                          Concept::some(Role{v_.roles[1], true},
                                                                        Concept::atom(v_.atoms[1])))});
    return KnowledgeBase(std::move(tbox), RoleBox({}, std::move(inclusions), std::move(transitive)),
                         std::move(abox));
  }

  // Interpretation over a domain of 1..max_domain elements valuating the
  // whole vocabulary; role names listed in `transitive` are closed.
  Interpretation interpretation(std::size_t max_domain, const std::set<std::string>& transitive = {}) {
    Interpretation i;
    i.domain_size = 1 + uniform(max_domain);
    for (const auto& a : v_.atoms) {
      auto& set = i.concepts[a];
      for (Element e = 0; e < i.domain_size; ++e) {
        if (coin()) set.insert(e);
      }
    }
    for (const auto& r : v_.roles) {
      auto& set = i.roles[r];
      for (Element x = 0; x < i.domain_size; ++x) {
        for (Element y = 0; y < i.domain_size; ++y) {
          if (coin(0.4)) set.emplace(x, y);
        }
      }
      if (transitive.contains(r)) {
        for (Element k = 0; k < i.domain_size; ++k) {
          for (Element x = 0; x < i.domain_size; ++x) {
            for (Element y = 0; y < i.domain_size; ++y) {
              if (set.contains({x, k}) && set.contains({k, y})) set.emplace(x, y);
            }
          }
        }
      }
    }
    for (const auto& ind : v_.individuals) i.individuals[ind] = uniform(i.domain_size);
    return i;
  }

 private:
  std::mt19937_64 rng_;
  Vocabulary v_;
};

}  // namespace shiq::testing

#endif  // SHIQ_TESTS_RANDOM_KB_HPP_
