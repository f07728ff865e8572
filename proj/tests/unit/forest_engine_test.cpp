#include <doctest.h>

#include <numeric>
#include <random>

#include "random_kb.hpp"

#include "shiq/engine.hpp"
#include "shiq/errors.hpp"
#include "shiq/forest.hpp"
#include "shiq/frontend.hpp"
#include "shiq/reduction.hpp"

using namespace shiq;

namespace {

Concept cc(const char* text) { return parse_concept(text); }

ReducedProblem problem(std::vector<Assertion> abox, RoleBox rbox = RoleBox()) {
  KnowledgeBase kb({}, std::move(rbox), std::move(abox));
  ReducedProblem p;
  p.abox = kb.abox();
  p.rbox = kb.rbox();
  p.individuals = kb.individuals();
  return p;
}

CompletionForest forest_of(const ReducedProblem& p) {
  return CompletionForest(std::make_shared<const ProblemIndex>(p));
}

ConceptId id(const CompletionForest& f, const char* text) { return f.index().id_of(cc(text)); }
RoleId rid(const CompletionForest& f, const char* name, bool inverted = false) {
  return f.index().role_id(Role{name, inverted});
}

NodeId N(std::size_t i) { return node_id(i); }

// Straightforward search: full clash check and full rule scan at every step.
std::vector<std::string> reference_trace(const ReducedProblem& p, std::optional<std::uint64_t> seed) {
  struct Point {
    CompletionForest snapshot;
    RuleInstance rule;
    std::vector<std::size_t> order;
    std::size_t next;
  };
  auto index = std::make_shared<const ProblemIndex>(p);
  CompletionForest forest(index);
  forest.set_max_nodes(400);
  std::vector<Point> stack;
  std::vector<std::string> trace;
  std::optional<std::mt19937_64> rng;
  if (seed) rng.emplace(*seed);
  auto apply = [&](const RuleInstance& inst, std::size_t which) {
    RuleKind kind = inst.kind;
    if (inst.alternatives[which].effect == Alternative::Effect::kMergeRoots) kind = RuleKind::kAtMostRoot;
    if (inst.alternatives[which].effect == Alternative::Effect::kMergeTree) kind = RuleKind::kAtMost;
    trace.push_back(format_trace({trace.size() + 1, kind, inst.node, to_string(index->concept_at(inst.trigger)),
                                  stack.size()}));
    apply_rule(forest, inst, which);
  };
  while (true) {
    if (forest.detect_clash()) {
      while (!stack.empty() && stack.back().next == stack.back().order.size()) stack.pop_back();
      if (stack.empty()) return trace;
      Point& cp = stack.back();
      forest = cp.snapshot;
      const RuleInstance rule = cp.rule;
      apply(rule, cp.order[cp.next++]);
      continue;
    }
    auto inst = applicable_rule(forest);
    if (!inst) return trace;
    if (inst->branching()) {
      std::vector<std::size_t> order(inst->alternatives.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      if (rng) std::shuffle(order.begin(), order.end(), *rng);
      stack.push_back(Point{forest, *inst, order, 1});
      apply(*inst, order[0]);
    } else {
      apply(*inst, 0);
    }
  }
}

std::vector<std::string> solver_trace(const ReducedProblem& p, std::optional<std::uint64_t> seed) {
  std::vector<std::string> trace;
  SolveOptions opts;
  opts.max_nodes = 400;
  opts.seed = seed;
  opts.trace = [&](const TraceRecord& r) { trace.push_back(format_trace(r)); };
  solve(p, opts);
  return trace;
}

bool consistent(std::vector<Assertion> abox, RoleBox rbox = RoleBox()) {
  return solve(problem(std::move(abox), std::move(rbox))).consistent;
}

}  // namespace

TEST_CASE("initial forest") {
  auto f = forest_of(problem({InstanceAssertion{"a", cc("A")}, InstanceAssertion{"b", cc("B")},
                              RelatedAssertion{"a", "b", Role{"R", false}}}));
  REQUIRE(f.size() == 2);
  CHECK(f.node(N(0)).root);
  CHECK(f.node(N(1)).root);
  CHECK(f.index().concepts_of(f.node(N(0)).label) == std::vector<Concept>{cc("A")});
  CHECK(f.index().concepts_of(f.node(N(1)).label) == std::vector<Concept>{cc("B")});
  REQUIRE(f.edge_label(N(0), N(1)) != nullptr);
  CHECK(f.index().roles_of(*f.edge_label(N(0), N(1))) == std::vector<Role>{Role{"R", false}});
  CHECK_FALSE(f.has_edge(N(1), N(0)));
  CHECK(f.inequalities().empty());
  CHECK(f.equalities().empty());

  auto g = forest_of(problem({InstanceAssertion{"a", cc("A")}}));
  CHECK(g.size() == 1);
  CHECK(g.node(N(0)).out.empty());

  auto h = forest_of(problem({InstanceAssertion{"a", cc("A")}, InstanceAssertion{"b", cc("B")},
                              DistinctAssertion{"a", "b"}}));
  CHECK(h.distinct(N(0), N(1)));
  CHECK(h.distinct(N(1), N(0)));
  CHECK(h.inequalities().size() == 1);
}

TEST_CASE("neighbours follow role inclusions and inverses") {
  const Role R{"R", false};
  const Role S{"S", false};
  auto f = forest_of(problem({RelatedAssertion{"x", "y", R}, InstanceAssertion{"y", cc("C")}},
                             RoleBox({}, {{R, S}}, {})));
  const NodeId x = N(0);
  const NodeId y = N(1);
  CHECK(f.s_neighbours(x, S) == std::vector<NodeId>{y});
  CHECK(f.s_neighbours(x, R) == std::vector<NodeId>{y});
  CHECK(f.s_neighbours(y, inv(R)) == std::vector<NodeId>{x});
  CHECK(f.s_neighbours(y, inv(S)) == std::vector<NodeId>{x});
  CHECK(f.s_neighbours(y, R).empty());
  CHECK(f.count_set(x, S, cc("C")) == std::vector<NodeId>{y});
  CHECK(f.count_set(y, inv(S), cc("C")).empty());

  f.add_edge_roles(y, x, f.index().empty_roles());
  CHECK(f.has_edge(y, x));
  CHECK(f.s_neighbours(y, R).empty());
}

TEST_CASE("count set after at-least expansion") {
  auto f = forest_of(problem({InstanceAssertion{"x", cc("(at-least 2 S C)")}}));
  auto rule = applicable_rule(f);
  REQUIRE(rule);
  CHECK(rule->kind == RuleKind::kAtLeast);
  apply_rule(f, *rule, 0);
  CHECK(f.count_set(N(0), Role{"S", false}, cc("C")).size() == 2);
  CHECK(f.distinct(N(1), N(2)));
  CHECK(f.index().roles_of(*f.edge_label(N(0), N(1))) == std::vector<Role>{Role{"S", false}});
}

TEST_CASE("pairwise blocking") {
  auto f = forest_of(problem({InstanceAssertion{"r", cc("(and (some R A) (some R B))")}}));
  const RoleId R = rid(f, "R");
  const NodeId a = f.add_child(N(0), R, id(f, "A"));
  const NodeId b = f.add_child(a, R, id(f, "A"));
  // L(a) = L(b) but the parents' labels differ.
  CHECK_FALSE(f.blocking_status(b).blocked());

  auto g = forest_of(problem({InstanceAssertion{"r", cc("(and (some R A) (some R B))")}}));
  const NodeId ga = g.add_child(N(0), R, id(g, "A"));
  const NodeId gb = g.add_child(ga, R, id(g, "B"));
  const NodeId gc = g.add_child(gb, R, id(g, "A"));
  const NodeId gd = g.add_child(gc, R, id(g, "B"));
  const NodeId ge = g.add_child(gd, R, id(g, "A"));
  CHECK_FALSE(g.blocking_status(gb).blocked());
  CHECK_FALSE(g.blocking_status(gc).blocked());
  const BlockingStatus st = g.blocking_status(gd);
  CHECK(st.kind == BlockKind::kDirect);
  REQUIRE(st.blocker);
  CHECK(*st.blocker == gb);
  CHECK(g.blocking_status(ge).kind == BlockKind::kIndirect);
  CHECK_FALSE(g.blocking_status(N(0)).blocked());

  // A differing edge label prevents blocking.
  auto h = forest_of(problem({InstanceAssertion{"r", cc("(and (some R A) (some S B))")}}));
  const NodeId ha = h.add_child(N(0), rid(h, "R"), id(h, "A"));
  const NodeId hb = h.add_child(ha, rid(h, "R"), id(h, "B"));
  const NodeId hc = h.add_child(hb, rid(h, "R"), id(h, "A"));
  const NodeId hd = h.add_child(hc, rid(h, "S"), id(h, "B"));
  CHECK_FALSE(h.blocking_status(hd).blocked());
}

TEST_CASE("nodes below an emptied edge are indirectly blocked") {
  auto f = forest_of(problem({InstanceAssertion{"x", cc("(at-most 1 S A)")}}));
  const RoleId S = rid(f, "S");
  const NodeId y = f.add_child(N(0), S, id(f, "A"));
  const NodeId z = f.add_child(N(0), S, id(f, "A"));
  const NodeId w = f.add_child(z, S, id(f, "A"));
  f.merge_into(N(0), z, y);
  CHECK(f.edge_label(N(0), z)->none());
  CHECK(f.blocking_status(z).kind == BlockKind::kIndirect);
  CHECK(f.blocking_status(w).kind == BlockKind::kIndirect);
  CHECK_FALSE(f.blocking_status(y).blocked());
}

TEST_CASE("clash detection") {
  auto atom = forest_of(problem({InstanceAssertion{"a", cc("(and A (not A))")}}));
  CHECK_FALSE(atom.detect_clash());
  atom.add_concept(N(0), id(atom, "A"));
  atom.add_concept(N(0), id(atom, "(not A)"));
  auto clash = atom.detect_clash();
  REQUIRE(clash);
  CHECK(clash->node == N(0));

  auto zero = forest_of(problem({InstanceAssertion{"x", cc("(and (at-most 0 S C) (some S C))")}}));
  zero.add_concept(N(0), id(zero, "(at-most 0 S C)"));
  zero.add_child(N(0), rid(zero, "S"), id(zero, "C"));
  REQUIRE(zero.detect_clash());
  CHECK(zero.detect_clash()->concept_id == id(zero, "(at-most 0 S C)"));

  auto one = forest_of(problem({InstanceAssertion{"x", cc("(at-most 1 S C)")}}));
  one.add_child(N(0), rid(one, "S"), id(one, "C"));
  one.add_child(N(0), rid(one, "S"), id(one, "C"));
  CHECK_FALSE(one.detect_clash());
  one.set_distinct(N(1), N(2));
  auto over = one.detect_clash();
  REQUIRE(over);
  CHECK(over->witnesses.size() == 2);
}

TEST_CASE("rule selection") {
  auto f = forest_of(problem({InstanceAssertion{"x", cc("(and A B)")}}));
  auto rule = applicable_rule(f);
  REQUIRE(rule);
  CHECK(rule->kind == RuleKind::kConjunction);
  CHECK_FALSE(rule->branching());
  apply_rule(f, *rule, 0);
  CHECK(f.has_concept(N(0), id(f, "A")));
  CHECK(f.has_concept(N(0), id(f, "B")));
  CHECK_FALSE(applicable_rule(f));

  // A directly blocked node generates nothing.
  auto g = forest_of(problem({InstanceAssertion{"r", cc("(and (some R A) (some R B))")}}));
  const RoleId R = rid(g, "R");
  NodeId last = N(0);
  for (const char* c : {"A", "B", "A", "B"}) last = g.add_child(last, R, id(g, c));
  g.add_concept(last, id(g, "(some R A)"));
  g.add_concept(N(2), id(g, "(some R A)"));
  REQUIRE(g.blocking_status(last).kind == BlockKind::kDirect);
  for (int step = 0; step < 20; ++step) {
    auto inst = applicable_rule(g);
    if (!inst) break;
    CHECK(inst->node != last);
    apply_rule(g, *inst, 0);
  }
}

TEST_CASE("forall and forall-plus") {
  const Role R{"R", false};
  const Role S{"S", false};
  auto f = forest_of(problem({InstanceAssertion{"x", cc("(all S C)")}, RelatedAssertion{"x", "y", R},
                              InstanceAssertion{"y", cc("D")}},
                             RoleBox({}, {{R, S}}, {"R"})));
  auto first = applicable_rule(f);
  REQUIRE(first);
  CHECK(first->kind == RuleKind::kForall);
  apply_rule(f, *first, 0);
  CHECK(f.has_concept(N(1), id(f, "C")));
  auto second = applicable_rule(f);
  REQUIRE(second);
  CHECK(second->kind == RuleKind::kForallPlus);
  apply_rule(f, *second, 0);
  CHECK(f.has_concept(N(1), f.index().id_of(Concept::all(R, cc("C")))));
}

TEST_CASE("disjunction branches in order") {
  auto f = forest_of(problem({InstanceAssertion{"x", cc("(or A B)")}}));
  auto rule = applicable_rule(f);
  REQUIRE(rule);
  CHECK(rule->kind == RuleKind::kDisjunction);
  auto succ = expand(f, *rule);
  REQUIRE(succ.size() == 2);
  CHECK(succ[0].has_concept(N(0), id(f, "A")));
  CHECK_FALSE(succ[0].has_concept(N(0), id(f, "B")));
  CHECK(succ[1].has_concept(N(0), id(f, "B")));
}

TEST_CASE("choose rule") {
  auto f = forest_of(problem({InstanceAssertion{"x", cc("(at-least 2 S C)")},
                              RelatedAssertion{"x", "y", Role{"S", false}}, InstanceAssertion{"y", cc("A")}}));
  auto rule = applicable_rule(f);
  REQUIRE(rule);
  CHECK(rule->kind == RuleKind::kChoose);
  auto succ = expand(f, *rule);
  REQUIRE(succ.size() == 2);
  CHECK(succ[0].has_concept(N(1), id(f, "C")));
  CHECK(succ[1].has_concept(N(1), id(f, "(not C)")));
}

TEST_CASE("exists rule") {
  auto f = forest_of(problem({InstanceAssertion{"x", cc("(some S C)")}}));
  auto rule = applicable_rule(f);
  REQUIRE(rule);
  CHECK(rule->kind == RuleKind::kExists);
  apply_rule(f, *rule, 0);
  REQUIRE(f.size() == 2);
  CHECK(f.node(N(1)).parent == N(0));
  CHECK(f.index().concepts_of(f.node(N(1)).label) == std::vector<Concept>{cc("C")});
  CHECK(f.index().roles_of(*f.edge_label(N(0), N(1))) == std::vector<Role>{Role{"S", false}});
  CHECK_FALSE(applicable_rule(f));

  auto g = forest_of(problem({InstanceAssertion{"x", cc("(some S C)")}, RelatedAssertion{"x", "y", Role{"S", false}},
                              InstanceAssertion{"y", cc("C")}}));
  CHECK_FALSE(applicable_rule(g));
}

TEST_CASE("at-least rule guard") {
  auto g = forest_of(problem({InstanceAssertion{"x", cc("(at-least 1 S C)")},
                              RelatedAssertion{"x", "y", Role{"S", false}}, InstanceAssertion{"y", cc("C")}}));
  CHECK_FALSE(applicable_rule(g));

  // After a merge, the surviving neighbour still satisfies the guard.
  auto f = forest_of(problem({InstanceAssertion{"x", cc("(and (at-least 1 S C) (at-most 1 S C))")}}));
  const RoleId S = rid(f, "S");
  const NodeId y = f.add_child(N(0), S, id(f, "C"));
  const NodeId z = f.add_child(N(0), S, id(f, "C"));
  f.merge_into(N(0), z, y);
  f.add_concept(N(0), id(f, "(at-least 1 S C)"));
  f.add_concept(N(0), id(f, "(at-most 1 S C)"));
  auto rule = applicable_rule(f);
  CHECK_FALSE((rule && rule->kind == RuleKind::kAtLeast));
}

TEST_CASE("at-most rule between two successors") {
  auto f = forest_of(problem({InstanceAssertion{"x", cc("(at-most 1 S A)")}}));
  const RoleId S = rid(f, "S");
  const NodeId y = f.add_child(N(0), S, id(f, "A"));
  const NodeId z = f.add_child(N(0), S, id(f, "A"));
  auto rule = applicable_rule(f);
  REQUIRE(rule);
  CHECK(rule->kind == RuleKind::kAtMost);
  REQUIRE(rule->alternatives.size() == 1);
  CHECK(rule->alternatives[0].from == z);
  CHECK(rule->alternatives[0].into == y);
  apply_rule(f, *rule, 0);
  CHECK(f.edge_label(N(0), z)->none());
  CHECK(f.edge_label(N(0), y)->test(S));
  CHECK(f.count_set(N(0), S, id(f, "A")) == std::vector<NodeId>{y});
  CHECK_FALSE(applicable_rule(f));
}

TEST_CASE("at-most rule merging into the predecessor") {
  const Role S{"S", false};
  auto f = forest_of(problem({InstanceAssertion{"w", cc("(and A (some S (at-most 1 (inv S) A)))")}}));
  const NodeId w = N(0);
  f.add_concept(w, id(f, "A"));
  const NodeId x = f.add_child(w, rid(f, "S"), id(f, "(at-most 1 (inv S) A)"));
  const NodeId y = f.add_child(x, rid(f, "S", true), id(f, "A"));
  auto rule = applicable_rule(f);
  REQUIRE(rule);
  CHECK(rule->kind == RuleKind::kAtMost);
  CHECK(rule->node == x);
  REQUIRE(rule->alternatives.size() == 1);
  CHECK(rule->alternatives[0].from == y);
  CHECK(rule->alternatives[0].into == w);
  apply_rule(f, *rule, 0);
  CHECK(f.edge_label(x, y)->none());
  CHECK_FALSE(f.has_edge(x, w));
  CHECK(f.index().roles_of(*f.edge_label(w, x)) == std::vector<Role>{S});
  CHECK(f.s_neighbours(x, inv(S)) == std::vector<NodeId>{w});
}

TEST_CASE("distinct nodes are never merged") {
  auto f = forest_of(problem({InstanceAssertion{"x", cc("(at-most 1 S A)")}}));
  const RoleId S = rid(f, "S");
  f.add_child(N(0), S, id(f, "A"));
  f.add_child(N(0), S, id(f, "A"));
  f.set_distinct(N(1), N(2));
  CHECK_FALSE(applicable_rule(f));
  CHECK(f.detect_clash());
}

TEST_CASE("root merging") {
  const Role S{"S", false};
  auto f = forest_of(problem({InstanceAssertion{"x", cc("(at-most 1 S C)")}, RelatedAssertion{"x", "a", S},
                              RelatedAssertion{"x", "b", S}, InstanceAssertion{"a", cc("C")},
                              InstanceAssertion{"b", cc("C")}, InstanceAssertion{"b", cc("D")},
                              RelatedAssertion{"b", "x", Role{"R", false}}}));
  auto rule = applicable_rule(f);
  REQUIRE(rule);
  CHECK(rule->kind == RuleKind::kAtMostRoot);
  REQUIRE(rule->alternatives.size() == 1);
  apply_rule(f, *rule, 0);
  const NodeId a = N(1);
  const NodeId b = N(2);
  CHECK(f.node(b).label.none());
  CHECK(f.node(b).out.empty());
  CHECK(f.node(b).in.empty());
  CHECK(f.node(b).merged_into == a);
  CHECK(f.equated(a, b));
  CHECK(f.resolve("b") == a);
  CHECK(f.has_concept(a, id(f, "D")));
  CHECK(f.edge_label(a, N(0))->test(rid(f, "R")));
  CHECK_FALSE(f.has_edge(N(0), b));
}

TEST_CASE("solve verdicts") {
  const Role R{"R", false};
  const Role S{"S", false};
  CHECK_FALSE(consistent({InstanceAssertion{"a", cc("(and A (not A))")}}));
  CHECK_FALSE(consistent({InstanceAssertion{"a", cc("(and C (and (all R (not C)) (some R (some R C))))")}},
                         RoleBox({}, {}, {"R"})));
  CHECK(consistent({InstanceAssertion{"a", cc("(and C (and (all R (not C)) (some R (some R C))))")}}));
  const std::vector<Assertion> merge{InstanceAssertion{"x", cc("(at-most 1 S C)")}, RelatedAssertion{"x", "a", S},
                                     RelatedAssertion{"x", "b", S}, InstanceAssertion{"a", cc("C")},
                                     InstanceAssertion{"b", cc("C")}};
  CHECK(consistent(merge));
  auto separated = merge;
  separated.push_back(DistinctAssertion{"a", "b"});
  CHECK_FALSE(consistent(separated));
  CHECK_FALSE(consistent({InstanceAssertion{"a", cc("(and (some R A) (all R (not A)))")}}));
  CHECK(consistent({}));
}

TEST_CASE("cyclic terminology terminates through blocking") {
  const KnowledgeBase kb({{cc("A"), cc("(some R A)")}}, RoleBox(), {InstanceAssertion{"a", cc("A")}});
  const SolveResult result = solve(reduce_abox_consistency(kb));
  CHECK(result.consistent);
  REQUIRE(result.forest);
  bool blocked = false;
  for (const auto& st : result.forest->compute_blocking()) blocked |= st.kind == BlockKind::kDirect;
  CHECK(blocked);
  CHECK(result.stats.max_path_length <= result.limits.max_path_length);
  CHECK(result.stats.max_out_degree <= result.limits.max_out_degree);
}

TEST_CASE("bounds and budgets") {
  const KnowledgeBase kb({{cc("A"), cc("(at-least 2 R A)")}}, RoleBox(), {InstanceAssertion{"a", cc("A")}});
  const ReducedProblem p = reduce_abox_consistency(kb);
  const SearchLimits& limits = ProblemIndex(p).limits();
  CHECK(limits.n_max == 2);
  CHECK(limits.max_out_degree == limits.m * limits.n * 2);
  SolveOptions tiny;
  tiny.max_nodes = 3;
  CHECK_THROWS_AS(solve(p, tiny), BudgetError);
  CHECK(solve(p).consistent);
}

TEST_CASE("traces are reproducible") {
  const KnowledgeBase kb({{cc("A"), cc("(or B (some R (or A C)))")}}, RoleBox(),
                         {InstanceAssertion{"a", cc("(and A (not B))")}});
  const ReducedProblem p = reduce_abox_consistency(kb);
  auto run = [&](std::optional<std::uint64_t> seed) {
    std::vector<std::string> lines;
    SolveOptions opts;
    opts.seed = seed;
    opts.trace = [&](const TraceRecord& r) { lines.push_back(format_trace(r)); };
    const bool verdict = solve(p, opts).consistent;
    return std::pair{verdict, lines};
  };
  const auto base = run(std::nullopt);
  CHECK(base == run(std::nullopt));
  CHECK(run(7) == run(7));
  CHECK(run(7).first == base.first);
  REQUIRE_FALSE(base.second.empty());
  CHECK(base.second.front().rfind("step=1 rule=", 0) == 0);
  CHECK(base.second.front().find(" node=0 concept=") != std::string::npos);
}

TEST_CASE("dot rendering") {
  auto f = forest_of(problem({InstanceAssertion{"a", cc("A")}, InstanceAssertion{"b", cc("B")},
                              RelatedAssertion{"a", "b", Role{"R", false}}, DistinctAssertion{"a", "b"}}));
  const std::string dot = to_dot(f);
  CHECK(dot.rfind("digraph", 0) == 0);
  CHECK(dot.find("dashed") != std::string::npos);
  CHECK(dot.find("R") != std::string::npos);
  CHECK(dot.find("peripheries=2") != std::string::npos);
}

TEST_CASE("incremental rule selection matches a full scan") {
  shiq::testing::Generator gen(97);
  int compared = 0;
  for (int k = 0; k < 150; ++k) {
    const KnowledgeBase kb = gen.kb(2, 1, 3);
    const ReducedProblem p = reduce_abox_consistency(kb);
    const std::optional<std::uint64_t> seed =
        k % 3 == 0 ? std::nullopt : std::optional<std::uint64_t>(static_cast<std::uint64_t>(k));
    std::vector<std::string> expected;
    try {
      expected = reference_trace(p, seed);
    } catch (const BudgetError&) {
      continue;
    }
    ++compared;
    CHECK(solver_trace(p, seed) == expected);
  }
  CHECK(compared > 100);
}
