#include "shiq/engine.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "shiq/errors.hpp"

namespace shiq {

std::string_view rule_name(RuleKind kind) {
  switch (kind) {
    case RuleKind::kAtMostRoot: return "at-most-root";
    case RuleKind::kAtMost: return "at-most";
    case RuleKind::kConjunction: return "and";
    case RuleKind::kForall: return "forall";
    case RuleKind::kForallPlus: return "forall-plus";
    case RuleKind::kChoose: return "choose";
    case RuleKind::kDisjunction: return "or";
    case RuleKind::kAtLeast: return "at-least";
    case RuleKind::kExists: return "exists";
  }
  return "?";
}

namespace {

using Effect = Alternative::Effect;

constexpr RuleKind kOrder[] = {
    RuleKind::kAtMost,     RuleKind::kConjunction, RuleKind::kForall,
    RuleKind::kForallPlus, RuleKind::kChoose,      RuleKind::kDisjunction,
    RuleKind::kAtLeast,    RuleKind::kExists};

int rank(RuleKind kind) {
  if (kind == RuleKind::kAtMostRoot) return 0;
  return static_cast<int>(std::find(std::begin(kOrder), std::end(kOrder), kind) - std::begin(kOrder));
}

Alternative add(NodeId target, std::vector<ConceptId> concepts) {
  Alternative a;
  a.effect = Effect::kAddConcepts;
  a.target = target;
  a.concepts = std::move(concepts);
  return a;
}

Alternative merge(Effect effect, NodeId from, NodeId into) {
  Alternative a;
  a.effect = effect;
  a.from = from;
  a.into = into;
  return a;
}

RuleInstance instance(RuleKind kind, NodeId x, ConceptId trigger, std::vector<Alternative> alts) {
  return RuleInstance{kind, x, trigger, std::move(alts)};
}

class RuleFinder {
 public:
  RuleFinder(const CompletionForest& forest, const std::vector<BlockingStatus>& blocking)
      : f_(forest), index_(forest.index()), blocking_(blocking) {}

  std::optional<RuleInstance> find() const {
    for (RuleKind kind : kOrder) {
      for (const ForestNode& n : f_.nodes()) {
        if (n.label.none()) continue;
        if (auto inst = find_at(kind, n)) return inst;
      }
    }
    return std::nullopt;
  }

  // Highest-priority instance at a single node.
  std::optional<RuleInstance> find_at(NodeId x) const {
    const ForestNode& n = f_.node(x);
    if (n.label.none()) return std::nullopt;
    for (RuleKind kind : kOrder) {
      if (auto inst = find_at(kind, n)) return inst;
    }
    return std::nullopt;
  }

 private:
  bool indirectly_blocked(NodeId x) const { return blocking_[to_index(x)].indirectly(); }
  bool blocked(NodeId x) const { return blocking_[to_index(x)].blocked(); }

  std::optional<RuleInstance> find_at(RuleKind kind, const ForestNode& n) const {
    const NodeId x = n.id;
    const bool ind_blocked = indirectly_blocked(x);
    // ≤r has no blocking guard; every other rule except ∃ and ≥ requires x
    // not to be indirectly blocked.
    if (ind_blocked && kind != RuleKind::kAtMost) return std::nullopt;
    if ((kind == RuleKind::kExists || kind == RuleKind::kAtLeast) && blocked(x)) return std::nullopt;

    for (auto bit = n.label.find_first(); bit != ConceptSet::npos; bit = n.label.find_next(bit)) {
      const auto c = static_cast<ConceptId>(bit);
      const ConceptInfo& info = index_.info(c);
      std::optional<RuleInstance> found;
      switch (kind) {
        case RuleKind::kAtMost:
          if (info.kind == ConceptKind::kAtMost) found = at_most(x, c, info, ind_blocked);
          break;
        case RuleKind::kConjunction:
          if (info.kind == ConceptKind::kAnd &&
              !(n.label.test(info.first) && n.label.test(info.second)))
            found = instance(kind, x, c, {add(x, {info.first, info.second})});
          break;
        case RuleKind::kForall:
          if (info.kind == ConceptKind::kAll) {
            for (NodeId y : f_.s_neighbours(x, info.role)) {
              if (!f_.has_concept(y, info.first)) {
                found = instance(kind, x, c, {add(y, {info.first})});
                break;
              }
            }
          }
          break;
        case RuleKind::kForallPlus:
          if (info.kind == ConceptKind::kAll) found = forall_plus(x, c, info);
          break;
        case RuleKind::kChoose:
          if (info.kind == ConceptKind::kAtMost || info.kind == ConceptKind::kAtLeast) {
            const ConceptId filler = info.first;
            const ConceptId complement = index_.info(filler).complement;
            for (NodeId y : f_.s_neighbours(x, info.role)) {
              if (!f_.has_concept(y, filler) && !f_.has_concept(y, complement)) {
                found = instance(kind, x, c, {add(y, {filler}), add(y, {complement})});
                break;
              }
            }
          }
          break;
        case RuleKind::kDisjunction:
          if (info.kind == ConceptKind::kOr && !n.label.test(info.first) &&
              !n.label.test(info.second))
            found = instance(kind, x, c, {add(x, {info.first}), add(x, {info.second})});
          break;
        case RuleKind::kAtLeast:
          if (info.kind == ConceptKind::kAtLeast &&
              !f_.has_distinct_subset(f_.count_set(x, info.role, info.first), info.number)) {
            Alternative a;
            a.effect = Effect::kCreateChildren;
            a.target = x;
            found = instance(kind, x, c, {a});
          }
          break;
        case RuleKind::kExists:
          if (info.kind == ConceptKind::kSome && f_.count_set(x, info.role, info.first).empty()) {
            Alternative a;
            a.effect = Effect::kCreateChildren;
            a.target = x;
            found = instance(kind, x, c, {a});
          }
          break;
        case RuleKind::kAtMostRoot:
          break;
      }
      if (found) return found;
    }
    return std::nullopt;
  }

  std::optional<RuleInstance> forall_plus(NodeId x, ConceptId c, const ConceptInfo& info) const {
    for (RoleId r : index_.transitive_subroles(info.role)) {
      const ConceptId needed = index_.forall_id(r, info.first);
      for (NodeId y : f_.s_neighbours(x, r)) {
        if (!f_.has_concept(y, needed))
          return instance(RuleKind::kForallPlus, x, c, {add(y, {needed})});
      }
    }
    return std::nullopt;
  }

  // Every eligible merge for ≤n S.C at x: root pairs (≤r) first, then pairs
  // with a non-root node (≤). Merging is don't-know nondeterminism, so all
  // pairs from both rules share one choice point.
  std::optional<RuleInstance> at_most(NodeId x, ConceptId c, const ConceptInfo& info,
                                      bool ind_blocked) const {
    const std::vector<NodeId> cs = f_.count_set(x, info.role, info.first);
    if (cs.size() <= info.number) return std::nullopt;
    std::vector<Alternative> roots;
    std::vector<Alternative> trees;
    for (std::size_t i = 0; i < cs.size(); ++i) {
      for (std::size_t j = i + 1; j < cs.size(); ++j) {
        const NodeId a = cs[i];
        const NodeId b = cs[j];
        if (f_.distinct(a, b)) continue;
        const bool a_root = f_.node(a).root;
        const bool b_root = f_.node(b).root;
        if (a_root && b_root) {
          roots.push_back(merge(Effect::kMergeRoots, b, a));
          continue;
        }
        if (ind_blocked) continue;
        // y must be neither a root nor an ancestor of z.
        if (!b_root && !f_.is_ancestor(b, a)) {
          trees.push_back(merge(Effect::kMergeTree, b, a));
        } else if (!a_root && !f_.is_ancestor(a, b)) {
          trees.push_back(merge(Effect::kMergeTree, a, b));
        }
      }
    }
    if (roots.empty() && trees.empty()) return std::nullopt;
    const RuleKind kind = roots.empty() ? RuleKind::kAtMost : RuleKind::kAtMostRoot;
    roots.insert(roots.end(), trees.begin(), trees.end());
    return instance(kind, x, c, std::move(roots));
  }

  const CompletionForest& f_;
  const ProblemIndex& index_;
  const std::vector<BlockingStatus>& blocking_;
};

}  // namespace

std::optional<RuleInstance> applicable_rule(const CompletionForest& forest,
                                            const std::vector<BlockingStatus>& blocking) {
  return RuleFinder(forest, blocking).find();
}

std::optional<RuleInstance> applicable_rule(const CompletionForest& forest) {
  return applicable_rule(forest, forest.compute_blocking());
}

void apply_rule(CompletionForest& forest, const RuleInstance& inst, std::size_t which) {
  const Alternative& alt = inst.alternatives.at(which);
  switch (alt.effect) {
    case Effect::kAddConcepts:
      for (ConceptId c : alt.concepts) forest.add_concept(alt.target, c);
      break;
    case Effect::kCreateChildren: {
      const ConceptInfo& info = forest.index().info(inst.trigger);
      if (info.kind == ConceptKind::kSome) {
        forest.add_child(inst.node, info.role, info.first);
      } else {
        std::vector<NodeId> created;
        for (std::uint32_t i = 0; i < info.number; ++i)
          created.push_back(forest.add_child(inst.node, info.role, info.first));
        for (std::size_t i = 0; i < created.size(); ++i)
          for (std::size_t j = i + 1; j < created.size(); ++j)
            forest.set_distinct(created[i], created[j]);
      }
      break;
    }
    case Effect::kMergeTree:
      forest.merge_into(inst.node, alt.from, alt.into);
      break;
    case Effect::kMergeRoots:
      forest.merge_roots(alt.from, alt.into);
      break;
  }
}

std::vector<CompletionForest> expand(const CompletionForest& forest, const RuleInstance& inst) {
  std::vector<CompletionForest> out;
  for (std::size_t i = 0; i < inst.alternatives.size(); ++i) {
    out.push_back(forest);
    apply_rule(out.back(), inst, i);
  }
  return out;
}

std::string format_trace(const TraceRecord& r) {
  return "step=" + std::to_string(r.step) + " rule=" + std::string(rule_name(r.rule)) +
         " node=" + std::to_string(to_index(r.node)) + " concept=" + r.concept_text +
         " depth=" + std::to_string(r.depth);
}

namespace {

struct ChoicePoint {
  CompletionForest snapshot;
  RuleInstance rule;
  std::vector<std::size_t> order;
  std::size_t next = 0;
};

// Caches the highest-priority rule instance of every node. After a step only
// the nodes the forest reports as touched, their neighbours, and nodes whose
// blocking status changed are re-examined, so the selected instance is the
// one a full scan would return.
class Agenda {
 public:
  void invalidate() { valid_ = false; }

  // Brings the cache up to date; returns true on a clash.
  bool refresh(CompletionForest& f) {
    const std::vector<NodeId> touched = f.take_touched();
    const std::size_t n = f.size();
    std::vector<NodeId> dirty;
    if (!valid_) {
      blocking_ = f.compute_blocking();
      keys_.clear();
      keys_.resize(n);
      for (std::size_t i = 0; i < n; ++i) keys_[i] = key_of(f, node_id(i));
      cache_.assign(n, std::nullopt);
      queue_.clear();
      for (std::size_t i = 0; i < n; ++i) dirty.push_back(node_id(i));
    } else {
      keys_.resize(n);
      blocking_.resize(n);
      cache_.resize(n);
      // Blocking depends on a node's label, its parent and the parent edge,
      // and on the same data for every ancestor.
      std::vector<NodeId> rekeyed;
      auto rekey = [&](NodeId x) {
        BlockingKey k = key_of(f, x);
        if (k == keys_[to_index(x)]) return;
        keys_[to_index(x)] = std::move(k);
        rekeyed.push_back(x);
      };
      for (NodeId t : touched) {
        dirty.push_back(t);
        const ForestNode& node = f.node(t);
        for (const auto& [y, roles] : node.out) dirty.push_back(y);
        for (NodeId y : node.in) dirty.push_back(y);
        rekey(t);
        for (NodeId c : node.children) rekey(c);
      }
      std::vector<NodeId> subtree;
      for (NodeId r : rekeyed) {
        std::vector<NodeId> todo{r};
        while (!todo.empty()) {
          const NodeId x = todo.back();
          todo.pop_back();
          subtree.push_back(x);
          for (NodeId c : f.node(x).children) todo.push_back(c);
        }
      }
      std::sort(subtree.begin(), subtree.end());
      subtree.erase(std::unique(subtree.begin(), subtree.end()), subtree.end());
      for (NodeId x : subtree) {
        const BlockingStatus st = f.blocking_status(x, blocking_);
        if (st.kind != blocking_[to_index(x)].kind) dirty.push_back(x);
        blocking_[to_index(x)] = st;
      }
      std::sort(dirty.begin(), dirty.end());
      dirty.erase(std::unique(dirty.begin(), dirty.end()), dirty.end());
    }
    valid_ = true;

    if (f.detect_clash(dirty)) {
      valid_ = false;
      return true;
    }
    const RuleFinder finder(f, blocking_);
    for (NodeId x : dirty) {
      auto& slot = cache_[to_index(x)];
      if (slot) queue_.erase({rank(slot->kind), x});
      slot = finder.find_at(x);
      if (slot) queue_.insert({rank(slot->kind), x});
    }
    return false;
  }

  std::optional<RuleInstance> best() const {
    if (queue_.empty()) return std::nullopt;
    return cache_[to_index(queue_.begin()->second)];
  }

 private:
  struct BlockingKey {
    ConceptSet label;
    std::optional<NodeId> parent;
    RoleSet edge;
    bool operator==(const BlockingKey&) const = default;
  };

  static BlockingKey key_of(const CompletionForest& f, NodeId x) {
    const ForestNode& node = f.node(x);
    BlockingKey k{node.label, node.parent, {}};
    if (node.parent) k.edge = f.node(*node.parent).out.at(x);
    return k;
  }

  bool valid_ = false;
  std::vector<BlockingStatus> blocking_;
  std::vector<BlockingKey> keys_;
  std::vector<std::optional<RuleInstance>> cache_;
  std::set<std::pair<int, NodeId>> queue_;
};

void record_shape(const CompletionForest& f, SolveStats& stats) {
  stats.max_nodes = std::max(stats.max_nodes, f.size());
  for (const ForestNode& n : f.nodes()) {
    stats.max_path_length = std::max<std::size_t>(stats.max_path_length, n.depth);
    stats.max_out_degree = std::max(stats.max_out_degree, n.children.size());
  }
}

}  // namespace

SolveResult solve(const ReducedProblem& problem, const SolveOptions& options) {
  auto index = std::make_shared<const ProblemIndex>(problem);
  SolveResult result;
  result.limits = index->limits();
  result.limits.max_nodes = options.max_nodes;

  CompletionForest forest(index);
  forest.set_max_nodes(options.max_nodes);
  std::vector<ChoicePoint> stack;
  std::optional<std::mt19937_64> rng;
  if (options.seed) rng.emplace(*options.seed);

  auto apply_traced = [&](CompletionForest& f, const RuleInstance& inst, std::size_t which) {
    ++result.stats.steps;
    if (options.trace) {
      const Alternative& alt = inst.alternatives[which];
      RuleKind kind = inst.kind;
      if (alt.effect == Effect::kMergeRoots) kind = RuleKind::kAtMostRoot;
      if (alt.effect == Effect::kMergeTree) kind = RuleKind::kAtMost;
      options.trace(TraceRecord{result.stats.steps, kind, inst.node,
                                to_string(index->concept_at(inst.trigger)), stack.size()});
    }
    apply_rule(f, inst, which);
  };

  Agenda agenda;
  while (true) {
    if (agenda.refresh(forest)) {
      while (!stack.empty() && stack.back().next == stack.back().order.size()) stack.pop_back();
      if (stack.empty()) {
        record_shape(forest, result.stats);
        result.consistent = false;
        return result;
      }
      ++result.stats.backtracks;
      record_shape(forest, result.stats);
      ChoicePoint& cp = stack.back();
      forest = cp.snapshot;
      agenda.invalidate();
      const std::size_t which = cp.order[cp.next++];
      const RuleInstance rule = cp.rule;
      apply_traced(forest, rule, which);
      continue;
    }
    std::optional<RuleInstance> inst = agenda.best();
    if (!inst) {
      record_shape(forest, result.stats);
      result.consistent = true;
      result.forest = std::move(forest);
      return result;
    }
    if (inst->branching()) {
      ++result.stats.choice_points;
      std::vector<std::size_t> order(inst->alternatives.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      if (rng) std::shuffle(order.begin(), order.end(), *rng);
      stack.push_back(ChoicePoint{forest, *inst, order, 1});
      apply_traced(forest, *inst, order[0]);
    } else {
      apply_traced(forest, *inst, 0);
    }
  }
}

}  // namespace shiq
