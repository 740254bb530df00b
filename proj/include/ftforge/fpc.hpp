/*
 * Copyright 2026 The ftforge Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/// @file fpc.hpp
/// Fault Propagation Chains: fault events joined by implication edges.
///
/// Besides the flat node/edge view, an FpcGraph keeps the block structure
/// it was assembled from (series items, concurrent bifurcations, exclusive
/// alternatives), which the fault-tree lowering and the chain-probability
/// pass walk directly.

#pragma once

#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ftforge/activity.hpp"
#include "ftforge/common.hpp"
#include "ftforge/logic.hpp"

namespace ftforge {

struct FpcNode {
  enum class Kind { kInitial, kEnd, kEvent };

  std::string id;  ///< "initial", "end", "a1", "a{7,8,9}"; repeats get "#2"
  Kind kind = Kind::kEvent;
  FaultEvent event;
  /// Contracted events only: the decision and the guard of each member,
  /// aligned with event.members.
  std::string decision;
  std::vector<std::string> guards;
};

struct FpcEdge {
  enum class Tag { kSeries, kConcurrent, kExclusive };

  std::string source;
  std::string target;
  std::vector<std::string> conditions;  ///< guards taken when the edge starts a branch
  Tag tag = Tag::kSeries;
  std::string region;  ///< fork or decision id for tagged edges
};

/// Block structure of a chain. An event refers to FpcGraph::nodes; a
/// concurrent block holds one sequence per fork branch; an exclusive block
/// one sequence per guard.
struct FpcItem {
  enum class Kind { kEvent, kConcurrent, kExclusive };

  Kind kind = Kind::kEvent;
  std::size_t node = 0;
  std::string region;
  std::vector<std::string> guards;  ///< exclusive only, one per branch
  std::vector<std::vector<FpcItem>> branches;
};

struct FpcGraph {
  std::vector<FpcNode> nodes;  ///< nodes[0] is the initial point, nodes[1] the end point
  std::vector<FpcEdge> edges;
  std::vector<FpcItem> chain;

  const FpcNode* find(std::string_view id) const {
    for (const FpcNode& n : nodes) {
      if (n.id == id) return &n;
    }
    return nullptr;
  }

  /// Ids of the fault-event nodes in construction order.
  std::vector<std::string> event_ids() const {
    std::vector<std::string> out;
    for (const FpcNode& n : nodes) {
      if (n.kind == FpcNode::Kind::kEvent) out.push_back(n.id);
    }
    return out;
  }
};

namespace detail {

/// One step along an execution path through an exclusive hammock.
struct PathStep {
  enum class Kind { kGuard, kAction, kFork };

  Kind kind;
  std::string id;        ///< guard, action or fork id
  std::string decision;  ///< guards only

  bool operator==(const PathStep& o) const { return kind == o.kind && id == o.id; }
};

using Path = std::vector<PathStep>;

class FpcBuilder {
 public:
  FpcBuilder(const ActivityModel& model, const RegionMap& regions)
      : g_(model), regions_(regions) {}

  FpcGraph build() {
    out_.nodes.push_back({"initial", FpcNode::Kind::kInitial, {}, {}, {}});
    out_.nodes.push_back({"end", FpcNode::Kind::kEnd, {}, {}, {}});
    const std::size_t initial = g_.find_kind(NodeKind::kInitial);
    out_.chain = sequence(g_.successor(initial), ActivityGraph::npos);
    std::vector<Pending> exits = connect(out_.chain, {{0, {}, FpcEdge::Tag::kSeries, ""}});
    for (const Pending& p : exits) add_edge(p, 1);
    return std::move(out_);
  }

 private:
  struct Pending {
    std::size_t source;
    std::vector<std::string> conditions;
    FpcEdge::Tag tag;
    std::string region;
  };

  std::size_t close_of(std::size_t v) const {
    const Region* r = regions_.opened_by(g_.node(v).id);
    if (!r) throw StructureError("ill-structured region: '" + g_.node(v).id + "' is not paired", g_.node(v).id);
    return g_.index(r->close);
  }

  std::size_t add_event(FaultEvent event, std::string decision = {},
                        std::vector<std::string> guards = {}) {
    std::string id = event.name();
    const std::string base = id;
    for (int k = 2; out_.find(id); ++k) id = base + "#" + std::to_string(k);
    out_.nodes.push_back({id, FpcNode::Kind::kEvent, std::move(event), std::move(decision),
                          std::move(guards)});
    return out_.nodes.size() - 1;
  }

  FpcItem event_item(const std::string& action) {
    return {FpcItem::Kind::kEvent, add_event(FaultEvent::of(action)), {}, {}, {}};
  }

  FpcItem fork_item(std::size_t fork) {
    const std::size_t join = close_of(fork);
    FpcItem item{FpcItem::Kind::kConcurrent, 0, g_.node(fork).id, {}, {}};
    for (std::size_t e : g_.out_edges(fork)) item.branches.push_back(sequence(g_.target(e), join));
    return item;
  }

  /// Items from `v` up to (excluding) `stop`, or to the final node.
  std::vector<FpcItem> sequence(std::size_t v, std::size_t stop) {
    std::vector<FpcItem> items;
    while (v != stop) {
      switch (g_.kind(v)) {
        case NodeKind::kAction:
          items.push_back(event_item(g_.node(v).id));
          v = g_.successor(v);
          break;
        case NodeKind::kFork:
          items.push_back(fork_item(v));
          v = g_.successor(close_of(v));
          break;
        case NodeKind::kDecision: {
          const std::size_t merge = close_of(v);
          std::vector<Path> paths;
          Path prefix;
          walk(v, merge, prefix, paths);
          for (FpcItem& item : from_paths(paths, g_.node(v).id)) items.push_back(std::move(item));
          v = g_.successor(merge);
          break;
        }
        case NodeKind::kFinal:
          return items;
        default:
          throw StructureError("ill-structured region: unexpected " +
                                   std::string(to_string(g_.kind(v))) + " '" + g_.node(v).id + "'",
                               g_.node(v).id);
      }
    }
    return items;
  }

  /// Every path from `v` to `stop`; forks are traversed as single steps.
  void walk(std::size_t v, std::size_t stop, Path& path, std::vector<Path>& out) const {
    if (v == stop) {
      out.push_back(path);
      return;
    }
    switch (g_.kind(v)) {
      case NodeKind::kAction:
        path.push_back({PathStep::Kind::kAction, g_.node(v).id, {}});
        walk(g_.successor(v), stop, path, out);
        path.pop_back();
        return;
      case NodeKind::kFork:
        path.push_back({PathStep::Kind::kFork, g_.node(v).id, {}});
        walk(g_.successor(close_of(v)), stop, path, out);
        path.pop_back();
        return;
      case NodeKind::kMerge:
        walk(g_.successor(v), stop, path, out);
        return;
      case NodeKind::kDecision:
        for (std::size_t e : g_.out_edges(v)) {
          path.push_back({PathStep::Kind::kGuard, g_.edge(e).guard->id, g_.node(v).id});
          walk(g_.target(e), stop, path, out);
          path.pop_back();
        }
        return;
      default:
        throw StructureError("ill-structured region: path leaves its region at '" + g_.node(v).id + "'",
                             g_.node(v).id);
    }
  }

  FpcItem step_item(const PathStep& step) {
    if (step.kind == PathStep::Kind::kAction) return event_item(step.id);
    return fork_item(g_.index(step.id));
  }

  /// Factors the paths into common prefix, alternatives and common suffix.
  std::vector<FpcItem> from_paths(std::vector<Path> paths, const std::string& where) {
    auto is_item = [](const PathStep& s) { return s.kind != PathStep::Kind::kGuard; };
    if (paths.size() == 1) {
      std::vector<FpcItem> items;
      for (const PathStep& s : paths.front()) {
        if (!is_item(s)) throw StructureError("unresolvable contraction at '" + where + "'", where);
        items.push_back(step_item(s));
      }
      return items;
    }
    std::size_t shortest = paths.front().size();
    for (const Path& p : paths) shortest = std::min(shortest, p.size());
    std::size_t head = 0;
    while (head < shortest && is_item(paths.front()[head]) &&
           std::all_of(paths.begin(), paths.end(),
                       [&](const Path& p) { return p[head] == paths.front()[head]; }))
      ++head;
    std::size_t tail = 0;
    while (tail < shortest - head &&
           is_item(paths.front()[paths.front().size() - 1 - tail]) &&
           std::all_of(paths.begin(), paths.end(), [&](const Path& p) {
             return p[p.size() - 1 - tail] == paths.front()[paths.front().size() - 1 - tail];
           }))
      ++tail;

    std::vector<FpcItem> items;
    for (std::size_t k = 0; k < head; ++k) items.push_back(step_item(paths.front()[k]));
    const Path suffix(paths.front().end() - static_cast<std::ptrdiff_t>(tail), paths.front().end());
    for (Path& p : paths) {
      p = Path(p.begin() + static_cast<std::ptrdiff_t>(head), p.end() - static_cast<std::ptrdiff_t>(tail));
      if (p.empty() || p.front().kind != PathStep::Kind::kGuard)
        throw StructureError("unresolvable contraction at '" + where + "'", where);
    }
    items.push_back(alternatives(paths, where));
    for (const PathStep& s : suffix) items.push_back(step_item(s));
    return items;
  }

  /// Paths that all start with a guard of the same decision.
  FpcItem alternatives(const std::vector<Path>& paths, const std::string& where) {
    const std::string decision = paths.front().front().decision;
    std::vector<std::string> guards;
    std::map<std::string, std::vector<Path>> groups;
    for (const Path& p : paths) {
      if (p.front().decision != decision)
        throw StructureError("unresolvable contraction at '" + where + "'", where);
      if (!groups.count(p.front().id)) guards.push_back(p.front().id);
      groups[p.front().id].emplace_back(p.begin() + 1, p.end());
    }
    const bool contractible = std::all_of(guards.begin(), guards.end(), [&](const std::string& c) {
      const auto& group = groups[c];
      return group.size() == 1 && group.front().size() == 1 &&
             group.front().front().kind == PathStep::Kind::kAction;
    });
    if (contractible) {
      std::vector<std::pair<std::string, std::string>> members;
      for (const std::string& c : guards) members.emplace_back(groups[c].front().front().id, c);
      std::sort(members.begin(), members.end(),
                [](const auto& a, const auto& b) { return natural_less(a.first, b.first); });
      std::vector<std::string> actions;
      std::vector<std::string> member_guards;
      for (auto& [action, guard] : members) {
        actions.push_back(action);
        member_guards.push_back(guard);
      }
      return {FpcItem::Kind::kEvent,
              add_event(FaultEvent::of(actions), decision, std::move(member_guards)), {}, {}, {}};
    }
    FpcItem item{FpcItem::Kind::kExclusive, 0, decision, guards, {}};
    for (const std::string& c : guards) {
      std::vector<FpcItem> branch = from_paths(groups[c], decision);
      if (branch.empty()) throw StructureError("unresolvable contraction at '" + decision + "'", decision);
      item.branches.push_back(std::move(branch));
    }
    return item;
  }

  void add_edge(const Pending& from, std::size_t target) {
    out_.edges.push_back({out_.nodes[from.source].id, out_.nodes[target].id, from.conditions,
                          from.tag, from.region});
  }

  std::vector<Pending> connect(const std::vector<FpcItem>& items, std::vector<Pending> entries) {
    for (const FpcItem& item : items) {
      std::vector<Pending> exits;
      switch (item.kind) {
        case FpcItem::Kind::kEvent:
          for (const Pending& p : entries) add_edge(p, item.node);
          exits.push_back({item.node, {}, FpcEdge::Tag::kSeries, ""});
          break;
        case FpcItem::Kind::kConcurrent:
          for (const auto& branch : item.branches) {
            std::vector<Pending> in = entries;
            for (Pending& p : in) {
              p.tag = FpcEdge::Tag::kConcurrent;
              p.region = item.region;
            }
            for (Pending& p : connect(branch, std::move(in))) {
              p.tag = FpcEdge::Tag::kConcurrent;
              p.region = item.region;
              exits.push_back(std::move(p));
            }
          }
          break;
        case FpcItem::Kind::kExclusive:
          for (std::size_t k = 0; k < item.branches.size(); ++k) {
            std::vector<Pending> in = entries;
            for (Pending& p : in) {
              p.conditions.push_back(item.guards[k]);
              p.tag = FpcEdge::Tag::kExclusive;
              p.region = item.region;
            }
            for (Pending& p : connect(item.branches[k], std::move(in))) {
              p.tag = FpcEdge::Tag::kExclusive;
              p.region = item.region;
              exits.push_back(std::move(p));
            }
          }
          break;
      }
      entries = std::move(exits);
    }
    return entries;
  }

  ActivityGraph g_;
  const RegionMap& regions_;
  FpcGraph out_;
};

}  // namespace detail

/// Builds the chain from a validated, well-structured model. Decision
/// regions whose alternatives are single actions become one contracted
/// event; otherwise each guard opens its own exclusive chain.
inline FpcGraph build_fpc(const ActivityModel& model, const RegionMap& regions) {
  return detail::FpcBuilder(model, regions).build();
}

inline FpcGraph build_fpc(const ActivityModel& model) {
  return build_fpc(model, pair_control_nodes(model));
}

namespace detail {

/// The implication units of one scenario (one choice per exclusive block).
class ScenarioWalker {
 public:
  using Choice = std::map<const FpcItem*, std::size_t>;

  explicit ScenarioWalker(const FpcGraph& g) : g_(g) {}

  static void choices(const std::vector<FpcItem>& items, std::size_t k, Choice& current,
                      std::vector<Choice>& out) {
    if (k == items.size()) {
      out.push_back(current);
      return;
    }
    const FpcItem& item = items[k];
    if (item.kind == FpcItem::Kind::kEvent) {
      choices(items, k + 1, current, out);
      return;
    }
    // Expand the item into its own sub-choices, then continue.
    std::vector<Choice> local;
    if (item.kind == FpcItem::Kind::kConcurrent) {
      std::vector<Choice> acc{current};
      for (const auto& branch : item.branches) {
        std::vector<Choice> next;
        for (Choice& c : acc) choices(branch, 0, c, next);
        acc = std::move(next);
      }
      local = std::move(acc);
    } else {
      for (std::size_t b = 0; b < item.branches.size(); ++b) {
        Choice c = current;
        c[&item] = b;
        choices(item.branches[b], 0, c, local);
      }
    }
    for (Choice& c : local) choices(items, k + 1, c, out);
  }

  /// Edges (source node, target node) between fault events in the scenario.
  std::vector<std::pair<std::size_t, std::size_t>> edges(const Choice& choice) const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    walk(g_.chain, {}, choice, out);
    return out;
  }

 private:
  std::vector<std::size_t> walk(const std::vector<FpcItem>& items, std::vector<std::size_t> entries,
                                const Choice& choice,
                                std::vector<std::pair<std::size_t, std::size_t>>& out) const {
    for (const FpcItem& item : items) {
      std::vector<std::size_t> exits;
      switch (item.kind) {
        case FpcItem::Kind::kEvent:
          for (std::size_t e : entries) out.emplace_back(e, item.node);
          exits.push_back(item.node);
          break;
        case FpcItem::Kind::kConcurrent:
          for (const auto& branch : item.branches)
            for (std::size_t x : walk(branch, entries, choice, out)) exits.push_back(x);
          break;
        case FpcItem::Kind::kExclusive:
          exits = walk(item.branches[choice.at(&item)], entries, choice, out);
          break;
      }
      entries = std::move(exits);
    }
    return entries;
  }

  const FpcGraph& g_;
};

}  // namespace detail

/// Conjunction of the implication edges of each execution scenario,
/// disjoined across exclusive alternatives; units shared by every scenario
/// are factored out in front. Units are listed depth-first from the start
/// of the chain.
inline Formula fpc_to_formula(const FpcGraph& g) {
  std::vector<detail::ScenarioWalker::Choice> scenarios;
  detail::ScenarioWalker::Choice none;
  detail::ScenarioWalker::choices(g.chain, 0, none, scenarios);
  const detail::ScenarioWalker walker(g);

  std::vector<std::vector<Formula>> conjunctions;
  for (const auto& choice : scenarios) {
    const auto edges = walker.edges(choice);
    // Depth-first order over the scenario's edges.
    std::vector<Formula> units;
    std::vector<bool> used(edges.size(), false);
    std::function<void(std::size_t)> visit = [&](std::size_t node) {
      for (std::size_t k = 0; k < edges.size(); ++k) {
        if (used[k] || edges[k].first != node) continue;
        used[k] = true;
        units.push_back(Formula::implies(Formula::failed(g.nodes[edges[k].first].event),
                                         Formula::failed(g.nodes[edges[k].second].event)));
        visit(edges[k].second);
      }
    };
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const bool is_root = std::none_of(edges.begin(), edges.end(),
                                        [&](const auto& e) { return e.second == edges[k].first; });
      if (is_root && !used[k]) visit(edges[k].first);
    }
    std::vector<Formula> unique;
    for (Formula& u : units) {
      if (std::find(unique.begin(), unique.end(), u) == unique.end()) unique.push_back(std::move(u));
    }
    conjunctions.push_back(std::move(unique));
  }
  if (conjunctions.empty() || conjunctions.front().empty())
    throw Error("the chain has no implication between fault events");

  auto join = [](std::vector<Formula> parts) {
    return parts.size() == 1 ? std::move(parts.front())
                             : Formula{Formula::Op::kAnd, {}, std::move(parts)};
  };
  if (conjunctions.size() == 1) return join(std::move(conjunctions.front()));

  std::vector<Formula> common;
  for (const Formula& u : conjunctions.front()) {
    const bool everywhere = std::all_of(conjunctions.begin(), conjunctions.end(), [&u](const auto& c) {
      return std::find(c.begin(), c.end(), u) != c.end();
    });
    if (everywhere) common.push_back(u);
  }
  std::vector<Formula> alternatives;
  for (auto& c : conjunctions) {
    std::vector<Formula> rest;
    for (Formula& u : c) {
      if (std::find(common.begin(), common.end(), u) == common.end()) rest.push_back(std::move(u));
    }
    if (rest.empty()) return join(std::move(common));
    Formula alt = join(std::move(rest));
    if (std::find(alternatives.begin(), alternatives.end(), alt) == alternatives.end())
      alternatives.push_back(std::move(alt));
  }
  Formula disjunction = alternatives.size() == 1
                            ? std::move(alternatives.front())
                            : Formula{Formula::Op::kOr, {}, std::move(alternatives)};
  if (common.empty()) return disjunction;
  common.push_back(std::move(disjunction));
  return Formula{Formula::Op::kAnd, {}, std::move(common)};
}

/// Number of execution scenarios (product of exclusive choices).
inline std::size_t scenario_count(const FpcGraph& g) {
  std::vector<detail::ScenarioWalker::Choice> scenarios;
  detail::ScenarioWalker::Choice none;
  detail::ScenarioWalker::choices(g.chain, 0, none, scenarios);
  return scenarios.size();
}

inline std::string_view to_string(FpcEdge::Tag tag) {
  switch (tag) {
    case FpcEdge::Tag::kSeries: return "series";
    case FpcEdge::Tag::kConcurrent: return "concurrent";
    case FpcEdge::Tag::kExclusive: return "exclusive";
  }
  return "?";
}

/// Edge list in the form "a1 -> a2; a1 -> a3", skipping the endpoints.
inline std::string edge_list(const FpcGraph& g) {
  std::string out;
  for (const FpcEdge& e : g.edges) {
    if (e.source == "initial" || e.target == "end") continue;
    if (!out.empty()) out += "; ";
    out += e.source + " -> " + e.target;
  }
  return out;
}

inline nlohmann::json to_json(const FpcGraph& g) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const FpcNode& n : g.nodes) {
    nlohmann::json j{{"id", n.id}};
    switch (n.kind) {
      case FpcNode::Kind::kInitial: j["kind"] = "initial"; break;
      case FpcNode::Kind::kEnd: j["kind"] = "end"; break;
      case FpcNode::Kind::kEvent:
        j["kind"] = n.event.contracted() ? "contracted" : "event";
        j["members"] = n.event.members;
        if (n.event.contracted()) {
          j["decision"] = n.decision;
          j["guards"] = n.guards;
        }
        break;
    }
    nodes.push_back(std::move(j));
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const FpcEdge& e : g.edges) {
    nlohmann::json j{{"source", e.source}, {"target", e.target}, {"tag", to_string(e.tag)}};
    if (!e.region.empty()) j["region"] = e.region;
    if (!e.conditions.empty()) j["conditions"] = e.conditions;
    edges.push_back(std::move(j));
  }
  return {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

/// Graphviz rendering: events as boxes, endpoints as points, condition ids
/// as edge labels.
inline std::string to_dot(const FpcGraph& g) {
  std::ostringstream out;
  out << "digraph fpc {\n  rankdir=LR;\n  node [shape=box];\n";
  for (const FpcNode& n : g.nodes) {
    out << "  \"" << n.id << "\"";
    if (n.kind == FpcNode::Kind::kInitial) out << " [shape=circle, style=filled, fillcolor=black, label=\"\", width=0.2]";
    if (n.kind == FpcNode::Kind::kEnd) out << " [shape=doublecircle, label=\"\", width=0.2]";
    out << ";\n";
  }
  for (const FpcEdge& e : g.edges) {
    out << "  \"" << e.source << "\" -> \"" << e.target << "\"";
    if (!e.conditions.empty()) {
      out << " [label=\"";
      for (std::size_t k = 0; k < e.conditions.size(); ++k) out << (k ? "," : "") << e.conditions[k];
      out << "\"]";
    }
    out << ";\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace ftforge
