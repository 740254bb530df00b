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

/// @file analysis.hpp
/// Top-event probability (chain propagation and exact) and minimal cut sets.

#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ftforge/activity.hpp"
#include "ftforge/common.hpp"
#include "ftforge/fault_tree.hpp"
#include "ftforge/fpc.hpp"
#include "ftforge/probability.hpp"

namespace ftforge {

enum class Mode { kPaper, kExact };

inline std::string_view to_string(Mode m) { return m == Mode::kPaper ? "paper" : "exact"; }

// ---------------------------------------------------------------------------
// Chain propagation

/// Result of the forward pass over a chain. `after` holds, per chain event,
/// the probability that the system has failed right after that event's
/// supposed execution.
struct ChainProbability {
  double top = 0.0;
  std::map<std::string, double> after;
};

namespace detail {

class ChainPass {
 public:
  ChainPass(const FpcGraph& g, const ProbabilityAssignment& p) : g_(g), p_(p) {}

  ChainProbability run() {
    ChainProbability out;
    out.top = sequence(g_.chain, 0.0, {0.0, 1.0}, out);
    return out;
  }

 private:
  /// Maps a value computed inside an exclusive branch back to the chain
  /// level: prev + (1 - prev) * P(c) * local, composed for nesting.
  struct Affine {
    double offset;
    double scale;
    double operator()(double local) const { return offset + scale * local; }
  };

  double event_probability(const FpcNode& n) const {
    if (!n.event.contracted()) return p_.fault(n.event.members.front());
    double sum = 0.0;
    for (std::size_t k = 0; k < n.event.members.size(); ++k)
      sum += p_.fault(n.event.members[k]) * p_.condition(n.guards[k]);
    return sum;
  }

  double sequence(const std::vector<FpcItem>& items, double prev, Affine global,
                  ChainProbability& out) const {
    for (const FpcItem& item : items) {
      switch (item.kind) {
        case FpcItem::Kind::kEvent: {
          const FpcNode& n = g_.nodes[item.node];
          const double own = event_probability(n);
          prev = prev + own - prev * own;
          out.after[n.id] = global(prev);
          break;
        }
        case FpcItem::Kind::kConcurrent: {
          // Repeated preceding failure counted once: sum P_k - (K-1) P_prev.
          double sum = 0.0;
          for (const auto& branch : item.branches) sum += sequence(branch, prev, global, out);
          prev = sum - static_cast<double>(item.branches.size() - 1) * prev;
          break;
        }
        case FpcItem::Kind::kExclusive: {
          double sum = 0.0;
          for (std::size_t b = 0; b < item.branches.size(); ++b) {
            const double c = p_.condition(item.guards[b]);
            const Affine inner{global(prev), global.scale * (1.0 - prev) * c};
            const double local = sequence(item.branches[b], 0.0, inner, out);
            sum += prev + (1.0 - prev) * c * local;
          }
          prev = sum - static_cast<double>(item.branches.size() - 1) * prev;
          break;
        }
      }
    }
    return prev;
  }

  const FpcGraph& g_;
  const ProbabilityAssignment& p_;
};

}  // namespace detail

/// Forward propagation along the chain: a series step gives
/// P(a_j+) = P(a_j-) + P(a_j) - P(a_j-) P(a_j); converging branches give
/// sum P(branch) - (K-1) P(before the split); a contracted event has
/// probability sum P(a_m) P(c_m); an exclusive branch contributes
/// P(before) + (1 - P(before)) P(c) P(branch chain).
inline ChainProbability chain_probability(const FpcGraph& g, const ProbabilityAssignment& p) {
  return detail::ChainPass(g, p).run();
}

inline double top_probability_paper(const FpcGraph& g, const ProbabilityAssignment& p) {
  return chain_probability(g, p).top;
}

// ---------------------------------------------------------------------------
// Exact evaluation of the fault tree

/// Boolean evaluation of a fault tree with gates pre-sorted so each gate
/// runs after the gates producing its inputs.
class TreeEvaluator {
 public:
  /// Basic events are matched to actions by fault name, conditional events
  /// to guards by id.
  TreeEvaluator(const FaultTree& t, const OutcomeSpace& space) {
    std::map<std::string, std::size_t> slot;
    auto slot_of = [&slot](const std::string& id) {
      return slot.emplace(id, slot.size()).first->second;
    };
    for (std::size_t k = 0; k < space.actions.size(); ++k)
      basics_.emplace_back(slot_of(fault_name(space.actions[k])), k);
    for (std::size_t d = 0; d < space.decisions.size(); ++d) {
      for (std::size_t k = 0; k < space.guards[d].size(); ++k)
        conditions_.push_back({slot_of(space.guards[d][k]), d, static_cast<std::uint32_t>(k)});
    }
    for (const FtEvent& e : t.events) {
      if (e.kind == FtEvent::Kind::kBasic && !slot.count(e.id))
        throw InputError("basic event '" + e.id + "' matches no action of the model");
      if (e.kind == FtEvent::Kind::kConditional && !slot.count(e.id))
        throw InputError("conditional event '" + e.id + "' matches no guard of the model");
    }
    std::set<std::string> done;
    for (const FtEvent& e : t.events) {
      if (e.kind != FtEvent::Kind::kOutput) done.insert(e.id);
    }
    std::vector<const FtGate*> pending;
    for (const FtGate& g : t.gates) pending.push_back(&g);
    while (!pending.empty()) {
      std::vector<const FtGate*> rest;
      for (const FtGate* g : pending) {
        const bool ready = std::all_of(g->inputs.begin(), g->inputs.end(),
                                       [&done](const std::string& in) { return done.count(in) > 0; });
        if (!ready) {
          rest.push_back(g);
          continue;
        }
        Step s{g->kind == FtGate::Kind::kOr, {}, 0, slot_of(g->output)};
        for (const std::string& in : g->inputs) s.inputs.push_back(slot_of(in));
        if (!s.is_or) s.condition = slot_of(g->condition);
        steps_.push_back(std::move(s));
        done.insert(g->output);
      }
      if (rest.size() == pending.size()) throw InputError("fault tree has a cycle or an undriven input");
      pending = std::move(rest);
    }
    top_ = slot_of(t.top);
    slots_ = slot.size();
  }

  bool top_occurs(std::uint64_t fault_mask, const std::vector<std::uint32_t>& choice) const {
    thread_local std::vector<std::uint8_t> value;
    value.assign(slots_, 0);
    for (const auto& [s, k] : basics_) value[s] = (fault_mask >> k) & 1U;
    for (const Condition& c : conditions_) value[c.slot] = choice[c.decision] == c.index;
    for (const Step& s : steps_) {
      std::uint8_t v = 0;
      if (s.is_or) {
        for (std::size_t in : s.inputs) v |= value[in];
      } else {
        v = value[s.inputs.front()] & value[s.condition];
      }
      value[s.output] = v;
    }
    return value[top_] != 0;
  }

 private:
  struct Step {
    bool is_or;
    std::vector<std::size_t> inputs;
    std::size_t condition;
    std::size_t output;
  };
  struct Condition {
    std::size_t slot;
    std::size_t decision;
    std::uint32_t index;
  };

  std::vector<std::pair<std::size_t, std::size_t>> basics_;
  std::vector<Condition> conditions_;
  std::vector<Step> steps_;
  std::size_t top_ = 0;
  std::size_t slots_ = 0;
};

/// Exact P(top) of a tree lowered from `model`, by weighted enumeration of
/// fault vectors and decision choices.
inline double top_probability_exact(const FaultTree& t, const ActivityModel& model,
                                    const ProbabilityAssignment& p, std::size_t cap = kDefaultCap) {
  const OutcomeSpace space = OutcomeSpace::of(model, p);
  const TreeEvaluator eval(t, space);
  return weighted_outcome_sum(space, cap, [&eval](std::uint64_t mask, const auto& choice) {
    return eval.top_occurs(mask, choice);
  });
}

/// Transforms the model and evaluates its fault tree exactly.
inline double top_probability_exact(const ActivityModel& model, const ProbabilityAssignment& p,
                                    std::size_t cap = kDefaultCap) {
  const RegionMap regions = pair_control_nodes(model);
  const FpcGraph fpc = build_fpc(model, regions);
  return top_probability_exact(fpc_to_fault_tree(fpc, &model).tree, model, p, cap);
}

// ---------------------------------------------------------------------------
// Minimal cut sets

struct CutSet {
  std::vector<std::string> elements;  ///< natural order

  std::string to_string() const {
    std::string out = "{";
    for (std::size_t i = 0; i < elements.size(); ++i) out += (i ? "," : "") + elements[i];
    return out + "}";
  }

  bool operator==(const CutSet&) const = default;
};

inline bool cut_set_less(const CutSet& a, const CutSet& b) {
  return std::lexicographical_compare(a.elements.begin(), a.elements.end(), b.elements.begin(),
                                      b.elements.end(),
                                      [](const std::string& x, const std::string& y) { return natural_less(x, y); });
}

/// Guard id -> owning decision id, for pruning impossible cut sets.
inline std::map<std::string, std::string> guard_exclusivity(const ActivityModel& model) {
  std::map<std::string, std::string> out;
  for (const ActivityEdge& e : model.edges) {
    if (e.guard) out[e.guard->id] = e.source;
  }
  return out;
}

/// Top-down expansion (an OR gate yields one row per input, an inhibit gate
/// adds its condition to the row), then removal of rows holding two guards
/// of one decision, then absorption. Result sorted canonically.
inline std::vector<CutSet> minimal_cut_sets(const FaultTree& t,
                                            const std::map<std::string, std::string>& guard_decision) {
  using Row = std::set<std::string>;
  std::vector<Row> done;
  std::vector<Row> work{{t.top}};
  while (!work.empty()) {
    Row row = std::move(work.back());
    work.pop_back();
    const FtGate* gate = nullptr;
    std::string expanded;
    for (const std::string& id : row) {
      if ((gate = t.producer(id))) {
        expanded = id;
        break;
      }
    }
    if (!gate) {
      done.push_back(std::move(row));
      continue;
    }
    row.erase(expanded);
    if (gate->kind == FtGate::Kind::kOr) {
      for (const std::string& in : gate->inputs) {
        Row next = row;
        next.insert(in);
        work.push_back(std::move(next));
      }
    } else {
      row.insert(gate->inputs.front());
      row.insert(gate->condition);
      work.push_back(std::move(row));
    }
  }

  std::vector<Row> possible;
  for (Row& row : done) {
    std::map<std::string, int> per_decision;
    bool exclusive_clash = false;
    for (const std::string& id : row) {
      auto it = guard_decision.find(id);
      if (it != guard_decision.end() && ++per_decision[it->second] > 1) exclusive_clash = true;
    }
    if (!exclusive_clash && std::find(possible.begin(), possible.end(), row) == possible.end())
      possible.push_back(std::move(row));
  }

  std::sort(possible.begin(), possible.end(), [](const Row& a, const Row& b) { return a.size() < b.size(); });
  std::vector<Row> minimal;
  for (const Row& row : possible) {
    const bool absorbed = std::any_of(minimal.begin(), minimal.end(), [&row](const Row& m) {
      return std::includes(row.begin(), row.end(), m.begin(), m.end());
    });
    if (!absorbed) minimal.push_back(row);
  }

  std::vector<CutSet> out;
  for (const Row& row : minimal) {
    CutSet c{{row.begin(), row.end()}};
    natural_sort(c.elements);
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(), cut_set_less);
  return out;
}

inline std::vector<CutSet> minimal_cut_sets(const FaultTree& t, const ActivityModel& model) {
  return minimal_cut_sets(t, guard_exclusivity(model));
}

/// Parses "{a1,c7}" style lists: a JSON array of arrays of ids.
inline std::vector<CutSet> cut_sets_from_json(const nlohmann::json& j) {
  std::vector<CutSet> out;
  for (const auto& set : j) {
    CutSet c{set.get<std::vector<std::string>>()};
    natural_sort(c.elements);
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(), cut_set_less);
  return out;
}

inline nlohmann::json to_json(const std::vector<CutSet>& sets) {
  nlohmann::json out = nlohmann::json::array();
  for (const CutSet& c : sets) out.push_back(c.elements);
  return out;
}

/// Differences between computed cut sets and a reference list.
struct CutSetDelta {
  std::vector<CutSet> missing;     ///< in the reference, not computed
  std::vector<CutSet> unexpected;  ///< computed, not in the reference

  bool empty() const { return missing.empty() && unexpected.empty(); }

  nlohmann::json to_json() const {
    return {{"missing", ftforge::to_json(missing)}, {"unexpected", ftforge::to_json(unexpected)}};
  }
};

inline CutSetDelta compare_cut_sets(const std::vector<CutSet>& computed,
                                    const std::vector<CutSet>& reference) {
  CutSetDelta d;
  for (const CutSet& r : reference) {
    if (std::find(computed.begin(), computed.end(), r) == computed.end()) d.missing.push_back(r);
  }
  for (const CutSet& c : computed) {
    if (std::find(reference.begin(), reference.end(), c) == reference.end()) d.unexpected.push_back(c);
  }
  return d;
}

/// Assignment that realizes a cut set: its faults certain, all other faults
/// impossible; a decision with a guard in the set always takes that guard,
/// every other decision chooses uniformly.
inline ProbabilityAssignment forcing_assignment(const ActivityModel& model,
                                                const std::vector<std::string>& elements) {
  auto in_set = [&elements](const std::string& id) {
    return std::find(elements.begin(), elements.end(), id) != elements.end();
  };
  ProbabilityAssignment p;
  for (const ActivityNode& n : model.nodes) {
    if (n.kind == NodeKind::kAction) p.faults[n.id] = in_set(fault_name(n.id)) ? 1.0 : 0.0;
  }
  std::map<std::string, std::vector<std::string>> by_decision;
  for (const ActivityEdge& e : model.edges) {
    if (e.guard) by_decision[e.source].push_back(e.guard->id);
  }
  for (const auto& [decision, guards] : by_decision) {
    const bool forced = std::any_of(guards.begin(), guards.end(), in_set);
    for (const std::string& g : guards)
      p.conditions[g] = forced ? (in_set(g) ? 1.0 : 0.0) : 1.0 / static_cast<double>(guards.size());
  }
  return p;
}

}  // namespace ftforge
