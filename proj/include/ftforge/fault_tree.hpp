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

/// @file fault_tree.hpp
/// Fault trees built from basic, output and conditional events wired to
/// OR and inhibit gates; lowering from fault propagation chains; export.

#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ftforge/activity.hpp"
#include "ftforge/common.hpp"
#include "ftforge/fpc.hpp"

namespace ftforge {

struct FtEvent {
  enum class Kind { kBasic, kOutput, kConditional };

  std::string id;
  Kind kind = Kind::kBasic;
  std::string label;
  std::vector<std::string> annotations;  ///< e.g. "external"
  std::string origin;                     ///< namespaced source element

  bool operator==(const FtEvent&) const = default;
};

struct FtGate {
  enum class Kind { kOr, kInhibit };

  std::string id;
  Kind kind = Kind::kOr;
  std::vector<std::string> inputs;  ///< event ids
  std::string condition;            ///< inhibit only: conditional event id
  std::string output;               ///< output event id

  bool operator==(const FtGate&) const = default;
};

struct FaultTree {
  std::string top;
  std::vector<FtEvent> events;
  std::vector<FtGate> gates;

  const FtEvent* find_event(std::string_view id) const {
    for (const FtEvent& e : events) {
      if (e.id == id) return &e;
    }
    return nullptr;
  }

  /// The gate whose output is `event_id`, if any.
  const FtGate* producer(std::string_view event_id) const {
    for (const FtGate& g : gates) {
      if (g.output == event_id) return &g;
    }
    return nullptr;
  }

  std::size_t count(FtEvent::Kind kind) const {
    return static_cast<std::size_t>(
        std::count_if(events.begin(), events.end(), [kind](const FtEvent& e) { return e.kind == kind; }));
  }

  std::size_t count(FtGate::Kind kind) const {
    return static_cast<std::size_t>(
        std::count_if(gates.begin(), gates.end(), [kind](const FtGate& g) { return g.kind == kind; }));
  }

  bool operator==(const FaultTree&) const = default;
};

struct TraceLink {
  std::string source;
  std::string target;
  std::string relation;  ///< contrapositive, equivalence or expansion

  bool operator==(const TraceLink&) const = default;
};

/// Provenance from activity elements through chain elements to fault-tree
/// elements. Element names are namespaced: "activity:A1", "guard:c7",
/// "fpc:a1", "ft:event:a1", "ft:gate:G3".
struct TraceMap {
  std::vector<TraceLink> links;

  void add(std::string source, std::string target, std::string relation) {
    TraceLink link{std::move(source), std::move(target), std::move(relation)};
    if (std::find(links.begin(), links.end(), link) == links.end()) links.push_back(std::move(link));
  }

  std::vector<const TraceLink*> into(std::string_view target) const {
    std::vector<const TraceLink*> out;
    for (const TraceLink& l : links) {
      if (l.target == target) out.push_back(&l);
    }
    return out;
  }

  nlohmann::json to_json() const {
    nlohmann::json out = nlohmann::json::array();
    for (const TraceLink& l : links)
      out.push_back({{"source", l.source}, {"target", l.target}, {"relation", l.relation}});
    return out;
  }
};

struct Lowering {
  FaultTree tree;
  TraceMap trace;
};

inline std::string_view to_string(FtEvent::Kind kind) {
  switch (kind) {
    case FtEvent::Kind::kBasic: return "basic";
    case FtEvent::Kind::kOutput: return "output";
    case FtEvent::Kind::kConditional: return "conditional";
  }
  return "?";
}

inline std::string_view to_string(FtGate::Kind kind) {
  return kind == FtGate::Kind::kOr ? "or" : "inhibit";
}

namespace detail {

class TreeLowering {
 public:
  TreeLowering(const FpcGraph& fpc, const ActivityModel* model) : fpc_(fpc), model_(model) {}

  Lowering run() {
    for (const FpcNode& n : fpc_.nodes) {
      if (n.kind != FpcNode::Kind::kEvent) continue;
      for (const std::string& action : n.event.members)
        out_.trace.add("activity:" + action, "fpc:" + n.id, "contrapositive");
    }
    const std::optional<std::string> last = sequence(fpc_.chain, std::nullopt, "", "");
    if (!last) throw Error("empty fault propagation chain");
    FtEvent* top = event(*last);
    if (top->kind == FtEvent::Kind::kOutput) rename(*last, "a_s");
    top = event(top->kind == FtEvent::Kind::kOutput ? "a_s" : *last);
    if (top->kind == FtEvent::Kind::kOutput) top->label = "system failure";
    out_.tree.top = top->id;
    return std::move(out_);
  }

 private:
  FtEvent* event(const std::string& id) {
    for (FtEvent& e : out_.tree.events) {
      if (e.id == id) return &e;
    }
    return nullptr;
  }

  void rename(const std::string& from, const std::string& to) {
    event(from)->id = to;
    for (FtGate& g : out_.tree.gates) {
      if (g.output == from) g.output = to;
    }
    for (TraceLink& l : out_.trace.links) {
      if (l.target == "ft:event:" + from) l.target = "ft:event:" + to;
    }
  }

  std::string unique(std::string id) {
    const std::string base = id;
    for (int k = 2; event(id); ++k) id = base + "#" + std::to_string(k);
    return id;
  }

  std::string basic(const std::string& action, const std::string& origin) {
    const std::string id = fault_name(action);
    if (!event(id)) {
      FtEvent e{id, FtEvent::Kind::kBasic, "", {}, origin};
      if (model_) {
        if (const ActivityNode* n = model_->find(action)) e.label = n->label;
        if (model_->is_external(action)) e.annotations.push_back("external");
      }
      out_.tree.events.push_back(std::move(e));
    }
    return id;
  }

  std::string conditional(const std::string& guard) {
    if (!event(guard)) {
      std::string label;
      if (model_) {
        for (const ActivityEdge& e : model_->edges) {
          if (e.guard && e.guard->id == guard) label = e.guard->label;
        }
      }
      out_.tree.events.push_back({guard, FtEvent::Kind::kConditional, label, {}, "guard:" + guard});
      out_.trace.add("guard:" + guard, "ft:event:" + guard, "equivalence");
    }
    return guard;
  }

  /// Adds a gate and its fresh output event; returns the output id.
  std::string gate(FtGate::Kind kind, std::vector<std::string> inputs, std::string condition,
                   std::string output, std::string label, const std::string& source,
                   const char* relation) {
    output = unique(std::move(output));
    const std::string id = "G" + std::to_string(out_.tree.gates.size() + 1);
    out_.tree.events.push_back({output, FtEvent::Kind::kOutput, std::move(label), {}, source});
    out_.tree.gates.push_back({id, kind, std::move(inputs), std::move(condition), output});
    out_.trace.add(source, "ft:gate:" + id, relation);
    out_.trace.add(source, "ft:event:" + output, relation);
    return output;
  }

  std::string or_gate(std::vector<std::string> inputs, std::string output, std::string label,
                      const std::string& source) {
    return gate(FtGate::Kind::kOr, std::move(inputs), "", std::move(output), std::move(label), source,
                "equivalence");
  }

  std::string inhibit(const std::string& input, const std::string& guard, const std::string& source,
                      const char* relation) {
    return gate(FtGate::Kind::kInhibit, {input}, conditional(guard), input + "|" + guard,
                input + " given " + guard, source, relation);
  }

  static std::string action_of(const FaultEvent& e) { return e.members.front(); }

  /// Lowers one fault event; `cur` is the failure observed before it.
  std::string lower_event(const FpcNode& n, const std::optional<std::string>& cur,
                          const std::string& scope) {
    const std::string fpc_id = "fpc:" + n.id;
    std::string own;
    if (!n.event.contracted()) {
      own = basic(action_of(n.event), fpc_id);
      out_.trace.add(fpc_id, "ft:event:" + own, "equivalence");
    } else {
      std::vector<std::string> parts;
      for (std::size_t k = 0; k < n.event.members.size(); ++k) {
        const std::string b = basic(n.event.members[k], fpc_id);
        out_.trace.add(fpc_id, "ft:event:" + b, "expansion");
        parts.push_back(inhibit(b, n.guards[k], fpc_id, "expansion"));
      }
      own = or_gate(std::move(parts), scope + n.event.name(), "contracted fault " + n.event.name(),
                    fpc_id);
    }
    if (!cur) return own;
    const std::string name = n.event.name();
    return or_gate({*cur, own}, scope + name + "+", "failure right after " + name, fpc_id);
  }

  static std::string first_event_name(const std::vector<FpcItem>& items, std::size_t from,
                                      const FpcGraph& fpc, const std::string& fallback) {
    if (from < items.size() && items[from].kind == FpcItem::Kind::kEvent)
      return fpc.nodes[items[from].node].event.name();
    return fallback;
  }

  /// Lowers a sequence of items; `next` names the event following it.
  std::optional<std::string> sequence(const std::vector<FpcItem>& items, std::optional<std::string> cur,
                                      const std::string& scope, const std::string& next) {
    for (std::size_t k = 0; k < items.size(); ++k) {
      const FpcItem& item = items[k];
      const std::string following = first_event_name(items, k + 1, fpc_, next.empty() ? "s" : next);
      switch (item.kind) {
        case FpcItem::Kind::kEvent:
          cur = lower_event(fpc_.nodes[item.node], cur, scope);
          break;
        case FpcItem::Kind::kConcurrent: {
          std::vector<std::string> outs;
          for (const auto& branch : item.branches) outs.push_back(*sequence(branch, cur, scope, following));
          cur = or_gate(std::move(outs), scope + following + "-", "failure right before " + following,
                        "activity:" + item.region);
          break;
        }
        case FpcItem::Kind::kExclusive: {
          std::vector<std::string> outs;
          for (std::size_t b = 0; b < item.branches.size(); ++b) {
            const std::string& guard = item.guards[b];
            const std::string inner_scope = scope + guard + ".";
            const std::string local = *sequence(item.branches[b], std::nullopt, inner_scope, following);
            const std::string gated = inhibit(local, guard, "guard:" + guard, "equivalence");
            if (!cur) {
              outs.push_back(gated);
              continue;
            }
            const std::string last = fpc_.nodes[last_node(item.branches[b])].event.name();
            outs.push_back(or_gate({*cur, gated}, scope + last + "+", "failure right after " + last,
                                   "guard:" + guard));
          }
          cur = or_gate(std::move(outs), scope + following + "-", "failure right before " + following,
                        "activity:" + item.region);
          break;
        }
      }
    }
    return cur;
  }

  std::size_t last_node(const std::vector<FpcItem>& items) const {
    const FpcItem& item = items.back();
    if (item.kind == FpcItem::Kind::kEvent) return item.node;
    return last_node(item.branches.back());
  }

  const FpcGraph& fpc_;
  const ActivityModel* model_;
  Lowering out_;
};

}  // namespace detail

/// Lowers a chain: a series unit a_i -> a_j becomes OR(a_i+, a_j) with
/// output a_j+; bifurcated branches converge through an OR gate; every
/// contracted event or exclusive branch passes through an inhibit gate
/// conditioned on its guard. The final output becomes the top event a_s.
/// `model` supplies labels and the external marker and may be null.
inline Lowering fpc_to_fault_tree(const FpcGraph& fpc, const ActivityModel* model = nullptr) {
  return detail::TreeLowering(fpc, model).run();
}

/// Checks the fault-tree metamodel rules; never throws.
inline ValidationReport validate_ftm(const FaultTree& t) {
  ValidationReport report;
  std::map<std::string, const FtEvent*> events;
  std::set<std::string> gate_ids;
  for (const FtEvent& e : t.events) {
    if (!events.emplace(e.id, &e).second)
      report.add("duplicate-id", "duplicate event id '" + e.id + "'", e.id);
  }
  for (const FtGate& g : t.gates) {
    if (!gate_ids.insert(g.id).second || events.count(g.id))
      report.add("duplicate-id", "duplicate gate id '" + g.id + "'", g.id);
  }

  std::map<std::string, std::size_t> produced;
  std::set<std::string> consumed;
  for (const FtGate& g : t.gates) {
    for (const std::string& in : g.inputs) {
      auto it = events.find(in);
      if (it == events.end()) {
        report.add("unknown-reference", "gate '" + g.id + "' reads unknown event '" + in + "'", g.id);
        continue;
      }
      consumed.insert(in);
      if (it->second->kind == FtEvent::Kind::kConditional)
        report.add("conditional-misuse",
                   "conditional event '" + in + "' is an input of gate '" + g.id + "'", g.id);
    }
    if (g.kind == FtGate::Kind::kOr) {
      if (g.inputs.size() < 2)
        report.add("or-arity", "OR gate '" + g.id + "' needs at least two inputs", g.id);
      if (!g.condition.empty())
        report.add("conditional-misuse", "OR gate '" + g.id + "' carries a condition", g.id);
    } else {
      if (g.inputs.size() != 1)
        report.add("inhibit-arity", "inhibit gate '" + g.id + "' needs exactly one input", g.id);
      auto it = events.find(g.condition);
      if (g.condition.empty() || it == events.end() ||
          it->second->kind != FtEvent::Kind::kConditional)
        report.add("inhibit-condition",
                   "inhibit gate '" + g.id + "' lacks a conditional event", g.id);
    }
    auto out = events.find(g.output);
    if (out == events.end()) {
      report.add("unknown-reference", "gate '" + g.id + "' writes unknown event '" + g.output + "'", g.id);
    } else {
      if (out->second->kind != FtEvent::Kind::kOutput)
        report.add("gate-output-kind",
                   "gate '" + g.id + "' produces " + std::string(to_string(out->second->kind)) +
                       " event '" + g.output + "'",
                   g.id);
      ++produced[g.output];
    }
  }

  std::set<std::string> conditions_used;
  for (const FtGate& g : t.gates) {
    if (g.kind == FtGate::Kind::kInhibit) conditions_used.insert(g.condition);
  }
  std::vector<std::string> tops;
  for (const FtEvent& e : t.events) {
    if (e.kind == FtEvent::Kind::kOutput) {
      const std::size_t n = produced[e.id];
      if (n == 0) report.add("output-undriven", "output event '" + e.id + "' has no gate", e.id);
      if (n > 1) report.add("output-multiple", "output event '" + e.id + "' has several gates", e.id);
    }
    if (e.kind == FtEvent::Kind::kConditional) {
      if (!conditions_used.count(e.id))
        report.add("conditional-misuse",
                   "conditional event '" + e.id + "' is not attached to an inhibit gate", e.id);
      continue;
    }
    if (!consumed.count(e.id)) tops.push_back(e.id);
  }
  if (tops.size() != 1) {
    std::string list;
    for (const std::string& id : tops) list += (list.empty() ? "" : ", ") + id;
    report.add("top-count",
               "expected exactly one top event, found " + std::to_string(tops.size()) +
                   (list.empty() ? "" : " (" + list + ")"),
               t.top);
  } else if (tops.front() != t.top) {
    report.add("top-mismatch", "declared top '" + t.top + "' differs from the root '" + tops.front() + "'",
               t.top);
  }

  // Cycle check over event -> producing gate -> inputs.
  std::map<std::string, int> state;
  std::function<bool(const std::string&)> cyclic = [&](const std::string& id) {
    int& s = state[id];
    if (s == 1) return true;
    if (s == 2) return false;
    s = 1;
    if (const FtGate* g = t.producer(id)) {
      for (const std::string& in : g->inputs) {
        if (cyclic(in)) return true;
      }
    }
    state[id] = 2;
    return false;
  };
  for (const FtEvent& e : t.events) {
    if (cyclic(e.id)) {
      report.add("cycle", "cycle detected through event '" + e.id + "'", e.id);
      break;
    }
  }
  return report;
}

inline nlohmann::json to_json(const FaultTree& t) {
  nlohmann::json events = nlohmann::json::array();
  for (const FtEvent& e : t.events) {
    events.push_back({{"id", e.id},
                      {"kind", to_string(e.kind)},
                      {"label", e.label},
                      {"annotations", e.annotations},
                      {"origin", e.origin}});
  }
  nlohmann::json gates = nlohmann::json::array();
  for (const FtGate& g : t.gates) {
    nlohmann::json j{{"id", g.id}, {"kind", to_string(g.kind)}, {"inputs", g.inputs}};
    if (g.kind == FtGate::Kind::kInhibit || !g.condition.empty()) j["condition"] = g.condition;
    j["output"] = g.output;
    gates.push_back(std::move(j));
  }
  return {{"top", t.top}, {"events", std::move(events)}, {"gates", std::move(gates)}};
}

/// Reads the JSON produced by to_json (or written by hand). Structural
/// problems beyond the schema are left to validate_ftm.
inline FaultTree fault_tree_from_json(const nlohmann::json& j) {
  try {
    FaultTree t;
    t.top = j.at("top").get<std::string>();
    for (const auto& e : j.at("events")) {
      FtEvent ev;
      ev.id = e.at("id").get<std::string>();
      const std::string kind = e.at("kind").get<std::string>();
      if (kind == "basic") ev.kind = FtEvent::Kind::kBasic;
      else if (kind == "output") ev.kind = FtEvent::Kind::kOutput;
      else if (kind == "conditional") ev.kind = FtEvent::Kind::kConditional;
      else throw InputError("unknown event kind '" + kind + "'");
      ev.label = e.value("label", "");
      ev.annotations = e.value("annotations", std::vector<std::string>{});
      ev.origin = e.value("origin", "");
      t.events.push_back(std::move(ev));
    }
    for (const auto& g : j.at("gates")) {
      FtGate gate;
      gate.id = g.at("id").get<std::string>();
      const std::string kind = g.at("kind").get<std::string>();
      if (kind == "or") gate.kind = FtGate::Kind::kOr;
      else if (kind == "inhibit") gate.kind = FtGate::Kind::kInhibit;
      else throw InputError("unsupported gate kind '" + kind + "'");
      gate.inputs = g.at("inputs").get<std::vector<std::string>>();
      gate.condition = g.value("condition", "");
      gate.output = g.at("output").get<std::string>();
      t.gates.push_back(std::move(gate));
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed fault tree JSON: ") + e.what());
  }
}

namespace detail {

inline std::string dot_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

inline std::string tree_dot(const FaultTree& t) {
  std::ostringstream out;
  out << "digraph ft {\n  rankdir=TB;\n";
  for (const FtEvent& e : t.events) {
    const bool external =
        std::find(e.annotations.begin(), e.annotations.end(), "external") != e.annotations.end();
    const char* shape = "box";
    if (e.kind == FtEvent::Kind::kBasic) shape = external ? "house" : "circle";
    if (e.kind == FtEvent::Kind::kConditional) shape = "ellipse";
    std::string label = e.id;
    if (!e.label.empty()) label += "\\n" + dot_escape(e.label);
    out << "  \"" << dot_escape(e.id) << "\" [shape=" << shape << ", label=\"" << label << "\"];\n";
  }
  for (const FtGate& g : t.gates) {
    const bool is_or = g.kind == FtGate::Kind::kOr;
    out << "  \"" << g.id << "\" [shape=" << (is_or ? "invhouse" : "hexagon") << ", label=\""
        << (is_or ? "OR" : "INHIBIT") << "\"];\n";
  }
  for (const FtGate& g : t.gates) {
    out << "  \"" << dot_escape(g.output) << "\" -> \"" << g.id << "\";\n";
    for (const std::string& in : g.inputs) out << "  \"" << g.id << "\" -> \"" << dot_escape(in) << "\";\n";
    if (!g.condition.empty())
      out << "  \"" << g.id << "\" -> \"" << dot_escape(g.condition) << "\" [style=dashed];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace detail

/// Serializes a valid tree as "json" (pretty, two-space indent) or "dot".
/// Throws InputError for invalid trees and unknown formats.
inline std::string export_tree(const FaultTree& t, std::string_view format) {
  const ValidationReport report = validate_ftm(t);
  if (!report.ok())
    throw InputError("refusing to export an invalid fault tree: " + report.violations.front().message);
  if (format == "json") return to_json(t).dump(2) + "\n";
  if (format == "dot") return detail::tree_dot(t);
  throw InputError("unknown export format '" + std::string(format) + "'");
}

}  // namespace ftforge
