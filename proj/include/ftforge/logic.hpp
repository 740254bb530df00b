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

/// @file logic.hpp
/// Propositions over action completion, fault events and the material
/// implications that connect them.
///
/// A proposition p_i reads "action A_i completed execution"; the fault
/// event a_i is its negation. A contracted event a{i,j} stands for the
/// conjunction of faults that lie on mutually exclusive paths.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ftforge/activity.hpp"
#include "ftforge/common.hpp"

namespace ftforge {

/// A single fault (one member) or a contracted fault (two or more).
/// Members are action ids kept in natural order.
struct FaultEvent {
  std::vector<std::string> members;

  static FaultEvent of(std::string action) { return FaultEvent{{std::move(action)}}; }

  static FaultEvent of(std::vector<std::string> actions) {
    natural_sort(actions);
    actions.erase(std::unique(actions.begin(), actions.end()), actions.end());
    return FaultEvent{std::move(actions)};
  }

  bool contracted() const { return members.size() > 1; }

  /// "a7" or "a{7,8,9}".
  std::string name() const {
    if (members.size() == 1) return fault_name(members.front());
    std::string out = "a{";
    for (std::size_t i = 0; i < members.size(); ++i) {
      if (i) out += ',';
      out += action_index(members[i]);
    }
    return out + "}";
  }

  bool operator==(const FaultEvent&) const = default;
};

struct Formula {
  enum class Op { kCompleted, kFailed, kNot, kAnd, kOr, kImplies };

  Op op = Op::kFailed;
  FaultEvent event;  ///< kCompleted / kFailed only
  std::vector<Formula> args;

  static Formula completed(std::string action) {
    return {Op::kCompleted, FaultEvent::of(std::move(action)), {}};
  }
  static Formula failed(FaultEvent event) { return {Op::kFailed, std::move(event), {}}; }
  static Formula negate(Formula f) { return {Op::kNot, {}, {std::move(f)}}; }
  static Formula implies(Formula lhs, Formula rhs) {
    return {Op::kImplies, {}, {std::move(lhs), std::move(rhs)}};
  }
  /// Flattens nested operands of the same connective; one operand is
  /// returned unchanged.
  static Formula conj(std::vector<Formula> parts) { return nary(Op::kAnd, std::move(parts)); }
  static Formula disj(std::vector<Formula> parts) { return nary(Op::kOr, std::move(parts)); }

  bool is_atom() const { return op == Op::kCompleted || op == Op::kFailed; }
  const Formula& lhs() const { return args.at(0); }
  const Formula& rhs() const { return args.at(1); }

  bool operator==(const Formula&) const = default;

 private:
  static Formula nary(Op op, std::vector<Formula> parts) {
    std::vector<Formula> flat;
    for (Formula& part : parts) {
      if (part.op == op) {
        for (Formula& inner : part.args) flat.push_back(std::move(inner));
      } else {
        flat.push_back(std::move(part));
      }
    }
    if (flat.empty()) throw Error("empty connective");
    if (flat.size() == 1) return std::move(flat.front());
    return {op, {}, std::move(flat)};
  }
};

namespace detail {

inline int precedence(Formula::Op op) {
  switch (op) {
    case Formula::Op::kImplies: return 0;
    case Formula::Op::kOr: return 1;
    case Formula::Op::kAnd: return 2;
    case Formula::Op::kNot: return 3;
    default: return 4;
  }
}

inline void print_formula(const Formula& f, std::string& out) {
  auto child = [&out, &f](const Formula& c) {
    const int mine = precedence(f.op);
    const int theirs = precedence(c.op);
    const bool parens = theirs < mine ||
                        (theirs == mine && f.op == Formula::Op::kImplies) ||
                        (f.op == Formula::Op::kOr && c.op == Formula::Op::kAnd);
    if (parens) out += '(';
    print_formula(c, out);
    if (parens) out += ')';
  };
  switch (f.op) {
    case Formula::Op::kCompleted: out += proposition_name(f.event.members.front()); return;
    case Formula::Op::kFailed: out += f.event.name(); return;
    case Formula::Op::kNot:
      out += '!';
      child(f.args.front());
      return;
    case Formula::Op::kImplies:
      child(f.lhs());
      out += " -> ";
      child(f.rhs());
      return;
    case Formula::Op::kAnd:
    case Formula::Op::kOr:
      for (std::size_t i = 0; i < f.args.size(); ++i) {
        if (i) out += f.op == Formula::Op::kAnd ? " & " : " | ";
        child(f.args[i]);
      }
      return;
  }
}

}  // namespace detail

/// Canonical text: `->`, `|`, `&`, `!`; parentheses only where needed
/// plus around conjunctions inside disjunctions.
inline std::string to_string(const Formula& f) {
  std::string out;
  detail::print_formula(f, out);
  return out;
}

/// Action ids the formula depends on, in natural order.
inline std::vector<std::string> variables(const Formula& f) {
  std::vector<std::string> out;
  std::vector<const Formula*> stack{&f};
  while (!stack.empty()) {
    const Formula* g = stack.back();
    stack.pop_back();
    for (const std::string& m : g->event.members) out.push_back(m);
    for (const Formula& a : g->args) stack.push_back(&a);
  }
  natural_sort(out);
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Truth value when the actions in `failed_actions` failed and all others
/// completed.
template <typename Failed>
bool evaluate(const Formula& f, const Failed& failed) {
  switch (f.op) {
    case Formula::Op::kCompleted: return !failed(f.event.members.front());
    case Formula::Op::kFailed:
      return std::all_of(f.event.members.begin(), f.event.members.end(),
                         [&failed](const std::string& m) { return failed(m); });
    case Formula::Op::kNot: return !evaluate(f.args.front(), failed);
    case Formula::Op::kAnd:
      return std::all_of(f.args.begin(), f.args.end(),
                         [&failed](const Formula& g) { return evaluate(g, failed); });
    case Formula::Op::kOr:
      return std::any_of(f.args.begin(), f.args.end(),
                         [&failed](const Formula& g) { return evaluate(g, failed); });
    case Formula::Op::kImplies:
      return !evaluate(f.lhs(), failed) || evaluate(f.rhs(), failed);
  }
  return false;
}

/// Exhaustive comparison over the union of both variable sets.
/// Throws CapExceeded above `max_variables`.
inline bool truth_table_equivalent(const Formula& lhs, const Formula& rhs,
                                   std::size_t max_variables = 20) {
  std::vector<std::string> vars = variables(lhs);
  for (std::string& v : variables(rhs)) vars.push_back(std::move(v));
  natural_sort(vars);
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  if (vars.size() > max_variables)
    throw CapExceeded("truth table over " + std::to_string(vars.size()) +
                      " variables exceeds the cap of " + std::to_string(max_variables));
  std::unordered_map<std::string, std::size_t> bit;
  for (std::size_t i = 0; i < vars.size(); ++i) bit.emplace(vars[i], i);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << vars.size()); ++mask) {
    auto failed = [&](const std::string& id) { return (mask >> bit.at(id)) & 1U; };
    if (evaluate(lhs, failed) != evaluate(rhs, failed)) return false;
  }
  return true;
}

/// Replaces every contracted event by the conjunction of its members.
inline Formula expand_contractions(const Formula& f) {
  if (f.op == Formula::Op::kFailed && f.event.contracted()) {
    std::vector<Formula> parts;
    for (const std::string& m : f.event.members) parts.push_back(Formula::failed(FaultEvent::of(m)));
    return Formula::conj(std::move(parts));
  }
  Formula out = f;
  for (Formula& a : out.args) a = expand_contractions(a);
  return out;
}

// ---------------------------------------------------------------------------
// Logical model

/// Implication sentences over completion propositions, in source order.
struct LogicalModel {
  std::vector<Formula> implications;
};

namespace detail {

class SentenceBuilder {
 public:
  explicit SentenceBuilder(const ActivityGraph& g) : g_(g) {}

  /// What must have completed for a token to be at the input of `v`.
  std::optional<Formula> pred(std::size_t v) const {
    switch (g_.kind(v)) {
      case NodeKind::kAction: return Formula::completed(g_.node(v).id);
      case NodeKind::kInitial:
      case NodeKind::kFinal: return std::nullopt;
      case NodeKind::kFork:
      case NodeKind::kDecision: return pred(g_.source(g_.in_edges(v).front()));
      case NodeKind::kJoin:
      case NodeKind::kMerge: return inputs(v);
    }
    return std::nullopt;
  }

  /// What completes first once a token leaves `v`.
  std::optional<Formula> succ(std::size_t v) const {
    switch (g_.kind(v)) {
      case NodeKind::kAction: return Formula::completed(g_.node(v).id);
      case NodeKind::kInitial:
      case NodeKind::kFinal: return std::nullopt;
      case NodeKind::kJoin:
      case NodeKind::kMerge: return succ(g_.successor(v));
      case NodeKind::kFork:
      case NodeKind::kDecision: return outputs(v);
    }
    return std::nullopt;
  }

  /// Combination of the predecessors of a join (all) or merge (any).
  std::optional<Formula> inputs(std::size_t v) const {
    std::vector<Formula> parts;
    for (std::size_t e : g_.in_edges(v)) {
      if (auto p = pred(g_.source(e))) parts.push_back(std::move(*p));
    }
    if (parts.size() != g_.in_edges(v).size()) return std::nullopt;
    return g_.kind(v) == NodeKind::kJoin ? Formula::conj(std::move(parts))
                                         : Formula::disj(std::move(parts));
  }

  /// Disjunction of the first completions on each outgoing branch.
  std::optional<Formula> outputs(std::size_t v) const {
    std::vector<Formula> parts;
    for (std::size_t e : g_.out_edges(v)) {
      if (auto s = succ(g_.target(e))) parts.push_back(std::move(*s));
    }
    if (parts.size() != g_.out_edges(v).size()) return std::nullopt;
    return Formula::disj(std::move(parts));
  }

 private:
  const ActivityGraph& g_;
};

}  // namespace detail

/// One sentence per structural pattern, emitted in node declaration order:
/// A_i -> A_j gives p_j -> p_i; a fork or decision gives
/// (p_2 | ... | p_k) -> p_1; a join gives p_m -> (p_2 & ... & p_k) and a
/// merge p_m -> (p_2 | ... | p_k). Initial and final contribute nothing.
inline LogicalModel derive_logical_model(const ActivityModel& model) {
  const ActivityGraph g(model);
  const detail::SentenceBuilder b(g);
  LogicalModel out;
  auto emit = [&out](std::optional<Formula> consequent_side, std::optional<Formula> antecedent_side) {
    if (!consequent_side || !antecedent_side) return;
    Formula s = Formula::implies(std::move(*consequent_side), std::move(*antecedent_side));
    if (std::find(out.implications.begin(), out.implications.end(), s) == out.implications.end())
      out.implications.push_back(std::move(s));
  };
  for (std::size_t v = 0; v < g.size(); ++v) {
    switch (g.kind(v)) {
      case NodeKind::kAction: {
        const std::size_t next = g.successor(v);
        if (g.kind(next) == NodeKind::kAction)
          emit(Formula::completed(g.node(next).id), Formula::completed(g.node(v).id));
        break;
      }
      case NodeKind::kFork:
      case NodeKind::kDecision:
        emit(b.outputs(v), b.pred(g.source(g.in_edges(v).front())));
        break;
      case NodeKind::kJoin:
      case NodeKind::kMerge:
        emit(b.succ(g.successor(v)), b.inputs(v));
        break;
      default:
        break;
    }
  }
  return out;
}

namespace detail {

/// Negation pushed down to the atoms; negated completions stay as !p.
inline Formula push_negation(const Formula& f, bool negated) {
  switch (f.op) {
    case Formula::Op::kCompleted:
    case Formula::Op::kFailed: return negated ? Formula::negate(f) : f;
    case Formula::Op::kNot: return push_negation(f.args.front(), !negated);
    case Formula::Op::kAnd:
    case Formula::Op::kOr: {
      std::vector<Formula> parts;
      for (const Formula& a : f.args) parts.push_back(push_negation(a, negated));
      const bool conjunction = (f.op == Formula::Op::kAnd) != negated;
      return conjunction ? Formula::conj(std::move(parts)) : Formula::disj(std::move(parts));
    }
    case Formula::Op::kImplies:
      if (negated)
        return Formula::conj({push_negation(f.lhs(), false), push_negation(f.rhs(), true)});
      return Formula::implies(push_negation(f.lhs(), false), push_negation(f.rhs(), false));
  }
  return f;
}

}  // namespace detail

/// P -> Q becomes !Q -> !P with the negations pushed onto the
/// propositions: (p2 | p3) -> p1 becomes !p1 -> !p2 & !p3.
inline Formula contrapositive(const Formula& implication) {
  if (implication.op != Formula::Op::kImplies) throw Error("not an implication: " + to_string(implication));
  return Formula::implies(detail::push_negation(implication.rhs(), true),
                          detail::push_negation(implication.lhs(), true));
}

/// Rewrites !p_i as the fault event a_i.
inline Formula fault_form(const Formula& f) {
  if (f.op == Formula::Op::kNot && f.args.front().op == Formula::Op::kCompleted)
    return Formula::failed(f.args.front().event);
  if (f.op == Formula::Op::kCompleted)
    return Formula::negate(Formula::failed(f.event));
  Formula out = f;
  for (Formula& a : out.args) a = fault_form(a);
  if (out.op == Formula::Op::kNot && out.args.front().op == Formula::Op::kNot)
    return out.args.front().args.front();
  return out;
}

/// Contrapositive of every sentence, over fault events.
inline std::vector<Formula> contrapose(const LogicalModel& logical) {
  std::vector<Formula> out;
  for (const Formula& s : logical.implications) out.push_back(fault_form(contrapositive(s)));
  return out;
}

// ---------------------------------------------------------------------------
// Conjunctive material form

struct MaterialImplication {
  FaultEvent antecedent;
  FaultEvent consequent;

  Formula to_formula() const {
    return Formula::implies(Formula::failed(antecedent), Formula::failed(consequent));
  }

  bool operator==(const MaterialImplication&) const = default;
};

/// Conjunction of material implications between fault events.
struct CmfFormula {
  std::vector<MaterialImplication> units;

  Formula to_formula() const {
    std::vector<Formula> parts;
    for (const MaterialImplication& u : units) parts.push_back(u.to_formula());
    if (parts.empty()) throw Error("empty formula");
    return parts.size() == 1 ? std::move(parts.front()) : Formula{Formula::Op::kAnd, {}, std::move(parts)};
  }

  /// Units separated by "; ".
  std::string to_string() const {
    std::string out;
    for (const MaterialImplication& u : units) {
      if (!out.empty()) out += "; ";
      out += u.antecedent.name() + " -> " + u.consequent.name();
    }
    return out;
  }

  bool operator==(const CmfFormula&) const = default;
};

namespace detail {

inline std::optional<FaultEvent> as_event(const Formula& f) {
  if (f.op == Formula::Op::kFailed) return f.event;
  return std::nullopt;
}

}  // namespace detail

/// (a2 | a3) -> a4 becomes (a2 -> a4) & (a3 -> a4). An implication without
/// a disjunctive antecedent is returned as its single unit.
inline CmfFormula refactor_disjunction(const Formula& implication) {
  if (implication.op != Formula::Op::kImplies) throw Error("not an implication: " + to_string(implication));
  const auto consequent = detail::as_event(implication.rhs());
  if (!consequent) throw Error("consequent is not a fault event: " + to_string(implication.rhs()));
  CmfFormula out;
  const Formula& lhs = implication.lhs();
  const std::vector<Formula> alternatives =
      lhs.op == Formula::Op::kOr ? lhs.args : std::vector<Formula>{lhs};
  for (const Formula& alt : alternatives) {
    const auto antecedent = detail::as_event(alt);
    if (!antecedent) throw Error("antecedent term is not a fault event: " + to_string(alt));
    out.units.push_back({*antecedent, *consequent});
  }
  return out;
}

/// True when every pair of members is split by some exclusive region: both
/// lie on its branches and no branch holds the two together. Pairs may be
/// split by different, nested decisions.
inline bool mutually_exclusive(const std::vector<std::string>& members, const RegionMap& regions) {
  auto on = [](const RegionBranch& b, const std::string& n) {
    return std::find(b.nodes.begin(), b.nodes.end(), n) != b.nodes.end();
  };
  auto split = [&](const std::string& x, const std::string& y) {
    for (const Region& r : regions.regions) {
      if (r.kind != Region::Kind::kExclusive) continue;
      bool has_x = false, has_y = false, together = false;
      for (const RegionBranch& b : r.branches) {
        has_x = has_x || on(b, x);
        has_y = has_y || on(b, y);
        together = together || (on(b, x) && on(b, y));
      }
      if (has_x && has_y && !together) return true;
    }
    return false;
  };
  for (std::size_t i = 0; i < members.size(); ++i)
    for (std::size_t j = i + 1; j < members.size(); ++j)
      if (members[i] == members[j] || !split(members[i], members[j])) return false;
  return true;
}

/// Merges events from mutually exclusive branches into one contracted
/// event: {a2},{a3} -> a{2,3}.
inline FaultEvent contract(const std::vector<FaultEvent>& events, const RegionMap& regions) {
  if (events.size() < 2) throw Error("contraction needs at least two fault events");
  std::vector<std::string> members;
  for (const FaultEvent& e : events) members.insert(members.end(), e.members.begin(), e.members.end());
  FaultEvent out = FaultEvent::of(members);
  if (out.members.size() != members.size()) throw Error("contraction of overlapping fault events");
  if (!mutually_exclusive(out.members, regions))
    throw Error("cannot contract " + out.name() +
                ": members do not lie on mutually exclusive branches");
  return out;
}

namespace detail {

/// Disjunctive normal form of a negation-free formula over fault events.
inline std::vector<std::vector<FaultEvent>> dnf(const Formula& f) {
  switch (f.op) {
    case Formula::Op::kFailed: return {{f.event}};
    case Formula::Op::kOr: {
      std::vector<std::vector<FaultEvent>> out;
      for (const Formula& a : f.args)
        for (auto& term : dnf(a)) out.push_back(std::move(term));
      return out;
    }
    case Formula::Op::kAnd: {
      std::vector<std::vector<FaultEvent>> out{{}};
      for (const Formula& a : f.args) {
        std::vector<std::vector<FaultEvent>> next;
        for (const auto& left : out) {
          for (const auto& right : dnf(a)) {
            auto term = left;
            term.insert(term.end(), right.begin(), right.end());
            next.push_back(std::move(term));
          }
        }
        out = std::move(next);
      }
      return out;
    }
    default:
      throw Error("not a negation-free fault formula: " + to_string(f));
  }
}

}  // namespace detail

/// Normalizes the contraposed sentences into material implications between
/// single or contracted fault events. Disjunctive antecedents are split;
/// conjunctions over exclusive branches are contracted; conjunctive
/// consequents over concurrent branches are split into one unit each.
inline CmfFormula to_cmf(const LogicalModel& logical, const RegionMap& regions) {
  CmfFormula out;
  auto add = [&out](MaterialImplication u) {
    if (std::find(out.units.begin(), out.units.end(), u) == out.units.end())
      out.units.push_back(std::move(u));
  };
  for (const Formula& sentence : contrapose(logical)) {
    const auto consequent_terms = detail::dnf(sentence.rhs());
    if (consequent_terms.size() != 1)
      throw Error("disjunctive consequent " + to_string(sentence.rhs()));
    std::vector<FaultEvent> consequents = consequent_terms.front();
    // A conjunctive consequent stays whole when its members are exclusive.
    if (consequents.size() > 1) {
      std::vector<std::string> members;
      for (const FaultEvent& e : consequents) members.insert(members.end(), e.members.begin(), e.members.end());
      if (mutually_exclusive(members, regions)) consequents = {contract(consequents, regions)};
    }
    for (const auto& term : detail::dnf(sentence.lhs())) {
      const FaultEvent antecedent = term.size() == 1 ? term.front() : contract(term, regions);
      for (const FaultEvent& c : consequents) add({antecedent, c});
    }
  }
  return out;
}

enum class CmfClass { kChain, kCmfNotChain, kNotCmf };

inline std::string_view to_string(CmfClass c) {
  switch (c) {
    case CmfClass::kChain: return "chain";
    case CmfClass::kCmfNotChain: return "cmf_not_chain";
    case CmfClass::kNotCmf: return "not_cmf";
  }
  return "?";
}

/// chain: a conjunction of implications where each consequent is the next
/// antecedent. cmf_not_chain: still a conjunction of implications whose
/// sides are fault events or conjunctions of them. not_cmf: anything else,
/// e.g. a disjunction of chains.
inline CmfClass classify(const Formula& f) {
  const std::vector<Formula> units =
      f.op == Formula::Op::kAnd ? f.args : std::vector<Formula>{f};
  auto conjunctive = [](const Formula& side) {
    if (side.op == Formula::Op::kFailed) return true;
    return side.op == Formula::Op::kAnd &&
           std::all_of(side.args.begin(), side.args.end(),
                       [](const Formula& a) { return a.op == Formula::Op::kFailed; });
  };
  for (const Formula& u : units) {
    if (u.op != Formula::Op::kImplies || !conjunctive(u.lhs()) || !conjunctive(u.rhs()))
      return CmfClass::kNotCmf;
  }
  for (std::size_t k = 0; k + 1 < units.size(); ++k) {
    if (!(units[k].rhs() == units[k + 1].lhs())) return CmfClass::kCmfNotChain;
  }
  return CmfClass::kChain;
}

inline CmfClass classify(const CmfFormula& f) { return classify(f.to_formula()); }

}  // namespace ftforge
