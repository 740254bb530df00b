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

/// @file activity.hpp
/// Activity models: the textual DSL, metamodel validation and the pairing
/// of control nodes into concurrent and exclusive regions.
///
/// Source syntax, one declaration per statement:
///
///     activity Name {
///       initial i;  final f;
///       action A1 "collect Data";
///       fork F; join J; decision D; merge M;
///       i -> A1;
///       D -> A7 guard c7 "Fixed-time Mode selected";
///       partition RMS { A1, A2 }
///     }
///
/// `#` starts a comment that runs to the end of the line.

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ftforge/common.hpp"

namespace ftforge {

enum class NodeKind { kInitial, kFinal, kAction, kFork, kJoin, kDecision, kMerge };

inline std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::kInitial: return "initial";
    case NodeKind::kFinal: return "final";
    case NodeKind::kAction: return "action";
    case NodeKind::kFork: return "fork";
    case NodeKind::kJoin: return "join";
    case NodeKind::kDecision: return "decision";
    case NodeKind::kMerge: return "merge";
  }
  return "?";
}

inline std::optional<NodeKind> node_kind_from_keyword(std::string_view word) {
  static const std::pair<std::string_view, NodeKind> kKeywords[] = {
      {"initial", NodeKind::kInitial}, {"final", NodeKind::kFinal},
      {"action", NodeKind::kAction},   {"fork", NodeKind::kFork},
      {"join", NodeKind::kJoin},       {"decision", NodeKind::kDecision},
      {"merge", NodeKind::kMerge}};
  for (const auto& [keyword, kind] : kKeywords) {
    if (keyword == word) return kind;
  }
  return std::nullopt;
}

struct Guard {
  std::string id;
  std::string label;

  bool operator==(const Guard&) const = default;
};

struct ActivityNode {
  std::string id;
  NodeKind kind = NodeKind::kAction;
  std::string label;

  bool operator==(const ActivityNode&) const = default;
};

struct ActivityEdge {
  std::string id;
  std::string source;
  std::string target;
  std::optional<Guard> guard;

  bool operator==(const ActivityEdge&) const = default;
};

/// Swimlane: a named group of nodes, kept in declaration order.
struct Partition {
  std::string name;
  std::vector<std::string> nodes;

  bool operator==(const Partition&) const = default;
};

struct ActivityModel {
  std::string name;
  std::vector<ActivityNode> nodes;
  std::vector<ActivityEdge> edges;
  std::vector<Partition> partitions;

  bool operator==(const ActivityModel&) const = default;

  const ActivityNode* find(std::string_view id) const {
    for (const ActivityNode& n : nodes) {
      if (n.id == id) return &n;
    }
    return nullptr;
  }

  /// Action ids in declaration order.
  std::vector<std::string> actions() const {
    std::vector<std::string> out;
    for (const ActivityNode& n : nodes) {
      if (n.kind == NodeKind::kAction) out.push_back(n.id);
    }
    return out;
  }

  /// Swimlane of a node, empty when it has none.
  std::string lane_of(std::string_view id) const {
    for (const Partition& p : partitions) {
      for (const std::string& n : p.nodes) {
        if (n == id) return p.name;
      }
    }
    return {};
  }

  /// True when the node sits in a swimlane other than the first declared
  /// one, i.e. it is owned by another system.
  bool is_external(std::string_view id) const {
    if (partitions.empty()) return false;
    const std::string lane = lane_of(id);
    return !lane.empty() && lane != partitions.front().name;
  }
};

// ---------------------------------------------------------------------------
// Parsing and printing

namespace detail {

class Lexer {
 public:
  enum class Kind { kIdent, kString, kArrow, kSemi, kLBrace, kRBrace, kComma, kEnd };

  struct Token {
    Kind kind;
    std::string text;
    int line;
    int column;
  };

  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    skip_space();
    Token tok{Kind::kEnd, "", line_, column_};
    if (pos_ >= text_.size()) return tok;
    const char c = text_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t end = pos_;
      while (end < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_'))
        ++end;
      tok.kind = Kind::kIdent;
      tok.text = std::string(text_.substr(pos_, end - pos_));
      advance(end - pos_);
      return tok;
    }
    if (c == '"') {
      advance(1);
      std::string value;
      while (true) {
        if (pos_ >= text_.size() || text_[pos_] == '\n')
          throw ParseError("unterminated string", tok.line, tok.column);
        const char ch = text_[pos_];
        if (ch == '"') {
          advance(1);
          break;
        }
        if (ch == '\\' && pos_ + 1 < text_.size()) {
          value.push_back(text_[pos_ + 1]);
          advance(2);
          continue;
        }
        value.push_back(ch);
        advance(1);
      }
      tok.kind = Kind::kString;
      tok.text = std::move(value);
      return tok;
    }
    if (c == '-' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '>') {
      advance(2);
      tok.kind = Kind::kArrow;
      tok.text = "->";
      return tok;
    }
    switch (c) {
      case ';': tok.kind = Kind::kSemi; break;
      case '{': tok.kind = Kind::kLBrace; break;
      case '}': tok.kind = Kind::kRBrace; break;
      case ',': tok.kind = Kind::kComma; break;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", line_,
                         column_);
    }
    tok.text = std::string(1, c);
    advance(1);
    return tok;
  }

 private:
  void advance(std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      // Columns count bytes; continuation bytes of UTF-8 sequences are skipped.
      const unsigned char ch = static_cast<unsigned char>(text_[pos_]);
      if (ch == '\n') {
        ++line_;
        column_ = 1;
      } else if ((ch & 0xC0) != 0x80) {
        ++column_;
      }
      ++pos_;
    }
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance(1);
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance(1);
      } else {
        break;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

inline bool is_reserved(std::string_view word) {
  return node_kind_from_keyword(word) || word == "activity" ||
         word == "partition" || word == "guard";
}

class Parser {
 public:
  using Kind = Lexer::Kind;
  using Token = Lexer::Token;

  explicit Parser(std::string_view text) : lexer_(text) { tok_ = lexer_.next(); }

  ActivityModel parse() {
    ActivityModel model;
    expect_keyword("activity");
    model.name = expect_ident("activity name").text;
    expect(Kind::kLBrace, "'{'");
    while (tok_.kind != Kind::kRBrace) {
      if (tok_.kind == Kind::kEnd) fail("missing '}' at end of activity");
      statement(model);
    }
    shift();
    if (tok_.kind != Kind::kEnd) fail("unexpected input after activity body");
    resolve(model);
    return model;
  }

 private:
  struct Ref {
    std::string id;
    int line;
    int column;
  };

  void statement(ActivityModel& model) {
    const Token head = expect_ident("declaration or edge");
    if (auto kind = node_kind_from_keyword(head.text)) {
      const Token id = expect_name("node id");
      if (!declared_.emplace(id.text, std::pair{id.line, id.column}).second)
        throw ParseError("duplicate id '" + id.text + "'", id.line, id.column);
      ActivityNode node{id.text, *kind, ""};
      if (tok_.kind == Kind::kString) node.label = shift().text;
      expect(Kind::kSemi, "';'");
      model.nodes.push_back(std::move(node));
      return;
    }
    if (head.text == "partition") {
      partition(model);
      return;
    }
    if (is_reserved(head.text))
      throw ParseError("unexpected keyword '" + head.text + "'", head.line, head.column);
    expect(Kind::kArrow, "'->'");
    const Token target = expect_name("edge target");
    ActivityEdge edge{"e" + std::to_string(model.edges.size() + 1), head.text,
                      target.text, std::nullopt};
    if (tok_.kind == Kind::kIdent && tok_.text == "guard") {
      shift();
      Guard guard{expect_name("guard id").text, ""};
      if (tok_.kind == Kind::kString) guard.label = shift().text;
      edge.guard = std::move(guard);
    }
    expect(Kind::kSemi, "';'");
    refs_.push_back({head.text, head.line, head.column});
    refs_.push_back({target.text, target.line, target.column});
    model.edges.push_back(std::move(edge));
  }

  void partition(ActivityModel& model) {
    Partition lane{expect_name("partition name").text, {}};
    expect(Kind::kLBrace, "'{'");
    while (tok_.kind != Kind::kRBrace) {
      const Token member = expect_name("partition member");
      if (!lane_members_.insert(member.text).second)
        throw ParseError("node '" + member.text + "' is in two partitions",
                         member.line, member.column);
      refs_.push_back({member.text, member.line, member.column});
      lane.nodes.push_back(member.text);
      if (tok_.kind == Kind::kComma) shift();
    }
    shift();
    if (tok_.kind == Kind::kSemi) shift();
    model.partitions.push_back(std::move(lane));
  }

  void resolve(const ActivityModel&) const {
    for (const Ref& ref : refs_) {
      if (!declared_.count(ref.id))
        throw ParseError("unknown node '" + ref.id + "'", ref.line, ref.column);
    }
  }

  Token shift() {
    Token current = std::move(tok_);
    tok_ = lexer_.next();
    return current;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, tok_.line, tok_.column);
  }

  Token expect(Kind kind, const char* what) {
    if (tok_.kind != kind) fail(std::string("expected ") + what);
    return shift();
  }

  Token expect_ident(const char* what) {
    if (tok_.kind != Kind::kIdent) fail(std::string("expected ") + what);
    return shift();
  }

  Token expect_name(const char* what) {
    Token tok = expect_ident(what);
    if (is_reserved(tok.text))
      throw ParseError("reserved word '" + tok.text + "' used as " + what,
                       tok.line, tok.column);
    return tok;
  }

  void expect_keyword(std::string_view word) {
    if (tok_.kind != Kind::kIdent || tok_.text != word)
      fail("expected '" + std::string(word) + "'");
    shift();
  }

  Lexer lexer_;
  Token tok_;
  std::map<std::string, std::pair<int, int>> declared_;
  std::set<std::string> lane_members_;
  std::vector<Ref> refs_;
};

inline std::string quote(std::string_view text) {
  std::string out = "\"";
  for (char c : text) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace detail

/// Parses DSL source. Throws ParseError on syntax errors, duplicate ids and
/// references to undeclared nodes.
inline ActivityModel parse_activity(std::string_view text) {
  return detail::Parser(text).parse();
}

/// Canonical source text; parse_activity(print_activity(m)) == m for any
/// parsed model.
inline std::string print_activity(const ActivityModel& model) {
  std::ostringstream out;
  out << "activity " << model.name << " {\n";
  for (const ActivityNode& n : model.nodes) {
    out << "  " << to_string(n.kind) << ' ' << n.id;
    if (!n.label.empty()) out << ' ' << detail::quote(n.label);
    out << ";\n";
  }
  for (const ActivityEdge& e : model.edges) {
    out << "  " << e.source << " -> " << e.target;
    if (e.guard) {
      out << " guard " << e.guard->id;
      if (!e.guard->label.empty()) out << ' ' << detail::quote(e.guard->label);
    }
    out << ";\n";
  }
  for (const Partition& p : model.partitions) {
    out << "  partition " << p.name << " {";
    for (std::size_t i = 0; i < p.nodes.size(); ++i)
      out << (i ? ", " : " ") << p.nodes[i];
    out << " }\n";
  }
  out << "}\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Graph index

/// Adjacency view over a model whose ids are unique and whose edges resolve.
class ActivityGraph {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  explicit ActivityGraph(const ActivityModel& model) : model_(&model) {
    const std::size_t n = model.nodes.size();
    out_.resize(n);
    in_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (!index_.emplace(model.nodes[i].id, i).second)
        throw Error("duplicate node id '" + model.nodes[i].id + "'");
    }
    for (std::size_t e = 0; e < model.edges.size(); ++e) {
      const std::size_t s = index(model.edges[e].source);
      const std::size_t t = index(model.edges[e].target);
      if (s == npos || t == npos)
        throw Error("edge '" + model.edges[e].id + "' references an unknown node");
      source_.push_back(s);
      target_.push_back(t);
      out_[s].push_back(e);
      in_[t].push_back(e);
    }
  }

  const ActivityModel& model() const { return *model_; }
  std::size_t size() const { return model_->nodes.size(); }
  const ActivityNode& node(std::size_t i) const { return model_->nodes[i]; }
  NodeKind kind(std::size_t i) const { return model_->nodes[i].kind; }
  const ActivityEdge& edge(std::size_t e) const { return model_->edges[e]; }
  std::size_t edge_count() const { return model_->edges.size(); }

  std::size_t index(std::string_view id) const {
    auto it = index_.find(std::string(id));
    return it == index_.end() ? npos : it->second;
  }

  const std::vector<std::size_t>& out_edges(std::size_t i) const { return out_[i]; }
  const std::vector<std::size_t>& in_edges(std::size_t i) const { return in_[i]; }
  std::size_t source(std::size_t e) const { return source_[e]; }
  std::size_t target(std::size_t e) const { return target_[e]; }

  /// Single successor of a node with exactly one outgoing edge.
  std::size_t successor(std::size_t i) const { return target_[out_[i].front()]; }

  std::size_t find_kind(NodeKind kind) const {
    for (std::size_t i = 0; i < size(); ++i) {
      if (this->kind(i) == kind) return i;
    }
    return npos;
  }

  /// Kahn order; empty if the graph has a cycle.
  std::vector<std::size_t> topological_order() const {
    std::vector<std::size_t> indegree(size());
    for (std::size_t i = 0; i < size(); ++i) indegree[i] = in_[i].size();
    std::vector<std::size_t> order;
    std::vector<std::size_t> ready;
    for (std::size_t i = size(); i-- > 0;) {
      if (indegree[i] == 0) ready.push_back(i);
    }
    while (!ready.empty()) {
      const std::size_t v = ready.back();
      ready.pop_back();
      order.push_back(v);
      for (auto it = out_[v].rbegin(); it != out_[v].rend(); ++it) {
        if (--indegree[target_[*it]] == 0) ready.push_back(target_[*it]);
      }
    }
    if (order.size() != size()) order.clear();
    return order;
  }

 private:
  const ActivityModel* model_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::vector<std::size_t>> in_;
  std::vector<std::size_t> source_;
  std::vector<std::size_t> target_;
};

// ---------------------------------------------------------------------------
// Regions

/// One arm of a region: the nodes strictly between the paired control nodes
/// that are reachable through one outgoing edge of the opening node.
struct RegionBranch {
  std::optional<std::string> guard;
  std::vector<std::string> nodes;

  bool operator==(const RegionBranch&) const = default;
};

struct Region {
  enum class Kind { kConcurrent, kExclusive };

  Kind kind = Kind::kConcurrent;
  std::string open;   ///< fork or decision id
  std::string close;  ///< join or merge id
  std::vector<RegionBranch> branches;
  std::optional<std::size_t> parent;  ///< innermost enclosing region

  bool operator==(const Region&) const = default;
};

/// Regions ordered outermost-first (topological order of the opening node).
struct RegionMap {
  std::vector<Region> regions;

  bool empty() const { return regions.empty(); }

  std::vector<const Region*> of_kind(Region::Kind kind) const {
    std::vector<const Region*> out;
    for (const Region& r : regions) {
      if (r.kind == kind) out.push_back(&r);
    }
    return out;
  }

  const Region* opened_by(std::string_view id) const {
    for (const Region& r : regions) {
      if (r.open == id) return &r;
    }
    return nullptr;
  }
};

namespace detail {

/// Immediate dominators and post-dominators of an acyclic graph with a
/// single source and a single sink.
struct Dominance {
  std::vector<std::size_t> idom;
  std::vector<std::size_t> ipdom;
  std::vector<std::size_t> dom_depth;
  std::vector<std::size_t> pdom_depth;

  bool dominates(std::size_t a, std::size_t b) const {
    return walks_to(idom, a, b);
  }
  bool post_dominates(std::size_t a, std::size_t b) const {
    return walks_to(ipdom, a, b);
  }

  static bool walks_to(const std::vector<std::size_t>& tree, std::size_t a,
                       std::size_t b) {
    while (true) {
      if (a == b) return true;
      if (tree[b] == b || tree[b] == ActivityGraph::npos) return false;
      b = tree[b];
    }
  }
};

inline std::size_t tree_meet(const std::vector<std::size_t>& tree,
                             const std::vector<std::size_t>& depth,
                             std::size_t a, std::size_t b) {
  while (a != b) {
    if (depth[a] >= depth[b]) {
      a = tree[a];
    } else {
      b = tree[b];
    }
  }
  return a;
}

inline Dominance compute_dominance(const ActivityGraph& g,
                                   const std::vector<std::size_t>& topo) {
  const std::size_t n = g.size();
  constexpr std::size_t npos = ActivityGraph::npos;
  Dominance d{std::vector<std::size_t>(n, npos), std::vector<std::size_t>(n, npos),
              std::vector<std::size_t>(n, 0), std::vector<std::size_t>(n, 0)};
  for (std::size_t v : topo) {
    if (g.in_edges(v).empty()) {
      d.idom[v] = v;
      continue;
    }
    std::size_t meet = npos;
    for (std::size_t e : g.in_edges(v)) {
      const std::size_t p = g.source(e);
      meet = meet == npos ? p : tree_meet(d.idom, d.dom_depth, meet, p);
    }
    d.idom[v] = meet;
    d.dom_depth[v] = d.dom_depth[meet] + 1;
  }
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    const std::size_t v = *it;
    if (g.out_edges(v).empty()) {
      d.ipdom[v] = v;
      continue;
    }
    std::size_t meet = npos;
    for (std::size_t e : g.out_edges(v)) {
      const std::size_t s = g.target(e);
      meet = meet == npos ? s : tree_meet(d.ipdom, d.pdom_depth, meet, s);
    }
    d.ipdom[v] = meet;
    d.pdom_depth[v] = d.pdom_depth[meet] + 1;
  }
  return d;
}

/// Nodes reachable from `start` without passing `stop`, in topological order.
inline std::vector<std::size_t> reach_before(const ActivityGraph& g,
                                             const std::vector<std::size_t>& rank,
                                             std::size_t start, std::size_t stop) {
  std::vector<std::size_t> out;
  if (start == stop) return out;
  std::vector<bool> seen(g.size(), false);
  std::vector<std::size_t> stack{start};
  seen[start] = true;
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    out.push_back(v);
    for (std::size_t e : g.out_edges(v)) {
      const std::size_t t = g.target(e);
      if (t != stop && !seen[t]) {
        seen[t] = true;
        stack.push_back(t);
      }
    }
  }
  std::sort(out.begin(), out.end(),
            [&rank](std::size_t a, std::size_t b) { return rank[a] < rank[b]; });
  return out;
}

/// True if some path from `start` reaches `stop` without executing an
/// action. A fork always leads into actions once its branches are
/// non-empty, so it counts as one.
inline bool has_silent_path(const ActivityGraph& g, std::size_t start, std::size_t stop) {
  std::vector<bool> seen(g.size(), false);
  std::vector<std::size_t> stack{start};
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    if (v == stop) return true;
    if (seen[v]) continue;
    seen[v] = true;
    const NodeKind k = g.kind(v);
    if (k == NodeKind::kAction || k == NodeKind::kFork || k == NodeKind::kFinal)
      continue;
    for (std::size_t e : g.out_edges(v)) stack.push_back(g.target(e));
  }
  return false;
}

/// Region analysis of a model that already satisfies the basic metamodel
/// rules (one initial, one final, arities, acyclic, connected). Violations
/// are appended to `report`.
inline RegionMap analyze_structure(const ActivityGraph& g, ValidationReport& report) {
  RegionMap map;
  const std::vector<std::size_t> topo = g.topological_order();
  std::vector<std::size_t> rank(g.size());
  for (std::size_t i = 0; i < topo.size(); ++i) rank[topo[i]] = i;
  const Dominance dom = compute_dominance(g, topo);

  auto id = [&g](std::size_t v) { return g.node(v).id; };

  std::vector<std::vector<std::size_t>> interior(g.size());
  std::vector<bool> sese(g.size(), false);
  std::map<std::size_t, std::vector<std::size_t>> forks_by_join;

  for (std::size_t v : topo) {
    const NodeKind k = g.kind(v);
    if (k != NodeKind::kFork && k != NodeKind::kDecision) continue;
    const bool is_fork = k == NodeKind::kFork;
    const std::size_t close = dom.ipdom[v];
    const NodeKind expected = is_fork ? NodeKind::kJoin : NodeKind::kMerge;
    if (g.kind(close) != expected) {
      report.add(is_fork ? "unpaired-fork" : "unpaired-decision",
                 std::string(is_fork ? "unpaired fork" : "unpaired decision") +
                     ": branches of '" + id(v) + "' first meet at " +
                     std::string(to_string(g.kind(close))) + " '" + id(close) + "'",
                 id(v));
      continue;
    }
    interior[v] = reach_before(g, rank, v, close);
    interior[v].erase(interior[v].begin());  // the opening node itself
    bool single_entry = true;
    for (std::size_t u : interior[v]) {
      if (!dom.dominates(v, u) || !dom.post_dominates(close, u)) single_entry = false;
    }
    sese[v] = single_entry;
    for (std::size_t e : g.out_edges(v)) {
      if (has_silent_path(g, g.target(e), close)) {
        report.add("empty-branch",
                   "a branch of '" + id(v) + "' reaches '" + id(close) +
                       "' without executing an action",
                   g.edge(e).id);
      }
    }
    if (is_fork) {
      if (!single_entry || g.in_edges(close).size() != g.out_edges(v).size()) {
        report.add("ill-structured",
                   "fork '" + id(v) + "' and join '" + id(close) +
                       "' do not enclose a single-entry single-exit region",
                   id(v));
      }
      forks_by_join[close].push_back(v);
    }
  }

  for (std::size_t v : topo) {
    if (g.kind(v) != NodeKind::kJoin) continue;
    auto it = forks_by_join.find(v);
    if (it == forks_by_join.end()) {
      report.add("unpaired-join", "unpaired join: '" + id(v) + "' closes no fork", id(v));
    } else if (it->second.size() > 1) {
      report.add("shared-join", "join '" + id(v) + "' closes more than one fork", id(v));
    }
  }

  // Exclusive hammocks: a decision whose region is single-entry/single-exit
  // may contain further decisions and merges in any acyclic arrangement, as
  // long as every decision brings its own merge.
  std::vector<bool> covered(g.size(), false);
  for (std::size_t v : topo) {
    if (g.kind(v) != NodeKind::kDecision || !sese[v] || covered[v]) continue;
    const std::size_t close = dom.ipdom[v];
    std::size_t decisions = 1;
    std::size_t merges = 1;
    covered[v] = true;
    covered[close] = true;
    for (std::size_t u : interior[v]) {
      covered[u] = true;
      if (g.kind(u) == NodeKind::kDecision) ++decisions;
      if (g.kind(u) == NodeKind::kMerge) ++merges;
    }
    if (merges < decisions) {
      report.add("shared-merge",
                 "shared merge: the " + std::to_string(decisions) +
                     " decisions of region '" + id(v) + "' are closed by only " +
                     std::to_string(merges) + " merge node(s)",
                 id(close));
    } else if (merges > decisions) {
      report.add("unpaired-merge",
                 "unpaired merge: region '" + id(v) + "' has " +
                     std::to_string(merges) + " merges for " +
                     std::to_string(decisions) + " decisions",
                 id(close));
    }
  }
  for (std::size_t v : topo) {
    const NodeKind k = g.kind(v);
    if (k == NodeKind::kDecision && !covered[v] &&
        g.kind(dom.ipdom[v]) == NodeKind::kMerge) {
      report.add("ill-structured",
                 "decision '" + id(v) + "' is not enclosed by a single-entry "
                 "single-exit region",
                 id(v));
    }
    if (k == NodeKind::kMerge && !covered[v]) {
      report.add("unpaired-merge", "unpaired merge: '" + id(v) + "' closes no decision",
                 id(v));
    }
  }

  if (!report.ok()) return map;

  std::map<std::size_t, std::size_t> region_of_open;
  for (std::size_t v : topo) {
    const NodeKind k = g.kind(v);
    if (k != NodeKind::kFork && k != NodeKind::kDecision) continue;
    Region region;
    region.kind = k == NodeKind::kFork ? Region::Kind::kConcurrent : Region::Kind::kExclusive;
    region.open = id(v);
    region.close = id(dom.ipdom[v]);
    for (std::size_t e : g.out_edges(v)) {
      RegionBranch branch;
      if (g.edge(e).guard) branch.guard = g.edge(e).guard->id;
      for (std::size_t u : reach_before(g, rank, g.target(e), dom.ipdom[v]))
        branch.nodes.push_back(id(u));
      region.branches.push_back(std::move(branch));
    }
    // Innermost enclosing region: the one with the smallest interior that
    // contains this opening node.
    std::size_t best = ActivityGraph::npos;
    for (const auto& [open, index] : region_of_open) {
      const auto& inner = interior[open];
      if (std::find(inner.begin(), inner.end(), v) == inner.end()) continue;
      if (best == ActivityGraph::npos ||
          inner.size() < interior[g.index(map.regions[best].open)].size())
        best = index;
    }
    if (best != ActivityGraph::npos) region.parent = best;
    region_of_open[v] = map.regions.size();
    map.regions.push_back(std::move(region));
  }
  return map;
}

}  // namespace detail

/// Checks the reduced activity metamodel multiplicities plus the structural
/// assumptions of the transformation: acyclic, connected from initial to
/// final, and control nodes paired into regions.
inline ValidationReport validate_ram(const ActivityModel& model) {
  ValidationReport report;

  std::map<std::string, std::size_t> seen;
  for (const ActivityNode& n : model.nodes) {
    if (++seen[n.id] == 2) report.add("duplicate-id", "duplicate node id '" + n.id + "'", n.id);
  }
  std::set<std::string> edge_ids;
  bool dangling = false;
  for (const ActivityEdge& e : model.edges) {
    if (!edge_ids.insert(e.id).second)
      report.add("duplicate-id", "duplicate edge id '" + e.id + "'", e.id);
    for (const std::string* end : {&e.source, &e.target}) {
      if (!seen.count(*end)) {
        report.add("dangling-edge",
                   "edge '" + e.id + "' references unknown node '" + *end + "'", e.id);
        dangling = true;
      }
    }
  }
  if (!report.ok() && (dangling || report.has("duplicate-id"))) return report;

  const ActivityGraph g(model);
  std::size_t initials = 0;
  std::size_t finals = 0;
  std::map<std::string, std::string> fault_names;
  for (std::size_t v = 0; v < g.size(); ++v) {
    const ActivityNode& n = g.node(v);
    const std::size_t in = g.in_edges(v).size();
    const std::size_t out = g.out_edges(v).size();
    auto arity = [&](bool ok, const char* rule) {
      if (ok) return;
      report.add(n.kind == NodeKind::kAction ? "action-arity" : "node-arity",
                 std::string(to_string(n.kind)) + " '" + n.id + "' must have " + rule +
                     " (has " + std::to_string(in) + " in / " + std::to_string(out) +
                     " out)",
                 n.id);
    };
    switch (n.kind) {
      case NodeKind::kInitial: ++initials; arity(in == 0 && out == 1, "0 in / 1 out"); break;
      case NodeKind::kFinal: ++finals; arity(in == 1 && out == 0, "1 in / 0 out"); break;
      case NodeKind::kAction: arity(in == 1 && out == 1, "1 in / 1 out"); break;
      case NodeKind::kFork:
      case NodeKind::kDecision: arity(in == 1 && out >= 2, "1 in / at least 2 out"); break;
      case NodeKind::kJoin:
      case NodeKind::kMerge: arity(in >= 2 && out == 1, "at least 2 in / 1 out"); break;
    }
    if (n.kind == NodeKind::kAction) {
      auto [it, fresh] = fault_names.emplace(fault_name(n.id), n.id);
      if (!fresh)
        report.add("fault-name-collision",
                   "actions '" + it->second + "' and '" + n.id +
                       "' map to the same fault event " + it->first,
                   n.id);
    }
  }
  if (initials != 1)
    report.add("initial-count",
               "expected exactly one initial node, found " + std::to_string(initials),
               model.name);
  if (finals != 1)
    report.add("final-count",
               "expected exactly one final node, found " + std::to_string(finals),
               model.name);

  std::map<std::string, std::string> guard_owner;
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    const ActivityEdge& edge = g.edge(e);
    const bool from_decision = g.kind(g.source(e)) == NodeKind::kDecision;
    if (from_decision && !edge.guard) {
      report.add("guard-missing",
                 "edge '" + edge.id + "' leaves decision '" + edge.source +
                     "' without a guard",
                 edge.id);
    } else if (!from_decision && edge.guard) {
      report.add("guard-unexpected",
                 "edge '" + edge.id + "' carries guard '" + edge.guard->id +
                     "' but does not leave a decision",
                 edge.id);
    }
    if (edge.guard) {
      auto [it, fresh] = guard_owner.emplace(edge.guard->id, edge.id);
      if (!fresh)
        report.add("guard-duplicate",
                   "guard id '" + edge.guard->id + "' is used on edges '" + it->second +
                       "' and '" + edge.id + "'",
                   edge.id);
    }
  }

  const std::vector<std::size_t> topo = g.topological_order();
  if (topo.empty() && g.size() > 0) report.add("cycle", "cycle detected", model.name);

  auto sweep = [&g](NodeKind from, bool forward) {
    std::vector<bool> mark(g.size(), false);
    std::vector<std::size_t> stack;
    for (std::size_t v = 0; v < g.size(); ++v) {
      if (g.kind(v) == from) {
        mark[v] = true;
        stack.push_back(v);
      }
    }
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      for (std::size_t e : forward ? g.out_edges(v) : g.in_edges(v)) {
        const std::size_t w = forward ? g.target(e) : g.source(e);
        if (!mark[w]) {
          mark[w] = true;
          stack.push_back(w);
        }
      }
    }
    return mark;
  };
  const std::vector<bool> reached = sweep(NodeKind::kInitial, true);
  const std::vector<bool> finishing = sweep(NodeKind::kFinal, false);
  for (std::size_t v = 0; v < g.size(); ++v) {
    if (!reached[v])
      report.add("unreachable", "node '" + g.node(v).id + "' is not reachable from the initial node",
                 g.node(v).id);
    else if (!finishing[v])
      report.add("dead-end", "node '" + g.node(v).id + "' cannot reach the final node",
                 g.node(v).id);
  }

  if (report.ok()) detail::analyze_structure(g, report);
  return report;
}

/// Pairs every fork with its join and every decision with its merge.
/// Throws StructureError when the model is not well structured.
inline RegionMap pair_control_nodes(const ActivityModel& model) {
  ValidationReport report = validate_ram(model);
  if (!report.ok()) {
    const Violation& first = report.violations.front();
    throw StructureError("ill-structured region: " + first.message, first.element_id);
  }
  const ActivityGraph g(model);
  return detail::analyze_structure(g, report);
}

}  // namespace ftforge
