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

#include <gtest/gtest.h>

#include "ftforge/activity.hpp"
#include "support/random_models.hpp"

namespace ftforge {
namespace {

using testing::load_fixture;

/// Validation report codes, in report order.
std::vector<std::string> codes(const ValidationReport& r) {
  std::vector<std::string> out;
  for (const Violation& v : r.violations) out.push_back(v.code);
  return out;
}

ValidationReport check(std::string_view source) { return validate_ram(parse_activity(source)); }

TEST(Parse, RmsFixture) {
  const ActivityModel m = load_fixture("rms.act");
  EXPECT_EQ(m.name, "RMS");
  EXPECT_EQ(m.nodes.size(), 16u);
  EXPECT_EQ(m.edges.size(), 18u);
  EXPECT_EQ(m.actions().size(), 10u);
  ASSERT_NE(m.find("A7"), nullptr);
  EXPECT_EQ(m.find("A7")->label, "implement Fixed-time Mode");
  EXPECT_EQ(m.find("D1")->kind, NodeKind::kDecision);
  EXPECT_EQ(m.edges[10].id, "e11");
  ASSERT_TRUE(m.edges[10].guard);
  EXPECT_EQ(m.edges[10].guard->id, "c7");
  EXPECT_EQ(m.edges[10].guard->label, "Fixed-time Mode selected");
  EXPECT_EQ(m.lane_of("A4"), "TCC");
  EXPECT_TRUE(m.is_external("A4"));
  EXPECT_FALSE(m.is_external("A5"));
  EXPECT_FALSE(m.is_external("F1"));
}

TEST(Parse, CommentsEscapesAndOptionalSeparators) {
  const ActivityModel m = parse_activity(
      "# leading comment\n"
      "activity X { initial i; action A1 \"say \\\"hi\\\"\"; final f;  # trailing\n"
      "  i -> A1; A1 -> f; partition P { A1 }; }");
  EXPECT_EQ(m.find("A1")->label, "say \"hi\"");
  ASSERT_EQ(m.partitions.size(), 1u);
  EXPECT_EQ(m.partitions[0].nodes, std::vector<std::string>{"A1"});
}

TEST(Parse, ErrorsCarryPositions) {
  auto position = [](std::string_view src) {
    try {
      parse_activity(src);
    } catch (const ParseError& e) {
      return std::pair{e.line(), e.column()};
    }
    return std::pair{0, 0};
  };
  EXPECT_EQ(position("activity X {\n  action A1\n}"), (std::pair{3, 1}));
  EXPECT_EQ(position("activity X { action A1; action A1; }"), (std::pair{1, 32}));
  EXPECT_EQ(position("activity X {\n  initial i;\n  i -> Q;\n}"), (std::pair{3, 8}));
  EXPECT_EQ(position("activity X { action guard; }"), (std::pair{1, 21}));
  EXPECT_EQ(position("activity X { action A1 \"open\n\"; }"), (std::pair{1, 24}));
  EXPECT_EQ(position("activity X { action A1; } extra"), (std::pair{1, 27}));
  EXPECT_EQ(position("activity X { action A1 @; }"), (std::pair{1, 24}));
  EXPECT_EQ(position("activity X { action A1; partition P { A1 } partition Q { A1 } }"), (std::pair{1, 58}));
  EXPECT_EQ(position("activity X { action A1;"), (std::pair{1, 24}));
}

TEST(Parse, ErrorMessageNamesTheProblem) {
  try {
    parse_activity("activity X { initial i; i -> Nope; }");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_STREQ(e.what(), "1:30: unknown node 'Nope'");
  }
}

TEST(Print, RoundTripsFixtures) {
  for (const std::string& name : testing::positive_fixtures()) {
    const ActivityModel m = load_fixture(name);
    const std::string text = print_activity(m);
    EXPECT_EQ(parse_activity(text), m) << name;
    EXPECT_EQ(print_activity(parse_activity(text)), text) << name;
  }
}

TEST(Print, RoundTripsRandomModels) {
  testing::RandomModelGenerator gen(7);
  for (int k = 0; k < 50; ++k) {
    const ActivityModel m = gen.next();
    EXPECT_EQ(parse_activity(print_activity(m)), m);
  }
}

TEST(Print, CanonicalForm) {
  const ActivityModel m = parse_activity(
      "activity T { initial i; decision D \"pick\"; action A1; action A2; merge M; final f;"
      " i -> D; D -> A1 guard g1 \"yes\"; D -> A2 guard g2; A1 -> M; A2 -> M; M -> f;"
      " partition L { A1, A2 } }");
  EXPECT_EQ(print_activity(m),
            "activity T {\n"
            "  initial i;\n"
            "  decision D \"pick\";\n"
            "  action A1;\n"
            "  action A2;\n"
            "  merge M;\n"
            "  final f;\n"
            "  i -> D;\n"
            "  D -> A1 guard g1 \"yes\";\n"
            "  D -> A2 guard g2;\n"
            "  A1 -> M;\n"
            "  A2 -> M;\n"
            "  M -> f;\n"
            "  partition L { A1, A2 }\n"
            "}\n");
}

TEST(Graph, TopologicalOrderAndAdjacency) {
  const ActivityModel m = load_fixture("rms.act");
  const ActivityGraph g(m);
  const auto order = g.topological_order();
  ASSERT_EQ(order.size(), m.nodes.size());
  std::vector<std::size_t> rank(g.size());
  for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = i;
  for (std::size_t e = 0; e < g.edge_count(); ++e) EXPECT_LT(rank[g.source(e)], rank[g.target(e)]);
  EXPECT_EQ(g.out_edges(g.index("F1")).size(), 2u);
  EXPECT_EQ(g.in_edges(g.index("M1")).size(), 3u);
  EXPECT_EQ(g.node(g.successor(g.index("A3"))).id, "A4");
  EXPECT_EQ(g.node(g.find_kind(NodeKind::kFinal)).id, "done");
}

TEST(Validate, AcceptsPositiveFixtures) {
  for (const std::string& name : testing::positive_fixtures())
    EXPECT_TRUE(validate_ram(load_fixture(name)).ok()) << name << ": "
                                                       << validate_ram(load_fixture(name)).to_json().dump();
}

TEST(Validate, AcceptsRandomWellStructuredModels) {
  testing::RandomModelGenerator gen(11);
  for (int k = 0; k < 200; ++k) {
    const std::string src = gen.next_source();
    const ValidationReport r = validate_ram(parse_activity(src));
    EXPECT_TRUE(r.ok()) << src << r.to_json().dump();
  }
}

TEST(Validate, UnpairedFork) {
  const auto r = check(
      "activity X { initial i; fork F; action A1; action A2; merge M; final f;"
      " i -> F; F -> A1; F -> A2; A1 -> M; A2 -> M; M -> f; }");
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.violations[0].code, "unpaired-fork");
  EXPECT_EQ(r.violations[0].element_id, "F");
  EXPECT_TRUE(r.has("unpaired-merge"));
}

TEST(Validate, UnpairedDecision) {
  const auto r = check(
      "activity X { initial i; decision D; action A1; action A2; join J; final f;"
      " i -> D; D -> A1 guard c1; D -> A2 guard c2; A1 -> J; A2 -> J; J -> f; }");
  EXPECT_TRUE(r.has("unpaired-decision"));
  EXPECT_TRUE(r.has("unpaired-join"));
}

TEST(Validate, GuardRules) {
  const auto missing = check(
      "activity X { initial i; decision D; action A1; action A2; merge M; final f;"
      " i -> D; D -> A1 guard c1; D -> A2; A1 -> M; A2 -> M; M -> f; }");
  EXPECT_EQ(codes(missing), std::vector<std::string>{"guard-missing"});
  EXPECT_EQ(missing.violations[0].element_id, "e3");

  const auto unexpected = check("activity X { initial i; action A1; final f; i -> A1 guard g; A1 -> f; }");
  EXPECT_EQ(codes(unexpected), std::vector<std::string>{"guard-unexpected"});

  const auto duplicate = check(
      "activity X { initial i; decision D; action A1; action A2; merge M; final f;"
      " i -> D; D -> A1 guard c; D -> A2 guard c; A1 -> M; A2 -> M; M -> f; }");
  EXPECT_EQ(codes(duplicate), std::vector<std::string>{"guard-duplicate"});
}

TEST(Validate, Cycle) {
  const auto r = check(
      "activity X { initial i; merge M; action A1; decision D; action A2; final f;"
      " i -> M; M -> A1; A1 -> D; D -> M guard again; D -> A2 guard done; A2 -> f; }");
  EXPECT_TRUE(r.has("cycle"));
  EXPECT_FALSE(r.has("unreachable"));
}

TEST(Validate, InitialAndFinalCounts) {
  const auto two = check(
      "activity X { initial i; initial j; action A1; action A2; join J; final f;"
      " i -> A1; j -> A2; A1 -> J; A2 -> J; J -> f; }");
  EXPECT_TRUE(two.has("initial-count"));
  const auto none = check("activity X { action A1; final f; A1 -> f; }");
  EXPECT_TRUE(none.has("initial-count"));
  EXPECT_TRUE(none.has("action-arity"));
  const auto no_final = check("activity X { initial i; action A1; i -> A1; }");
  EXPECT_TRUE(no_final.has("final-count"));
}

TEST(Validate, DanglingEdgeAndDuplicates) {
  ActivityModel m = load_fixture("series.act");
  m.edges.push_back({"e9", "Aj", "ghost", std::nullopt});
  const auto dangling = validate_ram(m);
  EXPECT_EQ(codes(dangling), std::vector<std::string>{"dangling-edge"});
  EXPECT_EQ(dangling.violations[0].element_id, "e9");

  ActivityModel dup = load_fixture("series.act");
  dup.nodes.push_back(dup.nodes[1]);
  EXPECT_EQ(codes(validate_ram(dup)), std::vector<std::string>{"duplicate-id"});
}

TEST(Validate, Arity) {
  const auto multi_in = check(
      "activity X { initial i; fork F; action A1; action A2; action A3; final f;"
      " i -> F; F -> A1; F -> A2; A1 -> A3; A2 -> A3; A3 -> f; }");
  EXPECT_TRUE(multi_in.has("action-arity"));
  EXPECT_EQ(multi_in.violations[0].element_id, "A3");
  const auto thin_fork = check("activity X { initial i; fork F; action A1; final f; i -> F; F -> A1; A1 -> f; }");
  EXPECT_TRUE(thin_fork.has("node-arity"));
}

TEST(Validate, UnreachableAndDeadEnd) {
  const auto unreachable = check(
      "activity X { initial i; action A1; action A2; action A3; merge M; final f;"
      " i -> A1; A1 -> M; A3 -> A2; A2 -> M; M -> f; }");
  EXPECT_TRUE(unreachable.has("unreachable"));
  const auto dead = check(
      "activity X { initial i; fork F; action A1; action A2; final f;"
      " i -> F; F -> A1; F -> A2; A1 -> f; }");
  EXPECT_TRUE(dead.has("dead-end"));
}

TEST(Validate, FaultNameCollision) {
  const auto r = check("activity X { initial i; action Ab; action b; final f; i -> Ab; Ab -> b; b -> f; }");
  EXPECT_EQ(codes(r), std::vector<std::string>{"fault-name-collision"});
}

TEST(Validate, EmptyBranch) {
  const auto r = check(
      "activity X { initial i; decision D; action A1; merge M; final f;"
      " i -> D; D -> A1 guard c1; D -> M guard c2; A1 -> M; M -> f; }");
  EXPECT_EQ(codes(r), std::vector<std::string>{"empty-branch"});
}

TEST(Validate, SharedMerge) {
  const auto r = check(
      "activity X { initial i; decision D1; decision D2; action A1; action A2; action A3; merge M; final f;"
      " i -> D1; D1 -> A1 guard c1; D1 -> D2 guard c2; D2 -> A2 guard c3; D2 -> A3 guard c4;"
      " A1 -> M; A2 -> M; A3 -> M; M -> f; }");
  EXPECT_EQ(codes(r), std::vector<std::string>{"shared-merge"});
  EXPECT_EQ(r.violations[0].element_id, "M");
}

TEST(Validate, SharedJoin) {
  const auto r = check(
      "activity X { initial i; fork F1; fork F2; action A1; action A2; action A3; join J; final f;"
      " i -> F1; F1 -> A1; F1 -> F2; F2 -> A2; F2 -> A3; A1 -> J; A2 -> J; A3 -> J; J -> f; }");
  EXPECT_FALSE(r.ok());
}

TEST(Validate, DecisionNestedInForkBranch) {
  const auto r = check(
      "activity X { initial i; fork F; action A1; action A2; join J; final f;"
      " decision D; action A3; merge M;"
      " i -> F; F -> A1; F -> D; D -> A2 guard c1; D -> A3 guard c2; A2 -> M; A3 -> M; M -> J;"
      " A1 -> J; J -> f; }");
  EXPECT_TRUE(r.ok()) << r.to_json().dump();
}

TEST(Regions, RmsPairs) {
  const RegionMap map = pair_control_nodes(load_fixture("rms.act"));
  ASSERT_EQ(map.regions.size(), 2u);
  const Region* fork = map.opened_by("F1");
  ASSERT_NE(fork, nullptr);
  EXPECT_EQ(fork->kind, Region::Kind::kConcurrent);
  EXPECT_EQ(fork->close, "J1");
  ASSERT_EQ(fork->branches.size(), 2u);
  EXPECT_EQ(fork->branches[0].nodes, std::vector<std::string>{"A2"});
  EXPECT_EQ(fork->branches[1].nodes, (std::vector<std::string>{"A3", "A4", "A5"}));
  const Region* dec = map.opened_by("D1");
  ASSERT_NE(dec, nullptr);
  EXPECT_EQ(dec->close, "M1");
  ASSERT_EQ(dec->branches.size(), 3u);
  EXPECT_EQ(dec->branches[2].guard, "c9");
  EXPECT_EQ(map.of_kind(Region::Kind::kExclusive).size(), 1u);
}

TEST(Regions, NestedHammock) {
  const RegionMap map = pair_control_nodes(load_fixture("nested.act"));
  const Region* outer = map.opened_by("D1");
  const Region* inner = map.opened_by("D2");
  ASSERT_NE(outer, nullptr);
  ASSERT_NE(inner, nullptr);
  // The second arm of D2 enters M1, so both decisions close at M2.
  EXPECT_EQ(outer->close, "M2");
  EXPECT_EQ(inner->close, "M2");
  ASSERT_TRUE(inner->parent);
  EXPECT_EQ(map.regions[*inner->parent].open, "D1");
}

TEST(Regions, IllStructuredThrows) {
  const ActivityModel m = parse_activity(
      "activity X { initial i; fork F; action A1; action A2; merge M; final f;"
      " i -> F; F -> A1; F -> A2; A1 -> M; A2 -> M; M -> f; }");
  try {
    pair_control_nodes(m);
    FAIL();
  } catch (const StructureError& e) {
    EXPECT_EQ(e.element_id(), "F");
    EXPECT_NE(std::string(e.what()).find("ill-structured region"), std::string::npos);
  }
}

TEST(Common, NaturalOrderAndNames) {
  std::vector<std::string> ids{"a10", "a9", "c7", "a{7,8,9}", "a1", "a_s"};
  natural_sort(ids);
  EXPECT_EQ(ids, (std::vector<std::string>{"a1", "a9", "a10", "a_s", "a{7,8,9}", "c7"}));
  EXPECT_EQ(fault_name("A12"), "a12");
  EXPECT_EQ(fault_name("Ai"), "ai");
  EXPECT_EQ(proposition_name("A3"), "p3");
  EXPECT_EQ(action_index("Am"), "m");
}

}  // namespace
}  // namespace ftforge
