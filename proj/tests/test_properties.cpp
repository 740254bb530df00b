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

/// Cross-checks between the analytic side and the execution oracle on
/// seeded random inputs.

#include <gtest/gtest.h>

#include "ftforge/ftforge.hpp"
#include "support/random_models.hpp"

namespace ftforge {
namespace {

using testing::RandomModelGenerator;
using testing::RandomModelOptions;

TEST(Equivalence, NestedPaperModeIsExact) {
  const ActivityModel m = testing::load_fixture("nested.act");
  const FpcGraph fpc = build_fpc(m);
  RandomModelGenerator gen(101);
  for (int k = 0; k < 100; ++k) {
    const ProbabilityAssignment p = gen.assignment(m);
    EXPECT_NEAR(top_probability_paper(fpc, p), enumerate_exact(m, p), 1e-12) << p.to_json().dump();
  }
}

TEST(Equivalence, ExclusiveOnlyPaperModeIsExact) {
  RandomModelGenerator gen(103, RandomModelOptions{10, 2, false, true});
  for (int k = 0; k < 100; ++k) {
    const std::string src = gen.next_source();
    SCOPED_TRACE(src);
    const ActivityModel m = parse_activity(src);
    const ProbabilityAssignment p = gen.assignment(m);
    EXPECT_NEAR(top_probability_paper(build_fpc(m), p), enumerate_exact(m, p), 1e-12);
  }
}

TEST(Equivalence, ExactMatchesOracle) {
  RandomModelGenerator gen(107);
  for (int k = 0; k < 200; ++k) {
    const std::string src = gen.next_source();
    SCOPED_TRACE(src);
    const ActivityModel m = parse_activity(src);
    const ProbabilityAssignment p = gen.assignment(m);
    EXPECT_NEAR(top_probability_exact(m, p), enumerate_exact(m, p), 1e-12);
  }
}

TEST(Equivalence, ExactMatchesOracleAtExtremes) {
  RandomModelGenerator gen(109);
  std::bernoulli_distribution coin(0.3);
  for (int k = 0; k < 100; ++k) {
    const ActivityModel m = gen.next();
    ProbabilityAssignment p = gen.assignment(m);
    for (auto& [a, v] : p.faults) {
      if (coin(gen.rng())) v = coin(gen.rng()) ? 1.0 : 0.0;
    }
    EXPECT_NEAR(top_probability_exact(m, p), enumerate_exact(m, p), 1e-12) << print_activity(m);
  }
}

TEST(Equivalence, MonteCarloWithinFourStandardErrors) {
  RandomModelGenerator gen(113);
  int within = 0;
  const int models = 20;
  for (int k = 0; k < models; ++k) {
    const ActivityModel m = gen.next();
    const ProbabilityAssignment p = gen.assignment(m);
    const MonteCarloResult r = monte_carlo(m, p, 1000000, 1000 + static_cast<std::uint64_t>(k));
    within += std::abs(r.estimate - enumerate_exact(m, p)) <= 4 * r.standard_error;
  }
  EXPECT_GE(within, 19);
}

TEST(Determinism, TransformIsStable) {
  RandomModelGenerator gen(127);
  for (int k = 0; k < 50; ++k) {
    const ActivityModel m = gen.next();
    const Transformation a = transform(m);
    const Transformation b = transform(parse_activity(print_activity(m)));
    EXPECT_EQ(a.tree, b.tree);
    EXPECT_EQ(export_tree(a.tree, "json"), export_tree(b.tree, "json"));
    EXPECT_EQ(to_json(a.fpc), to_json(b.fpc));
    EXPECT_EQ(a.trace.to_json(), b.trace.to_json());
  }
}

TEST(Monotonicity, MoreFaultProbabilityNeverHelps) {
  RandomModelGenerator gen(131);
  for (int k = 0; k < 50; ++k) {
    const ActivityModel m = gen.next();
    ProbabilityAssignment p = gen.assignment(m);
    const double before = top_probability_exact(m, p);
    for (auto& [a, v] : p.faults) v = std::min(1.0, v * 1.5);
    EXPECT_GE(top_probability_exact(m, p) + 1e-15, before);
  }
}

TEST(Paper, ConcurrentBranchesAddWithoutOverlap) {
  // Paper mode sums branch failures, so both branches failing together is
  // counted twice: 0.2 + 0.2 against 1 - 0.8 * 0.8.
  const ActivityModel m = testing::load_fixture("bifurcation.act");
  ProbabilityAssignment p;
  p.faults = {{"A0", 0.0}, {"Ai", 0.2}, {"Aj", 0.2}, {"Ak", 0.0}};
  EXPECT_NEAR(top_probability_paper(build_fpc(m), p), 0.4, 1e-15);
  EXPECT_NEAR(enumerate_exact(m, p), 0.36, 1e-15);
}

}  // namespace
}  // namespace ftforge
