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

/// @file acceptance.cpp
/// End-to-end acceptance run: one PASS/FAIL line per criterion, nonzero
/// exit when any fails. Diagnostics go to standard error.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>

#include "ftforge/ftforge.hpp"
#include "support/random_models.hpp"

namespace {

using namespace ftforge;
using ftforge::testing::load_fixture;
using ftforge::testing::load_probs;
using ftforge::testing::RandomModelGenerator;
using Clock = std::chrono::steady_clock;

/// Collects the failed checks of one criterion.
struct Check {
  std::vector<std::string> failures;

  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  template <typename T>
  void equal(const T& actual, const T& expected, const std::string& what) {
    if (!(actual == expected)) {
      std::ostringstream s;
      s << what << ": got '" << actual << "', expected '" << expected << "'";
      failures.push_back(s.str());
    }
  }
  void near(double actual, double expected, double tol, const std::string& what) {
    if (!(std::abs(actual - expected) <= tol)) {
      std::ostringstream s;
      s << std::setprecision(17) << what << ": got " << actual << ", expected " << expected << " +/- " << tol;
      failures.push_back(s.str());
    }
  }
};

std::string joined(const std::vector<std::string>& parts) {
  std::string out;
  for (const std::string& p : parts) out += (out.empty() ? "" : "; ") + p;
  return out;
}

std::string logical_text(const ActivityModel& m) {
  std::vector<std::string> out;
  for (const Formula& f : derive_logical_model(m).implications) out.push_back(to_string(f));
  return joined(out);
}

std::string contrapositive_text(const ActivityModel& m) {
  std::vector<std::string> out;
  for (const Formula& f : derive_logical_model(m).implications) out.push_back(to_string(contrapositive(f)));
  return joined(out);
}

std::string cut_set_text(const std::vector<CutSet>& sets) {
  std::vector<std::string> out;
  for (const CutSet& c : sets) out.push_back(c.to_string());
  return joined(out);
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void criterion_1(Check& c) {
  struct Row {
    const char* fixture;
    const char* logical;
    const char* contrapositive;
    const char* fpc;
  };
  const Row rows[] = {
      {"rules/a_series.act", "p2 -> p1", "!p1 -> !p2", "a1 -> a2"},
      {"rules/b_fork.act", "p2 | p3 -> p1", "!p1 -> !p2 & !p3", "a1 -> a2; a1 -> a3"},
      {"rules/c_join.act", "p4 -> p2 & p3", "!p2 | !p3 -> !p4", "a2 -> a4; a3 -> a4"},
      {"rules/d_decision.act", "p2 | p3 -> p1", "!p1 -> !p2 & !p3", "a1 -> a{2,3}"},
      {"rules/e_merge.act", "p4 -> p2 | p3", "!p2 & !p3 -> !p4", "a{2,3} -> a4"},
  };
  const auto start = Clock::now();
  for (const Row& r : rows) {
    const ActivityModel m = load_fixture(r.fixture);
    const Transformation t = transform(m);
    c.equal(logical_text(m), std::string(r.logical), std::string(r.fixture) + " logical model");
    c.equal(contrapositive_text(m), std::string(r.contrapositive), std::string(r.fixture) + " contrapositive");
    c.equal(edge_list(t.fpc), std::string(r.fpc), std::string(r.fixture) + " chain");
    c.equal(to_cmf(t.logical, t.regions).to_string(), std::string(r.fpc), std::string(r.fixture) + " CMF");
  }
  c.expect(seconds_since(start) < 1.0, "runtime over 1 s");
}

void criterion_2(Check& c) {
  const auto start = Clock::now();
  const ActivityModel m = load_fixture("rms.act");
  const Transformation t = transform(m);
  c.equal(edge_list(t.fpc),
          std::string("a1 -> a2; a1 -> a3; a3 -> a4; a4 -> a5; a2 -> a6; a5 -> a6; a6 -> a{7,8,9}; a{7,8,9} -> a10"),
          "chain");
  std::vector<std::string> events = t.fpc.event_ids();
  natural_sort(events);
  c.equal(joined(events), std::string("a1; a2; a3; a4; a5; a6; a10; a{7,8,9}"), "chain events");
  for (const FpcEdge& e : t.fpc.edges) {
    const bool split = e.source == "a1" && (e.target == "a2" || e.target == "a3");
    const bool converge = e.target == "a6";
    if (split || converge) c.expect(e.tag == FpcEdge::Tag::kConcurrent, e.source + " -> " + e.target + " not concurrent");
  }
  c.equal(t.tree.count(FtEvent::Kind::kBasic), std::size_t{10}, "basic events");
  c.equal(t.tree.count(FtEvent::Kind::kConditional), std::size_t{3}, "conditional events");
  c.equal(t.tree.count(FtGate::Kind::kInhibit), std::size_t{3}, "inhibit gates");
  c.equal(t.tree.count(FtGate::Kind::kOr), t.tree.gates.size() - 3, "other gates are OR");
  c.expect(validate_ftm(t.tree).ok(), "fault tree fails validation");
  c.equal(cut_set_text(minimal_cut_sets(t.tree, m)),
          std::string("{a1}; {a2}; {a3}; {a4}; {a5}; {a6}; {a7,c7}; {a8,c8}; {a9,c9}; {a10}"), "cut sets");
  c.expect(seconds_since(start) < 1.0, "runtime over 1 s");
}

void criterion_3(Check& c) {
  const auto start = Clock::now();
  const ActivityModel m = load_fixture("nested.act");
  const Transformation t = transform(m);
  const Formula chains = fpc_to_formula(t.fpc);
  c.equal(to_string(chains),
          std::string("((a0 -> ai) & (ai -> a{m,n}) & (a{m,n} -> af)) | ((a0 -> aj) & (aj -> an) & (an -> af))"),
          "exclusive chains");
  c.equal(scenario_count(t.fpc), std::size_t{2}, "scenario count");

  const std::vector<CutSet> computed = minimal_cut_sets(t.tree, m);
  for (const CutSet& cs : computed) {
    const double p = enumerate_exact(m, forcing_assignment(m, cs.elements));
    c.expect(std::abs(p - 1.0) <= 1e-12, "cut set " + cs.to_string() + " does not force the top event");
  }
  const std::vector<CutSet> printed = cut_sets_from_json(nlohmann::json::parse(
      R"([["a0"],["ai","ci"],["aj","cj"],["ci","cm","am"],["ci","cn","an"],["aj","cn"],["af"]])"));
  const CutSetDelta delta = compare_cut_sets(computed, printed);
  nlohmann::json report{{"model", m.name}, {"computed", to_json(computed)}, {"reference", to_json(printed)},
                        {"delta", delta.to_json()}};
  // Any printed set the oracle does not confirm explains its own absence.
  for (const CutSet& cs : delta.missing) {
    report["delta_oracle"][cs.to_string()] = enumerate_exact(m, forcing_assignment(m, cs.elements));
  }
  std::cerr << "criterion 3 cut-set delta report: " << report.dump() << "\n";
  for (const CutSet& cs : delta.missing)
    c.expect(report["delta_oracle"][cs.to_string()].get<double>() < 1.0 - 1e-12,
             "reference set " + cs.to_string() + " is sound but was not computed");
  c.expect(seconds_since(start) < 1.0, "runtime over 1 s");
}

void criterion_4(Check& c) {
  const ActivityModel m = load_fixture("nested.act");
  const FpcGraph fpc = build_fpc(m);
  RandomModelGenerator gen(4004);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const ProbabilityAssignment p = gen.assignment(m);
    p.check(m);
    worst = std::max(worst, std::abs(top_probability_paper(fpc, p) - enumerate_exact(m, p)));
  }
  c.near(worst, 0.0, 1e-12, "largest paper/exact deviation");
}

/// Runs the CLI and returns its standard output.
std::string run_cli(const std::string& args, int& code) {
  const std::string out = (std::filesystem::temp_directory_path() /
                           ("ftforge_acceptance_" + std::to_string(::getpid()) + ".json"))
                              .string();
  const int status = std::system(("'" + std::string(FTFORGE_CLI) + "' " + args + " >'" + out + "'").c_str());
  code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(out);
  std::ostringstream s;
  s << in.rdbuf();
  std::filesystem::remove(out);
  return s.str();
}

void criterion_5(Check& c) {
  const ActivityModel m = load_fixture("bifurcation.act");
  const ProbabilityAssignment p = load_probs("bifurcation.probs.json");
  c.near(top_probability_paper(build_fpc(m), p), 0.46, 1e-12, "paper mode");
  c.near(top_probability_exact(m, p), 0.424, 1e-12, "exact mode");
  int code = 0;
  const std::string out = run_cli("verify '" + ftforge::testing::fixture_path("bifurcation.act") + "' --probs '" +
                                      ftforge::testing::fixture_path("bifurcation.probs.json") + "'",
                                  code);
  c.equal(code, 0, "verify exit code");
  if (code == 0) {
    const nlohmann::json j = nlohmann::json::parse(out);
    c.near(j.at("paper").get<double>(), 0.46, 1e-12, "verify paper");
    c.near(j.at("exact").at("oracle").get<double>(), 0.424, 1e-12, "verify oracle");
    c.near(j.at("paper_delta").get<double>(), 0.036, 1e-12, "verify delta");
  }
}

void criterion_6(Check& c) {
  RandomModelGenerator gen(6006);
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const ActivityModel m = gen.next();
    const ProbabilityAssignment p = gen.assignment(m);
    worst = std::max(worst, std::abs(top_probability_exact(m, p) - enumerate_exact(m, p)));
  }
  c.near(worst, 0.0, 1e-12, "largest exact/oracle deviation over 200 models");

  RandomModelGenerator mc_gen(6106);
  int within = 0;
  for (int k = 0; k < 100; ++k) {
    const ActivityModel m = mc_gen.next();
    const ProbabilityAssignment p = mc_gen.assignment(m);
    const MonteCarloResult r = monte_carlo(m, p, 1000000, 6000 + static_cast<std::uint64_t>(k));
    within += std::abs(r.estimate - enumerate_exact(m, p)) <= 4 * r.standard_error;
  }
  std::cerr << "criterion 6 monte carlo: " << within << "/100 within 4 standard errors\n";
  c.expect(within >= 95, "only " + std::to_string(within) + "/100 Monte Carlo runs within 4 standard errors");
}

/// Refactoring applies to a single consequent and an antecedent that is
/// an event or a disjunction of events.
bool disjunctive_antecedent(const Formula& s) {
  auto event = [](const Formula& f) { return f.op == Formula::Op::kFailed; };
  const Formula& lhs = s.lhs();
  return event(s.rhs()) &&
         (event(lhs) || (lhs.op == Formula::Op::kOr && std::all_of(lhs.args.begin(), lhs.args.end(), event)));
}

void criterion_7(Check& c) {
  for (const std::string& name : ftforge::testing::positive_fixtures()) {
    const ActivityModel m = load_fixture(name);
    const Transformation t = transform(m);
    if (t.logical.implications.empty()) continue;
    const std::vector<Formula> contraposed = contrapose(t.logical);
    for (std::size_t k = 0; k < contraposed.size(); ++k) {
      c.expect(truth_table_equivalent(t.logical.implications[k], contraposed[k]),
               name + ": contraposition of " + to_string(t.logical.implications[k]));
      if (disjunctive_antecedent(contraposed[k]))
        c.expect(truth_table_equivalent(contraposed[k], refactor_disjunction(contraposed[k]).to_formula()),
                 name + ": refactoring of " + to_string(contraposed[k]));
    }
    const Formula cmf = to_cmf(t.logical, t.regions).to_formula();
    c.expect(truth_table_equivalent(Formula::conj(contraposed), cmf), name + ": CMF");
    c.expect(truth_table_equivalent(cmf, expand_contractions(cmf)), name + ": contraction expansion of CMF");
    const Formula chain = fpc_to_formula(t.fpc);
    c.expect(truth_table_equivalent(chain, expand_contractions(chain)), name + ": contraction expansion of chain");
  }
}

void criterion_8(Check& c) {
  for (const std::string& name : ftforge::testing::positive_fixtures())
    c.expect(validate_ram(load_fixture(name)).ok(), name + " rejected");

  auto rejects = [&c](const std::string& what, const ActivityModel& m, const std::string& code) {
    const ValidationReport r = validate_ram(m);
    c.expect(r.has(code), what + " not reported as " + code + ": " + r.to_json().dump());
  };
  rejects("unpaired fork",
          parse_activity("activity X { initial i; fork F; action A1; action A2; merge M; final f;"
                         " i -> F; F -> A1; F -> A2; A1 -> M; A2 -> M; M -> f; }"),
          "unpaired-fork");
  rejects("guardless decision edge",
          parse_activity("activity X { initial i; decision D; action A1; action A2; merge M; final f;"
                         " i -> D; D -> A1 guard c1; D -> A2; A1 -> M; A2 -> M; M -> f; }"),
          "guard-missing");
  rejects("cycle",
          parse_activity("activity X { initial i; merge M; action A1; decision D; action A2; final f;"
                         " i -> M; M -> A1; A1 -> D; D -> M guard again; D -> A2 guard done; A2 -> f; }"),
          "cycle");
  rejects("two initials",
          parse_activity("activity X { initial i; initial j; action A1; action A2; join J; final f;"
                         " i -> A1; j -> A2; A1 -> J; A2 -> J; J -> f; }"),
          "initial-count");
  ActivityModel dangling = load_fixture("series.act");
  dangling.edges.push_back({"e9", "Aj", "ghost", std::nullopt});
  rejects("dangling edge", dangling, "dangling-edge");
  rejects("multi-in action",
          parse_activity("activity X { initial i; fork F; action A1; action A2; action A3; final f;"
                         " i -> F; F -> A1; F -> A2; A1 -> A3; A2 -> A3; A3 -> f; }"),
          "action-arity");
  rejects("unreachable node",
          parse_activity("activity X { initial i; action A1; action A2; action A3; merge M; final f;"
                         " i -> A1; A1 -> M; A3 -> A2; A2 -> M; M -> f; }"),
          "unreachable");
  rejects("shared merge",
          parse_activity("activity X { initial i; decision D1; decision D2; action A1; action A2; action A3;"
                         " merge M; final f; i -> D1; D1 -> A1 guard c1; D1 -> D2 guard c2;"
                         " D2 -> A2 guard c3; D2 -> A3 guard c4; A1 -> M; A2 -> M; A3 -> M; M -> f; }"),
          "shared-merge");

  const FaultTree good = transform(load_fixture("rules/d_decision.act")).tree;
  c.expect(validate_ftm(good).ok(), "lowered tree rejected");
  FaultTree no_condition = good;
  for (FtGate& g : no_condition.gates) {
    if (g.kind == FtGate::Kind::kInhibit) g.condition.clear();
  }
  c.expect(!validate_ftm(no_condition).ok(), "inhibit without conditional accepted");
  FaultTree two_tops = good;
  two_tops.events.push_back({"a_t", FtEvent::Kind::kOutput, "", {}, ""});
  two_tops.gates.push_back({"G99", FtGate::Kind::kOr, {"a1", "a2"}, "", "a_t"});
  c.expect(validate_ftm(two_tops).has("top-count"), "multi-top tree accepted");
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<void(Check&)>> criteria[] = {
      {"transformation rule golden suite", criterion_1},
      {"RMS end-to-end", criterion_2},
      {"nested-flow chains and cut sets", criterion_3},
      {"probability equivalence on exclusive branches", criterion_4},
      {"paper-mode fidelity", criterion_5},
      {"oracle triangulation", criterion_6},
      {"logic soundness", criterion_7},
      {"metamodel conformance", criterion_8},
  };
  int failed = 0;
  int index = 0;
  for (const auto& [name, run] : criteria) {
    ++index;
    Check c;
    const auto start = Clock::now();
    try {
      run(c);
    } catch (const std::exception& e) {
      c.failures.push_back(std::string("exception: ") + e.what());
    }
    const bool ok = c.failures.empty();
    failed += ok ? 0 : 1;
    std::printf("%s criterion %d: %s (%.2f s)\n", ok ? "PASS" : "FAIL", index, name, seconds_since(start));
    for (const std::string& f : c.failures) std::printf("    %s\n", f.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
