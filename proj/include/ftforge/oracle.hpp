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

/// @file oracle.hpp
/// Ground truth by executing the activity itself: token semantics, exact
/// weighted enumeration and seeded Monte Carlo. Nothing here looks at
/// chains or fault trees.

#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "ftforge/activity.hpp"
#include "ftforge/common.hpp"
#include "ftforge/probability.hpp"

namespace ftforge {

struct ExecutionOutcome {
  std::map<std::string, bool> fault_vector;          ///< action id -> fault occurred
  std::map<std::string, std::string> branch_vector;  ///< decision id -> chosen guard
  bool reached_final = false;
  double weight = 0.0;
};

/// Token execution over edge indices, in topological node order.
class TokenMachine {
 public:
  explicit TokenMachine(const ActivityModel& model) {
    const ActivityGraph g(model);
    const std::vector<std::size_t> order = g.topological_order();
    if (order.empty() && g.size() > 0) throw StructureError("cycle detected", model.name);
    std::map<std::string, std::size_t> action_slot;
    std::map<std::string, std::size_t> decision_slot;
    for (const ActivityNode& n : model.nodes) {
      if (n.kind == NodeKind::kAction) action_slot.emplace(n.id, action_slot.size());
      if (n.kind == NodeKind::kDecision) decision_slot.emplace(n.id, decision_slot.size());
    }
    for (std::size_t v : order) {
      Node node{g.kind(v), 0, g.in_edges(v), g.out_edges(v)};
      if (node.kind == NodeKind::kAction) node.slot = action_slot.at(g.node(v).id);
      if (node.kind == NodeKind::kDecision) node.slot = decision_slot.at(g.node(v).id);
      nodes_.push_back(std::move(node));
    }
    edges_ = g.edge_count();
  }

  /// True if a token reaches the final node. Bit k of `failed` is the k-th
  /// action in declaration order; choice[d] indexes the outgoing edges of
  /// the d-th decision.
  bool reaches_final(std::uint64_t failed, const std::vector<std::uint32_t>& choice) const {
    thread_local std::vector<std::uint8_t> token;
    token.assign(edges_, 0);
    bool reached = false;
    for (const Node& n : nodes_) {
      switch (n.kind) {
        case NodeKind::kInitial:
          for (std::size_t e : n.out) token[e] = 1;
          break;
        case NodeKind::kAction:
          if (token[n.in.front()] && !((failed >> n.slot) & 1U)) token[n.out.front()] = 1;
          break;
        case NodeKind::kFork:
          if (token[n.in.front()])
            for (std::size_t e : n.out) token[e] = 1;
          break;
        case NodeKind::kJoin:
          if (std::all_of(n.in.begin(), n.in.end(), [&](std::size_t e) { return token[e] != 0; }))
            token[n.out.front()] = 1;
          break;
        case NodeKind::kDecision:
          if (token[n.in.front()]) token[n.out.at(choice[n.slot])] = 1;
          break;
        case NodeKind::kMerge:
          if (std::any_of(n.in.begin(), n.in.end(), [&](std::size_t e) { return token[e] != 0; }))
            token[n.out.front()] = 1;
          break;
        case NodeKind::kFinal:
          reached = reached || token[n.in.front()];
          break;
      }
    }
    return reached;
  }

 private:
  struct Node {
    NodeKind kind;
    std::size_t slot;
    std::vector<std::size_t> in;
    std::vector<std::size_t> out;
  };

  std::vector<Node> nodes_;
  std::size_t edges_ = 0;
};

/// One deterministic run for given fault and branch vectors. Actions
/// missing from `faults` do not fail; every decision needs a choice.
/// The weight is filled in when `p` is given.
inline ExecutionOutcome simulate_once(const ActivityModel& model,
                                      const std::set<std::string>& faults,
                                      const std::map<std::string, std::string>& branches,
                                      const ProbabilityAssignment* p = nullptr) {
  ExecutionOutcome out;
  std::uint64_t mask = 0;
  std::size_t bit = 0;
  std::vector<std::uint32_t> choice;
  double weight = 1.0;
  for (const ActivityNode& n : model.nodes) {
    if (n.kind == NodeKind::kAction) {
      const bool failed = faults.count(n.id) > 0;
      out.fault_vector[n.id] = failed;
      if (failed) mask |= std::uint64_t{1} << bit;
      if (p) weight *= failed ? p->fault(n.id) : 1.0 - p->fault(n.id);
      ++bit;
    } else if (n.kind == NodeKind::kDecision) {
      auto it = branches.find(n.id);
      if (it == branches.end()) throw InputError("no branch chosen for decision '" + n.id + "'");
      std::uint32_t index = 0;
      bool found = false;
      for (const ActivityEdge& e : model.edges) {
        if (e.source != n.id) continue;
        if (e.guard && e.guard->id == it->second) {
          found = true;
          break;
        }
        ++index;
      }
      if (!found) throw InputError("decision '" + n.id + "' has no guard '" + it->second + "'");
      choice.push_back(index);
      out.branch_vector[n.id] = it->second;
      if (p) weight *= p->condition(it->second);
    }
  }
  if (bit > 64) throw CapExceeded("cap exceeded: more than 64 actions");
  out.reached_final = TokenMachine(model).reaches_final(mask, choice);
  out.weight = p ? weight : 0.0;
  return out;
}

/// Sum of outcome weights whose run does not reach the final node.
inline double enumerate_exact(const ActivityModel& model, const ProbabilityAssignment& p,
                              std::size_t cap = kDefaultCap) {
  const OutcomeSpace space = OutcomeSpace::of(model, p);
  const TokenMachine machine(model);
  return weighted_outcome_sum(space, cap, [&machine](std::uint64_t mask, const auto& choice) {
    return !machine.reaches_final(mask, choice);
  });
}

/// Total weight of all outcomes; 1 up to rounding.
inline double total_outcome_weight(const ActivityModel& model, const ProbabilityAssignment& p,
                                   std::size_t cap = kDefaultCap) {
  return weighted_outcome_sum(OutcomeSpace::of(model, p), cap,
                              [](std::uint64_t, const auto&) { return true; });
}

struct MonteCarloResult {
  double estimate = 0.0;
  double standard_error = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t failures = 0;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const {
    return {{"method", "monte_carlo"}, {"value", estimate}, {"stderr", standard_error},
            {"trials", trials},         {"failures", failures}, {"seed", seed}};
  }
};

inline constexpr std::uint64_t kMonteCarloBlock = 65536;

/// Sampled runs. Trials are grouped in blocks of 65536; block b draws from
/// an mt19937_64 seeded with seed_seq{seed low word, seed high word, b}.
/// Each action consumes one 64-bit draw compared against its probability
/// scaled to 2^64, then each decision one draw against its cumulative
/// guard thresholds. Results are independent of the worker count.
inline MonteCarloResult monte_carlo(const ActivityModel& model, const ProbabilityAssignment& p,
                                    std::uint64_t trials, std::uint64_t seed) {
  if (trials == 0) throw InputError("monte carlo needs at least one trial");
  const OutcomeSpace space = OutcomeSpace::of(model, p);
  if (space.actions.size() > 64) throw CapExceeded("cap exceeded: more than 64 actions");
  const TokenMachine machine(model);

  // P(draw < threshold) = p for a uniform 64-bit draw; p = 1 always fires.
  struct Threshold {
    std::uint64_t value;
    bool always;
  };
  auto threshold = [](double prob) {
    if (prob >= 1.0) return Threshold{0, true};
    return Threshold{static_cast<std::uint64_t>(std::ldexp(static_cast<long double>(prob), 64)), false};
  };
  std::vector<Threshold> fault_t;
  for (double v : space.fault_probs) fault_t.push_back(threshold(v));
  std::vector<std::vector<Threshold>> guard_t;
  for (const auto& probs : space.guard_probs) {
    guard_t.emplace_back();
    double cumulative = 0.0;
    for (double v : probs) {
      cumulative += v;
      guard_t.back().push_back(threshold(cumulative));
    }
  }

  const std::uint64_t blocks = (trials + kMonteCarloBlock - 1) / kMonteCarloBlock;
  std::vector<std::uint64_t> failures(blocks, 0);
  auto run_block = [&](std::uint64_t b) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(b)};
    std::mt19937_64 rng(seq);
    const std::uint64_t n = std::min(kMonteCarloBlock, trials - b * kMonteCarloBlock);
    std::vector<std::uint32_t> choice(guard_t.size());
    std::uint64_t count = 0;
    for (std::uint64_t t = 0; t < n; ++t) {
      std::uint64_t mask = 0;
      for (std::size_t k = 0; k < fault_t.size(); ++k) {
        const std::uint64_t r = rng();
        if (fault_t[k].always || r < fault_t[k].value) mask |= std::uint64_t{1} << k;
      }
      for (std::size_t d = 0; d < guard_t.size(); ++d) {
        const std::uint64_t r = rng();
        std::uint32_t k = 0;
        while (k + 1 < guard_t[d].size() && !guard_t[d][k].always && r >= guard_t[d][k].value) ++k;
        choice[d] = k;
      }
      if (!machine.reaches_final(mask, choice)) ++count;
    }
    failures[b] = count;
  };

  const unsigned workers =
      static_cast<unsigned>(std::min<std::uint64_t>(std::max(1U, std::thread::hardware_concurrency()), blocks));
  if (workers <= 1) {
    for (std::uint64_t b = 0; b < blocks; ++b) run_block(b);
  } else {
    std::atomic<std::uint64_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::uint64_t b = next++; b < blocks; b = next++) run_block(b);
      });
    }
    for (std::thread& t : pool) t.join();
  }

  MonteCarloResult r;
  r.trials = trials;
  r.seed = seed;
  for (std::uint64_t f : failures) r.failures += f;
  r.estimate = static_cast<double>(r.failures) / static_cast<double>(trials);
  r.standard_error = std::sqrt(r.estimate * (1.0 - r.estimate) / static_cast<double>(trials));
  return r;
}

}  // namespace ftforge
