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

/// @file probability.hpp
/// Probability assignments and weighted enumeration of execution outcomes
/// (one Bernoulli fault per action, one categorical choice per decision).

#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ftforge/activity.hpp"
#include "ftforge/common.hpp"

namespace ftforge {

inline constexpr std::size_t kDefaultCap = 20;
/// Largest product of decision fan-outs that exhaustive evaluation accepts.
inline constexpr std::size_t kMaxBranchProduct = 4096;
/// Largest number of (fault vector, branch vector) outcomes, log2.
inline constexpr std::size_t kMaxOutcomeBits = 26;

struct ProbabilityAssignment {
  std::map<std::string, double> faults;      ///< action id -> P(fault)
  std::map<std::string, double> conditions;  ///< guard id -> P(guard chosen)

  static ProbabilityAssignment from_json(const nlohmann::json& j) {
    ProbabilityAssignment p;
    try {
      if (!j.is_object()) throw InputError("probability file must be a JSON object");
      if (j.contains("faults")) p.faults = j.at("faults").get<std::map<std::string, double>>();
      if (j.contains("conditions"))
        p.conditions = j.at("conditions").get<std::map<std::string, double>>();
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("malformed probability file: ") + e.what());
    }
    return p;
  }

  nlohmann::json to_json() const { return {{"faults", faults}, {"conditions", conditions}}; }

  double fault(const std::string& action) const {
    auto it = faults.find(action);
    if (it == faults.end()) throw InputError("missing probability for fault of action '" + action + "'");
    return it->second;
  }

  double condition(const std::string& guard) const {
    auto it = conditions.find(guard);
    if (it == conditions.end()) throw InputError("missing probability for condition '" + guard + "'");
    return it->second;
  }

  /// Throws InputError naming the first missing or out-of-range entry, or a
  /// decision whose guard probabilities do not sum to one.
  void check(const ActivityModel& model) const {
    auto in_range = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
    for (const ActivityNode& n : model.nodes) {
      if (n.kind != NodeKind::kAction) continue;
      if (!in_range(fault(n.id)))
        throw InputError("probability for fault of action '" + n.id + "' is outside [0, 1]");
    }
    std::map<std::string, double> sums;
    for (const ActivityEdge& e : model.edges) {
      if (!e.guard) continue;
      const double v = condition(e.guard->id);
      if (!in_range(v)) throw InputError("probability for condition '" + e.guard->id + "' is outside [0, 1]");
      sums[e.source] += v;
    }
    for (const auto& [decision, sum] : sums) {
      if (std::abs(sum - 1.0) > 1e-12)
        throw InputError("condition probabilities of decision '" + decision + "' sum to " +
                         std::to_string(sum) + ", not 1");
    }
  }
};

/// The random inputs of one run: which actions fail and which guard each
/// decision takes. Actions and decisions are indexed in declaration order.
struct OutcomeSpace {
  std::vector<std::string> actions;
  std::vector<double> fault_probs;
  std::vector<std::string> decisions;
  std::vector<std::vector<std::string>> guards;       ///< per decision, out-edge order
  std::vector<std::vector<double>> guard_probs;

  static OutcomeSpace of(const ActivityModel& model, const ProbabilityAssignment& p) {
    p.check(model);
    OutcomeSpace s;
    for (const ActivityNode& n : model.nodes) {
      if (n.kind == NodeKind::kAction) {
        s.actions.push_back(n.id);
        s.fault_probs.push_back(p.fault(n.id));
      } else if (n.kind == NodeKind::kDecision) {
        s.decisions.push_back(n.id);
        s.guards.emplace_back();
        s.guard_probs.emplace_back();
        for (const ActivityEdge& e : model.edges) {
          if (e.source == n.id && e.guard) {
            s.guards.back().push_back(e.guard->id);
            s.guard_probs.back().push_back(p.condition(e.guard->id));
          }
        }
      }
    }
    return s;
  }

  std::size_t branch_product() const {
    std::size_t n = 1;
    for (const auto& g : guards) n *= g.size();
    return n;
  }

  /// Throws CapExceeded when exhaustive enumeration is too large.
  void check_cap(std::size_t cap) const {
    if (actions.size() > cap)
      throw CapExceeded("cap exceeded: " + std::to_string(actions.size()) +
                        " basic events exceed the enumeration cap of " + std::to_string(cap));
    std::size_t bits = actions.size();
    std::size_t product = 1;
    for (const auto& g : guards) {
      product *= g.size();
      if (product > kMaxBranchProduct)
        throw CapExceeded("cap exceeded: decision branch product exceeds " +
                          std::to_string(kMaxBranchProduct));
    }
    while (product > 1) {
      ++bits;
      product = (product + 1) / 2;
    }
    if (bits > kMaxOutcomeBits)
      throw CapExceeded("cap exceeded: more than 2^" + std::to_string(kMaxOutcomeBits) + " outcomes");
  }
};

/// Sum of outcome weights for which `fails(fault_mask, choice)` holds.
/// Bit k of fault_mask means actions[k] failed; choice[d] indexes
/// guards[d]. The outcome range is split into a fixed number of chunks
/// summed in order, so the result does not depend on the thread count.
template <typename Fails>
double weighted_outcome_sum(const OutcomeSpace& space, std::size_t cap, const Fails& fails) {
  space.check_cap(cap);
  const std::size_t n = space.actions.size();
  std::vector<std::vector<std::uint32_t>> combos{{}};
  std::vector<double> combo_weight{1.0};
  for (std::size_t d = 0; d < space.decisions.size(); ++d) {
    std::vector<std::vector<std::uint32_t>> next;
    std::vector<double> next_weight;
    for (std::size_t c = 0; c < combos.size(); ++c) {
      for (std::uint32_t k = 0; k < space.guards[d].size(); ++k) {
        next.push_back(combos[c]);
        next.back().push_back(k);
        next_weight.push_back(combo_weight[c] * space.guard_probs[d][k]);
      }
    }
    combos = std::move(next);
    combo_weight = std::move(next_weight);
  }

  const std::uint64_t masks = std::uint64_t{1} << n;
  const std::uint64_t total = masks * combos.size();
  constexpr std::uint64_t kChunks = 64;
  const std::uint64_t chunk = (total + kChunks - 1) / kChunks;
  std::vector<double> partial(kChunks, 0.0);

  auto run_chunk = [&](std::uint64_t c) {
    const std::uint64_t begin = c * chunk;
    const std::uint64_t end = std::min(total, begin + chunk);
    double sum = 0.0;
    for (std::uint64_t idx = begin; idx < end; ++idx) {
      const std::size_t combo = static_cast<std::size_t>(idx / masks);
      const std::uint64_t mask = idx % masks;
      double w = combo_weight[combo];
      if (w == 0.0) continue;
      for (std::size_t k = 0; k < n; ++k)
        w *= ((mask >> k) & 1U) ? space.fault_probs[k] : 1.0 - space.fault_probs[k];
      if (w != 0.0 && fails(mask, combos[combo])) sum += w;
    }
    partial[c] = sum;
  };

  const unsigned hw = std::max(1U, std::thread::hardware_concurrency());
  const unsigned workers = total < 4096 ? 1U : std::min<unsigned>(hw, kChunks);
  if (workers == 1) {
    for (std::uint64_t c = 0; c < kChunks; ++c) run_chunk(c);
  } else {
    std::atomic<std::uint64_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) {
      pool.emplace_back([&] {
        for (std::uint64_t c = next++; c < kChunks; c = next++) run_chunk(c);
      });
    }
    for (std::thread& t : pool) t.join();
  }
  double sum = 0.0;
  for (double v : partial) sum += v;
  return sum;
}

}  // namespace ftforge
