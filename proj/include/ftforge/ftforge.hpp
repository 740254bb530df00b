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

/// @file ftforge.hpp
/// Umbrella header and the end-to-end transformation.

#pragma once

#include "ftforge/activity.hpp"
#include "ftforge/analysis.hpp"
#include "ftforge/common.hpp"
#include "ftforge/fault_tree.hpp"
#include "ftforge/fpc.hpp"
#include "ftforge/logic.hpp"
#include "ftforge/oracle.hpp"
#include "ftforge/probability.hpp"

namespace ftforge {

/// Every intermediate product of one transformation run.
struct Transformation {
  RegionMap regions;
  LogicalModel logical;
  FpcGraph fpc;
  FaultTree tree;
  TraceMap trace;
};

/// Validates, then runs activity -> logical model -> chain -> fault tree.
/// Throws StructureError carrying the first violation when validation fails.
inline Transformation transform(const ActivityModel& model) {
  Transformation t;
  t.regions = pair_control_nodes(model);
  t.logical = derive_logical_model(model);
  t.fpc = build_fpc(model, t.regions);
  Lowering lowered = fpc_to_fault_tree(t.fpc, &model);
  t.tree = std::move(lowered.tree);
  t.trace = std::move(lowered.trace);
  return t;
}

}  // namespace ftforge
