/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, tspbb contributors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <tspbb/branching.hpp>
#include <tspbb/instances.hpp>
#include <tspbb/lp_engine.hpp>
#include <tspbb/observe.hpp>

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace tspbb {

inline constexpr double prune_tol     = 1e-6;
inline constexpr double incumbent_tol = 1e-9;

struct bound_change_t {
  int var;
  bound_side_t side;
  double value;
};

struct bnb_node_t {
  int id     = 0;
  int parent = -1;
  int depth  = 0;
  std::vector<bound_change_t> local_bounds;  // root-to-node overrides, in order
  double bound = -std::numeric_limits<double>::infinity();  // queue key: best known lower bound
  std::shared_ptr<const lp_solution_t> lp;  // set once solved
  std::shared_ptr<const lp_basis_t> warm;   // parent's basis for the first solve
  std::vector<int> fractional_set;
  // How the node was created from its parent, for pseudocost updates.
  int branch_var         = -1;
  bool branch_up         = false;
  double branch_fraction = 0.0;
  double parent_objective = 0.0;
};

/// Materializes the node's bounds on top of the model's.
variable_bounds_t node_bounds(const bnb_node_t& node, const variable_bounds_t& root);

/// Splits on a fractional variable: down gets x <= floor(x*), up
/// gets x >= ceil(x*). Child ids are next_id and next_id + 1.
/// Throws misuse_error if var is not in node.fractional_set.
std::pair<bnb_node_t, bnb_node_t> branch(const bnb_node_t& node, int var, int next_id);

/// Best-bound order: lower bound first, then deeper depth, then lower id.
struct node_order_t {
  bool operator()(const bnb_node_t& a, const bnb_node_t& b) const;  // true if a is served after b
};

class node_queue_t {
 public:
  void push(bnb_node_t node);
  bnb_node_t pop();
  const bnb_node_t& top() const { return heap_.front(); }
  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }

 private:
  std::vector<bnb_node_t> heap_;
};

bnb_node_t select_node(node_queue_t& queue);

struct solve_limits_t {
  std::int64_t node_limit = 0;  // 0 = unlimited
  double time_limit       = 0;  // seconds, 0 = unlimited
};

enum class solve_status_t : std::uint8_t { optimal, limit_reached, infeasible };
const char* to_string(solve_status_t s);

struct solve_stats_t {
  std::int64_t nodes           = 0;  // node LPs evaluated
  std::int64_t lp_solves       = 0;  // including strong-branching probes
  std::int64_t lp_iterations   = 0;
  std::int64_t strong_branch_calls = 0;
  std::int64_t branchings      = 0;
  std::int64_t expert_decisions = 0;
  std::int64_t rule_fallbacks  = 0;
  int max_depth                = 0;
  double wall_time_s           = 0.0;
};

struct node_trace_t {
  int id;
  int parent;
  int depth;
  double lp_objective;  // NaN when the node LP was infeasible
  int action_var;       // -1 when the node was not branched on
  std::string rule_used;
};

std::string trace_to_json_line(const node_trace_t& t);

struct solve_options_t {
  solve_limits_t limits;
  /// Called for every expert-flagged decision with the node's observation.
  std::function<void(sample_record_t&&)> sample_sink;
  std::string instance_tag;
  bool keep_trace      = false;
  bool keep_trajectory = false;
  lp_settings_t lp_settings;
};

struct solve_result_t {
  solve_status_t status = solve_status_t::infeasible;
  bool has_incumbent    = false;
  double objective      = std::numeric_limits<double>::infinity();
  std::vector<double> assignment;
  double final_bound = -std::numeric_limits<double>::infinity();  // min over open nodes and incumbent
  solve_stats_t stats;
  std::vector<double> bound_history;  // global lower bound after each evaluated node
  std::vector<node_trace_t> trace;
  trajectory_log_t trajectory;
};

/// Exact LP-based branch-and-bound over a pure-integer minimization model.
/// The rule is cloned, so the caller's instance is left untouched.
solve_result_t solve(const ilp_model_t& model, const branching_rule_t& rule, const solve_options_t& opts = {});

}  // namespace tspbb
