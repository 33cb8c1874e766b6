/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, tspbb contributors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <tspbb/bnb.hpp>
#include <tspbb/errors.hpp>
#include <tspbb/util.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace tspbb {

std::vector<int> fractional_set(const ilp_model_t& model, const std::vector<double>& values)
{
  std::vector<int> out;
  for (int j = 0; j < model.num_vars(); ++j) {
    if (!model.is_integer(j)) { continue; }
    const double x = values[j];
    if (std::min(frac_down(x), frac_up(x)) > integrality_tol) { out.push_back(j); }
  }
  return out;
}

variable_bounds_t node_bounds(const bnb_node_t& node, const variable_bounds_t& root)
{
  variable_bounds_t b = root;
  for (const auto& c : node.local_bounds) {
    if (c.side == bound_side_t::upper) {
      b.upper[c.var] = std::min(b.upper[c.var], c.value);
    } else {
      b.lower[c.var] = std::max(b.lower[c.var], c.value);
    }
  }
  return b;
}

std::pair<bnb_node_t, bnb_node_t> branch(const bnb_node_t& node, int var, int next_id)
{
  if (!node.lp || !std::binary_search(node.fractional_set.begin(), node.fractional_set.end(), var)) {
    throw misuse_error("branch on variable " + std::to_string(var) + " which is not fractional at node " +
                       std::to_string(node.id));
  }
  const double x = node.lp->values[var];
  auto make      = [&](int id, bound_side_t side, double value, bool up) {
    bnb_node_t c;
    c.id           = id;
    c.parent       = node.id;
    c.depth        = node.depth + 1;
    c.local_bounds = node.local_bounds;
    c.local_bounds.push_back({var, side, value});
    c.bound            = node.lp->objective;
    c.warm             = std::make_shared<const lp_basis_t>(node.lp->basis);
    c.branch_var       = var;
    c.branch_up        = up;
    c.branch_fraction  = up ? frac_up(x) : frac_down(x);
    c.parent_objective = node.lp->objective;
    return c;
  };
  return {make(next_id, bound_side_t::upper, std::floor(x), false),
          make(next_id + 1, bound_side_t::lower, std::ceil(x), true)};
}

bool node_order_t::operator()(const bnb_node_t& a, const bnb_node_t& b) const
{
  if (a.bound != b.bound) { return a.bound > b.bound; }
  if (a.depth != b.depth) { return a.depth < b.depth; }
  return a.id > b.id;
}

void node_queue_t::push(bnb_node_t node)
{
  heap_.push_back(std::move(node));
  std::push_heap(heap_.begin(), heap_.end(), node_order_t{});
}

bnb_node_t node_queue_t::pop()
{
  if (heap_.empty()) { throw misuse_error("pop from an empty node queue"); }
  std::pop_heap(heap_.begin(), heap_.end(), node_order_t{});
  bnb_node_t n = std::move(heap_.back());
  heap_.pop_back();
  return n;
}

bnb_node_t select_node(node_queue_t& queue) { return queue.pop(); }

const char* to_string(solve_status_t s)
{
  switch (s) {
    case solve_status_t::optimal: return "optimal";
    case solve_status_t::limit_reached: return "limit_reached";
    case solve_status_t::infeasible: return "infeasible";
  }
  return "?";
}

std::string trace_to_json_line(const node_trace_t& t)
{
  nlohmann::ordered_json j;
  j["id"]     = t.id;
  j["parent"] = t.parent;
  j["depth"]  = t.depth;
  if (std::isfinite(t.lp_objective)) {
    j["lp_objective"] = t.lp_objective;
  } else {
    j["lp_objective"] = nullptr;
  }
  j["action_var"] = t.action_var;
  j["rule_used"]  = t.rule_used;
  return j.dump();
}

namespace {

lp_solution_t solve_node_lp(lp_engine_t& engine, const variable_bounds_t& bounds, const lp_basis_t* warm)
{
  auto lp = engine.solve(bounds, warm);
  if (lp.status == lp_status_t::iteration_limit && warm != nullptr) { lp = engine.solve(bounds, nullptr); }
  if (lp.status == lp_status_t::iteration_limit) { throw error("node LP hit the iteration limit"); }
  if (lp.status == lp_status_t::unbounded) { throw unbounded_lp_error("node LP relaxation is unbounded"); }
  return lp;
}

}  // namespace

solve_result_t solve(const ilp_model_t& model, const branching_rule_t& rule_proto, const solve_options_t& opts)
{
  for (const auto& v : model.vars) {
    if (v.kind == var_kind_t::continuous) { throw misuse_error("solve expects a pure-integer model"); }
  }
  stopwatch_t clock;
  const auto cost = model.dense_objective();
  lp_engine_t engine(model, opts.lp_settings);
  const auto root_bounds = variable_bounds_t::from_model(model);
  pseudocost_table_t pseudocosts(model.num_vars());
  auto rule = rule_proto.clone();
  most_infeasible_rule_t fallback;

  solve_result_t res;
  auto& st         = res.stats;
  double incumbent = std::numeric_limits<double>::infinity();
  node_queue_t queue;
  queue.push(bnb_node_t{});
  int next_id    = 1;
  bool limit_hit = false;

  auto global_bound = [&]() { return queue.empty() ? incumbent : std::min(incumbent, queue.top().bound); };

  while (true) {
    while (!queue.empty() && queue.top().bound >= incumbent - prune_tol) { queue.pop(); }
    if (queue.empty()) { break; }
    if ((opts.limits.node_limit > 0 && st.nodes >= opts.limits.node_limit) ||
        (opts.limits.time_limit > 0 && clock.seconds() >= opts.limits.time_limit)) {
      limit_hit = true;
      break;
    }
    bnb_node_t node = select_node(queue);
    const auto bounds = node_bounds(node, root_bounds);
    if (!node.lp) {
      node.lp = std::make_shared<const lp_solution_t>(solve_node_lp(engine, bounds, node.warm.get()));
    }
    node.warm.reset();
    ++st.nodes;
    st.max_depth     = std::max(st.max_depth, node.depth);
    const auto& lp   = *node.lp;
    const bool feas  = lp.status == lp_status_t::optimal;
    node_trace_t tr{node.id, node.parent, node.depth,
                    feas ? lp.objective : std::numeric_limits<double>::quiet_NaN(), -1, std::string()};

    if (feas && node.branch_var >= 0) {
      pseudocosts.update(node.branch_var, node.branch_up, lp.objective - node.parent_objective, node.branch_fraction);
    }

    auto finish_node = [&]() {
      if (opts.keep_trace) { res.trace.push_back(std::move(tr)); }
      res.bound_history.push_back(global_bound());
    };

    if (!feas || lp.objective >= incumbent - prune_tol) {
      finish_node();
      continue;
    }
    node.fractional_set = fractional_set(model, lp.values);
    if (node.fractional_set.empty()) {
      std::vector<double> x = lp.values;
      for (int j = 0; j < model.num_vars(); ++j) { x[j] = std::round(x[j]); }
      compensated_sum_t obj;
      for (int j = 0; j < model.num_vars(); ++j) { obj.add(cost[j] * x[j]); }
      if (obj.value() < incumbent - incumbent_tol) {
        incumbent         = obj.value();
        res.assignment    = std::move(x);
        res.has_incumbent = true;
      }
      finish_node();
      continue;
    }

    search_state_t state;
    state.model       = &model;
    state.bounds      = &bounds;
    state.lp          = &lp;
    state.candidates  = &node.fractional_set;
    state.pseudocosts = &pseudocosts;
    state.node_id     = node.id;
    state.depth       = node.depth;
    state.incumbent   = incumbent;

    branch_decision_t decision;
    try {
      decision = rule->choose(state, engine);
    } catch (const rule_failure_error&) {
      ++st.rule_fallbacks;
      decision           = fallback.choose(state, engine);
      decision.rule_used = "mostinf-fallback";
    }
    if (!std::binary_search(node.fractional_set.begin(), node.fractional_set.end(), decision.var)) {
      throw misuse_error("branching rule returned a non-candidate variable");
    }
    if (decision.used_expert) { ++st.strong_branch_calls; }
    ++st.branchings;

    std::optional<observation_t> obs;
    if (decision.used_expert) {
      ++st.expert_decisions;
      if (opts.sample_sink) {
        obs = encode(state);
        opts.sample_sink(sample_record_t{*obs, decision.var, opts.instance_tag, node.depth, 1.0});
      }
    }
    if (opts.keep_trajectory) {
      if (!obs) { obs = encode(state); }
      res.trajectory.steps.push_back({digest(*obs), reward_surrogate({node.id, node.depth}), decision.var});
    }
    tr.action_var = decision.var;
    tr.rule_used  = decision.rule_used;

    auto [down, up] = branch(node, decision.var, next_id);
    next_id += 2;
    auto attach = [&](bnb_node_t& child, std::optional<lp_solution_t>& probe) -> bool {
      if (!probe) { return true; }
      if (probe->status == lp_status_t::infeasible) { return false; }
      if (probe->status != lp_status_t::optimal) { return true; }
      child.bound = std::max(child.bound, probe->objective);
      child.lp    = std::make_shared<const lp_solution_t>(std::move(*probe));
      child.warm.reset();
      return true;
    };
    if (attach(down, decision.down_lp)) { queue.push(std::move(down)); }
    if (attach(up, decision.up_lp)) { queue.push(std::move(up)); }
    finish_node();
  }

  if (limit_hit) {
    res.status = solve_status_t::limit_reached;
  } else {
    res.status = res.has_incumbent ? solve_status_t::optimal : solve_status_t::infeasible;
  }
  res.objective         = incumbent;
  res.final_bound       = global_bound();
  st.lp_solves          = engine.total_solves();
  st.lp_iterations      = engine.total_iterations();
  st.wall_time_s        = clock.seconds();
  return res;
}

}  // namespace tspbb
