/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, tspbb contributors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <tspbb/branching.hpp>
#include <tspbb/errors.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace tspbb {

// ---------------------------------------------------------------------------
// pseudocost_table_t

pseudocost_table_t::pseudocost_table_t(int num_vars)
  : down_sum_(num_vars, 0.0), up_sum_(num_vars, 0.0), down_n_(num_vars, 0), up_n_(num_vars, 0)
{
}

void pseudocost_table_t::update(int var, bool up, double gain, double fraction)
{
  if (!(fraction > 0.0) || !std::isfinite(gain)) { return; }
  const double unit = std::max(gain, 0.0) / fraction;
  if (up) {
    up_sum_[var] += unit;
    ++up_n_[var];
    up_total_ += unit;
    ++up_obs_;
  } else {
    down_sum_[var] += unit;
    ++down_n_[var];
    down_total_ += unit;
    ++down_obs_;
  }
}

double pseudocost_table_t::down(int var) const
{
  if (down_n_[var] > 0) { return down_sum_[var] / down_n_[var]; }
  return down_obs_ > 0 ? down_total_ / down_obs_ : 1.0;
}

double pseudocost_table_t::up(int var) const
{
  if (up_n_[var] > 0) { return up_sum_[var] / up_n_[var]; }
  return up_obs_ > 0 ? up_total_ / up_obs_ : 1.0;
}

namespace {

constexpr double tie_tol = 1e-12;

// Argmax over (var, score) pairs in ascending var order; near-equal scores
// keep the earlier (lower) index.
struct argmax_t {
  int var     = -1;
  double best = -1.0;
  bool offer(int v, double score)
  {
    if (var < 0 || score > best + tie_tol * std::max(1.0, std::abs(best))) {
      var  = v;
      best = score;
      return true;
    }
    return false;
  }
};

std::vector<int> sorted_candidates(std::span<const int> candidates)
{
  if (candidates.empty()) { throw misuse_error("branching with no candidates"); }
  std::vector<int> c(candidates.begin(), candidates.end());
  std::sort(c.begin(), c.end());
  return c;
}

double child_gain(const lp_solution_t& child, double parent_obj)
{
  switch (child.status) {
    case lp_status_t::optimal: return std::max(child.objective - parent_obj, 0.0);
    case lp_status_t::infeasible: return infeasible_gain;
    case lp_status_t::iteration_limit: throw rule_failure_error("strong-branching probe hit the LP iteration limit");
    case lp_status_t::unbounded: throw unbounded_lp_error("strong-branching probe is unbounded");
  }
  return infeasible_gain;
}

const std::vector<int>& state_candidates(const search_state_t& s)
{
  if (s.candidates == nullptr) { throw misuse_error("search state has no candidate set"); }
  return *s.candidates;
}

}  // namespace

strong_branch_result_t strong_branch(const search_state_t& s, std::span<const int> candidates, lp_engine_t& engine)
{
  const auto cands   = sorted_candidates(candidates);
  const auto& lp     = *s.lp;
  const auto& bounds = *s.bounds;
  strong_branch_result_t r;
  r.scores.reserve(cands.size());
  argmax_t best;
  for (int v : cands) {
    const double x = lp.values[v];
    auto down      = engine.probe_bound_change(bounds, lp, v, bound_side_t::upper, std::floor(x));
    auto up        = engine.probe_bound_change(bounds, lp, v, bound_side_t::lower, std::ceil(x));
    r.lp_solves += 2;
    branch_score_t sc;
    sc.var       = v;
    sc.down_gain = child_gain(down, lp.objective);
    sc.up_gain   = child_gain(up, lp.objective);
    sc.score     = product_score(sc.down_gain, sc.up_gain);
    r.scores.push_back(sc);
    if (best.offer(v, sc.score)) {
      r.down_lp = std::move(down);
      r.up_lp   = std::move(up);
    }
  }
  r.chosen = best.var;
  return r;
}

int pseudocost_choose(const search_state_t& s, std::span<const int> candidates, const pseudocost_table_t& table)
{
  argmax_t best;
  for (int v : sorted_candidates(candidates)) {
    const double x = s.lp->values[v];
    best.offer(v, product_score(frac_down(x) * table.down(v), frac_up(x) * table.up(v)));
  }
  return best.var;
}

int most_infeasible_choose(const search_state_t& s, std::span<const int> candidates)
{
  argmax_t best;
  for (int v : sorted_candidates(candidates)) {
    const double x = s.lp->values[v];
    best.offer(v, std::min(frac_down(x), frac_up(x)));
  }
  return best.var;
}

int policy_choose(const observation_t& obs, std::span<const int> candidates, const policy_params_t& params)
{
  const auto cands = sorted_candidates(candidates);
  if (obs.num_candidates() != static_cast<int>(cands.size()) ||
      std::any_of(cands.begin(), cands.end(), [&](int v) {
        return v < 0 || v >= obs.num_vars || !obs.candidate_mask[v];
      })) {
    throw misuse_error("observation mask does not match the candidate set");
  }
  if (cands.size() == 1) { return cands.front(); }
  const auto fw = forward(obs, params);
  return argmax_masked(fw.probs, obs.candidate_mask);
}

// ---------------------------------------------------------------------------
// Rules

branch_decision_t strong_rule_t::choose(const search_state_t& s, lp_engine_t& engine)
{
  auto r = strong_branch(s, state_candidates(s), engine);
  branch_decision_t d;
  d.var         = r.chosen;
  d.used_expert = true;
  d.rule_used   = "strong";
  d.scores      = std::move(r.scores);
  d.down_lp     = std::move(r.down_lp);
  d.up_lp       = std::move(r.up_lp);
  return d;
}

branch_decision_t pseudocost_rule_t::choose(const search_state_t& s, lp_engine_t&)
{
  if (s.pseudocosts == nullptr) { throw misuse_error("pseudocost rule needs a pseudocost table"); }
  branch_decision_t d;
  d.var       = pseudocost_choose(s, state_candidates(s), *s.pseudocosts);
  d.rule_used = "pseudocost";
  return d;
}

branch_decision_t most_infeasible_rule_t::choose(const search_state_t& s, lp_engine_t&)
{
  branch_decision_t d;
  d.var       = most_infeasible_choose(s, state_candidates(s));
  d.rule_used = "mostinf";
  return d;
}

mixed_expert_rule_t::mixed_expert_rule_t(double p_expert, std::uint64_t seed)
  : p_expert_(p_expert), seed_(seed), rng_(seed)
{
  if (!(p_expert >= 0.0 && p_expert <= 1.0)) { throw misuse_error("p_expert must lie in [0, 1]"); }
}

std::string mixed_expert_rule_t::name() const
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "mixed:%g", p_expert_);
  return buf;
}

std::unique_ptr<branching_rule_t> mixed_expert_rule_t::clone() const
{
  return std::make_unique<mixed_expert_rule_t>(p_expert_, seed_);
}

branch_decision_t mixed_expert_rule_t::choose(const search_state_t& s, lp_engine_t& engine)
{
  // The coin is drawn on every decision so the stream does not depend on p.
  const double coin = rng_.uniform();
  if (coin < p_expert_) {
    strong_rule_t expert;
    return expert.choose(s, engine);
  }
  pseudocost_rule_t fallback;
  return fallback.choose(s, engine);
}

policy_rule_t::policy_rule_t(std::shared_ptr<const policy_params_t> params, std::string source)
  : params_(std::move(params)), source_(std::move(source))
{
  if (!params_) { throw misuse_error("policy rule needs parameters"); }
}

std::unique_ptr<branching_rule_t> policy_rule_t::clone() const
{
  return std::make_unique<policy_rule_t>(params_, source_);
}

branch_decision_t policy_rule_t::choose(const search_state_t& s, lp_engine_t&)
{
  const auto& cands = state_candidates(s);
  branch_decision_t d;
  d.rule_used = "policy";
  if (cands.size() == 1) {
    d.var = cands.front();
    return d;
  }
  d.var = policy_choose(encode(s), cands, *params_);
  return d;
}

branch_decision_t random_rule_t::choose(const search_state_t& s, lp_engine_t&)
{
  const auto cands = sorted_candidates(state_candidates(s));
  branch_decision_t d;
  d.var       = cands[rng_.below(cands.size())];
  d.rule_used = "random";
  return d;
}

std::unique_ptr<branching_rule_t> make_rule(const std::string& spec, std::uint64_t seed)
{
  const auto colon        = spec.find(':');
  const std::string head  = spec.substr(0, colon);
  const std::string arg   = colon == std::string::npos ? std::string() : spec.substr(colon + 1);
  const bool has_arg      = colon != std::string::npos;
  auto parse_number_error = [&]() { return error("malformed branching rule '" + spec + "'"); };

  if (!has_arg && head == "strong") { return std::make_unique<strong_rule_t>(); }
  if (!has_arg && head == "pseudocost") { return std::make_unique<pseudocost_rule_t>(); }
  if (!has_arg && head == "mostinf") { return std::make_unique<most_infeasible_rule_t>(); }
  if (head == "mixed") {
    double p = default_p_expert;
    if (has_arg) {
      char* end = nullptr;
      p         = std::strtod(arg.c_str(), &end);
      if (arg.empty() || *end != '\0') { throw parse_number_error(); }
    }
    if (!(p >= 0.0 && p <= 1.0)) { throw error("p_expert out of [0, 1] in '" + spec + "'"); }
    return std::make_unique<mixed_expert_rule_t>(p, seed);
  }
  if (head == "policy" && has_arg && !arg.empty()) {
    return std::make_unique<policy_rule_t>(std::make_shared<const policy_params_t>(load_params_file(arg)), arg);
  }
  if (head == "random") {
    std::uint64_t s = seed;
    if (has_arg) {
      char* end = nullptr;
      s         = std::strtoull(arg.c_str(), &end, 10);
      if (arg.empty() || *end != '\0') { throw parse_number_error(); }
    }
    return std::make_unique<random_rule_t>(s);
  }
  throw error("unknown branching rule '" + spec + "'");
}

}  // namespace tspbb
