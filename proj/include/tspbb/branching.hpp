/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, tspbb contributors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <tspbb/lp_engine.hpp>
#include <tspbb/policy.hpp>
#include <tspbb/rng.hpp>
#include <tspbb/search_state.hpp>

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tspbb {

inline constexpr double score_epsilon      = 1e-6;
inline constexpr double infeasible_gain    = 1e12;
inline constexpr double default_p_expert   = 0.05;

struct branch_score_t {
  int var          = -1;
  double down_gain = 0.0;  // infeasible_gain when the child LP is infeasible
  double up_gain   = 0.0;
  double score     = 0.0;
};

inline double product_score(double down_gain, double up_gain)
{
  return (down_gain > score_epsilon ? down_gain : score_epsilon) * (up_gain > score_epsilon ? up_gain : score_epsilon);
}

struct branch_decision_t {
  int var          = -1;
  bool used_expert = false;
  const char* rule_used = "";
  std::vector<branch_score_t> scores;
  // Child relaxations solved while deciding (strong branching only).
  std::optional<lp_solution_t> down_lp;
  std::optional<lp_solution_t> up_lp;
};

struct strong_branch_result_t {
  int chosen = -1;
  std::vector<branch_score_t> scores;  // ascending variable index
  std::optional<lp_solution_t> down_lp;
  std::optional<lp_solution_t> up_lp;
  int lp_solves = 0;
};

/// Solves both children of every candidate with warm-started probes.
/// Throws rule_failure_error if any probe hits the LP iteration limit.
strong_branch_result_t strong_branch(const search_state_t& s, std::span<const int> candidates, lp_engine_t& engine);

int pseudocost_choose(const search_state_t& s, std::span<const int> candidates, const pseudocost_table_t& table);
int most_infeasible_choose(const search_state_t& s, std::span<const int> candidates);
int policy_choose(const observation_t& obs, std::span<const int> candidates, const policy_params_t& params);

class branching_rule_t {
 public:
  virtual ~branching_rule_t() = default;
  virtual std::string name() const = 0;
  virtual branch_decision_t choose(const search_state_t& s, lp_engine_t& engine) = 0;
  /// Fresh copy with the initial random state, for a new solve.
  virtual std::unique_ptr<branching_rule_t> clone() const = 0;
};

class strong_rule_t final : public branching_rule_t {
 public:
  std::string name() const override { return "strong"; }
  branch_decision_t choose(const search_state_t& s, lp_engine_t& engine) override;
  std::unique_ptr<branching_rule_t> clone() const override { return std::make_unique<strong_rule_t>(); }
};

class pseudocost_rule_t final : public branching_rule_t {
 public:
  std::string name() const override { return "pseudocost"; }
  branch_decision_t choose(const search_state_t& s, lp_engine_t& engine) override;
  std::unique_ptr<branching_rule_t> clone() const override { return std::make_unique<pseudocost_rule_t>(); }
};

class most_infeasible_rule_t final : public branching_rule_t {
 public:
  std::string name() const override { return "mostinf"; }
  branch_decision_t choose(const search_state_t& s, lp_engine_t& engine) override;
  std::unique_ptr<branching_rule_t> clone() const override { return std::make_unique<most_infeasible_rule_t>(); }
};

/// Strong branching with probability p_expert, pseudocost otherwise.
class mixed_expert_rule_t final : public branching_rule_t {
 public:
  mixed_expert_rule_t(double p_expert, std::uint64_t seed);
  std::string name() const override;
  branch_decision_t choose(const search_state_t& s, lp_engine_t& engine) override;
  std::unique_ptr<branching_rule_t> clone() const override;
  double p_expert() const { return p_expert_; }

 private:
  double p_expert_;
  std::uint64_t seed_;
  rng_t rng_;
};

class policy_rule_t final : public branching_rule_t {
 public:
  policy_rule_t(std::shared_ptr<const policy_params_t> params, std::string source);
  std::string name() const override { return "policy:" + source_; }
  branch_decision_t choose(const search_state_t& s, lp_engine_t& engine) override;
  std::unique_ptr<branching_rule_t> clone() const override;

 private:
  std::shared_ptr<const policy_params_t> params_;
  std::string source_;
};

class random_rule_t final : public branching_rule_t {
 public:
  explicit random_rule_t(std::uint64_t seed) : seed_(seed), rng_(seed) {}
  std::string name() const override { return "random:" + std::to_string(seed_); }
  branch_decision_t choose(const search_state_t& s, lp_engine_t& engine) override;
  std::unique_ptr<branching_rule_t> clone() const override { return std::make_unique<random_rule_t>(seed_); }

 private:
  std::uint64_t seed_;
  rng_t rng_;
};

/// Parses strong | pseudocost | mostinf | mixed:<p> | policy:<params-file> | random:<seed>.
/// seed feeds the mixed rule's coin. Throws error on an unknown rule string.
std::unique_ptr<branching_rule_t> make_rule(const std::string& spec, std::uint64_t seed = 0);

}  // namespace tspbb
