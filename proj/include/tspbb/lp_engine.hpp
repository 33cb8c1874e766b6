/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, tspbb contributors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <tspbb/instances.hpp>

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace tspbb {

enum class lp_status_t : std::uint8_t { optimal, infeasible, unbounded, iteration_limit };

const char* to_string(lp_status_t s);

enum class basis_status_t : std::uint8_t { basic, at_lower, at_upper, free_zero };

/// One mark per structural column followed by one per row (the row's logical
/// variable r_i = a_i x). Exactly num_rows entries are basic.
struct lp_basis_t {
  std::vector<basis_status_t> status;
  bool empty() const { return status.empty(); }
  bool operator==(const lp_basis_t&) const = default;
};

struct lp_solution_t {
  lp_status_t status = lp_status_t::infeasible;
  std::vector<double> values;
  double objective = 0.0;
  std::vector<double> duals;
  std::vector<double> reduced_costs;
  std::vector<double> row_activity;
  lp_basis_t basis;
  int iterations = 0;
};

/// Per-variable bounds used for one relaxation solve.
struct variable_bounds_t {
  std::vector<double> lower;
  std::vector<double> upper;

  static variable_bounds_t from_model(const ilp_model_t& m);
  bool operator==(const variable_bounds_t&) const = default;
};

enum class bound_side_t : std::uint8_t { lower, upper };

// Fixed tolerances of the simplex implementation.
inline constexpr double lp_feasibility_tol = 1e-7;
inline constexpr double lp_optimality_tol  = 1e-7;
inline constexpr double lp_pivot_tol       = 1e-10;
inline constexpr int lp_refactor_interval  = 100;

struct lp_settings_t {
  /// 0 selects 50 * (rows + cols).
  int iteration_limit = 0;
  /// Called after every probe with the probed bounds and the warm result.
  std::function<void(const variable_bounds_t&, const lp_solution_t&)> probe_observer;
};

/// Bounded-variable revised simplex over a compiled copy of an ilp_model_t.
/// Phase one minimizes the summed bound violation of the basic variables,
/// which plays the role of artificial variables on violated (including
/// equality) rows. Dantzig pricing; Bland's rule takes over permanently after
/// 3 * (rows + cols) consecutive degenerate pivots. Dense explicit basis
/// inverse, rebuilt every lp_refactor_interval pivots.
///
/// A workspace is not thread-safe; use one per solve.
class lp_engine_t {
 public:
  explicit lp_engine_t(const ilp_model_t& model, lp_settings_t settings = {});

  int num_cols() const { return n_; }
  int num_rows() const { return m_; }

  lp_solution_t solve(const variable_bounds_t& bounds, const lp_basis_t* warm_start = nullptr);

  /// Re-solve after tightening one bound of base's problem, warm-started from
  /// base.basis. bounds are the bounds base was solved with.
  lp_solution_t probe_bound_change(const variable_bounds_t& bounds,
                                   const lp_solution_t& base,
                                   int var,
                                   bound_side_t side,
                                   double value);

  std::int64_t total_iterations() const { return total_iterations_; }
  std::int64_t total_solves() const { return total_solves_; }

 private:
  struct column_t {
    std::vector<int> rows;
    std::vector<double> vals;
  };

  void load_bounds(const variable_bounds_t& bounds);
  bool install_basis(const lp_basis_t* warm);
  void slack_basis();
  bool refactor();
  void compute_basic_values();
  double col_dot(const std::vector<double>& y, int j) const;
  void ftran(int j, std::vector<double>& alpha) const;
  lp_solution_t extract(lp_status_t status, int iterations) const;

  int n_ = 0;
  int m_ = 0;
  lp_settings_t settings_;
  std::vector<column_t> cols_;
  std::vector<double> cost_;
  std::vector<double> row_lo_, row_hi_;

  // working state, size n_ + m_
  std::vector<double> lo_, hi_, x_;
  std::vector<basis_status_t> stat_;
  std::vector<int> head_;
  std::vector<double> binv_;  // m_ x m_, row-major

  std::int64_t total_iterations_ = 0;
  std::int64_t total_solves_     = 0;
};

/// Convenience wrapper: builds a workspace and solves once.
lp_solution_t solve_relaxation(const ilp_model_t& model,
                               const variable_bounds_t& bounds,
                               const lp_basis_t* warm_start = nullptr);

/// Largest violation of row senses and variable bounds by values.
double primal_residual(const ilp_model_t& model, const variable_bounds_t& bounds, std::span<const double> values);

}  // namespace tspbb
