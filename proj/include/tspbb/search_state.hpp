/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, tspbb contributors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <tspbb/instances.hpp>
#include <tspbb/lp_engine.hpp>
#include <tspbb/pseudocost.hpp>

#include <cmath>
#include <limits>
#include <vector>

namespace tspbb {

inline constexpr double integrality_tol = 1e-6;

/// Read-only view of the solver state at a node about to be branched on.
struct search_state_t {
  const ilp_model_t* model           = nullptr;
  const variable_bounds_t* bounds    = nullptr;
  const lp_solution_t* lp            = nullptr;
  const std::vector<int>* candidates = nullptr;  // fractional set, ascending
  const pseudocost_table_t* pseudocosts = nullptr;
  int node_id  = 0;
  int depth    = 0;
  double incumbent = std::numeric_limits<double>::infinity();
};

/// Integer-kind variables whose LP value is more than integrality_tol away
/// from the nearest integer; ascending index order.
std::vector<int> fractional_set(const ilp_model_t& model, const std::vector<double>& values);

inline double frac_down(double x) { return x - std::floor(x); }
inline double frac_up(double x) { return std::ceil(x) - x; }

}  // namespace tspbb
