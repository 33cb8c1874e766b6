/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, tspbb contributors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <tspbb/errors.hpp>
#include <tspbb/lp_engine.hpp>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

namespace tspbb {

namespace {
constexpr double inf = std::numeric_limits<double>::infinity();
}

const char* to_string(lp_status_t s)
{
  switch (s) {
    case lp_status_t::optimal: return "optimal";
    case lp_status_t::infeasible: return "infeasible";
    case lp_status_t::unbounded: return "unbounded";
    case lp_status_t::iteration_limit: return "iteration-limit";
  }
  return "?";
}

variable_bounds_t variable_bounds_t::from_model(const ilp_model_t& m)
{
  variable_bounds_t b;
  b.lower.reserve(m.vars.size());
  b.upper.reserve(m.vars.size());
  for (const auto& v : m.vars) {
    b.lower.push_back(v.lower);
    b.upper.push_back(v.upper);
  }
  return b;
}

lp_engine_t::lp_engine_t(const ilp_model_t& model, lp_settings_t settings)
  : n_(model.num_vars()), m_(model.num_rows()), settings_(settings)
{
  cols_.resize(static_cast<std::size_t>(n_));
  for (int i = 0; i < m_; ++i) {
    for (const auto& e : model.constraints[i].row) {
      if (e.value == 0.0) { continue; }
      cols_[e.index].rows.push_back(i);
      cols_[e.index].vals.push_back(e.value);
    }
  }
  cost_ = model.dense_objective();
  cost_.resize(static_cast<std::size_t>(n_ + m_), 0.0);
  row_lo_.resize(m_);
  row_hi_.resize(m_);
  for (int i = 0; i < m_; ++i) {
    const auto& c = model.constraints[i];
    switch (c.sense) {
      case row_sense_t::le: row_lo_[i] = -inf, row_hi_[i] = c.rhs; break;
      case row_sense_t::eq: row_lo_[i] = c.rhs, row_hi_[i] = c.rhs; break;
      case row_sense_t::ge: row_lo_[i] = c.rhs, row_hi_[i] = inf; break;
    }
  }
  if (settings_.iteration_limit <= 0) { settings_.iteration_limit = 50 * (m_ + n_); }
  lo_.resize(n_ + m_);
  hi_.resize(n_ + m_);
  x_.resize(n_ + m_);
  stat_.resize(n_ + m_);
  head_.resize(m_);
  binv_.resize(static_cast<std::size_t>(m_) * m_);
}

void lp_engine_t::load_bounds(const variable_bounds_t& b)
{
  if (static_cast<int>(b.lower.size()) != n_ || static_cast<int>(b.upper.size()) != n_) {
    throw misuse_error("bound vector size does not match model");
  }
  for (int j = 0; j < n_; ++j) {
    if (!(b.lower[j] <= b.upper[j])) {
      throw misuse_error("lower bound exceeds upper bound on column " + std::to_string(j));
    }
    lo_[j] = b.lower[j];
    hi_[j] = b.upper[j];
  }
  for (int i = 0; i < m_; ++i) {
    lo_[n_ + i] = row_lo_[i];
    hi_[n_ + i] = row_hi_[i];
  }
}

namespace {
basis_status_t resting_status(double lo, double hi, basis_status_t wanted)
{
  if (wanted == basis_status_t::at_upper && hi < inf) { return basis_status_t::at_upper; }
  if (lo > -inf) { return basis_status_t::at_lower; }
  if (hi < inf) { return basis_status_t::at_upper; }
  return basis_status_t::free_zero;
}
}  // namespace

void lp_engine_t::slack_basis()
{
  for (int j = 0; j < n_; ++j) { stat_[j] = resting_status(lo_[j], hi_[j], basis_status_t::at_lower); }
  for (int i = 0; i < m_; ++i) {
    stat_[n_ + i] = basis_status_t::basic;
    head_[i]      = n_ + i;
  }
}

bool lp_engine_t::install_basis(const lp_basis_t* warm)
{
  if (warm == nullptr || static_cast<int>(warm->status.size()) != n_ + m_) { return false; }
  int k = 0;
  for (int j = 0; j < n_ + m_; ++j) {
    if (warm->status[j] == basis_status_t::basic) {
      if (k == m_) { return false; }
      head_[k++] = j;
      stat_[j]   = basis_status_t::basic;
    } else {
      stat_[j] = resting_status(lo_[j], hi_[j], warm->status[j]);
    }
  }
  return k == m_;
}

// Column j of [A, -I].
void lp_engine_t::ftran(int j, std::vector<double>& alpha) const
{
  std::fill(alpha.begin(), alpha.end(), 0.0);
  if (j < n_) {
    const auto& c = cols_[j];
    for (std::size_t k = 0; k < c.rows.size(); ++k) {
      const int r    = c.rows[k];
      const double v = c.vals[k];
      for (int i = 0; i < m_; ++i) { alpha[i] += binv_[static_cast<std::size_t>(i) * m_ + r] * v; }
    }
  } else {
    const int r = j - n_;
    for (int i = 0; i < m_; ++i) { alpha[i] = -binv_[static_cast<std::size_t>(i) * m_ + r]; }
  }
}

double lp_engine_t::col_dot(const std::vector<double>& y, int j) const
{
  if (j >= n_) { return -y[j - n_]; }
  const auto& c = cols_[j];
  double s      = 0.0;
  for (std::size_t k = 0; k < c.rows.size(); ++k) { s += y[c.rows[k]] * c.vals[k]; }
  return s;
}

// Gauss-Jordan inversion of the basis matrix with partial pivoting.
bool lp_engine_t::refactor()
{
  const std::size_t m = static_cast<std::size_t>(m_);
  std::vector<double> b(m * m, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    const int j = head_[k];
    if (j < n_) {
      const auto& c = cols_[j];
      for (std::size_t t = 0; t < c.rows.size(); ++t) { b[c.rows[t] * m + k] = c.vals[t]; }
    } else {
      b[static_cast<std::size_t>(j - n_) * m + k] = -1.0;
    }
  }
  std::fill(binv_.begin(), binv_.end(), 0.0);
  for (std::size_t i = 0; i < m; ++i) { binv_[i * m + i] = 1.0; }
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t piv = col;
    double best     = std::abs(b[col * m + col]);
    for (std::size_t r = col + 1; r < m; ++r) {
      const double v = std::abs(b[r * m + col]);
      if (v > best) {
        best = v;
        piv  = r;
      }
    }
    if (best < lp_pivot_tol) { return false; }
    if (piv != col) {
      std::swap_ranges(b.begin() + piv * m, b.begin() + piv * m + m, b.begin() + col * m);
      std::swap_ranges(binv_.begin() + piv * m, binv_.begin() + piv * m + m, binv_.begin() + col * m);
    }
    const double inv_p = 1.0 / b[col * m + col];
    for (std::size_t t = 0; t < m; ++t) {
      b[col * m + t] *= inv_p;
      binv_[col * m + t] *= inv_p;
    }
    for (std::size_t r = 0; r < m; ++r) {
      if (r == col) { continue; }
      const double f = b[r * m + col];
      if (f == 0.0) { continue; }
      for (std::size_t t = 0; t < m; ++t) {
        b[r * m + t] -= f * b[col * m + t];
        binv_[r * m + t] -= f * binv_[col * m + t];
      }
    }
  }
  return true;
}

void lp_engine_t::compute_basic_values()
{
  for (int j = 0; j < n_ + m_; ++j) {
    switch (stat_[j]) {
      case basis_status_t::at_lower: x_[j] = lo_[j]; break;
      case basis_status_t::at_upper: x_[j] = hi_[j]; break;
      case basis_status_t::free_zero: x_[j] = 0.0; break;
      case basis_status_t::basic: break;
    }
  }
  // B x_B = -N x_N
  std::vector<double> rhs(m_, 0.0);
  for (int j = 0; j < n_; ++j) {
    if (stat_[j] == basis_status_t::basic || x_[j] == 0.0) { continue; }
    const auto& c = cols_[j];
    for (std::size_t k = 0; k < c.rows.size(); ++k) { rhs[c.rows[k]] -= c.vals[k] * x_[j]; }
  }
  for (int i = 0; i < m_; ++i) {
    const int j = n_ + i;
    if (stat_[j] != basis_status_t::basic) { rhs[i] += x_[j]; }
  }
  for (int i = 0; i < m_; ++i) {
    double s          = 0.0;
    const double* row = &binv_[static_cast<std::size_t>(i) * m_];
    for (int k = 0; k < m_; ++k) { s += row[k] * rhs[k]; }
    x_[head_[i]] = s;
  }
}

lp_solution_t lp_engine_t::solve(const variable_bounds_t& bounds, const lp_basis_t* warm_start)
{
  ++total_solves_;
  load_bounds(bounds);
  if (!install_basis(warm_start) || !refactor()) {
    slack_basis();
    refactor();
  }
  compute_basic_values();

  const int total       = n_ + m_;
  const int degen_limit = 3 * (m_ + n_);
  std::vector<double> y(m_), alpha(m_), cb(m_);
  int iter           = 0;
  int since_refactor = 0;
  int degenerate_run = 0;
  bool bland         = false;
  int recheck        = 0;

  for (;;) {
    // Phase selection: cost on basic variables violating their bounds.
    bool phase_one = false;
    for (int i = 0; i < m_; ++i) {
      const int j    = head_[i];
      const double v = x_[j];
      if (v < lo_[j] - lp_feasibility_tol) {
        cb[i]     = -1.0;
        phase_one = true;
      } else if (v > hi_[j] + lp_feasibility_tol) {
        cb[i]     = 1.0;
        phase_one = true;
      } else {
        cb[i] = 0.0;
      }
    }
    if (!phase_one) {
      for (int i = 0; i < m_; ++i) { cb[i] = cost_[head_[i]]; }
    }
    // y = cb^T B^-1
    std::fill(y.begin(), y.end(), 0.0);
    for (int i = 0; i < m_; ++i) {
      if (cb[i] == 0.0) { continue; }
      const double* row = &binv_[static_cast<std::size_t>(i) * m_];
      for (int k = 0; k < m_; ++k) { y[k] += cb[i] * row[k]; }
    }

    // Pricing.
    int enter     = -1;
    double best_d = 0.0;
    double enter_d = 0.0;
    for (int j = 0; j < total; ++j) {
      const basis_status_t s = stat_[j];
      if (s == basis_status_t::basic) { continue; }
      if (lo_[j] == hi_[j]) { continue; }
      const double cj = phase_one ? 0.0 : cost_[j];
      const double d  = cj - col_dot(y, j);
      bool eligible   = false;
      if (s == basis_status_t::at_lower) {
        eligible = d < -lp_optimality_tol;
      } else if (s == basis_status_t::at_upper) {
        eligible = d > lp_optimality_tol;
      } else {
        eligible = std::abs(d) > lp_optimality_tol;
      }
      if (!eligible) { continue; }
      if (bland) {
        enter   = j;
        enter_d = d;
        break;
      }
      if (std::abs(d) > best_d) {
        best_d  = std::abs(d);
        enter   = j;
        enter_d = d;
      }
    }

    if (enter < 0) {
      // Confirm on a fresh factorization before declaring the outcome.
      if (since_refactor > 0 && recheck < 3) {
        ++recheck;
        if (refactor()) {
          since_refactor = 0;
          compute_basic_values();
          continue;
        }
      }
      return extract(phase_one ? lp_status_t::infeasible : lp_status_t::optimal, iter);
    }
    if (iter >= settings_.iteration_limit) { return extract(lp_status_t::iteration_limit, iter); }
    ++iter;
    ++total_iterations_;

    const double dir = enter_d < 0 ? 1.0 : -1.0;
    ftran(enter, alpha);

    // Ratio test. Basic i moves by -dir * alpha_i per unit step.
    double t_best    = hi_[enter] - lo_[enter];  // bound flip
    int leave_row    = -1;
    bool leave_upper = false;
    double best_piv  = 0.0;
    for (int i = 0; i < m_; ++i) {
      const double a = alpha[i];
      if (std::abs(a) < lp_pivot_tol) { continue; }
      const double delta = -dir * a;
      const int j        = head_[i];
      const double v     = x_[j];
      double t           = inf;
      bool to_upper      = false;
      if (v < lo_[j] - lp_feasibility_tol) {
        if (!phase_one || delta < 0) { continue; }
        t = (lo_[j] - v) / delta;
      } else if (v > hi_[j] + lp_feasibility_tol) {
        if (!phase_one || delta > 0) { continue; }
        t        = (v - hi_[j]) / -delta;
        to_upper = true;
      } else if (delta < 0) {
        if (lo_[j] == -inf) { continue; }
        t = std::max(0.0, (v - lo_[j]) / -delta);
      } else {
        if (hi_[j] == inf) { continue; }
        t        = std::max(0.0, (hi_[j] - v) / delta);
        to_upper = true;
      }
      bool take = false;
      if (leave_row < 0 && t <= t_best) {
        take = t < t_best || (t == t_best);
      } else if (leave_row >= 0) {
        if (t < t_best - 1e-12) {
          take = true;
        } else if (t <= t_best + 1e-12) {
          take = bland ? j < head_[leave_row] : std::abs(a) > best_piv;
        }
      }
      if (take) {
        t_best      = t;
        leave_row   = i;
        leave_upper = to_upper;
        best_piv    = std::abs(a);
      }
    }

    if (t_best == inf) {
      if (phase_one) { return extract(lp_status_t::infeasible, iter); }
      return extract(lp_status_t::unbounded, iter);
    }

    if (t_best <= 1e-12) {
      if (++degenerate_run >= degen_limit) { bland = true; }
    } else {
      degenerate_run = 0;
    }

    // Primal update.
    if (t_best > 0) {
      x_[enter] += dir * t_best;
      for (int i = 0; i < m_; ++i) {
        if (alpha[i] != 0.0) { x_[head_[i]] -= dir * t_best * alpha[i]; }
      }
    }

    if (leave_row < 0) {
      stat_[enter] = dir > 0 ? basis_status_t::at_upper : basis_status_t::at_lower;
      x_[enter]    = dir > 0 ? hi_[enter] : lo_[enter];
      continue;
    }

    const int leave = head_[leave_row];
    stat_[leave]    = leave_upper ? basis_status_t::at_upper : basis_status_t::at_lower;
    x_[leave]       = leave_upper ? hi_[leave] : lo_[leave];
    stat_[enter]    = basis_status_t::basic;
    head_[leave_row] = enter;

    // Product-form update of the explicit inverse.
    const std::size_t m  = static_cast<std::size_t>(m_);
    const double inv_p   = 1.0 / alpha[leave_row];
    double* prow         = &binv_[static_cast<std::size_t>(leave_row) * m];
    for (std::size_t k = 0; k < m; ++k) { prow[k] *= inv_p; }
    for (int i = 0; i < m_; ++i) {
      if (i == leave_row || alpha[i] == 0.0) { continue; }
      const double f = alpha[i];
      double* row    = &binv_[static_cast<std::size_t>(i) * m];
      for (std::size_t k = 0; k < m; ++k) { row[k] -= f * prow[k]; }
    }

    if (++since_refactor >= lp_refactor_interval) {
      if (!refactor()) {
        // Numerically singular basis: restart from the slack basis.
        slack_basis();
        refactor();
      }
      since_refactor = 0;
      compute_basic_values();
    }
  }
}

lp_solution_t lp_engine_t::extract(lp_status_t status, int iterations) const
{
  lp_solution_t sol;
  sol.status     = status;
  sol.iterations = iterations;
  sol.values.assign(x_.begin(), x_.begin() + n_);
  sol.basis.status = stat_;
  sol.row_activity.assign(x_.begin() + n_, x_.end());
  double obj = 0.0;
  for (int j = 0; j < n_; ++j) { obj += cost_[j] * x_[j]; }
  sol.objective = obj;

  std::vector<double> y(m_, 0.0);
  for (int i = 0; i < m_; ++i) {
    const double c = cost_[head_[i]];
    if (c == 0.0) { continue; }
    const double* row = &binv_[static_cast<std::size_t>(i) * m_];
    for (int k = 0; k < m_; ++k) { y[k] += c * row[k]; }
  }
  // Logical column of row i is -e_i, so its reduced cost is y_i; report the
  // conventional dual (d objective / d rhs), which is also y_i.
  sol.duals = y;
  sol.reduced_costs.resize(n_);
  for (int j = 0; j < n_; ++j) {
    sol.reduced_costs[j] = stat_[j] == basis_status_t::basic ? 0.0 : cost_[j] - col_dot(y, j);
  }
  return sol;
}

lp_solution_t lp_engine_t::probe_bound_change(const variable_bounds_t& bounds,
                                              const lp_solution_t& base,
                                              int var,
                                              bound_side_t side,
                                              double value)
{
  if (base.status != lp_status_t::optimal) { throw misuse_error("probe requires an optimal base solution"); }
  variable_bounds_t b = bounds;
  if (side == bound_side_t::lower) {
    b.lower[var] = std::max(b.lower[var], value);
  } else {
    b.upper[var] = std::min(b.upper[var], value);
  }
  lp_solution_t sol;
  if (b.lower[var] > b.upper[var]) {
    sol.status = lp_status_t::infeasible;
  } else {
    sol = solve(b, &base.basis);
  }
  if (settings_.probe_observer) { settings_.probe_observer(b, sol); }
  return sol;
}

lp_solution_t solve_relaxation(const ilp_model_t& model, const variable_bounds_t& bounds, const lp_basis_t* warm_start)
{
  lp_engine_t engine(model);
  return engine.solve(bounds, warm_start);
}

double primal_residual(const ilp_model_t& model, const variable_bounds_t& bounds, std::span<const double> values)
{
  double worst = 0.0;
  for (int j = 0; j < model.num_vars(); ++j) {
    worst = std::max(worst, bounds.lower[j] - values[j]);
    worst = std::max(worst, values[j] - bounds.upper[j]);
  }
  for (const auto& c : model.constraints) {
    double a = 0.0;
    for (const auto& e : c.row) { a += e.value * values[e.index]; }
    switch (c.sense) {
      case row_sense_t::le: worst = std::max(worst, a - c.rhs); break;
      case row_sense_t::ge: worst = std::max(worst, c.rhs - a); break;
      case row_sense_t::eq: worst = std::max(worst, std::abs(a - c.rhs)); break;
    }
  }
  return worst;
}

}  // namespace tspbb
