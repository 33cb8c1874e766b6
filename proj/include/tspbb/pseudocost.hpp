/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, tspbb contributors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <vector>

namespace tspbb {

/// Per-variable average objective gain per unit of fractionality, tracked
/// separately for the down (x <= floor) and up (x >= ceil) children.
/// Entries with no observations fall back to the average over all observed
/// entries of the same direction, or 1.0 when nothing has been observed.
class pseudocost_table_t {
 public:
  pseudocost_table_t() = default;
  explicit pseudocost_table_t(int num_vars);

  /// gain is the child LP objective minus the parent's, fraction the
  /// distance the branch moved the variable (f- for down, f+ for up).
  void update(int var, bool up, double gain, double fraction);

  double down(int var) const;
  double up(int var) const;
  int down_count(int var) const { return down_n_[var]; }
  int up_count(int var) const { return up_n_[var]; }
  int size() const { return static_cast<int>(down_sum_.size()); }

 private:
  std::vector<double> down_sum_, up_sum_;
  std::vector<int> down_n_, up_n_;
  double down_total_ = 0.0, up_total_ = 0.0;
  int down_obs_ = 0, up_obs_ = 0;
};

}  // namespace tspbb
