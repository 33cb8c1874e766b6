/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, tspbb contributors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <tspbb/bnb.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace tspbb {

inline constexpr const char* bench_csv_header = "instance,n,rule,walltime_s,nodes,lp_solves,cost,proven";
inline constexpr double exactness_tol         = 1e-6;

struct bench_row_t {
  std::string instance;
  int n = 0;
  std::string rule;
  double walltime_s      = 0.0;
  std::int64_t nodes     = 0;
  std::int64_t lp_solves = 0;
  double cost            = 0.0;
  bool proven            = false;
  bool operator==(const bench_row_t&) const = default;
};

void write_bench_csv(const std::vector<bench_row_t>& rows, std::ostream& out);
std::vector<bench_row_t> read_bench_csv(std::istream& in);

struct bench_config_t {
  std::vector<int> sizes;
  int count               = 10;
  std::uint64_t base_seed = 1;
  std::vector<std::string> rules;  // rule strings as accepted by make_rule
  std::uint64_t rule_seed = 0;
  solve_limits_t limits;
  /// 1 runs every solve sequentially on one worker (timing mode). More
  /// workers run instances in parallel, which is fine for node counts.
  int threads = 1;
};

/// One row per (instance, rule), instance-major, rules in the given order.
std::vector<bench_row_t> run_benchmark(const bench_config_t& cfg);

struct exactness_violation_t {
  std::string instance;
  double spread;
};

/// Proven instances whose costs differ across rules by more than exactness_tol.
std::vector<exactness_violation_t> check_exactness(const std::vector<bench_row_t>& rows);

struct bucket_summary_t {
  std::string name;  // All, First 80, Last 20
  int count             = 0;
  double baseline_time  = 0.0;
  double candidate_time = 0.0;
  double time_improvement_s   = 0.0;
  double time_improvement_pct = 0.0;
  double baseline_nodes  = 0.0;
  double candidate_nodes = 0.0;
  double node_improvement_pct = 0.0;
};

struct size_summary_t {
  std::string train_label;
  int n         = 0;
  int instances = 0;  // instances compared
  int unproven  = 0;  // instances excluded because a rule did not prove optimality
  std::vector<bucket_summary_t> buckets;
};

struct summary_table_t {
  std::string baseline;
  std::string candidate;
  std::vector<size_summary_t> sizes;
};

/// Sorts each size's instances by baseline wall time (ties by tag); the
/// first floor(0.8 k) form First 80 and the rest Last 20. Throws
/// aggregation_error when the two rules cover different instance sets.
summary_table_t summarize(const std::vector<bench_row_t>& rows,
                          const std::string& baseline,
                          const std::string& candidate,
                          const std::string& train_label = "");

void write_summary_text(const summary_table_t& t, std::ostream& out);
void write_summary_csv(const summary_table_t& t, std::ostream& out);

/// Writes one SVG per (size, candidate) with the full per-instance wall-time
/// series sorted by baseline time and zoomed First 80 / Last 20 panels.
/// Returns the written paths.
std::vector<std::string> plot_walltimes(const std::vector<bench_row_t>& rows,
                                        const std::string& baseline,
                                        const std::string& out_dir);

/// The SVG document for a single size / rule pair.
std::string walltime_svg(const std::vector<bench_row_t>& rows, int n, const std::string& baseline, const std::string& candidate);

}  // namespace tspbb
