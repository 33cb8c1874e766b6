/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, tspbb contributors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace tspbb {

struct point_t {
  double x;
  double y;
  bool operator==(const point_t&) const = default;
};

/// Euclidean TSP instance. Nodes are 0-based in memory and 1-based in
/// variable names (x_1_2, u_2, ...).
struct tsp_instance_t {
  int n = 0;
  std::uint64_t seed = 0;
  std::vector<point_t> coords;
  std::vector<double> cost;  // row-major n*n

  double c(int i, int j) const { return cost[static_cast<std::size_t>(i) * n + j]; }
  std::string tag() const;
  bool operator==(const tsp_instance_t&) const = default;
};

/// Uniform i.i.d. coordinates on [0,1)^2 from rng_t(seed); unrounded
/// Euclidean costs. Throws invalid_instance_error for n < 3.
tsp_instance_t generate_instance(int n, std::uint64_t seed);
tsp_instance_t instance_from_points(const std::vector<point_t>& pts);

enum class var_kind_t : std::uint8_t { binary, integer, continuous };
enum class row_sense_t : std::uint8_t { le, eq, ge };

struct variable_t {
  std::string name;
  double lower;
  double upper;
  var_kind_t kind;
  bool operator==(const variable_t&) const = default;
};

struct sparse_entry_t {
  int index;
  double value;
  bool operator==(const sparse_entry_t&) const = default;
};

struct constraint_t {
  std::string name;
  std::vector<sparse_entry_t> row;
  row_sense_t sense;
  double rhs;
  bool operator==(const constraint_t&) const = default;
};

/// Minimization ILP. Sparse vectors never hold explicit zeros.
struct ilp_model_t {
  std::string name;
  std::vector<variable_t> vars;
  std::vector<sparse_entry_t> objective;
  std::vector<constraint_t> constraints;

  int num_vars() const { return static_cast<int>(vars.size()); }
  int num_rows() const { return static_cast<int>(constraints.size()); }
  bool is_integer(int j) const { return vars[j].kind != var_kind_t::continuous; }
  std::vector<double> dense_objective() const;
  bool operator==(const ilp_model_t&) const = default;
};

/// Column layout of the MTZ model: x_ij (i != j) row-major, then u_2..u_n.
struct mtz_layout_t {
  int n;
  int x(int i, int j) const { return i * (n - 1) + (j < i ? j : j - 1); }
  int u(int i) const { return n * (n - 1) + (i - 1); }
  int num_x() const { return n * (n - 1); }
  int num_vars() const { return n * (n - 1) + (n - 1); }
};

ilp_model_t build_mtz(const tsp_instance_t& inst);

/// CPLEX-style LP dialect (Minimize / Subject To / Bounds / Generals /
/// Binaries / End). Coefficients are printed with 17 significant digits.
void write_lp(const ilp_model_t& model, std::ostream& out);
ilp_model_t parse_lp(std::istream& in);
std::string lp_file_name(int n, std::uint64_t seed);

/// Successor walk from node 0. values is indexed like build_mtz's columns.
/// Returns 0-based nodes starting at 0; throws not_a_tour_error on subtours.
std::vector<int> extract_tour(const tsp_instance_t& inst, const std::vector<double>& values);
double tour_cost(const tsp_instance_t& inst, const std::vector<int>& tour);

struct brute_force_result_t {
  double cost;
  std::vector<int> tour;
};

/// Enumerates the (n-1)!/2 undirected tours. n <= 12.
brute_force_result_t brute_force_optimal(const tsp_instance_t& inst);

struct manifest_entry_t {
  int n;
  std::uint64_t seed;
  std::optional<double> optimal_cost;
  bool operator==(const manifest_entry_t&) const = default;
};

void write_manifest(const std::vector<manifest_entry_t>& entries, std::ostream& out);
std::vector<manifest_entry_t> read_manifest(std::istream& in);

}  // namespace tspbb
