/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, tspbb contributors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <tspbb/search_state.hpp>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace tspbb {

inline constexpr int observation_schema_version = 1;
inline constexpr int num_var_features           = 10;
inline constexpr int num_cons_features          = 5;

extern const std::array<const char*, num_var_features> var_feature_names;
extern const std::array<const char*, num_cons_features> cons_feature_names;

struct obs_edge_t {
  int cons;
  int var;
  double weight;
  bool operator==(const obs_edge_t&) const = default;
};

/// Bipartite constraint/variable graph seen by the branching policy.
/// Feature matrices are row-major; >= rows are presented negated as <= rows.
struct observation_t {
  int num_vars = 0;
  int num_cons = 0;
  std::vector<double> var_features;   // num_vars x num_var_features
  std::vector<double> cons_features;  // num_cons x num_cons_features
  std::vector<obs_edge_t> edges;      // row-major order of the constraint matrix
  std::vector<std::uint8_t> candidate_mask;
  int schema_version = observation_schema_version;

  double var_feature(int v, int f) const { return var_features[static_cast<std::size_t>(v) * num_var_features + f]; }
  double cons_feature(int c, int f) const { return cons_features[static_cast<std::size_t>(c) * num_cons_features + f]; }
  int num_candidates() const;
  bool operator==(const observation_t&) const = default;
};

/// Throws misuse_error unless the node LP is optimal.
observation_t encode(const search_state_t& state);

/// FNV-1a over the observation's bytes; stands in for o_t in trajectory logs.
std::uint64_t digest(const observation_t& obs);

struct sample_record_t {
  observation_t observation;
  int action = -1;
  std::string instance;
  int depth     = 0;
  double weight = 1.0;
  bool operator==(const sample_record_t&) const = default;
};

struct transition_t {
  int node_id = 0;
  int depth   = 0;
};

/// Constant -1 per processed node. Logged only; training never reads it.
double reward_surrogate(const transition_t& t);

struct trajectory_step_t {
  std::uint64_t observation_digest;
  double reward;
  int action;
};

struct trajectory_log_t {
  std::vector<trajectory_step_t> steps;
  double total_reward() const;
};

struct dataset_header_t {
  int schema_version = observation_schema_version;
  nlohmann::ordered_json generator;  // free-form generator settings
};

struct dataset_t {
  dataset_header_t header;
  std::vector<sample_record_t> samples;
};

/// JSON-lines: one header object, then one sample per line. Reals are
/// printed with 17 significant digits.
void write_dataset(const dataset_t& ds, std::ostream& out);
dataset_t read_dataset(std::istream& in);
std::string sample_to_json_line(const sample_record_t& s);

}  // namespace tspbb
