/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, tspbb contributors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <tspbb/bnb.hpp>
#include <tspbb/observe.hpp>
#include <tspbb/policy.hpp>

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace tspbb {

struct instance_spec_t {
  int n;
  std::uint64_t seed;
};

/// count instances per size with seeds base_seed, base_seed + 1, ...
std::vector<instance_spec_t> instance_specs(const std::vector<int>& sizes, int count, std::uint64_t base_seed);

struct collect_config_t {
  double p_expert = default_p_expert;
  solve_limits_t limits;
  std::uint64_t master_seed = 0;  // mixed with each instance seed for the expert coin
  int threads               = 0;  // 0 = OpenMP default
};

struct collect_entry_t {
  std::string instance;
  int n              = 0;
  std::uint64_t seed = 0;
  int samples        = 0;
  std::int64_t nodes = 0;
  bool skipped       = false;  // solve hit a limit; its samples are dropped
  double objective   = 0.0;
  bool operator==(const collect_entry_t&) const = default;
};

struct collect_result_t {
  dataset_t dataset;
  std::vector<collect_entry_t> manifest;
};

/// Solves each instance with the mixed expert and keeps every expert-flagged
/// decision. Instances run in parallel; results are merged in input order.
collect_result_t collect(const std::vector<instance_spec_t>& specs, const collect_config_t& cfg);

void write_collect_manifest(const std::vector<collect_entry_t>& entries, std::ostream& out);
std::vector<collect_entry_t> read_collect_manifest(std::istream& in);

struct dataset_split_t {
  dataset_t train;
  dataset_t valid;
  dataset_t test;
};

/// Splits by instance tag. With T distinct tags, valid and test each get
/// max(1, floor(0.1 T)) tags and train keeps the rest. Throws split_error
/// for fewer than 3 tags.
dataset_split_t split_dataset(const dataset_t& ds, std::uint64_t seed);

struct train_config_t {
  int batch_size      = 32;
  double lr           = 1e-3;
  int max_epochs      = 200;
  int patience        = 10;
  std::uint64_t seed  = 0;
  double entropy_coef = 0.0;
  int embedding_dim   = policy_embedding_dim;
  std::string params_path;  // recorded in the report; the caller writes the file
};

struct epoch_record_t {
  int epoch;
  double train_loss;
  double valid_loss;
  double valid_top1;
};

struct train_report_t {
  std::vector<epoch_record_t> epochs;
  int best_epoch = 0;
  int clamped    = 0;
  std::string params_path;
  train_config_t config;
  nlohmann::ordered_json to_json() const;
};

struct train_result_t {
  policy_params_t params;
  train_report_t report;
};

/// Minibatch Adam on the imitation loss, early stopping on validation loss,
/// best-validation parameters restored at the end. Throws divergence_error
/// on a non-finite loss.
train_result_t train(const dataset_t& train_set, const dataset_t& valid_set, const train_config_t& cfg);

struct accuracy_t {
  double top1      = 0.0;
  double mean_loss = 0.0;
  int samples      = 0;
};

accuracy_t evaluate_accuracy(const policy_params_t& params, std::span<const sample_record_t> samples);

/// Accuracy of the uniform policy under lowest-index tie-breaking.
double uniform_policy_accuracy(std::span<const sample_record_t> samples);

/// Mean of 1 / (number of candidates).
double mean_reciprocal_candidates(std::span<const sample_record_t> samples);

}  // namespace tspbb
