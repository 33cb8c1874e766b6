/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, tspbb contributors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <tspbb/observe.hpp>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace tspbb {

inline constexpr int policy_embedding_dim = 32;

struct tensor_t {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;  // row-major

  tensor_t() = default;
  tensor_t(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}
  double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
  bool operator==(const tensor_t&) const = default;
};

/// Tensor layout shared by parameters, gradients and optimizer moments.
///
/// var_embed:  F_v x d (+ d bias)        cons_embed: F_c x d (+ d bias)
/// cons_msg:   (2d+1) x d (+ d bias); input rows are [constraint; variable; edge weight]
/// var_msg:    (2d+1) x d (+ d bias); input rows are [variable; constraint; edge weight]
/// head:       d x d (+ d bias), then d x 1 (+ 1 bias)
struct gcnn_tensors_t {
  static constexpr int count = 12;
  enum index : int {
    var_w, var_b, cons_w, cons_b, cons_msg_w, cons_msg_b, var_msg_w, var_msg_b, head_w1, head_b1, head_w2, head_b2
  };
  static const std::array<const char*, count> names;

  int d = policy_embedding_dim;
  std::array<tensor_t, count> t;

  static gcnn_tensors_t zeros(int d = policy_embedding_dim);
  tensor_t& operator[](int k) { return t[k]; }
  const tensor_t& operator[](int k) const { return t[k]; }
  std::size_t num_scalars() const;
  bool same_shape(const gcnn_tensors_t& o) const;
  bool operator==(const gcnn_tensors_t&) const = default;
};

struct policy_params_t : gcnn_tensors_t {
  int schema_version = observation_schema_version;
  bool operator==(const policy_params_t&) const = default;
};

struct gradient_set_t : gcnn_tensors_t {
  void add(const gradient_set_t& o, double scale = 1.0);
};

/// Glorot-uniform affine weights, zero biases, zeroed final score layer.
policy_params_t init_params(std::uint64_t seed, int d = policy_embedding_dim);

/// Intermediate activations kept for the backward pass.
struct forward_trace_t {
  std::vector<double> var_pre, var_h0;    // V x d
  std::vector<double> cons_pre, cons_h0;  // C x d
  std::vector<double> cmsg_pre;           // E x d
  std::vector<double> cons_h1;            // C x d
  std::vector<double> vmsg_pre;           // E x d
  std::vector<double> var_h1;             // V x d
  std::vector<double> head_pre;           // V x d
  std::vector<int> cons_deg, var_deg;
};

struct forward_result_t {
  std::vector<double> logits;
  std::vector<double> probs;      // exactly 0 off-mask
  std::vector<double> log_probs;  // -inf off-mask
  forward_trace_t trace;
};

/// Throws schema_error on a schema/dimension mismatch, misuse_error on an
/// empty mask.
forward_result_t forward(const observation_t& obs, const policy_params_t& params);

/// Masked argmax with ties to the lower index.
int argmax_masked(const std::vector<double>& probs, const std::vector<std::uint8_t>& mask);

struct loss_result_t {
  double loss = 0.0;
  gradient_set_t grads;
  int clamped = 0;  // samples whose action probability fell below 1e-300
};

/// Weighted mean of -log pi(a*|s) - entropy_coef * H(pi(.|s)) and its exact
/// gradient. OpenMP-parallel over fixed-size shards; shard partials are
/// combined with compensated summation in shard order, so the result does
/// not depend on the thread count.
loss_result_t loss_and_grad(std::span<const sample_record_t> batch,
                            const policy_params_t& params,
                            double entropy_coef = 0.0);

/// Single-threaded reference of loss_and_grad (plain accumulation).
loss_result_t loss_and_grad_serial(std::span<const sample_record_t> batch,
                                   const policy_params_t& params,
                                   double entropy_coef = 0.0);

/// Loss only; batch mean, no gradient.
double batch_loss(std::span<const sample_record_t> batch, const policy_params_t& params, double entropy_coef = 0.0);

struct adam_state_t {
  gradient_set_t m;
  gradient_set_t v;
  int step = 0;
  static adam_state_t zeros_like(const gcnn_tensors_t& p);
};

struct adam_config_t {
  double beta1   = 0.9;
  double beta2   = 0.999;
  double epsilon = 1e-8;
};

struct adam_result_t {
  policy_params_t params;
  adam_state_t state;
};

adam_result_t adam_step(const policy_params_t& params,
                        const gradient_set_t& grads,
                        const adam_state_t& state,
                        double lr,
                        const adam_config_t& cfg = {});

/// Binary container, little-endian:
///   8 bytes magic "TSPGCNN\x01", u32 schema_version, u32 d, u32 tensor count,
///   then per tensor: u32 rows, u32 cols, rows*cols IEEE-754 doubles (row-major).
void save_params(const policy_params_t& p, std::ostream& out);
policy_params_t load_params(std::istream& in);
void save_params_file(const policy_params_t& p, const std::string& path);
policy_params_t load_params_file(const std::string& path);

}  // namespace tspbb
