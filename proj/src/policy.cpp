/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, tspbb contributors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <tspbb/errors.hpp>
#include <tspbb/policy.hpp>
#include <tspbb/rng.hpp>
#include <tspbb/util.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

namespace tspbb {

const std::array<const char*, gcnn_tensors_t::count> gcnn_tensors_t::names = {
  "var_embed.w", "var_embed.b", "cons_embed.w", "cons_embed.b", "cons_msg.w", "cons_msg.b",
  "var_msg.w",   "var_msg.b",   "head.w1",      "head.b1",      "head.w2",    "head.b2"};

gcnn_tensors_t gcnn_tensors_t::zeros(int d)
{
  gcnn_tensors_t g;
  g.d            = d;
  g.t[var_w]     = tensor_t(num_var_features, d);
  g.t[var_b]     = tensor_t(1, d);
  g.t[cons_w]    = tensor_t(num_cons_features, d);
  g.t[cons_b]    = tensor_t(1, d);
  g.t[cons_msg_w] = tensor_t(2 * d + 1, d);
  g.t[cons_msg_b] = tensor_t(1, d);
  g.t[var_msg_w] = tensor_t(2 * d + 1, d);
  g.t[var_msg_b] = tensor_t(1, d);
  g.t[head_w1]   = tensor_t(d, d);
  g.t[head_b1]   = tensor_t(1, d);
  g.t[head_w2]   = tensor_t(d, 1);
  g.t[head_b2]   = tensor_t(1, 1);
  return g;
}

std::size_t gcnn_tensors_t::num_scalars() const
{
  std::size_t s = 0;
  for (const auto& x : t) { s += x.data.size(); }
  return s;
}

bool gcnn_tensors_t::same_shape(const gcnn_tensors_t& o) const
{
  if (d != o.d) { return false; }
  for (int k = 0; k < count; ++k) {
    if (t[k].rows != o.t[k].rows || t[k].cols != o.t[k].cols) { return false; }
  }
  return true;
}

void gradient_set_t::add(const gradient_set_t& o, double scale)
{
  for (int k = 0; k < count; ++k) {
    auto& a       = t[k].data;
    const auto& b = o.t[k].data;
    for (std::size_t i = 0; i < a.size(); ++i) { a[i] += scale * b[i]; }
  }
}

policy_params_t init_params(std::uint64_t seed, int d)
{
  policy_params_t p;
  static_cast<gcnn_tensors_t&>(p) = gcnn_tensors_t::zeros(d);
  rng_t rng(seed);
  for (int k : {gcnn_tensors_t::var_w, gcnn_tensors_t::cons_w, gcnn_tensors_t::cons_msg_w,
                gcnn_tensors_t::var_msg_w, gcnn_tensors_t::head_w1}) {
    auto& w            = p.t[k];
    const double limit = std::sqrt(6.0 / (w.rows + w.cols));
    for (double& x : w.data) { x = rng.uniform(-limit, limit); }
  }
  return p;
}

namespace {

// out[R x d] = in[R x K] * W[row0 : row0+K, :]  (+ bias when given)
void affine(const double* in, int rows, int k, const tensor_t& w, int row0, const tensor_t* bias, double* out)
{
  const int d = w.cols;
  for (int r = 0; r < rows; ++r) {
    double* o = out + static_cast<std::size_t>(r) * d;
    if (bias) {
      std::copy(bias->data.begin(), bias->data.end(), o);
    } else {
      std::fill(o, o + d, 0.0);
    }
    const double* x = in + static_cast<std::size_t>(r) * k;
    for (int i = 0; i < k; ++i) {
      const double xi = x[i];
      if (xi == 0.0) { continue; }
      const double* wr = &w.data[static_cast<std::size_t>(row0 + i) * d];
      for (int c = 0; c < d; ++c) { o[c] += xi * wr[c]; }
    }
  }
}

// dW[row0 : row0+K, :] += in^T * g      in: R x K, g: R x d
void accumulate_weight_grad(const double* in, int rows, int k, const double* g, tensor_t& dw, int row0)
{
  const int d = dw.cols;
  for (int r = 0; r < rows; ++r) {
    const double* x  = in + static_cast<std::size_t>(r) * k;
    const double* gr = g + static_cast<std::size_t>(r) * d;
    for (int i = 0; i < k; ++i) {
      const double xi = x[i];
      if (xi == 0.0) { continue; }
      double* o = &dw.data[static_cast<std::size_t>(row0 + i) * d];
      for (int c = 0; c < d; ++c) { o[c] += xi * gr[c]; }
    }
  }
}

// out[R x K] += g[R x d] * W[row0 : row0+K, :]^T
void backprop_input(const double* g, int rows, const tensor_t& w, int row0, int k, double* out)
{
  const int d = w.cols;
  for (int r = 0; r < rows; ++r) {
    const double* gr = g + static_cast<std::size_t>(r) * d;
    double* o        = out + static_cast<std::size_t>(r) * k;
    for (int i = 0; i < k; ++i) {
      const double* wr = &w.data[static_cast<std::size_t>(row0 + i) * d];
      double s         = 0.0;
      for (int c = 0; c < d; ++c) { s += gr[c] * wr[c]; }
      o[i] += s;
    }
  }
}

void relu_into(const std::vector<double>& pre, std::vector<double>& out)
{
  out.resize(pre.size());
  for (std::size_t i = 0; i < pre.size(); ++i) { out[i] = pre[i] <= 0.0 ? 0.0 : pre[i]; }
}

void check_schema(const observation_t& obs, const policy_params_t& p)
{
  if (obs.schema_version != p.schema_version) {
    throw schema_error("observation schema " + std::to_string(obs.schema_version) + " != params schema " +
                       std::to_string(p.schema_version));
  }
  if (p.t[gcnn_tensors_t::var_w].rows != num_var_features || p.t[gcnn_tensors_t::cons_w].rows != num_cons_features) {
    throw schema_error("params feature widths do not match the observation schema");
  }
  if (static_cast<int>(obs.var_features.size()) != obs.num_vars * num_var_features ||
      static_cast<int>(obs.cons_features.size()) != obs.num_cons * num_cons_features ||
      static_cast<int>(obs.candidate_mask.size()) != obs.num_vars) {
    throw schema_error("observation arrays do not match their declared sizes");
  }
}

}  // namespace

forward_result_t forward(const observation_t& obs, const policy_params_t& p)
{
  check_schema(obs, p);
  const int nv = obs.num_vars, nc = obs.num_cons, d = p.d;
  const int ne = static_cast<int>(obs.edges.size());
  using T      = gcnn_tensors_t;
  forward_result_t res;
  auto& tr = res.trace;

  tr.var_pre.resize(static_cast<std::size_t>(nv) * d);
  tr.cons_pre.resize(static_cast<std::size_t>(nc) * d);
  affine(obs.var_features.data(), nv, num_var_features, p.t[T::var_w], 0, &p.t[T::var_b], tr.var_pre.data());
  affine(obs.cons_features.data(), nc, num_cons_features, p.t[T::cons_w], 0, &p.t[T::cons_b], tr.cons_pre.data());
  relu_into(tr.var_pre, tr.var_h0);
  relu_into(tr.cons_pre, tr.cons_h0);

  tr.cons_deg.assign(nc, 0);
  tr.var_deg.assign(nv, 0);
  for (const auto& e : obs.edges) {
    ++tr.cons_deg[e.cons];
    ++tr.var_deg[e.var];
  }

  // constraint side: message(c, v) = relu(W [h_c; h_v; w] + b)
  std::vector<double> self(static_cast<std::size_t>(nc) * d), nbr(static_cast<std::size_t>(nv) * d);
  affine(tr.cons_h0.data(), nc, d, p.t[T::cons_msg_w], 0, nullptr, self.data());
  affine(tr.var_h0.data(), nv, d, p.t[T::cons_msg_w], d, nullptr, nbr.data());
  const double* ww = &p.t[T::cons_msg_w].data[static_cast<std::size_t>(2 * d) * d];
  const double* bb = p.t[T::cons_msg_b].data.data();
  tr.cmsg_pre.resize(static_cast<std::size_t>(ne) * d);
  tr.cons_h1 = tr.cons_h0;
  for (int k = 0; k < ne; ++k) {
    const auto& e   = obs.edges[k];
    double* pre     = &tr.cmsg_pre[static_cast<std::size_t>(k) * d];
    const double* a = &self[static_cast<std::size_t>(e.cons) * d];
    const double* b = &nbr[static_cast<std::size_t>(e.var) * d];
    double* h       = &tr.cons_h1[static_cast<std::size_t>(e.cons) * d];
    const double inv = 1.0 / tr.cons_deg[e.cons];
    for (int c = 0; c < d; ++c) {
      pre[c] = a[c] + b[c] + e.weight * ww[c] + bb[c];
      if (!(pre[c] <= 0.0)) { h[c] += inv * pre[c]; }
    }
  }

  // variable side: message(v, c) = relu(W [h_v; h'_c; w] + b)
  self.assign(static_cast<std::size_t>(nv) * d, 0.0);
  nbr.assign(static_cast<std::size_t>(nc) * d, 0.0);
  affine(tr.var_h0.data(), nv, d, p.t[T::var_msg_w], 0, nullptr, self.data());
  affine(tr.cons_h1.data(), nc, d, p.t[T::var_msg_w], d, nullptr, nbr.data());
  ww = &p.t[T::var_msg_w].data[static_cast<std::size_t>(2 * d) * d];
  bb = p.t[T::var_msg_b].data.data();
  tr.vmsg_pre.resize(static_cast<std::size_t>(ne) * d);
  tr.var_h1 = tr.var_h0;
  for (int k = 0; k < ne; ++k) {
    const auto& e    = obs.edges[k];
    double* pre      = &tr.vmsg_pre[static_cast<std::size_t>(k) * d];
    const double* a  = &self[static_cast<std::size_t>(e.var) * d];
    const double* b  = &nbr[static_cast<std::size_t>(e.cons) * d];
    double* h        = &tr.var_h1[static_cast<std::size_t>(e.var) * d];
    const double inv = 1.0 / tr.var_deg[e.var];
    for (int c = 0; c < d; ++c) {
      pre[c] = a[c] + b[c] + e.weight * ww[c] + bb[c];
      if (!(pre[c] <= 0.0)) { h[c] += inv * pre[c]; }
    }
  }

  tr.head_pre.resize(static_cast<std::size_t>(nv) * d);
  affine(tr.var_h1.data(), nv, d, p.t[T::head_w1], 0, &p.t[T::head_b1], tr.head_pre.data());
  res.logits.assign(nv, 0.0);
  const double* w2 = p.t[T::head_w2].data.data();
  const double b2  = p.t[T::head_b2].data[0];
  for (int v = 0; v < nv; ++v) {
    const double* z = &tr.head_pre[static_cast<std::size_t>(v) * d];
    double s        = b2;
    for (int c = 0; c < d; ++c) {
      if (!(z[c] <= 0.0)) { s += z[c] * w2[c]; }
    }
    res.logits[v] = s;
  }

  // masked softmax
  double mx = -std::numeric_limits<double>::infinity();
  for (int v = 0; v < nv; ++v) {
    if (obs.candidate_mask[v]) { mx = std::max(mx, res.logits[v]); }
  }
  if (mx == -std::numeric_limits<double>::infinity()) { throw misuse_error("observation has an empty candidate mask"); }
  // summed in sorted order so the normalizer does not depend on variable labels
  std::vector<double> terms;
  for (int v = 0; v < nv; ++v) {
    if (obs.candidate_mask[v]) { terms.push_back(std::exp(res.logits[v] - mx)); }
  }
  std::sort(terms.begin(), terms.end());
  double z = 0.0;
  for (double t : terms) { z += t; }
  const double lse = mx + std::log(z);
  res.probs.assign(nv, 0.0);
  res.log_probs.assign(nv, -std::numeric_limits<double>::infinity());
  for (int v = 0; v < nv; ++v) {
    if (!obs.candidate_mask[v]) { continue; }
    res.log_probs[v] = res.logits[v] - lse;
    res.probs[v]     = std::exp(res.log_probs[v]);
  }
  return res;
}

int argmax_masked(const std::vector<double>& probs, const std::vector<std::uint8_t>& mask)
{
  int best = -1;
  for (std::size_t v = 0; v < probs.size(); ++v) {
    if (!mask[v]) { continue; }
    if (best < 0 || probs[v] > probs[best]) { best = static_cast<int>(v); }
  }
  return best;
}

namespace {

constexpr double min_log_prob = -690.77552789821368;  // log(1e-300)

// Per-sample loss; accumulates scale * dLoss/dtheta into g.
double sample_loss_grad(const sample_record_t& s,
                        const policy_params_t& p,
                        double entropy_coef,
                        double scale,
                        gradient_set_t* g,
                        int& clamped)
{
  const observation_t& obs = s.observation;
  if (s.action < 0 || s.action >= obs.num_vars || !obs.candidate_mask[s.action]) {
    throw schema_error("sample action is not a masked candidate");
  }
  const auto fw = forward(obs, p);
  double logp   = fw.log_probs[s.action];
  if (logp < min_log_prob) {
    logp = min_log_prob;
    ++clamped;
  }
  double entropy = 0.0;
  for (int v = 0; v < obs.num_vars; ++v) {
    if (obs.candidate_mask[v] && fw.probs[v] > 0.0) { entropy -= fw.probs[v] * fw.log_probs[v]; }
  }
  const double loss = -logp - entropy_coef * entropy;
  if (g == nullptr) { return loss; }

  const int nv = obs.num_vars, nc = obs.num_cons, d = p.d;
  const int ne = static_cast<int>(obs.edges.size());
  using T      = gcnn_tensors_t;
  const auto& tr = fw.trace;

  std::vector<double> dlogit(nv, 0.0);
  for (int v = 0; v < nv; ++v) {
    if (!obs.candidate_mask[v]) { continue; }
    double gv = fw.probs[v] - (v == s.action ? 1.0 : 0.0);
    if (entropy_coef != 0.0 && fw.probs[v] > 0.0) {
      gv += entropy_coef * fw.probs[v] * (fw.log_probs[v] + entropy);
    }
    dlogit[v] = scale * gv;
  }

  // head
  const double* w2 = p.t[T::head_w2].data.data();
  auto& dw2        = g->t[T::head_w2].data;
  std::vector<double> dhead(static_cast<std::size_t>(nv) * d, 0.0);
  double db2 = 0.0;
  for (int v = 0; v < nv; ++v) {
    if (dlogit[v] == 0.0) { continue; }
    db2 += dlogit[v];
    const double* z = &tr.head_pre[static_cast<std::size_t>(v) * d];
    double* dh      = &dhead[static_cast<std::size_t>(v) * d];
    for (int c = 0; c < d; ++c) {
      if (z[c] > 0.0) {
        dw2[c] += z[c] * dlogit[v];
        dh[c] = dlogit[v] * w2[c];
      }
    }
  }
  g->t[T::head_b2].data[0] += db2;
  accumulate_weight_grad(tr.var_h1.data(), nv, d, dhead.data(), g->t[T::head_w1], 0);
  {
    auto& db1 = g->t[T::head_b1].data;
    for (int v = 0; v < nv; ++v) {
      for (int c = 0; c < d; ++c) { db1[c] += dhead[static_cast<std::size_t>(v) * d + c]; }
    }
  }
  std::vector<double> dvar_h1(static_cast<std::size_t>(nv) * d, 0.0);
  backprop_input(dhead.data(), nv, p.t[T::head_w1], 0, d, dvar_h1.data());

  // variable-side half convolution
  std::vector<double> dvar_h0 = dvar_h1;
  std::vector<double> sv(static_cast<std::size_t>(nv) * d, 0.0), tc(static_cast<std::size_t>(nc) * d, 0.0);
  {
    double* dww = &g->t[T::var_msg_w].data[static_cast<std::size_t>(2 * d) * d];
    double* dbb = g->t[T::var_msg_b].data.data();
    for (int k = 0; k < ne; ++k) {
      const auto& e     = obs.edges[k];
      const double* pre = &tr.vmsg_pre[static_cast<std::size_t>(k) * d];
      const double* up  = &dvar_h1[static_cast<std::size_t>(e.var) * d];
      const double inv  = 1.0 / tr.var_deg[e.var];
      double* s1        = &sv[static_cast<std::size_t>(e.var) * d];
      double* s2        = &tc[static_cast<std::size_t>(e.cons) * d];
      for (int c = 0; c < d; ++c) {
        if (pre[c] <= 0.0) { continue; }
        const double gc = up[c] * inv;
        s1[c] += gc;
        s2[c] += gc;
        dww[c] += e.weight * gc;
        dbb[c] += gc;
      }
    }
  }
  accumulate_weight_grad(tr.var_h0.data(), nv, d, sv.data(), g->t[T::var_msg_w], 0);
  backprop_input(sv.data(), nv, p.t[T::var_msg_w], 0, d, dvar_h0.data());
  accumulate_weight_grad(tr.cons_h1.data(), nc, d, tc.data(), g->t[T::var_msg_w], d);
  std::vector<double> dcons_h1(static_cast<std::size_t>(nc) * d, 0.0);
  backprop_input(tc.data(), nc, p.t[T::var_msg_w], d, d, dcons_h1.data());

  // constraint-side half convolution
  std::vector<double> dcons_h0 = dcons_h1;
  std::vector<double> sc(static_cast<std::size_t>(nc) * d, 0.0), tv(static_cast<std::size_t>(nv) * d, 0.0);
  {
    double* dww = &g->t[T::cons_msg_w].data[static_cast<std::size_t>(2 * d) * d];
    double* dbb = g->t[T::cons_msg_b].data.data();
    for (int k = 0; k < ne; ++k) {
      const auto& e     = obs.edges[k];
      const double* pre = &tr.cmsg_pre[static_cast<std::size_t>(k) * d];
      const double* up  = &dcons_h1[static_cast<std::size_t>(e.cons) * d];
      const double inv  = 1.0 / tr.cons_deg[e.cons];
      double* s1        = &sc[static_cast<std::size_t>(e.cons) * d];
      double* s2        = &tv[static_cast<std::size_t>(e.var) * d];
      for (int c = 0; c < d; ++c) {
        if (pre[c] <= 0.0) { continue; }
        const double gc = up[c] * inv;
        s1[c] += gc;
        s2[c] += gc;
        dww[c] += e.weight * gc;
        dbb[c] += gc;
      }
    }
  }
  accumulate_weight_grad(tr.cons_h0.data(), nc, d, sc.data(), g->t[T::cons_msg_w], 0);
  backprop_input(sc.data(), nc, p.t[T::cons_msg_w], 0, d, dcons_h0.data());
  accumulate_weight_grad(tr.var_h0.data(), nv, d, tv.data(), g->t[T::cons_msg_w], d);
  backprop_input(tv.data(), nv, p.t[T::cons_msg_w], d, d, dvar_h0.data());

  // embeddings
  for (std::size_t i = 0; i < dvar_h0.size(); ++i) {
    if (tr.var_pre[i] <= 0.0) { dvar_h0[i] = 0.0; }
  }
  for (std::size_t i = 0; i < dcons_h0.size(); ++i) {
    if (tr.cons_pre[i] <= 0.0) { dcons_h0[i] = 0.0; }
  }
  accumulate_weight_grad(obs.var_features.data(), nv, num_var_features, dvar_h0.data(), g->t[T::var_w], 0);
  accumulate_weight_grad(obs.cons_features.data(), nc, num_cons_features, dcons_h0.data(), g->t[T::cons_w], 0);
  {
    auto& db = g->t[T::var_b].data;
    for (int v = 0; v < nv; ++v) {
      for (int c = 0; c < d; ++c) { db[c] += dvar_h0[static_cast<std::size_t>(v) * d + c]; }
    }
    auto& dc = g->t[T::cons_b].data;
    for (int r = 0; r < nc; ++r) {
      for (int c = 0; c < d; ++c) { dc[c] += dcons_h0[static_cast<std::size_t>(r) * d + c]; }
    }
  }
  return loss;
}

gradient_set_t zero_grads(const policy_params_t& p)
{
  gradient_set_t g;
  static_cast<gcnn_tensors_t&>(g) = gcnn_tensors_t::zeros(p.d);
  return g;
}

double total_weight(std::span<const sample_record_t> batch)
{
  double w = 0.0;
  for (const auto& s : batch) { w += s.weight; }
  if (!(w > 0.0)) { throw misuse_error("batch has no positive weight"); }
  return w;
}

constexpr std::size_t shard_size = 8;

}  // namespace

loss_result_t loss_and_grad_serial(std::span<const sample_record_t> batch,
                                   const policy_params_t& params,
                                   double entropy_coef)
{
  if (batch.empty()) { throw misuse_error("empty batch"); }
  const double w = total_weight(batch);
  loss_result_t r;
  r.grads = zero_grads(params);
  for (const auto& s : batch) {
    r.loss += s.weight / w * sample_loss_grad(s, params, entropy_coef, s.weight / w, &r.grads, r.clamped);
  }
  return r;
}

loss_result_t loss_and_grad(std::span<const sample_record_t> batch, const policy_params_t& params, double entropy_coef)
{
  if (batch.empty()) { throw misuse_error("empty batch"); }
  const double w            = total_weight(batch);
  const std::size_t nshards = (batch.size() + shard_size - 1) / shard_size;
  std::vector<gradient_set_t> partial(nshards);
  std::vector<double> partial_loss(nshards, 0.0);
  std::vector<int> partial_clamped(nshards, 0);
  std::vector<std::exception_ptr> errors(nshards);

#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t k = 0; k < nshards; ++k) {
    try {
      partial[k] = zero_grads(params);
      const std::size_t end = std::min(batch.size(), (k + 1) * shard_size);
      for (std::size_t i = k * shard_size; i < end; ++i) {
        const auto& s = batch[i];
        partial_loss[k] +=
          s.weight / w * sample_loss_grad(s, params, entropy_coef, s.weight / w, &partial[k], partial_clamped[k]);
      }
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) { std::rethrow_exception(e); }
  }

  loss_result_t r;
  r.grads = zero_grads(params);
  compensated_sum_t loss;
  for (std::size_t k = 0; k < nshards; ++k) {
    loss.add(partial_loss[k]);
    r.clamped += partial_clamped[k];
  }
  r.loss = loss.value();
  for (int t = 0; t < gcnn_tensors_t::count; ++t) {
    auto& out = r.grads.t[t].data;
    for (std::size_t i = 0; i < out.size(); ++i) {
      compensated_sum_t acc;
      for (std::size_t k = 0; k < nshards; ++k) { acc.add(partial[k].t[t].data[i]); }
      out[i] = acc.value();
    }
  }
  return r;
}

double batch_loss(std::span<const sample_record_t> batch, const policy_params_t& params, double entropy_coef)
{
  if (batch.empty()) { throw misuse_error("empty batch"); }
  const double w = total_weight(batch);
  std::vector<double> losses(batch.size());
  std::vector<std::exception_ptr> errors(batch.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::size_t i = 0; i < batch.size(); ++i) {
    try {
      int clamped = 0;
      losses[i]   = batch[i].weight / w * sample_loss_grad(batch[i], params, entropy_coef, 0.0, nullptr, clamped);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) { std::rethrow_exception(e); }
  }
  compensated_sum_t acc;
  for (double l : losses) { acc.add(l); }
  return acc.value();
}

adam_state_t adam_state_t::zeros_like(const gcnn_tensors_t& p)
{
  adam_state_t s;
  static_cast<gcnn_tensors_t&>(s.m) = gcnn_tensors_t::zeros(p.d);
  static_cast<gcnn_tensors_t&>(s.v) = gcnn_tensors_t::zeros(p.d);
  return s;
}

adam_result_t adam_step(const policy_params_t& params,
                        const gradient_set_t& grads,
                        const adam_state_t& state,
                        double lr,
                        const adam_config_t& cfg)
{
  if (!params.same_shape(grads) || !params.same_shape(state.m) || !params.same_shape(state.v)) {
    throw misuse_error("adam_step: tensor shapes are not congruent");
  }
  adam_result_t r{params, state};
  r.state.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, r.state.step);
  const double bc2 = 1.0 - std::pow(cfg.beta2, r.state.step);
  for (int k = 0; k < gcnn_tensors_t::count; ++k) {
    auto& p       = r.params.t[k].data;
    auto& m       = r.state.m.t[k].data;
    auto& v       = r.state.v.t[k].data;
    const auto& g = grads.t[k].data;
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i]              = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i]              = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p[i] -= lr * mhat / (std::sqrt(vhat) + cfg.epsilon);
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Params file

namespace {

static_assert(std::endian::native == std::endian::little, "params files are written little-endian");

constexpr char params_magic[8] = {'T', 'S', 'P', 'G', 'C', 'N', 'N', '\x01'};

void put_u32(std::ostream& out, std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); }

std::uint32_t get_u32(std::istream& in)
{
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 4);
  if (!in) { throw schema_error("truncated params file"); }
  return v;
}

}  // namespace

void save_params(const policy_params_t& p, std::ostream& out)
{
  out.write(params_magic, 8);
  put_u32(out, static_cast<std::uint32_t>(p.schema_version));
  put_u32(out, static_cast<std::uint32_t>(p.d));
  put_u32(out, gcnn_tensors_t::count);
  for (const auto& t : p.t) {
    put_u32(out, static_cast<std::uint32_t>(t.rows));
    put_u32(out, static_cast<std::uint32_t>(t.cols));
    out.write(reinterpret_cast<const char*>(t.data.data()), static_cast<std::streamsize>(t.data.size() * sizeof(double)));
  }
}

policy_params_t load_params(std::istream& in)
{
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, params_magic, 8) != 0) { throw schema_error("not a GCNN params file"); }
  policy_params_t p;
  p.schema_version = static_cast<int>(get_u32(in));
  p.d              = static_cast<int>(get_u32(in));
  if (get_u32(in) != gcnn_tensors_t::count) { throw schema_error("unexpected tensor count in params file"); }
  const auto expect = gcnn_tensors_t::zeros(p.d);
  for (int k = 0; k < gcnn_tensors_t::count; ++k) {
    const int rows = static_cast<int>(get_u32(in));
    const int cols = static_cast<int>(get_u32(in));
    if (rows != expect.t[k].rows || cols != expect.t[k].cols) {
      throw schema_error(std::string("shape mismatch for tensor ") + gcnn_tensors_t::names[k]);
    }
    p.t[k] = tensor_t(rows, cols);
    in.read(reinterpret_cast<char*>(p.t[k].data.data()), static_cast<std::streamsize>(p.t[k].data.size() * sizeof(double)));
    if (!in) { throw schema_error("truncated params file"); }
  }
  return p;
}

void save_params_file(const policy_params_t& p, const std::string& path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) { throw error("cannot write " + path); }
  save_params(p, out);
}

policy_params_t load_params_file(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) { throw error("cannot read " + path); }
  return load_params(in);
}

}  // namespace tspbb
