// Shared generators and checkers for policy tests.
#pragma once

#include <tspbb/observe.hpp>
#include <tspbb/policy.hpp>
#include <tspbb/rng.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace tspbb::fixture {

/// Random bipartite observation; every constraint and variable has at least
/// one edge, at least one candidate is masked in.
inline observation_t random_observation(rng_t& rng, int nv, int nc, double density = 0.3)
{
  observation_t o;
  o.num_vars = nv;
  o.num_cons = nc;
  o.var_features.resize(static_cast<std::size_t>(nv) * num_var_features);
  o.cons_features.resize(static_cast<std::size_t>(nc) * num_cons_features);
  for (double& x : o.var_features) { x = rng.uniform(-1.0, 1.0); }
  for (double& x : o.cons_features) { x = rng.uniform(-1.0, 1.0); }
  std::vector<std::uint8_t> hit_var(nv, 0);
  for (int c = 0; c < nc; ++c) {
    bool any = false;
    for (int v = 0; v < nv; ++v) {
      if (rng.bernoulli(density)) {
        o.edges.push_back({c, v, rng.uniform(-1.0, 1.0)});
        hit_var[v] = 1;
        any        = true;
      }
    }
    if (!any) {
      const int v = static_cast<int>(rng.below(nv));
      o.edges.push_back({c, v, rng.uniform(-1.0, 1.0)});
      hit_var[v] = 1;
    }
  }
  for (int v = 0; v < nv; ++v) {
    if (!hit_var[v]) { o.edges.push_back({static_cast<int>(rng.below(nc)), v, rng.uniform(-1.0, 1.0)}); }
  }
  o.candidate_mask.assign(nv, 0);
  for (int v = 0; v < nv; ++v) { o.candidate_mask[v] = rng.bernoulli(0.5) ? 1 : 0; }
  o.candidate_mask[rng.below(nv)] = 1;
  return o;
}

/// Relabels variables (new index = vperm[old]) and constraints likewise.
inline observation_t permute(const observation_t& o, const std::vector<int>& vperm, const std::vector<int>& cperm)
{
  observation_t p = o;
  for (int v = 0; v < o.num_vars; ++v) {
    std::copy_n(&o.var_features[static_cast<std::size_t>(v) * num_var_features], num_var_features,
                &p.var_features[static_cast<std::size_t>(vperm[v]) * num_var_features]);
    p.candidate_mask[vperm[v]] = o.candidate_mask[v];
  }
  for (int c = 0; c < o.num_cons; ++c) {
    std::copy_n(&o.cons_features[static_cast<std::size_t>(c) * num_cons_features], num_cons_features,
                &p.cons_features[static_cast<std::size_t>(cperm[c]) * num_cons_features]);
  }
  for (auto& e : p.edges) {
    e.var  = vperm[e.var];
    e.cons = cperm[e.cons];
  }
  return p;
}

inline std::vector<int> random_permutation(rng_t& rng, int n)
{
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  shuffle(p.begin(), p.end(), rng);
  return p;
}

/// Parameters with every tensor (including the zero-initialized head) filled
/// with random values, so that no gradient path is trivially dead.
inline policy_params_t random_params(std::uint64_t seed, int d = 8)
{
  auto p = init_params(seed, d);
  rng_t rng(seed ^ 0x9e3779b97f4a7c15ULL);
  for (auto& t : p.t) {
    for (double& x : t.data) { x += rng.uniform(-0.3, 0.3); }
  }
  return p;
}

inline std::vector<std::uint8_t> relu_pattern(std::span<const sample_record_t> batch, const policy_params_t& p)
{
  std::vector<std::uint8_t> out;
  for (const auto& s : batch) {
    const auto tr = forward(s.observation, p).trace;
    for (const auto* v : {&tr.var_pre, &tr.cons_pre, &tr.cmsg_pre, &tr.vmsg_pre, &tr.head_pre}) {
      for (double x : *v) { out.push_back(x > 0.0 ? 1 : 0); }
    }
  }
  return out;
}

struct gradient_check_t {
  double max_rel_error = 0.0;
  std::string worst;
  int checked = 0;
  int kinks   = 0;  // coordinates whose +-h probe crossed a ReLU kink
};

/// Central differences of batch_loss with step h against loss_and_grad_serial.
/// Relative error is |a - f| / max(|a|, |f|, floor).
inline gradient_check_t check_gradients(std::span<const sample_record_t> batch,
                                        const policy_params_t& params,
                                        double entropy_coef = 0.0,
                                        double h            = 1e-5,
                                        double floor        = 1e-6)
{
  gradient_check_t r;
  const auto analytic = loss_and_grad_serial(batch, params, entropy_coef);
  const auto base_pat = relu_pattern(batch, params);
  for (int k = 0; k < gcnn_tensors_t::count; ++k) {
    for (std::size_t i = 0; i < params.t[k].data.size(); ++i) {
      auto plus  = params;
      auto minus = params;
      plus.t[k].data[i] += h;
      minus.t[k].data[i] -= h;
      if (relu_pattern(batch, plus) != base_pat || relu_pattern(batch, minus) != base_pat) {
        ++r.kinks;
        continue;
      }
      const double fd = (batch_loss(batch, plus, entropy_coef) - batch_loss(batch, minus, entropy_coef)) / (2.0 * h);
      const double a   = analytic.grads.t[k].data[i];
      const double rel = std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), floor});
      ++r.checked;
      if (rel > r.max_rel_error) {
        r.max_rel_error = rel;
        r.worst         = std::string(gcnn_tensors_t::names[k]) + "[" + std::to_string(i) + "]";
      }
    }
  }
  return r;
}

}  // namespace tspbb::fixture
