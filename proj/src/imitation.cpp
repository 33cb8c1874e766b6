/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, tspbb contributors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <tspbb/errors.hpp>
#include <tspbb/imitation.hpp>
#include <tspbb/rng.hpp>
#include <tspbb/util.hpp>

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <set>

namespace tspbb {

std::vector<instance_spec_t> instance_specs(const std::vector<int>& sizes, int count, std::uint64_t base_seed)
{
  std::vector<instance_spec_t> out;
  for (int n : sizes) {
    for (int k = 0; k < count; ++k) { out.push_back({n, base_seed + static_cast<std::uint64_t>(k)}); }
  }
  return out;
}

collect_result_t collect(const std::vector<instance_spec_t>& specs, const collect_config_t& cfg)
{
  if (!(cfg.p_expert >= 0.0 && cfg.p_expert <= 1.0)) { throw misuse_error("p_expert must lie in [0, 1]"); }
  const int count = static_cast<int>(specs.size());
  std::vector<std::vector<sample_record_t>> per(count);
  std::vector<collect_entry_t> manifest(count);
  std::vector<std::exception_ptr> errors(count);
  const int threads = cfg.threads > 0 ? cfg.threads : omp_get_max_threads();

#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (int k = 0; k < count; ++k) {
    try {
      const auto& sp  = specs[k];
      const auto inst = generate_instance(sp.n, sp.seed);
      const auto model = build_mtz(inst);
      mixed_expert_rule_t rule(cfg.p_expert, mix_seeds(cfg.master_seed, sp.seed));
      solve_options_t opts;
      opts.limits       = cfg.limits;
      opts.instance_tag = inst.tag();
      opts.sample_sink  = [&per, k](sample_record_t&& s) { per[k].push_back(std::move(s)); };
      const auto res    = solve(model, rule, opts);
      auto& e           = manifest[k];
      e.instance        = inst.tag();
      e.n               = sp.n;
      e.seed            = sp.seed;
      e.nodes           = res.stats.nodes;
      e.objective       = res.has_incumbent ? res.objective : 0.0;
      if (res.status != solve_status_t::optimal) {
        e.skipped = true;
        per[k].clear();
        std::fprintf(stderr, "warning: %s hit a solve limit, skipped\n", e.instance.c_str());
      }
      e.samples = static_cast<int>(per[k].size());
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) { std::rethrow_exception(e); }
  }

  collect_result_t out;
  out.manifest                         = std::move(manifest);
  out.dataset.header.generator         = nlohmann::ordered_json::object();
  out.dataset.header.generator["tool"] = "collect";
  out.dataset.header.generator["p_expert"]    = cfg.p_expert;
  out.dataset.header.generator["master_seed"] = cfg.master_seed;
  out.dataset.header.generator["node_limit"]  = cfg.limits.node_limit;
  out.dataset.header.generator["time_limit"]  = cfg.limits.time_limit;
  auto& inst = out.dataset.header.generator["instances"] = nlohmann::ordered_json::array();
  for (const auto& sp : specs) { inst.push_back({sp.n, sp.seed}); }
  for (auto& v : per) {
    for (auto& s : v) { out.dataset.samples.push_back(std::move(s)); }
  }
  return out;
}

void write_collect_manifest(const std::vector<collect_entry_t>& entries, std::ostream& out)
{
  for (const auto& e : entries) {
    nlohmann::ordered_json j;
    j["instance"]  = e.instance;
    j["n"]         = e.n;
    j["seed"]      = e.seed;
    j["samples"]   = e.samples;
    j["nodes"]     = e.nodes;
    j["skipped"]   = e.skipped;
    j["objective"] = e.objective;
    out << j.dump() << '\n';
  }
}

std::vector<collect_entry_t> read_collect_manifest(std::istream& in)
{
  std::vector<collect_entry_t> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) { continue; }
    const auto j = nlohmann::json::parse(line);
    collect_entry_t e;
    e.instance  = j.at("instance").get<std::string>();
    e.n         = j.at("n").get<int>();
    e.seed      = j.at("seed").get<std::uint64_t>();
    e.samples   = j.at("samples").get<int>();
    e.nodes     = j.at("nodes").get<std::int64_t>();
    e.skipped   = j.at("skipped").get<bool>();
    e.objective = j.at("objective").get<double>();
    out.push_back(e);
  }
  return out;
}

dataset_split_t split_dataset(const dataset_t& ds, std::uint64_t seed)
{
  std::vector<std::string> tags;
  std::set<std::string> seen;
  for (const auto& s : ds.samples) {
    if (seen.insert(s.instance).second) { tags.push_back(s.instance); }
  }
  const int total = static_cast<int>(tags.size());
  if (total < 3) { throw split_error("need at least 3 instances to split, got " + std::to_string(total)); }
  std::sort(tags.begin(), tags.end());
  rng_t rng(seed);
  shuffle(tags.begin(), tags.end(), rng);
  const int held = std::max(1, total / 10);
  std::map<std::string, int> fold;
  for (int k = 0; k < total; ++k) { fold[tags[k]] = k < held ? 1 : (k < 2 * held ? 2 : 0); }

  dataset_split_t out;
  out.train.header = out.valid.header = out.test.header = ds.header;
  for (const auto& s : ds.samples) {
    switch (fold[s.instance]) {
      case 0: out.train.samples.push_back(s); break;
      case 1: out.valid.samples.push_back(s); break;
      default: out.test.samples.push_back(s); break;
    }
  }
  return out;
}

nlohmann::ordered_json train_report_t::to_json() const
{
  nlohmann::ordered_json j;
  j["best_epoch"]  = best_epoch;
  j["params_path"] = params_path;
  j["clamped"]     = clamped;
  j["config"]      = {{"batch_size", config.batch_size},
                      {"lr", config.lr},
                      {"max_epochs", config.max_epochs},
                      {"patience", config.patience},
                      {"seed", config.seed},
                      {"entropy_coef", config.entropy_coef},
                      {"embedding_dim", config.embedding_dim}};
  auto& ep         = j["epochs"] = nlohmann::ordered_json::array();
  for (const auto& e : epochs) {
    ep.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"valid_loss", e.valid_loss}, {"valid_top1", e.valid_top1}});
  }
  return j;
}

accuracy_t evaluate_accuracy(const policy_params_t& params, std::span<const sample_record_t> samples)
{
  accuracy_t a;
  a.samples = static_cast<int>(samples.size());
  if (samples.empty()) { return a; }
  std::vector<std::uint8_t> hit(samples.size(), 0);
  std::vector<std::exception_ptr> errors(samples.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::size_t i = 0; i < samples.size(); ++i) {
    try {
      const auto fw = forward(samples[i].observation, params);
      hit[i]        = argmax_masked(fw.probs, samples[i].observation.candidate_mask) == samples[i].action ? 1 : 0;
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) { std::rethrow_exception(e); }
  }
  double w = 0.0, good = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    w += samples[i].weight;
    good += hit[i] ? samples[i].weight : 0.0;
  }
  a.top1      = good / w;
  a.mean_loss = batch_loss(samples, params);
  return a;
}

double uniform_policy_accuracy(std::span<const sample_record_t> samples)
{
  if (samples.empty()) { return 0.0; }
  double w = 0.0, good = 0.0;
  for (const auto& s : samples) {
    const auto& m = s.observation.candidate_mask;
    const auto it = std::find(m.begin(), m.end(), std::uint8_t{1});
    w += s.weight;
    if (it != m.end() && static_cast<int>(it - m.begin()) == s.action) { good += s.weight; }
  }
  return good / w;
}

double mean_reciprocal_candidates(std::span<const sample_record_t> samples)
{
  if (samples.empty()) { return 0.0; }
  compensated_sum_t acc;
  for (const auto& s : samples) { acc.add(1.0 / s.observation.num_candidates()); }
  return acc.value() / static_cast<double>(samples.size());
}

train_result_t train(const dataset_t& train_set, const dataset_t& valid_set, const train_config_t& cfg)
{
  if (cfg.batch_size <= 0 || !(cfg.lr > 0.0) || cfg.max_epochs <= 0 || cfg.patience < 0 ||
      cfg.patience > cfg.max_epochs) {
    throw misuse_error("invalid training configuration");
  }
  if (train_set.samples.empty()) { throw misuse_error("training set is empty"); }
  if (valid_set.samples.empty()) { throw misuse_error("validation set is empty"); }
  if (train_set.header.schema_version != observation_schema_version ||
      valid_set.header.schema_version != observation_schema_version) {
    throw schema_error("dataset schema does not match the policy schema");
  }

  train_result_t out;
  out.report.config      = cfg;
  out.report.params_path = cfg.params_path;
  policy_params_t params = init_params(cfg.seed, cfg.embedding_dim);
  auto state             = adam_state_t::zeros_like(params);
  policy_params_t best   = params;
  double best_valid      = std::numeric_limits<double>::infinity();

  std::vector<sample_record_t> order = train_set.samples;
  rng_t rng(mix_seeds(cfg.seed, 0x7261696eULL));

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    shuffle(order.begin(), order.end(), rng);
    compensated_sum_t epoch_loss;
    double epoch_weight = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t len = std::min<std::size_t>(cfg.batch_size, order.size() - start);
      std::span<const sample_record_t> batch(order.data() + start, len);
      auto lg = loss_and_grad(batch, params, cfg.entropy_coef);
      if (!std::isfinite(lg.loss)) {
        throw divergence_error("non-finite training loss at epoch " + std::to_string(epoch) + ", batch starting at " +
                               std::to_string(start));
      }
      out.report.clamped += lg.clamped;
      double bw = 0.0;
      for (const auto& s : batch) { bw += s.weight; }
      epoch_loss.add(lg.loss * bw);
      epoch_weight += bw;
      auto step = adam_step(params, lg.grads, state, cfg.lr);
      params    = std::move(step.params);
      state     = std::move(step.state);
    }
    const auto acc = evaluate_accuracy(params, valid_set.samples);
    if (!std::isfinite(acc.mean_loss)) {
      throw divergence_error("non-finite validation loss at epoch " + std::to_string(epoch));
    }
    out.report.epochs.push_back({epoch, epoch_loss.value() / epoch_weight, acc.mean_loss, acc.top1});
    if (acc.mean_loss < best_valid) {
      best_valid             = acc.mean_loss;
      best                   = params;
      out.report.best_epoch  = epoch;
    }
    if (epoch - out.report.best_epoch >= cfg.patience) { break; }
  }
  out.params = std::move(best);
  return out;
}

}  // namespace tspbb
