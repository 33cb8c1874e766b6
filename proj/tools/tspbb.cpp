/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, tspbb contributors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <tspbb/bench.hpp>
#include <tspbb/bnb.hpp>
#include <tspbb/errors.hpp>
#include <tspbb/imitation.hpp>
#include <tspbb/instances.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <omp.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace tspbb;

namespace {

struct global_opts_t {
  std::uint64_t seed = 1;
  int threads        = 0;
  double time_limit  = 0.0;
  std::int64_t node_limit = 0;

  solve_limits_t limits() const { return {node_limit, time_limit}; }
};

std::ofstream open_out(const std::string& path)
{
  if (const auto parent = fs::path(path).parent_path(); !parent.empty()) { fs::create_directories(parent); }
  std::ofstream f(path, std::ios::binary);
  if (!f) { throw error("cannot write " + path); }
  return f;
}

std::ifstream open_in(const std::string& path)
{
  std::ifstream f(path, std::ios::binary);
  if (!f) { throw error("cannot read " + path); }
  return f;
}

int run_gen(const global_opts_t& g, const std::vector<int>& sizes, int count, const std::string& out_dir, bool oracle)
{
  fs::create_directories(out_dir);
  std::vector<manifest_entry_t> manifest;
  for (const auto& sp : instance_specs(sizes, count, g.seed)) {
    const auto inst = generate_instance(sp.n, sp.seed);
    auto f          = open_out((fs::path(out_dir) / lp_file_name(sp.n, sp.seed)).string());
    write_lp(build_mtz(inst), f);
    manifest_entry_t e{sp.n, sp.seed, std::nullopt};
    if (oracle && sp.n <= 9) { e.optimal_cost = brute_force_optimal(inst).cost; }
    manifest.push_back(e);
  }
  auto m = open_out((fs::path(out_dir) / "manifest.jsonl").string());
  write_manifest(manifest, m);
  std::printf("wrote %zu instances to %s\n", manifest.size(), out_dir.c_str());
  return 0;
}

int run_collect(const global_opts_t& g,
                const std::vector<int>& sizes,
                int count,
                double p_expert,
                const std::string& out,
                std::string manifest_path)
{
  collect_config_t cfg;
  cfg.p_expert    = p_expert;
  cfg.limits      = g.limits();
  cfg.master_seed = g.seed;
  cfg.threads     = g.threads;
  const auto res  = collect(instance_specs(sizes, count, g.seed), cfg);
  auto f          = open_out(out);
  write_dataset(res.dataset, f);
  if (manifest_path.empty()) { manifest_path = out + ".manifest.jsonl"; }
  auto m = open_out(manifest_path);
  write_collect_manifest(res.manifest, m);
  int skipped = 0;
  for (const auto& e : res.manifest) { skipped += e.skipped ? 1 : 0; }
  std::printf("collected %zu samples from %zu instances (%d skipped) -> %s\n", res.dataset.samples.size(),
              res.manifest.size(), skipped, out.c_str());
  return 0;
}

int run_train(const global_opts_t& g, const std::string& data, const std::string& out, train_config_t cfg, std::string report_path)
{
  auto in       = open_in(data);
  const auto ds = read_dataset(in);
  const auto sp = split_dataset(ds, g.seed);
  cfg.seed        = g.seed;
  cfg.params_path = out;
  const auto res  = train(sp.train, sp.valid, cfg);
  auto pf         = open_out(out);
  save_params(res.params, pf);
  const auto test = evaluate_accuracy(res.params, sp.test.samples);
  auto report     = res.report.to_json();
  report["samples"] = {{"train", sp.train.samples.size()}, {"valid", sp.valid.samples.size()}, {"test", sp.test.samples.size()}};
  report["test"]    = {{"top1", test.top1},
                       {"mean_loss", test.mean_loss},
                       {"uniform_top1", uniform_policy_accuracy(sp.test.samples)},
                       {"mean_reciprocal_candidates", mean_reciprocal_candidates(sp.test.samples)}};
  if (report_path.empty()) { report_path = out + ".report.json"; }
  auto rf = open_out(report_path);
  rf << report.dump(2) << '\n';
  const auto& last = res.report.epochs.back();
  std::printf("trained %zu epochs (best %d): valid loss %.4f top1 %.3f; test top1 %.3f -> %s\n",
              res.report.epochs.size(), res.report.best_epoch, res.report.epochs[res.report.best_epoch - 1].valid_loss,
              res.report.epochs[res.report.best_epoch - 1].valid_top1, test.top1, out.c_str());
  (void)last;
  return 0;
}

int run_solve(const global_opts_t& g,
              const std::string& rule_spec,
              const std::string& lp_path,
              int n,
              std::uint64_t instance_seed,
              const std::string& trace_path)
{
  const auto rule = make_rule(rule_spec, g.seed);
  std::optional<tsp_instance_t> inst;
  ilp_model_t model;
  if (!lp_path.empty()) {
    auto in = open_in(lp_path);
    model   = parse_lp(in);
  } else {
    if (n < 3) { throw error("solve needs --lp or --n"); }
    inst  = generate_instance(n, instance_seed);
    model = build_mtz(*inst);
  }
  solve_options_t opts;
  opts.limits     = g.limits();
  opts.keep_trace = !trace_path.empty();
  const auto res  = solve(model, *rule, opts);
  if (!trace_path.empty()) {
    auto f = open_out(trace_path);
    for (const auto& t : res.trace) { f << trace_to_json_line(t) << '\n'; }
  }
  std::printf("status %s\n", to_string(res.status));
  if (res.has_incumbent) {
    std::printf("objective %.10f\n", res.objective);
    if (inst) {
      const auto tour = extract_tour(*inst, res.assignment);
      std::printf("tour");
      for (int v : tour) { std::printf(" %d", v + 1); }
      std::printf("\n");
    }
  }
  std::printf("nodes %lld lp_solves %lld lp_iterations %lld strong_calls %lld time %.4fs\n",
              static_cast<long long>(res.stats.nodes), static_cast<long long>(res.stats.lp_solves),
              static_cast<long long>(res.stats.lp_iterations), static_cast<long long>(res.stats.strong_branch_calls),
              res.stats.wall_time_s);
  return 0;
}

int run_bench(const global_opts_t& g,
              const std::vector<int>& sizes,
              int count,
              const std::vector<std::string>& rules,
              const std::string& out)
{
  bench_config_t cfg;
  cfg.sizes     = sizes;
  cfg.count     = count;
  cfg.base_seed = g.seed;
  cfg.rules     = rules;
  cfg.rule_seed = g.seed;
  cfg.limits    = g.limits();
  cfg.threads   = g.threads > 0 ? g.threads : 1;
  const auto rows = run_benchmark(cfg);
  auto f          = open_out(out);
  write_bench_csv(rows, f);
  int unproven = 0;
  for (const auto& r : rows) { unproven += r.proven ? 0 : 1; }
  const auto bad = check_exactness(rows);
  for (const auto& v : bad) { std::fprintf(stderr, "error: rules disagree on %s by %g\n", v.instance.c_str(), v.spread); }
  std::printf("wrote %zu rows (%d unproven) -> %s\n", rows.size(), unproven, out.c_str());
  if (!bad.empty()) { return 1; }
  return unproven > 0 ? 2 : 0;
}

int run_report(const std::string& csv,
               const std::string& baseline,
               const std::string& candidate,
               const std::string& train_label,
               const std::string& out_csv)
{
  auto in         = open_in(csv);
  const auto rows = read_bench_csv(in);
  const auto t    = summarize(rows, baseline, candidate, train_label);
  write_summary_text(t, std::cout);
  if (!out_csv.empty()) {
    auto f = open_out(out_csv);
    write_summary_csv(t, f);
  }
  return 0;
}

int run_plot(const std::string& csv, const std::string& baseline, const std::string& out_dir)
{
  auto in          = open_in(csv);
  const auto paths = plot_walltimes(read_bench_csv(in), baseline, out_dir);
  for (const auto& p : paths) { std::printf("%s\n", p.c_str()); }
  return 0;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Exact TSP solver with learned branching"};
  app.require_subcommand(1);
  global_opts_t g;
  app.add_option("--seed", g.seed, "Base seed for instances, rules and training")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads (0 = OpenMP default; bench defaults to 1)");
  app.add_option("--time-limit", g.time_limit, "Per-solve time limit in seconds (0 = none)");
  app.add_option("--node-limit", g.node_limit, "Per-solve node limit (0 = none)");
  app.fallthrough();

  std::vector<int> sizes = {8};
  int count              = 10;

  auto* gen = app.add_subcommand("gen", "Generate instances as LP files plus a manifest");
  std::string gen_out = "instances";
  bool oracle         = false;
  gen->add_option("--sizes", sizes, "Node counts")->delimiter(',');
  gen->add_option("--count", count, "Instances per size");
  gen->add_option("--out", gen_out, "Output directory");
  gen->add_flag("--oracle", oracle, "Record brute-force optimal costs for n <= 9");

  auto* col = app.add_subcommand("collect", "Record strong-branching decisions with the mixed expert");
  double p_expert = default_p_expert;
  std::string col_out = "dataset.jsonl", col_manifest;
  col->add_option("--sizes", sizes, "Node counts")->delimiter(',');
  int col_count = 400;
  col->add_option("--count", col_count, "Instances per size")->capture_default_str();
  col->add_option("--p-expert", p_expert, "Probability of calling the expert at a decision");
  col->add_option("--out", col_out, "Dataset file (JSON lines)");
  col->add_option("--manifest", col_manifest, "Per-instance manifest (default <out>.manifest.jsonl)");

  auto* tr = app.add_subcommand("train", "Train the branching policy by behavioral cloning");
  train_config_t tcfg;
  std::string data, params_out = "params.bin", report_out;
  tr->add_option("--data", data, "Dataset file")->required();
  tr->add_option("--out", params_out, "Params file");
  tr->add_option("--batch", tcfg.batch_size, "Minibatch size");
  tr->add_option("--lr", tcfg.lr, "Adam learning rate");
  tr->add_option("--epochs", tcfg.max_epochs, "Maximum epochs");
  tr->add_option("--patience", tcfg.patience, "Early-stop patience in epochs");
  tr->add_option("--entropy-coef", tcfg.entropy_coef, "Entropy regularization coefficient");
  tr->add_option("--report", report_out, "Training report JSON (default <out>.report.json)");

  auto* sv = app.add_subcommand("solve", "Solve one instance");
  std::string rule = "pseudocost", lp_path, trace_path;
  int n = 0;
  std::uint64_t instance_seed = 1;
  sv->add_option("--rule", rule, "strong | pseudocost | mostinf | mixed:<p> | policy:<file> | random:<seed>");
  sv->add_option("--lp", lp_path, "LP file to solve");
  sv->add_option("--n", n, "Generate a random instance with n nodes");
  sv->add_option("--instance-seed", instance_seed, "Seed of the generated instance");
  sv->add_option("--trace", trace_path, "Per-node trace (JSON lines)");

  auto* bn = app.add_subcommand("bench", "Run rules over generated instances and write CSV");
  std::vector<std::string> rules = {"pseudocost", "strong"};
  std::string bench_out          = "bench.csv";
  bn->add_option("--sizes", sizes, "Node counts")->delimiter(',');
  bn->add_option("--count", count, "Instances per size");
  bn->add_option("--rules", rules, "Rules to compare")->delimiter(',');
  bn->add_option("--out", bench_out, "CSV output");

  auto* rp = app.add_subcommand("report", "Summarize a benchmark CSV as a First 80 / Last 20 table");
  std::string csv, baseline = "pseudocost", candidate, train_label, report_csv;
  rp->add_option("--csv", csv, "Benchmark CSV")->required();
  rp->add_option("--baseline", baseline, "Baseline rule");
  rp->add_option("--candidate", candidate, "Candidate rule")->required();
  rp->add_option("--train-label", train_label, "Label of the training size, e.g. TSP8");
  rp->add_option("--out-csv", report_csv, "Also write the summary as CSV");

  auto* pl = app.add_subcommand("plot", "Render per-instance wall-time plots as SVG");
  std::string plot_dir = "plots";
  pl->add_option("--csv", csv, "Benchmark CSV")->required();
  pl->add_option("--baseline", baseline, "Baseline rule");
  pl->add_option("--out-dir", plot_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (g.threads > 0) { omp_set_num_threads(g.threads); }
    if (*gen) { return run_gen(g, sizes, count, gen_out, oracle); }
    if (*col) { return run_collect(g, sizes, col_count, p_expert, col_out, col_manifest); }
    if (*tr) { return run_train(g, data, params_out, tcfg, report_out); }
    if (*sv) { return run_solve(g, rule, lp_path, n, instance_seed, trace_path); }
    if (*bn) { return run_bench(g, sizes, count, rules, bench_out); }
    if (*rp) { return run_report(csv, baseline, candidate, train_label, report_csv); }
    if (*pl) { return run_plot(csv, baseline, plot_dir); }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
