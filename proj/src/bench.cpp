/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, tspbb contributors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <tspbb/bench.hpp>
#include <tspbb/errors.hpp>
#include <tspbb/util.hpp>

#include <cctype>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>

namespace tspbb {

namespace {

std::string csv_field(const std::string& s)
{
  if (s.find_first_of(",\"\n") == std::string::npos) { return s; }
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') { out += '"'; }
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line)
{
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

std::string fmt(const char* f, double v)
{
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

double mean_of(const std::vector<double>& v, std::size_t lo, std::size_t hi)
{
  if (hi <= lo) { return std::numeric_limits<double>::quiet_NaN(); }
  compensated_sum_t s;
  for (std::size_t k = lo; k < hi; ++k) { s.add(v[k]); }
  return s.value() / static_cast<double>(hi - lo);
}

double improvement_pct(double base, double cand)
{
  if (!std::isfinite(base) || !std::isfinite(cand) || base == 0.0) {
    return base == cand ? 0.0 : std::numeric_limits<double>::quiet_NaN();
  }
  return (base - cand) / base * 100.0;
}

}  // namespace

void write_bench_csv(const std::vector<bench_row_t>& rows, std::ostream& out)
{
  out << bench_csv_header << '\n';
  for (const auto& r : rows) {
    out << csv_field(r.instance) << ',' << r.n << ',' << csv_field(r.rule) << ',' << fmt("%.6f", r.walltime_s) << ','
        << r.nodes << ',' << r.lp_solves << ',' << format_g17(r.cost) << ',' << (r.proven ? 1 : 0) << '\n';
  }
}

std::vector<bench_row_t> read_bench_csv(std::istream& in)
{
  std::string line;
  if (!std::getline(in, line)) { throw error("empty benchmark CSV"); }
  if (!line.empty() && line.back() == '\r') { line.pop_back(); }
  if (line != bench_csv_header) { throw error("unexpected benchmark CSV header: " + line); }
  std::vector<bench_row_t> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") { continue; }
    const auto f = split_csv_line(line);
    if (f.size() != 8) { throw error("benchmark CSV line " + std::to_string(lineno) + " has " + std::to_string(f.size()) + " fields"); }
    try {
      bench_row_t r;
      r.instance   = f[0];
      r.n          = std::stoi(f[1]);
      r.rule       = f[2];
      r.walltime_s = std::stod(f[3]);
      r.nodes      = std::stoll(f[4]);
      r.lp_solves  = std::stoll(f[5]);
      r.cost       = std::stod(f[6]);
      r.proven     = f[7] == "1" || f[7] == "true";
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw error("malformed benchmark CSV line " + std::to_string(lineno));
    }
  }
  return rows;
}

std::vector<bench_row_t> run_benchmark(const bench_config_t& cfg)
{
  if (cfg.rules.empty()) { throw misuse_error("benchmark needs at least one rule"); }
  std::vector<std::unique_ptr<branching_rule_t>> rules;
  for (const auto& r : cfg.rules) { rules.push_back(make_rule(r, cfg.rule_seed)); }
  std::vector<std::pair<int, std::uint64_t>> instances;
  for (int n : cfg.sizes) {
    for (int k = 0; k < cfg.count; ++k) { instances.emplace_back(n, cfg.base_seed + static_cast<std::uint64_t>(k)); }
  }
  const int nrules = static_cast<int>(rules.size());
  const int tasks  = static_cast<int>(instances.size()) * nrules;
  std::vector<bench_row_t> rows(tasks);
  std::vector<std::exception_ptr> errors(tasks);
  const int threads = std::max(1, cfg.threads);

#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (int t = 0; t < tasks; ++t) {
    try {
      const auto [n, seed] = instances[t / nrules];
      const auto inst      = generate_instance(n, seed);
      const auto model     = build_mtz(inst);
      solve_options_t opts;
      opts.limits    = cfg.limits;
      const auto res = solve(model, *rules[t % nrules], opts);
      auto& row      = rows[t];
      row.instance   = inst.tag();
      row.n          = n;
      row.rule       = cfg.rules[t % nrules];
      row.walltime_s = res.stats.wall_time_s;
      row.nodes      = res.stats.nodes;
      row.lp_solves  = res.stats.lp_solves;
      row.cost       = res.has_incumbent ? res.objective : std::numeric_limits<double>::infinity();
      row.proven     = res.status == solve_status_t::optimal;
    } catch (...) {
      errors[t] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) { std::rethrow_exception(e); }
  }
  return rows;
}

std::vector<exactness_violation_t> check_exactness(const std::vector<bench_row_t>& rows)
{
  std::map<std::string, std::pair<double, double>> range;
  std::vector<std::string> order;
  for (const auto& r : rows) {
    if (!r.proven) { continue; }
    auto it = range.find(r.instance);
    if (it == range.end()) {
      range.emplace(r.instance, std::make_pair(r.cost, r.cost));
      order.push_back(r.instance);
    } else {
      it->second.first  = std::min(it->second.first, r.cost);
      it->second.second = std::max(it->second.second, r.cost);
    }
  }
  std::vector<exactness_violation_t> out;
  for (const auto& tag : order) {
    const auto [lo, hi] = range[tag];
    if (hi - lo > exactness_tol) { out.push_back({tag, hi - lo}); }
  }
  return out;
}

summary_table_t summarize(const std::vector<bench_row_t>& rows,
                          const std::string& baseline,
                          const std::string& candidate,
                          const std::string& train_label)
{
  summary_table_t t;
  t.baseline  = baseline;
  t.candidate = candidate;
  // n -> tag -> row
  std::map<int, std::map<std::string, const bench_row_t*>> base, cand;
  for (const auto& r : rows) {
    for (auto* dst : {r.rule == baseline ? &base : nullptr, r.rule == candidate ? &cand : nullptr}) {
      if (dst == nullptr) { continue; }
      if (!(*dst)[r.n].emplace(r.instance, &r).second) {
        throw aggregation_error("duplicate row for " + r.instance + " under rule " + r.rule);
      }
    }
  }
  if (base.empty()) { throw aggregation_error("no rows for baseline rule " + baseline); }
  if (cand.empty()) { throw aggregation_error("no rows for candidate rule " + candidate); }
  std::set<int> sizes;
  for (const auto& [n, m] : base) { sizes.insert(n); }
  for (const auto& [n, m] : cand) { sizes.insert(n); }

  for (int n : sizes) {
    const auto& b = base[n];
    const auto& c = cand[n];
    if (b.size() != c.size() || !std::equal(b.begin(), b.end(), c.begin(), [](const auto& x, const auto& y) {
          return x.first == y.first;
        })) {
      throw aggregation_error("rules " + baseline + " and " + candidate + " cover different TSP" + std::to_string(n) +
                              " instance sets");
    }
    size_summary_t s;
    s.train_label = train_label;
    s.n           = n;
    std::vector<std::pair<const bench_row_t*, const bench_row_t*>> pairs;
    for (const auto& [tag, br] : b) {
      const bench_row_t* cr = c.at(tag);
      if (!br->proven || !cr->proven) {
        ++s.unproven;
        continue;
      }
      pairs.emplace_back(br, cr);
    }
    std::sort(pairs.begin(), pairs.end(), [](const auto& x, const auto& y) {
      if (x.first->walltime_s != y.first->walltime_s) { return x.first->walltime_s < y.first->walltime_s; }
      return x.first->instance < y.first->instance;
    });
    s.instances = static_cast<int>(pairs.size());
    std::vector<double> bt, ct, bn, cn;
    for (const auto& [br, cr] : pairs) {
      bt.push_back(br->walltime_s);
      ct.push_back(cr->walltime_s);
      bn.push_back(static_cast<double>(br->nodes));
      cn.push_back(static_cast<double>(cr->nodes));
    }
    const std::size_t k     = pairs.size();
    const std::size_t first = k * 8 / 10;
    const std::pair<std::size_t, std::size_t> ranges[3] = {{0, k}, {0, first}, {first, k}};
    const char* names[3]                               = {"All", "First 80", "Last 20"};
    for (int q = 0; q < 3; ++q) {
      const auto [lo, hi] = ranges[q];
      bucket_summary_t bs;
      bs.name                 = names[q];
      bs.count                = static_cast<int>(hi - lo);
      bs.baseline_time        = mean_of(bt, lo, hi);
      bs.candidate_time       = mean_of(ct, lo, hi);
      bs.time_improvement_s   = bs.baseline_time - bs.candidate_time;
      bs.time_improvement_pct = improvement_pct(bs.baseline_time, bs.candidate_time);
      bs.baseline_nodes       = mean_of(bn, lo, hi);
      bs.candidate_nodes      = mean_of(cn, lo, hi);
      bs.node_improvement_pct = improvement_pct(bs.baseline_nodes, bs.candidate_nodes);
      s.buckets.push_back(bs);
    }
    t.sizes.push_back(std::move(s));
  }
  return t;
}

namespace {

std::string cell(double v, const char* f)
{
  if (!std::isfinite(v)) { return "-"; }
  return fmt(f, v);
}

std::string pad(const std::string& s, std::size_t w)
{
  return s.size() >= w ? s + " " : s + std::string(w - s.size(), ' ');
}

}  // namespace

void write_summary_text(const summary_table_t& t, std::ostream& out)
{
  out << "baseline: " << t.baseline << "\ncandidate: " << t.candidate << "\n\n";
  const std::vector<std::pair<std::string, std::size_t>> cols = {
    {"Train", 7},         {"Test", 7},          {"Bucket", 10},        {"N", 5},
    {"Base(s)", 11},      {"Cand(s)", 11},      {"Impr(s)", 11},       {"Impr(%)", 9},
    {"Base nodes", 12},   {"Cand nodes", 12},   {"Node impr(%)", 12}};
  std::string head;
  for (const auto& [name, w] : cols) { head += pad(name, w); }
  while (!head.empty() && head.back() == ' ') { head.pop_back(); }
  out << head << '\n' << std::string(head.size(), '-') << '\n';
  for (const auto& s : t.sizes) {
    for (const auto& b : s.buckets) {
      std::string line = pad(s.train_label.empty() ? "-" : s.train_label, 7) + pad("TSP" + std::to_string(s.n), 7) +
                         pad(b.name, 10) + pad(std::to_string(b.count), 5) + pad(cell(b.baseline_time, "%.4f"), 11) +
                         pad(cell(b.candidate_time, "%.4f"), 11) + pad(cell(b.time_improvement_s, "%.4f"), 11) +
                         pad(cell(b.time_improvement_pct, "%.2f"), 9) + pad(cell(b.baseline_nodes, "%.1f"), 12) +
                         pad(cell(b.candidate_nodes, "%.1f"), 12) + cell(b.node_improvement_pct, "%.2f");
      out << line << '\n';
    }
    if (s.unproven > 0) {
      out << "  (" << s.unproven << " TSP" << s.n << " instance(s) excluded: not proven optimal by both rules)\n";
    }
  }
}

void write_summary_csv(const summary_table_t& t, std::ostream& out)
{
  out << "train,test_n,bucket,count,baseline,candidate,baseline_time_s,candidate_time_s,time_improvement_s,"
         "time_improvement_pct,baseline_nodes,candidate_nodes,node_improvement_pct,unproven\n";
  for (const auto& s : t.sizes) {
    for (const auto& b : s.buckets) {
      out << csv_field(s.train_label) << ',' << s.n << ',' << b.name << ',' << b.count << ',' << csv_field(t.baseline)
          << ',' << csv_field(t.candidate) << ',' << format_g17(b.baseline_time) << ','
          << format_g17(b.candidate_time) << ',' << format_g17(b.time_improvement_s) << ','
          << format_g17(b.time_improvement_pct) << ',' << format_g17(b.baseline_nodes) << ','
          << format_g17(b.candidate_nodes) << ',' << format_g17(b.node_improvement_pct) << ',' << s.unproven << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// SVG plots

namespace {

std::string xml_escape(const std::string& s)
{
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

constexpr double panel_w  = 900;
constexpr double panel_h  = 300;
constexpr double margin_l = 80;
constexpr double margin_r = 20;
constexpr double margin_t = 40;
constexpr double margin_b = 50;
const char* series_color[2] = {"#1f77b4", "#d62728"};

void draw_panel(std::ostringstream& o,
                double y0,
                const std::string& title,
                const std::string& baseline,
                const std::string& candidate,
                const std::vector<double>& bt,
                const std::vector<double>& ct,
                std::size_t lo,
                std::size_t hi)
{
  const double x_left = margin_l, x_right = panel_w - margin_r;
  const double y_top = y0 + margin_t, y_bottom = y0 + panel_h - margin_b;
  double ymax = 0.0;
  for (std::size_t k = lo; k < hi; ++k) { ymax = std::max({ymax, bt[k], ct[k]}); }
  if (!(ymax > 0.0)) { ymax = 1.0; }
  ymax *= 1.05;
  const std::size_t count = hi - lo;
  auto px = [&](std::size_t k) {
    if (count <= 1) { return (x_left + x_right) / 2; }
    return x_left + (x_right - x_left) * static_cast<double>(k - lo) / static_cast<double>(count - 1);
  };
  auto py = [&](double v) { return y_bottom - (y_bottom - y_top) * v / ymax; };

  o << "<g>\n";
  o << "<text x=\"" << panel_w / 2 << "\" y=\"" << y0 + 24 << "\" text-anchor=\"middle\" font-size=\"15\">"
    << xml_escape(title) << "</text>\n";
  o << "<line x1=\"" << x_left << "\" y1=\"" << y_bottom << "\" x2=\"" << x_right << "\" y2=\"" << y_bottom
    << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << x_left << "\" y1=\"" << y_top << "\" x2=\"" << x_left << "\" y2=\"" << y_bottom
    << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = ymax * t / 4.0;
    o << "<line x1=\"" << x_left - 4 << "\" y1=\"" << py(v) << "\" x2=\"" << x_left << "\" y2=\"" << py(v)
      << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << x_left - 8 << "\" y=\"" << py(v) + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
      << fmt("%.3g", v) << "</text>\n";
  }
  const std::size_t step = std::max<std::size_t>(1, count / 10);
  for (std::size_t k = lo; k < hi; k += step) {
    o << "<text x=\"" << px(k) << "\" y=\"" << y_bottom + 16 << "\" text-anchor=\"middle\" font-size=\"11\">" << k + 1
      << "</text>\n";
  }
  o << "<text x=\"" << panel_w / 2 << "\" y=\"" << y_bottom + 36 << "\" text-anchor=\"middle\" font-size=\"12\">"
    << "instance (sorted by " << xml_escape(baseline) << " wall time)</text>\n";
  o << "<text x=\"18\" y=\"" << (y_top + y_bottom) / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 18 "
    << (y_top + y_bottom) / 2 << ")\">wall time (s)</text>\n";

  const std::vector<double>* series[2] = {&bt, &ct};
  for (int s = 0; s < 2; ++s) {
    if (count > 1) {
      o << "<polyline fill=\"none\" stroke=\"" << series_color[s] << "\" stroke-width=\"1.2\" points=\"";
      for (std::size_t k = lo; k < hi; ++k) { o << fmt("%.2f", px(k)) << ',' << fmt("%.2f", py((*series[s])[k])) << ' '; }
      o << "\"/>\n";
    }
    for (std::size_t k = lo; k < hi; ++k) {
      o << "<circle cx=\"" << fmt("%.2f", px(k)) << "\" cy=\"" << fmt("%.2f", py((*series[s])[k]))
        << "\" r=\"2.5\" fill=\"" << series_color[s] << "\"/>\n";
    }
  }
  const std::string names[2] = {baseline, candidate};
  for (int s = 0; s < 2; ++s) {
    const double ly = y_top + 4 + 16 * s;
    o << "<rect x=\"" << x_left + 12 << "\" y=\"" << ly << "\" width=\"10\" height=\"10\" fill=\"" << series_color[s]
      << "\"/>\n";
    o << "<text x=\"" << x_left + 28 << "\" y=\"" << ly + 9 << "\" font-size=\"12\">" << xml_escape(names[s])
      << "</text>\n";
  }
  o << "</g>\n";
}

std::string sanitize(const std::string& s)
{
  std::string out;
  for (char c : s) { out += std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' ? c : '_'; }
  return out;
}

}  // namespace

std::string walltime_svg(const std::vector<bench_row_t>& rows, int n, const std::string& baseline, const std::string& candidate)
{
  std::map<std::string, double> base, cand;
  for (const auto& r : rows) {
    if (r.n != n) { continue; }
    if (r.rule == baseline) { base[r.instance] = r.walltime_s; }
    if (r.rule == candidate) { cand[r.instance] = r.walltime_s; }
  }
  std::vector<std::pair<double, std::string>> order;
  for (const auto& [tag, t] : base) {
    if (cand.count(tag)) { order.emplace_back(t, tag); }
  }
  std::sort(order.begin(), order.end());
  std::vector<double> bt, ct;
  for (const auto& [t, tag] : order) {
    bt.push_back(t);
    ct.push_back(cand[tag]);
  }
  const std::size_t k     = bt.size();
  const std::size_t first = k * 8 / 10;

  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << panel_w << "\" height=\"" << 3 * panel_h
    << "\" viewBox=\"0 0 " << panel_w << ' ' << 3 * panel_h << "\" font-family=\"sans-serif\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  const std::string tsp = "TSP" + std::to_string(n);
  draw_panel(o, 0, tsp + ": " + baseline + " vs " + candidate + " (all " + std::to_string(k) + ")", baseline, candidate,
             bt, ct, 0, k);
  draw_panel(o, panel_h, tsp + ": First 80 (" + std::to_string(first) + ")", baseline, candidate, bt, ct, 0, first);
  draw_panel(o, 2 * panel_h, tsp + ": Last 20 (" + std::to_string(k - first) + ")", baseline, candidate, bt, ct, first,
             k);
  o << "</svg>\n";
  return o.str();
}

std::vector<std::string> plot_walltimes(const std::vector<bench_row_t>& rows,
                                        const std::string& baseline,
                                        const std::string& out_dir)
{
  if (rows.empty()) { throw misuse_error("nothing to plot"); }
  std::filesystem::create_directories(out_dir);
  std::set<int> sizes;
  std::vector<std::string> rules;
  for (const auto& r : rows) {
    sizes.insert(r.n);
    if (r.rule != baseline && std::find(rules.begin(), rules.end(), r.rule) == rules.end()) { rules.push_back(r.rule); }
  }
  std::vector<std::string> paths;
  for (int n : sizes) {
    for (const auto& rule : rules) {
      const auto path =
        (std::filesystem::path(out_dir) / ("walltime_tsp" + std::to_string(n) + "_" + sanitize(rule) + ".svg")).string();
      std::ofstream f(path);
      if (!f) { throw error("cannot write " + path); }
      f << walltime_svg(rows, n, baseline, rule);
      paths.push_back(path);
    }
  }
  return paths;
}

}  // namespace tspbb
