/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, tspbb contributors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <tspbb/errors.hpp>
#include <tspbb/observe.hpp>
#include <tspbb/util.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

namespace tspbb {

const std::array<const char*, num_var_features> var_feature_names = {
  "obj_coef", "lp_value", "fractionality", "at_lower", "at_upper",
  "reduced_cost", "is_binary", "is_integer", "pseudocost_up", "pseudocost_down"};

const std::array<const char*, num_cons_features> cons_feature_names = {
  "sense_le", "sense_eq", "bias", "dual", "tight"};

namespace {
constexpr double bound_tol = 1e-7;

double max_abs(const std::vector<double>& v)
{
  double m = 0.0;
  for (double x : v) { m = std::max(m, std::abs(x)); }
  return m;
}

double safe_div(double a, double b) { return b > 0.0 ? a / b : 0.0; }
}  // namespace

int observation_t::num_candidates() const
{
  return static_cast<int>(std::count(candidate_mask.begin(), candidate_mask.end(), std::uint8_t{1}));
}

observation_t encode(const search_state_t& s)
{
  if (s.lp == nullptr || s.lp->status != lp_status_t::optimal) {
    throw misuse_error("encode requires an optimal node LP");
  }
  const ilp_model_t& m         = *s.model;
  const lp_solution_t& lp      = *s.lp;
  const variable_bounds_t& bnd = *s.bounds;
  const int nv                 = m.num_vars();
  const int nc                 = m.num_rows();

  observation_t o;
  o.num_vars = nv;
  o.num_cons = nc;
  o.var_features.assign(static_cast<std::size_t>(nv) * num_var_features, 0.0);
  o.cons_features.assign(static_cast<std::size_t>(nc) * num_cons_features, 0.0);
  o.candidate_mask.assign(static_cast<std::size_t>(nv), 0);
  for (int j : *s.candidates) { o.candidate_mask[j] = 1; }

  const auto c         = m.dense_objective();
  const double c_scale = max_abs(c);
  const double d_scale = max_abs(lp.reduced_costs);
  double pcu_scale = 0.0, pcd_scale = 0.0;
  if (s.pseudocosts != nullptr) {
    for (int j = 0; j < nv; ++j) {
      pcu_scale = std::max(pcu_scale, s.pseudocosts->up(j));
      pcd_scale = std::max(pcd_scale, s.pseudocosts->down(j));
    }
  }

  for (int j = 0; j < nv; ++j) {
    double* f            = &o.var_features[static_cast<std::size_t>(j) * num_var_features];
    const auto& var      = m.vars[j];
    const double x       = lp.values[j];
    const double v_scale = std::max({std::abs(std::isfinite(var.lower) ? var.lower : 0.0),
                                     std::abs(std::isfinite(var.upper) ? var.upper : 0.0), 1.0});
    f[0] = safe_div(c[j], c_scale);
    f[1] = x / v_scale;
    f[2] = var.kind == var_kind_t::continuous ? 0.0 : std::min(frac_down(x), frac_up(x));
    f[3] = std::abs(x - bnd.lower[j]) <= bound_tol ? 1.0 : 0.0;
    f[4] = std::abs(bnd.upper[j] - x) <= bound_tol ? 1.0 : 0.0;
    f[5] = safe_div(lp.reduced_costs[j], d_scale);
    f[6] = var.kind == var_kind_t::binary ? 1.0 : 0.0;
    f[7] = var.kind == var_kind_t::integer ? 1.0 : 0.0;
    if (s.pseudocosts != nullptr) {
      f[8] = safe_div(s.pseudocosts->up(j), pcu_scale);
      f[9] = safe_div(s.pseudocosts->down(j), pcd_scale);
    }
  }

  const double y_scale = max_abs(lp.duals);
  std::size_t nnz      = 0;
  for (const auto& row : m.constraints) { nnz += row.row.size(); }
  o.edges.reserve(nnz);
  for (int i = 0; i < nc; ++i) {
    const auto& row   = m.constraints[i];
    const double sign = row.sense == row_sense_t::ge ? -1.0 : 1.0;
    double norm2      = 0.0;
    for (const auto& e : row.row) { norm2 += e.value * e.value; }
    const double norm = std::sqrt(norm2);
    double* f         = &o.cons_features[static_cast<std::size_t>(i) * num_cons_features];
    f[0]              = row.sense == row_sense_t::eq ? 0.0 : 1.0;
    f[1]              = row.sense == row_sense_t::eq ? 1.0 : 0.0;
    f[2]              = safe_div(sign * row.rhs, norm);
    f[3]              = safe_div(sign * lp.duals[i], y_scale);
    f[4]              = std::abs(lp.row_activity[i] - row.rhs) <= bound_tol ? 1.0 : 0.0;
    for (const auto& e : row.row) { o.edges.push_back({i, e.index, safe_div(sign * e.value, norm)}); }
  }
  return o;
}

std::uint64_t digest(const observation_t& o)
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix        = [&h](const void* p, std::size_t len) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t k = 0; k < len; ++k) {
      h ^= b[k];
      h *= 0x100000001b3ULL;
    }
  };
  mix(&o.num_vars, sizeof(o.num_vars));
  mix(&o.num_cons, sizeof(o.num_cons));
  mix(o.var_features.data(), o.var_features.size() * sizeof(double));
  mix(o.cons_features.data(), o.cons_features.size() * sizeof(double));
  for (const auto& e : o.edges) {
    mix(&e.cons, sizeof(e.cons));
    mix(&e.var, sizeof(e.var));
    mix(&e.weight, sizeof(e.weight));
  }
  mix(o.candidate_mask.data(), o.candidate_mask.size());
  return h;
}

double reward_surrogate(const transition_t&) { return -1.0; }

double trajectory_log_t::total_reward() const
{
  double s = 0.0;
  for (const auto& st : steps) { s += st.reward; }
  return s;
}

// ---------------------------------------------------------------------------
// Dataset file

namespace {

void append_matrix(std::string& out, const std::vector<double>& data, int rows, int cols)
{
  out += '[';
  for (int r = 0; r < rows; ++r) {
    if (r) { out += ','; }
    out += '[';
    for (int c = 0; c < cols; ++c) {
      if (c) { out += ','; }
      append_g17(out, data[static_cast<std::size_t>(r) * cols + c]);
    }
    out += ']';
  }
  out += ']';
}

}  // namespace

std::string sample_to_json_line(const sample_record_t& s)
{
  const auto& o = s.observation;
  std::string out;
  out.reserve(o.var_features.size() * 6 + o.edges.size() * 16 + 256);
  out += "{\"instance\":";
  out += nlohmann::json(s.instance).dump();
  out += ",\"depth\":" + std::to_string(s.depth);
  out += ",\"action\":" + std::to_string(s.action);
  out += ",\"weight\":";
  append_g17(out, s.weight);
  out += ",\"schema_version\":" + std::to_string(o.schema_version);
  out += ",\"var_features\":";
  append_matrix(out, o.var_features, o.num_vars, num_var_features);
  out += ",\"cons_features\":";
  append_matrix(out, o.cons_features, o.num_cons, num_cons_features);
  out += ",\"edges\":[";
  for (std::size_t k = 0; k < o.edges.size(); ++k) {
    if (k) { out += ','; }
    out += '[' + std::to_string(o.edges[k].cons) + ',' + std::to_string(o.edges[k].var) + ',';
    append_g17(out, o.edges[k].weight);
    out += ']';
  }
  out += "],\"mask\":[";
  for (std::size_t k = 0; k < o.candidate_mask.size(); ++k) {
    if (k) { out += ','; }
    out += o.candidate_mask[k] ? '1' : '0';
  }
  out += "]}";
  return out;
}

void write_dataset(const dataset_t& ds, std::ostream& out)
{
  nlohmann::ordered_json h;
  h["schema_version"]       = ds.header.schema_version;
  h["var_feature_names"]    = std::vector<std::string>(var_feature_names.begin(), var_feature_names.end());
  h["cons_feature_names"]   = std::vector<std::string>(cons_feature_names.begin(), cons_feature_names.end());
  h["generator"]            = ds.header.generator.is_null() ? nlohmann::ordered_json::object() : ds.header.generator;
  h["num_samples"]          = ds.samples.size();
  out << h.dump() << '\n';
  for (const auto& s : ds.samples) { out << sample_to_json_line(s) << '\n'; }
}

namespace {

std::vector<double> read_matrix(const nlohmann::json& j, int cols, int& rows)
{
  rows = static_cast<int>(j.size());
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(rows) * cols);
  for (const auto& r : j) {
    if (static_cast<int>(r.size()) != cols) { throw schema_error("feature row width mismatch"); }
    for (const auto& v : r) { out.push_back(v.get<double>()); }
  }
  return out;
}

}  // namespace

dataset_t read_dataset(std::istream& in)
{
  dataset_t ds;
  std::string line;
  if (!std::getline(in, line)) { throw schema_error("empty dataset file"); }
  const auto h             = nlohmann::ordered_json::parse(line);
  ds.header.schema_version = h.at("schema_version").get<int>();
  if (ds.header.schema_version != observation_schema_version) {
    throw schema_error("dataset schema_version " + std::to_string(ds.header.schema_version) +
                       " does not match observation schema " + std::to_string(observation_schema_version));
  }
  if (h.contains("generator")) { ds.header.generator = h["generator"]; }
  while (std::getline(in, line)) {
    if (line.empty()) { continue; }
    const auto j = nlohmann::json::parse(line);
    sample_record_t s;
    s.instance                  = j.at("instance").get<std::string>();
    s.depth                     = j.at("depth").get<int>();
    s.action                    = j.at("action").get<int>();
    s.weight                    = j.at("weight").get<double>();
    auto& o                     = s.observation;
    o.schema_version            = j.at("schema_version").get<int>();
    o.var_features              = read_matrix(j.at("var_features"), num_var_features, o.num_vars);
    o.cons_features             = read_matrix(j.at("cons_features"), num_cons_features, o.num_cons);
    for (const auto& e : j.at("edges")) { o.edges.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<double>()}); }
    for (const auto& b : j.at("mask")) { o.candidate_mask.push_back(static_cast<std::uint8_t>(b.get<int>())); }
    if (static_cast<int>(o.candidate_mask.size()) != o.num_vars) { throw schema_error("mask length mismatch"); }
    if (s.action < 0 || s.action >= o.num_vars || !o.candidate_mask[s.action]) {
      throw schema_error("sample action is not a masked candidate");
    }
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

}  // namespace tspbb
