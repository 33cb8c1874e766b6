/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, tspbb contributors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <tspbb/errors.hpp>
#include <tspbb/instances.hpp>
#include <tspbb/rng.hpp>
#include <tspbb/util.hpp>

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace tspbb {

std::string tsp_instance_t::tag() const
{
  return "tsp" + std::to_string(n) + "_" + std::to_string(seed);
}

tsp_instance_t instance_from_points(const std::vector<point_t>& pts)
{
  if (pts.size() < 3) { throw invalid_instance_error("TSP instance needs at least 3 nodes"); }
  tsp_instance_t inst;
  inst.n      = static_cast<int>(pts.size());
  inst.coords = pts;
  inst.cost.assign(static_cast<std::size_t>(inst.n) * inst.n, 0.0);
  for (int i = 0; i < inst.n; ++i) {
    for (int j = i + 1; j < inst.n; ++j) {
      const double d = std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y);
      inst.cost[static_cast<std::size_t>(i) * inst.n + j] = d;
      inst.cost[static_cast<std::size_t>(j) * inst.n + i] = d;
    }
  }
  return inst;
}

tsp_instance_t generate_instance(int n, std::uint64_t seed)
{
  if (n < 3) { throw invalid_instance_error("TSP instance needs n >= 3, got " + std::to_string(n)); }
  rng_t rng(seed);
  std::vector<point_t> pts(static_cast<std::size_t>(n));
  for (auto& p : pts) {
    p.x = rng.uniform();
    p.y = rng.uniform();
  }
  auto inst = instance_from_points(pts);
  inst.seed = seed;
  return inst;
}

std::vector<double> ilp_model_t::dense_objective() const
{
  std::vector<double> c(vars.size(), 0.0);
  for (const auto& e : objective) { c[e.index] += e.value; }
  return c;
}

ilp_model_t build_mtz(const tsp_instance_t& inst)
{
  const int n = inst.n;
  if (n < 3 || static_cast<int>(inst.cost.size()) != n * n) {
    throw invalid_instance_error("malformed TSP instance");
  }
  const mtz_layout_t lay{n};
  ilp_model_t m;
  m.name = inst.tag();
  m.vars.resize(static_cast<std::size_t>(lay.num_vars()));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) { continue; }
      m.vars[lay.x(i, j)] = {
        "x_" + std::to_string(i + 1) + "_" + std::to_string(j + 1), 0.0, 1.0, var_kind_t::binary};
      const double c = inst.c(i, j);
      if (c != 0.0) { m.objective.push_back({lay.x(i, j), c}); }
    }
  }
  for (int i = 1; i < n; ++i) {
    m.vars[lay.u(i)] = {"u_" + std::to_string(i + 1), 1.0, static_cast<double>(n - 1),
                        var_kind_t::integer};
  }

  // In-degree rows: sum_i x_ij = 1 for every j.
  for (int j = 0; j < n; ++j) {
    constraint_t row{"in_" + std::to_string(j + 1), {}, row_sense_t::eq, 1.0};
    for (int i = 0; i < n; ++i) {
      if (i != j) { row.row.push_back({lay.x(i, j), 1.0}); }
    }
    m.constraints.push_back(std::move(row));
  }
  // Out-degree rows: sum_j x_ij = 1 for every i.
  for (int i = 0; i < n; ++i) {
    constraint_t row{"out_" + std::to_string(i + 1), {}, row_sense_t::eq, 1.0};
    for (int j = 0; j < n; ++j) {
      if (i != j) { row.row.push_back({lay.x(i, j), 1.0}); }
    }
    m.constraints.push_back(std::move(row));
  }
  // u_i - u_j + n x_ij <= n - 1 for 2 <= i != j <= n.
  for (int i = 1; i < n; ++i) {
    for (int j = 1; j < n; ++j) {
      if (i == j) { continue; }
      constraint_t row{"mtz_" + std::to_string(i + 1) + "_" + std::to_string(j + 1),
                       {{lay.x(i, j), static_cast<double>(n)}, {lay.u(i), 1.0}, {lay.u(j), -1.0}},
                       row_sense_t::le,
                       static_cast<double>(n - 1)};
      m.constraints.push_back(std::move(row));
    }
  }
  return m;
}

std::string lp_file_name(int n, std::uint64_t seed)
{
  return "instances_" + std::to_string(n) + "_" + std::to_string(seed) + ".lp";
}

// ---------------------------------------------------------------------------
// LP writer

namespace {

std::string format_bound(double v)
{
  if (v == std::numeric_limits<double>::infinity()) { return "+inf"; }
  if (v == -std::numeric_limits<double>::infinity()) { return "-inf"; }
  return format_g17(v);
}

void write_linear(std::ostream& out,
                  const ilp_model_t& m,
                  const std::vector<sparse_entry_t>& terms,
                  std::size_t& col,
                  const std::string& indent)
{
  bool first = true;
  for (const auto& t : terms) {
    std::string term;
    const double v = t.value;
    if (v < 0 || std::signbit(v)) {
      term = first ? "-" : "- ";
    } else if (!first) {
      term = "+ ";
    }
    const double a = std::abs(v);
    if (a != 1.0) { term += format_g17(a) + " "; }
    term += m.vars[t.index].name;
    if (col + term.size() > 78 && !first) {
      out << "\n" << indent;
      col = indent.size();
    } else if (!first) {
      out << ' ';
      ++col;
    }
    out << term;
    col += term.size();
    first = false;
  }
  if (first) {
    out << "0";
    ++col;
  }
}

const char* sense_token(row_sense_t s)
{
  switch (s) {
    case row_sense_t::le: return "<=";
    case row_sense_t::eq: return "=";
    case row_sense_t::ge: return ">=";
  }
  return "=";
}

}  // namespace

void write_lp(const ilp_model_t& m, std::ostream& out)
{
  out << "\\ Problem name: " << (m.name.empty() ? "model" : m.name) << "\n\n";
  out << "Minimize\n obj: ";
  // Every column is listed in index order, zeros included, so a parser that
  // registers names on first appearance recovers the column order.
  std::vector<sparse_entry_t> obj_terms;
  obj_terms.reserve(m.vars.size());
  {
    const auto c = m.dense_objective();
    for (int j = 0; j < m.num_vars(); ++j) { obj_terms.push_back({j, c[j]}); }
  }
  std::size_t col = 6;
  bool first      = true;
  for (const auto& t : obj_terms) {
    std::string term;
    const double a = std::abs(t.value);
    if (std::signbit(t.value)) {
      term = first ? "-" : "- ";
    } else if (!first) {
      term = "+ ";
    }
    term += format_g17(a) + " " + m.vars[t.index].name;
    if (col + term.size() > 78 && !first) {
      out << "\n      ";
      col = 6;
    } else if (!first) {
      out << ' ';
      ++col;
    }
    out << term;
    col += term.size();
    first = false;
  }
  out << "\nSubject To\n";
  for (const auto& row : m.constraints) {
    const std::string head = " " + row.name + ": ";
    out << head;
    col = head.size();
    write_linear(out, m, row.row, col, "   ");
    out << ' ' << sense_token(row.sense) << ' ' << format_g17(row.rhs) << '\n';
  }
  out << "Bounds\n";
  for (const auto& v : m.vars) {
    if (v.kind == var_kind_t::binary && v.lower == 0.0 && v.upper == 1.0) { continue; }
    if (v.lower == -std::numeric_limits<double>::infinity() &&
        v.upper == std::numeric_limits<double>::infinity()) {
      out << ' ' << v.name << " free\n";
      continue;
    }
    out << ' ' << format_bound(v.lower) << " <= " << v.name << " <= " << format_bound(v.upper) << '\n';
  }
  auto write_names = [&](var_kind_t kind, const char* header) {
    std::vector<const std::string*> names;
    for (const auto& v : m.vars) {
      if (v.kind == kind) { names.push_back(&v.name); }
    }
    if (names.empty()) { return; }
    out << header << '\n';
    std::size_t c = 0;
    for (const auto* nm : names) {
      if (c + nm->size() + 1 > 78) {
        out << '\n';
        c = 0;
      }
      out << ' ' << *nm;
      c += nm->size() + 1;
    }
    out << '\n';
  };
  write_names(var_kind_t::integer, "Generals");
  write_names(var_kind_t::binary, "Binaries");
  out << "End\n";
}

// ---------------------------------------------------------------------------
// LP parser

namespace {

enum class tok_kind { name, number, op, colon, end };

struct token_t {
  tok_kind kind;
  std::string text;
  double value = 0.0;
  int line     = 0;
};

enum class section_t { none, objective, constraints, bounds, generals, binaries, end };

std::string lower(std::string s)
{
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool is_name_start(char c)
{
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '!' || c == '"' ||
         c == '#' || c == '$' || c == '%' || c == '&' || c == '(' || c == ')' || c == '/' ||
         c == ',' || c == ';' || c == '?' || c == '@' || c == '\'' || c == '`' || c == '{' ||
         c == '}' || c == '|' || c == '~';
}

bool is_name_char(char c)
{
  return is_name_start(c) || std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '[' ||
         c == ']';
}

// Section header recognition on a trimmed, lower-cased line.
std::optional<section_t> header_of(const std::string& l, int line)
{
  static const std::map<std::string, section_t> known = {
    {"minimize", section_t::objective},    {"minimum", section_t::objective},
    {"min", section_t::objective},         {"subject to", section_t::constraints},
    {"such that", section_t::constraints}, {"st", section_t::constraints},
    {"s.t.", section_t::constraints},      {"st.", section_t::constraints},
    {"bounds", section_t::bounds},         {"bound", section_t::bounds},
    {"generals", section_t::generals},     {"general", section_t::generals},
    {"gen", section_t::generals},          {"binaries", section_t::binaries},
    {"binary", section_t::binaries},       {"bin", section_t::binaries},
    {"end", section_t::end}};
  static const char* maximize[] = {"maximize", "maximum", "max"};
  static const char* unknown[]  = {"semi-continuous", "semi", "semis", "sos",
                                   "general constraints", "genconstrs", "pwlobj",
                                   "lazy constraints", "user cuts"};
  std::string key = l;
  // collapse internal whitespace
  std::string compact;
  bool space = false;
  for (char c : key) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = true;
    } else {
      if (space && !compact.empty()) { compact += ' '; }
      compact += c;
      space = false;
    }
  }
  if (auto it = known.find(compact); it != known.end()) { return it->second; }
  for (const char* m : maximize) {
    if (compact == m) {
      throw unsupported_sense_error("maximization objectives are not supported", line);
    }
  }
  for (const char* u : unknown) {
    if (compact == u) { throw lp_parse_error("unknown section '" + compact + "'", line); }
  }
  return std::nullopt;
}

class lp_reader_t {
 public:
  explicit lp_reader_t(std::istream& in) : in_(in) {}

  ilp_model_t parse()
  {
    read_sections();
    parse_objective();
    parse_constraints();
    parse_bounds();
    parse_names(generals_, var_kind_t::integer);
    parse_names(binaries_, var_kind_t::binary);
    for (std::size_t j = 0; j < model_.vars.size(); ++j) {
      auto& v = model_.vars[j];
      if (v.kind == var_kind_t::binary && !explicit_bounds_[j]) {
        v.lower = 0.0;
        v.upper = 1.0;
      }
    }
    return std::move(model_);
  }

 private:
  void read_sections()
  {
    std::string raw;
    int line_no           = 0;
    section_t current     = section_t::none;
    bool seen_end         = false;
    bool seen_objective   = false;
    while (std::getline(in_, raw)) {
      ++line_no;
      if (auto p = raw.find('\\'); p != std::string::npos) {
        if (line_no == 1 && raw.rfind("\\ Problem name:", 0) == 0) {
          std::string nm = raw.substr(15);
          auto b         = nm.find_first_not_of(' ');
          model_.name    = b == std::string::npos ? "" : nm.substr(b);
        }
        raw.erase(p);
      }
      std::string trimmed = raw;
      trimmed.erase(0, trimmed.find_first_not_of(" \t\r"));
      trimmed.erase(trimmed.find_last_not_of(" \t\r") + 1);
      if (trimmed.empty()) { continue; }
      if (seen_end) { throw lp_parse_error("content after End", line_no); }
      if (auto h = header_of(lower(trimmed), line_no)) {
        current = *h;
        if (current == section_t::end) { seen_end = true; }
        if (current == section_t::objective) { seen_objective = true; }
        continue;
      }
      // "Minimize obj: ..." on one line is allowed for the objective keywords.
      {
        std::string l = lower(trimmed);
        for (const char* kw : {"minimize", "minimum", "min"}) {
          const std::size_t len = std::char_traits<char>::length(kw);
          if (l.size() > len && l.compare(0, len, kw) == 0 && std::isspace(static_cast<unsigned char>(l[len]))) {
            current        = section_t::objective;
            seen_objective = true;
            trimmed        = trimmed.substr(len);
            break;
          }
        }
        for (const char* kw : {"maximize", "maximum", "max"}) {
          const std::size_t len = std::char_traits<char>::length(kw);
          if (l.size() > len && l.compare(0, len, kw) == 0 && std::isspace(static_cast<unsigned char>(l[len]))) {
            throw unsupported_sense_error("maximization objectives are not supported", line_no);
          }
        }
      }
      if (current == section_t::none) {
        throw lp_parse_error("expected a section header, got '" + trimmed + "'", line_no);
      }
      tokenize(trimmed, line_no, current);
    }
    if (!seen_objective) { throw lp_parse_error("missing Minimize section", line_no); }
    if (!seen_end) { throw lp_parse_error("missing End", line_no); }
    last_line_ = line_no;
  }

  void tokenize(const std::string& s, int line, section_t sec)
  {
    std::vector<token_t>* dst = nullptr;
    switch (sec) {
      case section_t::objective: dst = &objective_; break;
      case section_t::constraints: dst = &constraints_; break;
      case section_t::bounds: dst = &bounds_; break;
      case section_t::generals: dst = &generals_; break;
      case section_t::binaries: dst = &binaries_; break;
      default: throw lp_parse_error("unexpected content", line);
    }
    std::size_t i = 0;
    while (i < s.size()) {
      const char c = s[i];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++i;
        continue;
      }
      if (c == '<' || c == '>' || c == '=') {
        std::string op(1, c);
        ++i;
        if (i < s.size() && s[i] == '=') {
          if (c != '=') { op += '='; }
          ++i;
        } else if (c == '=' && i < s.size() && (s[i] == '<' || s[i] == '>')) {
          op = std::string(1, s[i]) + "=";
          ++i;
        }
        if (op == "<") { op = "<="; }
        if (op == ">") { op = ">="; }
        dst->push_back({tok_kind::op, op, 0.0, line});
        continue;
      }
      if (c == '+' || c == '-') {
        dst->push_back({tok_kind::op, std::string(1, c), 0.0, line});
        ++i;
        continue;
      }
      if (c == ':') {
        dst->push_back({tok_kind::colon, ":", 0.0, line});
        ++i;
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        std::size_t j = i;
        while (j < s.size() && (std::isdigit(static_cast<unsigned char>(s[j])) || s[j] == '.')) { ++j; }
        if (j < s.size() && (s[j] == 'e' || s[j] == 'E')) {
          std::size_t k = j + 1;
          if (k < s.size() && (s[k] == '+' || s[k] == '-')) { ++k; }
          if (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) {
            j = k;
            while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) { ++j; }
          }
        }
        const std::string text = s.substr(i, j - i);
        char* endp             = nullptr;
        const double v         = std::strtod(text.c_str(), &endp);
        if (endp != text.c_str() + text.size()) {
          throw lp_parse_error("malformed number '" + text + "'", line);
        }
        dst->push_back({tok_kind::number, text, v, line});
        i = j;
        continue;
      }
      if (is_name_start(c)) {
        std::size_t j = i;
        while (j < s.size() && is_name_char(s[j])) { ++j; }
        std::string text = s.substr(i, j - i);
        const std::string l = lower(text);
        if (l == "inf" || l == "infinity") {
          dst->push_back({tok_kind::number, text, std::numeric_limits<double>::infinity(), line});
        } else {
          dst->push_back({tok_kind::name, text, 0.0, line});
        }
        i = j;
        continue;
      }
      throw lp_parse_error(std::string("unexpected character '") + c + "'", line);
    }
  }

  int var_index(const std::string& name)
  {
    auto it = index_.find(name);
    if (it != index_.end()) { return it->second; }
    const int idx = static_cast<int>(model_.vars.size());
    model_.vars.push_back({name, 0.0, std::numeric_limits<double>::infinity(), var_kind_t::continuous});
    explicit_bounds_.push_back(false);
    index_.emplace(name, idx);
    return idx;
  }

  // Parses "[+-] [coef] name ..." starting at pos, stopping at a sense
  // operator or end. Duplicate names are summed; zero sums are dropped.
  std::vector<sparse_entry_t> parse_linear(const std::vector<token_t>& t, std::size_t& pos, bool stop_at_sense)
  {
    std::map<int, double> acc;
    std::vector<int> order;
    bool expect_term = true;
    while (pos < t.size()) {
      const token_t& tk = t[pos];
      if (tk.kind == tok_kind::op && (tk.text == "<=" || tk.text == ">=" || tk.text == "=")) {
        if (!stop_at_sense) { throw lp_parse_error("unexpected '" + tk.text + "'", tk.line); }
        break;
      }
      double sign = 1.0;
      bool had_sign = false;
      while (pos < t.size() && t[pos].kind == tok_kind::op && (t[pos].text == "+" || t[pos].text == "-")) {
        if (t[pos].text == "-") { sign = -sign; }
        had_sign = true;
        ++pos;
      }
      if (!had_sign && !expect_term) { throw lp_parse_error("missing operator between terms", tk.line); }
      if (pos >= t.size()) { throw lp_parse_error("dangling sign", tk.line); }
      double coef = 1.0;
      if (t[pos].kind == tok_kind::number) {
        coef = t[pos].value;
        ++pos;
        if (pos >= t.size() || t[pos].kind != tok_kind::name) {
          // A bare zero stands for an empty expression.
          if (coef != 0.0) { throw lp_parse_error("constant terms are not supported", t[pos - 1].line); }
          expect_term = false;
          continue;
        }
      }
      if (t[pos].kind != tok_kind::name) {
        throw lp_parse_error("expected variable name, got '" + t[pos].text + "'", t[pos].line);
      }
      const int j = var_index(t[pos].text);
      ++pos;
      if (acc.find(j) == acc.end()) { order.push_back(j); }
      acc[j] += sign * coef;
      expect_term = false;
    }
    std::vector<sparse_entry_t> out;
    for (int j : order) {
      if (acc[j] != 0.0) { out.push_back({j, acc[j]}); }
    }
    return out;
  }

  void parse_objective()
  {
    std::size_t pos = 0;
    if (objective_.size() >= 2 && objective_[0].kind == tok_kind::name && objective_[1].kind == tok_kind::colon) {
      pos = 2;
    }
    model_.objective = parse_linear(objective_, pos, false);
  }

  void parse_constraints()
  {
    const auto& t   = constraints_;
    std::size_t pos = 0;
    int unnamed     = 0;
    while (pos < t.size()) {
      constraint_t row;
      if (pos + 1 < t.size() && t[pos].kind == tok_kind::name && t[pos + 1].kind == tok_kind::colon) {
        row.name = t[pos].text;
        pos += 2;
      } else {
        row.name = "R" + std::to_string(++unnamed);
      }
      const int line = pos < t.size() ? t[pos].line : last_line_;
      row.row        = parse_linear(t, pos, true);
      if (pos >= t.size()) { throw lp_parse_error("constraint '" + row.name + "' has no sense", line); }
      const std::string op = t[pos].text;
      row.sense = op == "<=" ? row_sense_t::le : (op == ">=" ? row_sense_t::ge : row_sense_t::eq);
      ++pos;
      double sign = 1.0;
      while (pos < t.size() && t[pos].kind == tok_kind::op && (t[pos].text == "+" || t[pos].text == "-")) {
        if (t[pos].text == "-") { sign = -sign; }
        ++pos;
      }
      if (pos >= t.size() || t[pos].kind != tok_kind::number) {
        throw lp_parse_error("constraint '" + row.name + "' needs a numeric right-hand side", line);
      }
      row.rhs = sign * t[pos].value;
      ++pos;
      model_.constraints.push_back(std::move(row));
    }
  }

  // Reads an optionally signed number (including inf) at pos.
  bool read_number(const std::vector<token_t>& t, std::size_t& pos, double& v)
  {
    std::size_t p = pos;
    double sign   = 1.0;
    while (p < t.size() && t[p].kind == tok_kind::op && (t[p].text == "+" || t[p].text == "-")) {
      if (t[p].text == "-") { sign = -sign; }
      ++p;
    }
    if (p < t.size() && t[p].kind == tok_kind::number) {
      v   = sign * t[p].value;
      pos = p + 1;
      return true;
    }
    return false;
  }

  void apply_bound(int j, const std::string& op, double v, bool var_on_left, int line)
  {
    auto& var = model_.vars[j];
    explicit_bounds_[j] = true;
    std::string eff = op;
    if (!var_on_left) {
      if (op == "<=") eff = ">=";
      else if (op == ">=") eff = "<=";
    }
    if (eff == "<=") {
      var.upper = v;
    } else if (eff == ">=") {
      var.lower = v;
    } else if (eff == "=") {
      var.lower = var.upper = v;
    } else {
      throw lp_parse_error("bad bound operator '" + op + "'", line);
    }
  }

  void parse_bounds()
  {
    const auto& t   = bounds_;
    std::size_t pos = 0;
    while (pos < t.size()) {
      const int line = t[pos].line;
      double lhs     = 0.0;
      if (read_number(t, pos, lhs)) {
        // l <= x [<= u]
        if (pos >= t.size() || t[pos].kind != tok_kind::op) { throw lp_parse_error("malformed bound", line); }
        const std::string op1 = t[pos++].text;
        if (pos >= t.size() || t[pos].kind != tok_kind::name) { throw lp_parse_error("malformed bound", line); }
        const int j = var_index(t[pos++].text);
        apply_bound(j, op1, lhs, false, line);
        if (pos < t.size() && t[pos].kind == tok_kind::op &&
            (t[pos].text == "<=" || t[pos].text == ">=" || t[pos].text == "=")) {
          const std::string op2 = t[pos++].text;
          double rhs            = 0.0;
          if (!read_number(t, pos, rhs)) { throw lp_parse_error("malformed bound", line); }
          apply_bound(j, op2, rhs, true, line);
        }
        continue;
      }
      if (t[pos].kind != tok_kind::name) { throw lp_parse_error("malformed bound '" + t[pos].text + "'", line); }
      const int j = var_index(t[pos++].text);
      if (pos < t.size() && t[pos].kind == tok_kind::name && lower(t[pos].text) == "free") {
        ++pos;
        explicit_bounds_[j] = true;
        model_.vars[j].lower = -std::numeric_limits<double>::infinity();
        model_.vars[j].upper = std::numeric_limits<double>::infinity();
        continue;
      }
      if (pos >= t.size() || t[pos].kind != tok_kind::op) { throw lp_parse_error("malformed bound", line); }
      const std::string op = t[pos++].text;
      double v             = 0.0;
      if (!read_number(t, pos, v)) { throw lp_parse_error("malformed bound", line); }
      apply_bound(j, op, v, true, line);
    }
  }

  void parse_names(const std::vector<token_t>& t, var_kind_t kind)
  {
    for (const auto& tk : t) {
      if (tk.kind != tok_kind::name) { throw lp_parse_error("expected a variable name, got '" + tk.text + "'", tk.line); }
      model_.vars[var_index(tk.text)].kind = kind;
    }
  }

  std::istream& in_;
  ilp_model_t model_;
  std::unordered_map<std::string, int> index_;
  std::vector<bool> explicit_bounds_;
  std::vector<token_t> objective_, constraints_, bounds_, generals_, binaries_;
  int last_line_ = 0;
};

}  // namespace

ilp_model_t parse_lp(std::istream& in) { return lp_reader_t(in).parse(); }

// ---------------------------------------------------------------------------

std::vector<int> extract_tour(const tsp_instance_t& inst, const std::vector<double>& values)
{
  const int n = inst.n;
  const mtz_layout_t lay{n};
  if (static_cast<int>(values.size()) < lay.num_x()) { throw misuse_error("assignment too short"); }
  std::vector<int> succ(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) { continue; }
      const double v = values[lay.x(i, j)];
      if (std::abs(v) > 1e-6 && std::abs(v - 1.0) > 1e-6) {
        throw misuse_error("x_" + std::to_string(i + 1) + "_" + std::to_string(j + 1) + " is not integral");
      }
      if (v > 0.5) {
        if (succ[i] != -1) { throw not_a_tour_error("node " + std::to_string(i + 1) + " has two successors"); }
        succ[i] = j;
      }
    }
  }
  std::vector<int> tour;
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  int cur = 0;
  while (!seen[cur]) {
    seen[cur] = true;
    tour.push_back(cur);
    if (succ[cur] < 0) { throw not_a_tour_error("node " + std::to_string(cur + 1) + " has no successor"); }
    cur = succ[cur];
  }
  if (cur != 0 || static_cast<int>(tour.size()) != n) {
    throw not_a_tour_error("successor walk from node 1 closes after " + std::to_string(tour.size()) +
                           " of " + std::to_string(n) + " nodes");
  }
  return tour;
}

double tour_cost(const tsp_instance_t& inst, const std::vector<int>& tour)
{
  double s = 0.0;
  for (std::size_t k = 0; k < tour.size(); ++k) {
    s += inst.c(tour[k], tour[(k + 1) % tour.size()]);
  }
  return s;
}

brute_force_result_t brute_force_optimal(const tsp_instance_t& inst)
{
  const int n = inst.n;
  if (n > 12) { throw oracle_too_large_error("brute force oracle limited to n <= 12, got " + std::to_string(n)); }
  if (n < 3) { throw invalid_instance_error("n < 3"); }
  std::vector<int> perm(static_cast<std::size_t>(n - 1));
  std::iota(perm.begin(), perm.end(), 1);
  brute_force_result_t best{std::numeric_limits<double>::infinity(), {}};
  do {
    // Each undirected tour appears twice (once per direction); keep one.
    if (perm.front() > perm.back()) { continue; }
    double c = inst.c(0, perm.front()) + inst.c(perm.back(), 0);
    for (std::size_t k = 0; k + 1 < perm.size(); ++k) { c += inst.c(perm[k], perm[k + 1]); }
    if (c < best.cost) {
      best.cost = c;
      best.tour.assign(1, 0);
      best.tour.insert(best.tour.end(), perm.begin(), perm.end());
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

void write_manifest(const std::vector<manifest_entry_t>& entries, std::ostream& out)
{
  for (const auto& e : entries) {
    nlohmann::ordered_json j;
    j["n"]    = e.n;
    j["seed"] = e.seed;
    if (e.optimal_cost) { j["optimal_cost"] = *e.optimal_cost; }
    out << j.dump() << '\n';
  }
}

std::vector<manifest_entry_t> read_manifest(std::istream& in)
{
  std::vector<manifest_entry_t> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) { continue; }
    const auto j = nlohmann::json::parse(line);
    manifest_entry_t e{j.at("n").get<int>(), j.at("seed").get<std::uint64_t>(), std::nullopt};
    if (j.contains("optimal_cost") && !j["optimal_cost"].is_null()) { e.optimal_cost = j["optimal_cost"].get<double>(); }
    out.push_back(e);
  }
  return out;
}

}  // namespace tspbb
