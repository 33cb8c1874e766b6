#include <doctest.h>

#include <tspbb/bnb.hpp>
#include <tspbb/errors.hpp>

#include <json.hpp>

#include <cmath>
#include <map>

using namespace tspbb;

namespace {

bnb_node_t solved_node(const std::vector<double>& x, std::vector<int> frac)
{
  bnb_node_t n;
  n.id  = 4;
  n.depth = 2;
  auto lp       = std::make_shared<lp_solution_t>();
  lp->status    = lp_status_t::optimal;
  lp->values    = x;
  lp->objective = 7.5;
  n.lp          = lp;
  n.fractional_set = std::move(frac);
  return n;
}

std::vector<std::unique_ptr<branching_rule_t>> all_rules()
{
  std::vector<std::unique_ptr<branching_rule_t>> r;
  r.push_back(std::make_unique<strong_rule_t>());
  r.push_back(std::make_unique<pseudocost_rule_t>());
  r.push_back(std::make_unique<most_infeasible_rule_t>());
  r.push_back(std::make_unique<random_rule_t>(5));
  r.push_back(std::make_unique<mixed_expert_rule_t>(0.3, 2));
  r.push_back(std::make_unique<policy_rule_t>(std::make_shared<const policy_params_t>(init_params(1)), "fresh"));
  return r;
}

}  // namespace

TEST_CASE("fractional set uses the integrality tolerance")
{
  ilp_model_t m;
  for (int j = 0; j < 5; ++j) { m.vars.push_back({"v", 0, 9, var_kind_t::integer}); }
  const std::vector<double> x = {1.0, 1.0 + 5e-7, 2.5, 3.0 - 2e-6, 0.999};
  CHECK(fractional_set(m, x) == std::vector<int>{2, 3, 4});
}

TEST_CASE("branch on a binary fixes it to zero and one")
{
  const auto n    = solved_node({0.5, 1.0}, {0});
  auto [down, up] = branch(n, 0, 10);
  CHECK(down.id == 10);
  CHECK(up.id == 11);
  CHECK(down.parent == 4);
  CHECK(down.depth == 3);
  CHECK(down.bound == 7.5);
  REQUIRE(down.local_bounds.size() == 1);
  CHECK(down.local_bounds[0].side == bound_side_t::upper);
  CHECK(down.local_bounds[0].value == 0.0);
  CHECK(up.local_bounds[0].side == bound_side_t::lower);
  CHECK(up.local_bounds[0].value == 1.0);
  CHECK_THROWS_AS(branch(n, 1, 10), misuse_error);
}

TEST_CASE("branch on an integer uses floor and ceiling")
{
  ilp_model_t m;
  m.vars.push_back({"u", 1, 4, var_kind_t::integer});
  const auto root = variable_bounds_t::from_model(m);
  const auto n    = solved_node({2.3}, {0});
  auto [down, up] = branch(n, 0, 1);
  const auto bd   = node_bounds(down, root);
  const auto bu   = node_bounds(up, root);
  CHECK(bd.lower[0] == 1.0);
  CHECK(bd.upper[0] == 2.0);
  CHECK(bu.lower[0] == 3.0);
  CHECK(bu.upper[0] == 4.0);
  // partition: every integer in [1, 4] lands in exactly one child
  for (int k = 1; k <= 4; ++k) {
    const bool in_down = k >= bd.lower[0] && k <= bd.upper[0];
    const bool in_up   = k >= bu.lower[0] && k <= bu.upper[0];
    CHECK(in_down != in_up);
  }
}

TEST_CASE("node selection order")
{
  auto node = [](int id, int depth, double bound) {
    bnb_node_t n;
    n.id    = id;
    n.depth = depth;
    n.bound = bound;
    return n;
  };
  node_queue_t q;
  q.push(node(1, 1, 10.1));
  q.push(node(2, 1, 9.8));
  CHECK(select_node(q).id == 2);
  node_queue_t t;
  t.push(node(3, 3, 5.0));
  t.push(node(4, 5, 5.0));
  CHECK(select_node(t).id == 4);
  node_queue_t u;
  u.push(node(8, 2, 5.0));
  u.push(node(6, 2, 5.0));
  u.push(node(7, 2, 5.0));
  CHECK(select_node(u).id == 6);
  CHECK(select_node(u).id == 7);
  CHECK(select_node(u).id == 8);
  CHECK_THROWS_AS(select_node(u), misuse_error);
}

TEST_CASE("every rule matches brute force on small instances")
{
  for (int n = 5; n <= 7; ++n) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const auto inst   = generate_instance(n, seed);
      const auto model  = build_mtz(inst);
      const double best = brute_force_optimal(inst).cost;
      for (const auto& rule : all_rules()) {
        const auto r = solve(model, *rule);
        INFO("n=" << n << " seed=" << seed << " rule=" << rule->name());
        REQUIRE(r.status == solve_status_t::optimal);
        CHECK(std::abs(r.objective - best) <= 1e-6);
        const auto tour = extract_tour(inst, r.assignment);
        CHECK(std::abs(tour_cost(inst, tour) - r.objective) <= 1e-9);
        CHECK(r.final_bound >= r.objective - 1e-6);
      }
    }
  }
}

TEST_CASE("root-integral model takes one node")
{
  ilp_model_t m;
  m.vars.push_back({"x", 0, 3, var_kind_t::integer});
  m.vars.push_back({"y", 0, 1, var_kind_t::binary});
  m.objective = {{0, 1.0}, {1, 2.0}};
  m.constraints.push_back({"c", {{0, 1.0}, {1, 1.0}}, row_sense_t::ge, 2.0});
  const auto r = solve(m, strong_rule_t{});
  CHECK(r.status == solve_status_t::optimal);
  CHECK(r.stats.nodes == 1);
  CHECK(r.stats.branchings == 0);
  CHECK(r.objective == doctest::Approx(2.0));
}

TEST_CASE("infeasible model")
{
  ilp_model_t m;
  m.vars.push_back({"x", 0, 1, var_kind_t::binary});
  m.objective = {{0, 1.0}};
  m.constraints.push_back({"c", {{0, 2.0}}, row_sense_t::eq, 1.0});
  const auto r = solve(m, pseudocost_rule_t{});
  CHECK(r.status == solve_status_t::infeasible);
  CHECK_FALSE(r.has_incumbent);
  CHECK(r.stats.nodes == 3);
}

TEST_CASE("continuous variables are rejected")
{
  ilp_model_t m;
  m.vars.push_back({"x", 0, 1, var_kind_t::continuous});
  CHECK_THROWS_AS(solve(m, pseudocost_rule_t{}), misuse_error);
}

TEST_CASE("node cap")
{
  const auto model = build_mtz(generate_instance(7, 2));
  solve_options_t one;
  one.limits.node_limit = 1;
  const auto r          = solve(model, pseudocost_rule_t{}, one);
  CHECK(r.status == solve_status_t::limit_reached);
  CHECK(r.stats.nodes == 1);

  const auto full = solve(model, pseudocost_rule_t{});
  REQUIRE(full.status == solve_status_t::optimal);
  for (std::int64_t cap : std::vector<std::int64_t>{2, 5, 17, full.stats.nodes - 1, full.stats.nodes, full.stats.nodes + 10}) {
    solve_options_t o;
    o.limits.node_limit = cap;
    const auto c        = solve(model, pseudocost_rule_t{}, o);
    CHECK(c.stats.nodes == std::min(cap, full.stats.nodes));
    CHECK((c.status == solve_status_t::optimal) == (cap >= full.stats.nodes));
  }
}

TEST_CASE("time limit reports limit_reached with the incumbent so far")
{
  const auto model = build_mtz(generate_instance(9, 1));
  solve_options_t o;
  o.limits.time_limit = 1e-9;
  const auto r        = solve(model, most_infeasible_rule_t{}, o);
  CHECK(r.status == solve_status_t::limit_reached);
}

TEST_CASE("bounds are monotone along paths and over time")
{
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto model = build_mtz(generate_instance(7, seed));
    for (const auto& rule : all_rules()) {
      solve_options_t o;
      o.keep_trace = true;
      const auto r = solve(model, *rule, o);
      REQUIRE(r.status == solve_status_t::optimal);
      std::map<int, double> obj;
      for (const auto& t : r.trace) { obj[t.id] = t.lp_objective; }
      for (const auto& t : r.trace) {
        if (t.parent < 0 || std::isnan(t.lp_objective)) { continue; }
        REQUIRE(obj.count(t.parent));
        CHECK(t.lp_objective >= obj[t.parent] - 1e-7);
      }
      REQUIRE(r.bound_history.size() == static_cast<std::size_t>(r.stats.nodes));
      for (std::size_t k = 1; k < r.bound_history.size(); ++k) {
        CHECK(r.bound_history[k] >= r.bound_history[k - 1] - 1e-7);
      }
      CHECK(r.bound_history.back() >= r.objective - 1e-6);
    }
  }
}

TEST_CASE("solves are deterministic")
{
  const auto model = build_mtz(generate_instance(8, 6));
  for (const auto& rule : all_rules()) {
    solve_options_t o;
    o.keep_trace = true;
    const auto a = solve(model, *rule, o);
    const auto b = solve(model, *rule, o);
    CHECK(a.objective == b.objective);
    CHECK(a.stats.nodes == b.stats.nodes);
    CHECK(a.stats.lp_iterations == b.stats.lp_iterations);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t k = 0; k < a.trace.size(); ++k) { CHECK(trace_to_json_line(a.trace[k]) == trace_to_json_line(b.trace[k])); }
  }
}

TEST_CASE("trace lines and expert samples")
{
  const auto model = build_mtz(generate_instance(6, 3));
  solve_options_t o;
  o.keep_trace   = true;
  o.instance_tag = "tsp6_3";
  std::vector<sample_record_t> samples;
  o.sample_sink = [&](sample_record_t&& s) { samples.push_back(std::move(s)); };
  const auto r  = solve(model, strong_rule_t{}, o);
  CHECK(static_cast<std::int64_t>(samples.size()) == r.stats.branchings);
  CHECK(r.stats.expert_decisions == r.stats.branchings);
  for (const auto& s : samples) {
    CHECK(s.instance == "tsp6_3");
    CHECK(s.observation.candidate_mask[s.action] == 1);
  }
  const auto j = nlohmann::json::parse(trace_to_json_line(r.trace.front()));
  CHECK(j.at("id") == 0);
  CHECK(j.at("parent") == -1);
  CHECK(j.at("depth") == 0);
  CHECK(j.contains("lp_objective"));
  CHECK(j.contains("action_var"));
  CHECK(j.contains("rule_used"));

  std::vector<sample_record_t> none;
  o.sample_sink = [&](sample_record_t&& s) { none.push_back(std::move(s)); };
  solve(model, pseudocost_rule_t{}, o);
  CHECK(none.empty());
}
