#include <doctest.h>

#include <tspbb/errors.hpp>
#include <tspbb/instances.hpp>
#include <tspbb/rng.hpp>

#include <cmath>
#include <sstream>

using namespace tspbb;

namespace {

ilp_model_t round_trip(const ilp_model_t& m)
{
  std::stringstream ss;
  write_lp(m, ss);
  return parse_lp(ss);
}

std::vector<double> incidence(const tsp_instance_t& inst, const std::vector<int>& tour)
{
  const mtz_layout_t lay{inst.n};
  std::vector<double> v(static_cast<std::size_t>(lay.num_vars()), 0.0);
  for (std::size_t k = 0; k < tour.size(); ++k) { v[lay.x(tour[k], tour[(k + 1) % tour.size()])] = 1.0; }
  return v;
}

tsp_instance_t unit_square()
{
  return instance_from_points({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
}

}  // namespace

TEST_CASE("generate_instance basic geometry")
{
  const auto inst = generate_instance(3, 99);
  CHECK(inst.n == 3);
  CHECK(inst.coords.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(inst.c(i, i) == 0.0);
    for (int j = 0; j < 3; ++j) { CHECK(inst.c(i, j) == inst.c(j, i)); }
  }

  CHECK(generate_instance(4, 7) == generate_instance(4, 7));
  CHECK_FALSE(generate_instance(4, 7) == generate_instance(4, 8));

  const auto ten = generate_instance(10, 1);
  int pairs      = 0;
  for (int i = 0; i < 10; ++i) {
    CHECK(ten.coords[i].x >= 0.0);
    CHECK(ten.coords[i].x < 1.0);
    CHECK(ten.coords[i].y >= 0.0);
    CHECK(ten.coords[i].y < 1.0);
    for (int j = i + 1; j < 10; ++j) {
      const double d = ten.c(i, j);
      CHECK(d > 0.0);
      CHECK(d < std::sqrt(2.0));
      const double dx = ten.coords[i].x - ten.coords[j].x, dy = ten.coords[i].y - ten.coords[j].y;
      CHECK(std::abs(d - std::sqrt(dx * dx + dy * dy)) <= 1e-12);
      ++pairs;
    }
  }
  CHECK(pairs == 45);

  CHECK_THROWS_AS(generate_instance(2, 1), invalid_instance_error);
}

TEST_CASE("build_mtz counts follow the closed forms")
{
  for (int n = 3; n <= 25; ++n) {
    const auto m = build_mtz(generate_instance(n, static_cast<std::uint64_t>(n)));
    int binaries = 0, integers = 0, eq = 0, le = 0;
    for (const auto& v : m.vars) {
      if (v.kind == var_kind_t::binary) { ++binaries; }
      if (v.kind == var_kind_t::integer) {
        ++integers;
        CHECK(v.lower == 1.0);
        CHECK(v.upper == n - 1.0);
      }
    }
    for (const auto& c : m.constraints) {
      if (c.sense == row_sense_t::eq) { ++eq; }
      if (c.sense == row_sense_t::le) {
        ++le;
        CHECK(c.rhs == n - 1.0);
      }
    }
    CHECK(binaries == n * (n - 1));
    CHECK(integers == n - 1);
    CHECK(eq == 2 * n);
    CHECK(le == (n - 1) * (n - 2));
  }
  const auto m5 = build_mtz(generate_instance(5, 3));
  CHECK(m5.num_vars() == 24);
  CHECK(m5.num_rows() == 22);
  const auto m3 = build_mtz(generate_instance(3, 3));
  CHECK(m3.num_vars() == 8);
  CHECK(m3.num_rows() == 8);
}

TEST_CASE("every binary sits in exactly two equality rows")
{
  const auto m = build_mtz(generate_instance(6, 11));
  std::vector<int> hits(m.vars.size(), 0);
  for (const auto& c : m.constraints) {
    if (c.sense != row_sense_t::eq) { continue; }
    for (const auto& e : c.row) { ++hits[e.index]; }
  }
  for (int j = 0; j < m.num_vars(); ++j) {
    if (m.vars[j].kind == var_kind_t::binary) { CHECK(hits[j] == 2); }
  }
}

TEST_CASE("LP write/parse round trip")
{
  const auto m = build_mtz(generate_instance(5, 21));
  CHECK(round_trip(m) == m);

  // Random models with every sense, kind and bound shape.
  rng_t rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    ilp_model_t r;
    r.name       = "rand" + std::to_string(trial);
    const int nv = 1 + static_cast<int>(rng.below(8));
    for (int j = 0; j < nv; ++j) {
      const auto kind = static_cast<var_kind_t>(rng.below(3));
      double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
      if (kind == var_kind_t::binary) {
        lo = 0, hi = 1;
      } else {
        if (rng.bernoulli(0.7)) { lo = std::round(rng.uniform(-5, 5) * 1000) / 7.0; }
        if (rng.bernoulli(0.7)) { hi = (lo > -1e300 ? lo : 0.0) + rng.uniform(0, 10); }
      }
      r.vars.push_back({"v" + std::to_string(j), lo, hi, kind});
      if (rng.bernoulli(0.6)) { r.objective.push_back({j, rng.uniform(-3, 3)}); }
    }
    const int nr = static_cast<int>(rng.below(6));
    for (int i = 0; i < nr; ++i) {
      constraint_t c{"c" + std::to_string(i), {}, static_cast<row_sense_t>(rng.below(3)), rng.uniform(-10, 10)};
      for (int j = 0; j < nv; ++j) {
        if (rng.bernoulli(0.5)) { c.row.push_back({j, rng.uniform(-4, 4)}); }
      }
      r.constraints.push_back(c);
    }
    CHECK(round_trip(r) == r);
  }
}

TEST_CASE("LP file declares sections for n=4")
{
  const auto m = build_mtz(generate_instance(4, 2));
  std::stringstream ss;
  write_lp(m, ss);
  std::string text = ss.str();
  auto count_after = [&](const std::string& header, const std::string& next_header) {
    const auto a = text.find(header + "\n");
    const auto b = text.find(next_header + "\n", a);
    REQUIRE(a != std::string::npos);
    REQUIRE(b != std::string::npos);
    std::istringstream sec(text.substr(a + header.size(), b - a - header.size()));
    int k = 0;
    std::string w;
    while (sec >> w) { ++k; }
    return k;
  };
  CHECK(count_after("Generals", "Binaries") == 3);
  CHECK(count_after("Binaries", "End") == 12);
  CHECK(lp_file_name(10, 3) == "instances_10_3.lp");
}

TEST_CASE("LP parser errors")
{
  {
    std::istringstream in("Maximize\n obj: x\nSubject To\n c: x <= 1\nEnd\n");
    CHECK_THROWS_AS(parse_lp(in), unsupported_sense_error);
  }
  {
    std::istringstream in("Minimize\n obj: x\nSubject To\n c: x <= 1\nSOS\n s1: x:1\nEnd\n");
    try {
      parse_lp(in);
      FAIL("expected unknown section error");
    } catch (const lp_parse_error& e) {
      CHECK(e.line() == 5);
    }
  }
  {
    std::istringstream in("Minimize\n obj: x + 2 y\nSubject To\n c1: x + y >= 1\n c2: x + * y <= 3\nEnd\n");
    try {
      parse_lp(in);
      FAIL("expected syntax error");
    } catch (const lp_parse_error& e) {
      CHECK(e.line() == 5);
    }
  }
  {
    std::istringstream in("Minimize\n obj: x\nSubject To\n c1: x >= 1\n");
    CHECK_THROWS_AS(parse_lp(in), lp_parse_error);
  }
}

TEST_CASE("LP parser accepts common dialect variants")
{
  std::istringstream in(
    "\\ hand written\nminimize\n  2 x + 3 y\n  - z\nst\n r1: x + y + z >= 2\n r2: -x + y = 0\n"
    "bounds\n x <= 4\n -1 <= z <= 1\n y free\ngenerals\n x\nend\n");
  const auto m = parse_lp(in);
  REQUIRE(m.num_vars() == 3);
  CHECK(m.vars[0].name == "x");
  CHECK(m.vars[0].kind == var_kind_t::integer);
  CHECK(m.vars[0].upper == 4.0);
  CHECK(m.vars[1].lower == -std::numeric_limits<double>::infinity());
  CHECK(m.vars[2].lower == -1.0);
  CHECK(m.objective.size() == 3);
  CHECK(m.objective[2].value == -1.0);
  CHECK(m.constraints[1].sense == row_sense_t::eq);
}

TEST_CASE("extract_tour")
{
  const auto tri  = generate_instance(3, 1);
  const auto tour = extract_tour(tri, incidence(tri, {0, 1, 2}));
  CHECK(tour == std::vector<int>{0, 1, 2});

  const auto four = generate_instance(4, 1);
  const mtz_layout_t lay{4};
  std::vector<double> v(static_cast<std::size_t>(lay.num_vars()), 0.0);
  v[lay.x(0, 1)] = v[lay.x(1, 0)] = v[lay.x(2, 3)] = v[lay.x(3, 2)] = 1.0;
  CHECK_THROWS_AS(extract_tour(four, v), not_a_tour_error);

  const auto sq = unit_square();
  const auto t  = extract_tour(sq, incidence(sq, {0, 1, 2, 3}));
  CHECK(std::abs(tour_cost(sq, t) - 4.0) < 1e-12);
}

TEST_CASE("brute force oracle")
{
  const auto sq = unit_square();
  // The only three undirected tours of a 4-cycle's vertex set.
  const double perimeter = 4.0;
  const double crossed   = 2.0 + 2.0 * std::sqrt(2.0);
  const auto best        = brute_force_optimal(sq);
  CHECK(std::abs(best.cost - std::min(perimeter, crossed)) < 1e-12);
  CHECK(std::abs(tour_cost(sq, best.tour) - best.cost) < 1e-12);

  const auto tri = generate_instance(3, 8);
  CHECK(std::abs(brute_force_optimal(tri).cost - (tri.c(0, 1) + tri.c(1, 2) + tri.c(2, 0))) < 1e-12);

  const auto line = instance_from_points({{0, 0}, {0.5, 0}, {1, 0}});
  CHECK(std::abs(brute_force_optimal(line).cost - 2.0) < 1e-12);

  CHECK_THROWS_AS(brute_force_optimal(generate_instance(13, 1)), oracle_too_large_error);
}

TEST_CASE("manifest round trip")
{
  std::vector<manifest_entry_t> e{{8, 1, 3.25}, {8, 2, std::nullopt}, {12, 18446744073709551615ULL, 0.1}};
  std::stringstream ss;
  write_manifest(e, ss);
  CHECK(read_manifest(ss) == e);
}
