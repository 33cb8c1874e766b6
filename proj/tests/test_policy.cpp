#include <doctest.h>

#include "fixtures.hpp"

#include <tspbb/errors.hpp>
#include <tspbb/policy.hpp>

#include <cmath>
#include <sstream>

using namespace tspbb;

namespace {

sample_record_t sample_for(const observation_t& o, int action)
{
  sample_record_t s;
  s.observation = o;
  s.action      = action;
  s.instance    = "t";
  return s;
}

int first_candidate(const observation_t& o)
{
  for (int v = 0; v < o.num_vars; ++v) {
    if (o.candidate_mask[v]) { return v; }
  }
  return -1;
}

int last_candidate(const observation_t& o)
{
  for (int v = o.num_vars - 1; v >= 0; --v) {
    if (o.candidate_mask[v]) { return v; }
  }
  return -1;
}

}  // namespace

TEST_CASE("init_params is deterministic and shaped")
{
  const auto a = init_params(3);
  const auto b = init_params(3);
  const auto c = init_params(4);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  CHECK(a.d == 32);
  CHECK(a.t[gcnn_tensors_t::var_w].rows == num_var_features);
  CHECK(a.t[gcnn_tensors_t::cons_msg_w].rows == 65);
  CHECK(a.t[gcnn_tensors_t::head_w2].cols == 1);
  for (double x : a.t[gcnn_tensors_t::head_w2].data) { CHECK(x == 0.0); }
  for (double x : a.t[gcnn_tensors_t::var_b].data) { CHECK(x == 0.0); }
  const double lim = std::sqrt(6.0 / (num_var_features + 32));
  for (double x : a.t[gcnn_tensors_t::var_w].data) { CHECK(std::abs(x) <= lim); }
}

TEST_CASE("fresh params give a uniform masked distribution")
{
  rng_t rng(1);
  const auto p = init_params(9);
  for (int rep = 0; rep < 20; ++rep) {
    const auto o  = fixture::random_observation(rng, 12, 7);
    const auto fw = forward(o, p);
    const int k   = o.num_candidates();
    for (int v = 0; v < o.num_vars; ++v) {
      if (o.candidate_mask[v]) {
        CHECK(fw.probs[v] == doctest::Approx(1.0 / k).epsilon(1e-14));
      } else {
        CHECK(fw.probs[v] == 0.0);
      }
    }
    CHECK(argmax_masked(fw.probs, o.candidate_mask) == first_candidate(o));
  }
}

TEST_CASE("single candidate gets probability one")
{
  rng_t rng(2);
  auto o = fixture::random_observation(rng, 9, 5);
  std::fill(o.candidate_mask.begin(), o.candidate_mask.end(), 0);
  o.candidate_mask[4] = 1;
  const auto fw       = forward(o, fixture::random_params(5, 32));
  CHECK(fw.probs[4] == 1.0);
  CHECK(fw.log_probs[4] == 0.0);
}

TEST_CASE("forward errors")
{
  rng_t rng(3);
  auto o       = fixture::random_observation(rng, 6, 4);
  const auto p = init_params(1);
  auto bad     = o;
  bad.schema_version = 99;
  CHECK_THROWS_AS(forward(bad, p), schema_error);
  auto empty = o;
  std::fill(empty.candidate_mask.begin(), empty.candidate_mask.end(), 0);
  CHECK_THROWS_AS(forward(empty, p), misuse_error);
  auto short_mask = o;
  short_mask.candidate_mask.pop_back();
  CHECK_THROWS_AS(forward(short_mask, p), schema_error);
}

TEST_CASE("softmax invariants and permutation equivariance")
{
  rng_t rng(4);
  const auto p = fixture::random_params(11, 32);
  for (int rep = 0; rep < 100; ++rep) {
    const int nv  = 2 + static_cast<int>(rng.below(20));
    const int nc  = 1 + static_cast<int>(rng.below(15));
    const auto o  = fixture::random_observation(rng, nv, nc);
    const auto fw = forward(o, p);
    double total  = 0.0;
    for (int v = 0; v < nv; ++v) {
      CHECK(fw.probs[v] >= 0.0);
      if (!o.candidate_mask[v]) { CHECK(fw.probs[v] == 0.0); }
      total += fw.probs[v];
    }
    CHECK(std::abs(total - 1.0) <= 1e-9);

    const auto vp = fixture::random_permutation(rng, nv);
    const auto cp = fixture::random_permutation(rng, nc);
    const auto pf = forward(fixture::permute(o, vp, cp), p);
    for (int v = 0; v < nv; ++v) { CHECK(pf.probs[vp[v]] == fw.probs[v]); }
  }
}

TEST_CASE("loss of a uniform policy is log K")
{
  rng_t rng(5);
  auto o = fixture::random_observation(rng, 10, 6);
  std::fill(o.candidate_mask.begin(), o.candidate_mask.end(), 0);
  for (int v : {1, 3, 4, 7, 9}) { o.candidate_mask[v] = 1; }
  std::vector<sample_record_t> batch = {sample_for(o, 3), sample_for(o, 9)};
  const auto r = loss_and_grad(batch, init_params(2));
  CHECK(r.loss == doctest::Approx(std::log(5.0)).epsilon(1e-12));
  CHECK(batch_loss(batch, init_params(2)) == doctest::Approx(std::log(5.0)).epsilon(1e-12));
}

TEST_CASE("certain action gives zero loss and zero gradient")
{
  rng_t rng(6);
  auto o = fixture::random_observation(rng, 8, 5);
  std::fill(o.candidate_mask.begin(), o.candidate_mask.end(), 0);
  o.candidate_mask[2]                = 1;
  std::vector<sample_record_t> batch = {sample_for(o, 2)};
  const auto r                       = loss_and_grad(batch, fixture::random_params(3, 16));
  CHECK(r.loss == 0.0);
  for (const auto& t : r.grads.t) {
    for (double g : t.data) { CHECK(g == 0.0); }
  }
}

TEST_CASE("loss rejects an action outside the mask")
{
  rng_t rng(7);
  auto o = fixture::random_observation(rng, 8, 5);
  std::fill(o.candidate_mask.begin(), o.candidate_mask.end(), 0);
  o.candidate_mask[2]                = 1;
  std::vector<sample_record_t> batch = {sample_for(o, 3)};
  CHECK_THROWS_AS(loss_and_grad(batch, init_params(1)), schema_error);
  CHECK_THROWS_AS(loss_and_grad(std::span<const sample_record_t>(), init_params(1)), misuse_error);
}

TEST_CASE("analytic gradients match central differences")
{
  rng_t rng(8);
  for (int rep = 0; rep < 3; ++rep) {
    std::vector<sample_record_t> batch;
    for (int k = 0; k < 2; ++k) {
      const auto o = fixture::random_observation(rng, 6 + rep, 4 + rep, 0.4);
      batch.push_back(sample_for(o, k == 0 ? first_candidate(o) : last_candidate(o)));
    }
    batch[1].weight = 2.5;
    for (double beta : {0.0, 0.3}) {
      const auto gc = fixture::check_gradients(batch, fixture::random_params(20 + rep, 8), beta);
      INFO("worst " << gc.worst << " kinks " << gc.kinks);
      CHECK(gc.max_rel_error <= 1e-4);
      CHECK(gc.checked > 0);
      CHECK(gc.kinks * 50 <= gc.checked);
    }
  }
}

TEST_CASE("parallel and serial loss agree")
{
  rng_t rng(9);
  const auto p = fixture::random_params(4, 32);
  std::vector<sample_record_t> batch;
  for (int k = 0; k < 37; ++k) {
    const auto o = fixture::random_observation(rng, 5 + static_cast<int>(rng.below(10)), 3 + static_cast<int>(rng.below(6)));
    batch.push_back(sample_for(o, last_candidate(o)));
    batch.back().weight = rng.uniform(0.5, 2.0);
  }
  const auto a = loss_and_grad(batch, p, 0.1);
  const auto b = loss_and_grad_serial(batch, p, 0.1);
  CHECK(std::abs(a.loss - b.loss) <= 1e-12);
  for (int k = 0; k < gcnn_tensors_t::count; ++k) {
    for (std::size_t i = 0; i < a.grads.t[k].data.size(); ++i) {
      CHECK(std::abs(a.grads.t[k].data[i] - b.grads.t[k].data[i]) <= 1e-12);
    }
  }
  const auto again = loss_and_grad(batch, p, 0.1);
  CHECK(again.loss == a.loss);
  CHECK(static_cast<const gcnn_tensors_t&>(again.grads) == static_cast<const gcnn_tensors_t&>(a.grads));
}

TEST_CASE("adam zero gradient leaves params unchanged")
{
  const auto p = fixture::random_params(1, 8);
  gradient_set_t g;
  static_cast<gcnn_tensors_t&>(g) = gcnn_tensors_t::zeros(8);
  const auto r                    = adam_step(p, g, adam_state_t::zeros_like(p), 1e-3);
  CHECK(r.params == p);
  CHECK(r.state.step == 1);
}

TEST_CASE("adam first step moves by lr against the gradient sign")
{
  const auto p = fixture::random_params(2, 8);
  gradient_set_t g;
  static_cast<gcnn_tensors_t&>(g) = gcnn_tensors_t::zeros(8);
  rng_t rng(3);
  for (auto& t : g.t) {
    for (double& x : t.data) { x = rng.uniform(-2.0, 2.0); }
  }
  const auto r = adam_step(p, g, adam_state_t::zeros_like(p), 0.01);
  for (int k = 0; k < gcnn_tensors_t::count; ++k) {
    for (std::size_t i = 0; i < p.t[k].data.size(); ++i) {
      const double step = r.params.t[k].data[i] - p.t[k].data[i];
      const double g0   = g.t[k].data[i];
      CHECK(step == doctest::Approx(-0.01 * g0 / (std::abs(g0) + 1e-8)).epsilon(1e-6));
    }
  }
}

TEST_CASE("adam minimizes a two-parameter quadratic")
{
  // f(a, b) = (a - 1)^2 + 10 (b + 2)^2 stored in the head bias/weight slots.
  policy_params_t p;
  static_cast<gcnn_tensors_t&>(p) = gcnn_tensors_t::zeros(2);
  auto state                      = adam_state_t::zeros_like(p);
  auto f = [](const policy_params_t& q) {
    const double a = q.t[gcnn_tensors_t::head_b2].data[0];
    const double b = q.t[gcnn_tensors_t::head_w2].data[0];
    return (a - 1) * (a - 1) + 10 * (b + 2) * (b + 2);
  };
  const double start = f(p);
  for (int it = 0; it < 100; ++it) {
    gradient_set_t g;
    static_cast<gcnn_tensors_t&>(g)         = gcnn_tensors_t::zeros(2);
    g.t[gcnn_tensors_t::head_b2].data[0] = 2 * (p.t[gcnn_tensors_t::head_b2].data[0] - 1);
    g.t[gcnn_tensors_t::head_w2].data[0] = 20 * (p.t[gcnn_tensors_t::head_w2].data[0] + 2);
    auto r                               = adam_step(p, g, state, 0.1);
    p                                    = std::move(r.params);
    state                                = std::move(r.state);
  }
  CHECK(f(p) < 1e-3 * start);
}

TEST_CASE("params file round trip is bit-identical")
{
  const auto p = fixture::random_params(6, 32);
  std::stringstream ss;
  save_params(p, ss);
  const std::string bytes = ss.str();
  CHECK(bytes.substr(0, 8) == std::string("TSPGCNN\x01", 8));
  CHECK(bytes.size() == 8 + 12 + 12 * 8 + p.num_scalars() * 8);
  std::stringstream in(bytes);
  const auto q = load_params(in);
  CHECK(q == p);
  std::stringstream out;
  save_params(q, out);
  CHECK(out.str() == bytes);

  std::stringstream truncated(bytes.substr(0, bytes.size() - 5));
  CHECK_THROWS_AS(load_params(truncated), schema_error);
  std::stringstream garbage("not a params file at all");
  CHECK_THROWS_AS(load_params(garbage), schema_error);
}
