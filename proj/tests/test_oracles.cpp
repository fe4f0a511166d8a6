#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "latren/convolution.hpp"
#include "latren/error.hpp"
#include "latren/implicit_q.hpp"
#include "latren/lattice_law.hpp"
#include "latren/oracles.hpp"
#include "latren/series.hpp"

using namespace latren;

namespace {
const double kLn2 = std::numbers::ln2;

// P{S_{N-1} = k} by summing over the number m of nonzero factors: p0 (1 - p0)^m Y^{*m}(k)
std::vector<double> sn_brute_force(double rho, double r, std::size_t k_max, int m_max) {
  const double p0 = r * (rho - 1.0) / (1.0 - r);
  std::vector<double> y(k_max + 1), conv(k_max + 1, 0.0), out(k_max + 1, 0.0);
  for (std::size_t l = 0; l <= k_max; ++l) y[l] = (1.0 - r) * std::pow(r, static_cast<double>(l));
  conv[0] = 1.0;
  double w = p0;
  for (int m = 0; m <= m_max; ++m) {
    for (std::size_t k = 0; k <= k_max; ++k) out[k] += w * conv[k];
    conv = convolve_head(conv, y, k_max + 1, ConvolutionMethod::Direct);
    w *= 1.0 - p0;
  }
  return out;
}

double relative_roundtrip_error(const QsetPair& qp, int n_count) {
  const double h = qp.params.h;
  const auto n0 = static_cast<std::int64_t>(std::floor(std::log(qp.params.total_scale()) / h)) + 2;
  double err = 0.0;
  for (double x : jittered_grid(h, 32)) {
    if (qp.target.q.is_jump(x / qp.target.scale_c, 1e-9)) continue;
    for (std::int64_t n = n0; n < n0 + n_count; ++n) {
      const double en = lattice_power(n, h);
      const double v = std::pow(x * en, qp.params.kappa) * qp.tail(x * en);
      err = std::max(err, std::abs(v - qp.expected_q(x)) / std::max(1.0, qp.expected_q(x)));
    }
  }
  return err;
}
}  // namespace

TEST_CASE("dyadic pair masses") {
  const auto pair = st_petersburg_pair();
  REQUIRE(pair.components().size() == 2);
  const auto& zero = pair.components()[0];
  CHECK(zero.weight == doctest::Approx(1.0 / 3.0));
  // P{A = 0, B = 2} = 1/4
  CHECK(zero.weight * (b_tail(zero.b, 1.0, 1.5) - b_tail(zero.b, 1.0, 2.0)) == doctest::Approx(0.25));
  const auto a = pair.marginal_a();
  CHECK(a.mass(0) == doctest::Approx(0.5));  // P{A = 1, B = 0}
  CHECK(a.zero_atom() + a.lattice_mass() == doctest::Approx(1.0));
  CHECK(mellin_moment(a, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(pair.is_ab0());
}

TEST_CASE("dyadic tail values and fixed point") {
  CHECK(st_petersburg_tail(1.0) == 1.0);
  CHECK(st_petersburg_tail(2.0) == 0.5);
  CHECK(st_petersburg_tail(3.0) == 0.5);
  CHECK(st_petersburg_tail(4.0) == 0.25);
  for (double x : {2.0, 3.3, 17.0, 1e6}) CHECK(x * st_petersburg_tail(x) == doctest::Approx(std::exp2(std::fmod(std::log2(x), 1.0))));
  const auto pair = st_petersburg_pair();
  double total = 0.0;
  for (std::int64_t k = 1; k <= 40; ++k) {
    CHECK(std::abs(st_petersburg_pushforward(pair, k) - std::ldexp(1.0, -static_cast<int>(k))) < 1e-14);
    total += st_petersburg_pmf(k);
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("S_{N-1} law: closed form, examples and brute force") {
  CHECK(sn_pmf(0.25, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(sn_pmf(0.25, 2) == doctest::Approx(1.0 / 12.0).epsilon(1e-15));
  CHECK_THROWS_AS(sn_pmf(0.6, 1), Error);
  for (double p : {0.1, 0.25, 0.4}) {
    const auto bf = sn_brute_force(2.0, p, 30, 400);
    for (std::size_t k = 0; k <= 30; ++k) CHECK(std::abs(bf[k] - sn_pmf(p, static_cast<std::int64_t>(k))) < 1e-12);
  }
  const double rho = std::exp(0.7), r = 0.3;
  const auto bf = sn_brute_force(rho, r, 30, 300);
  long double total = 0.0L;
  for (std::size_t k = 0; k <= 30; ++k) {
    CHECK(std::abs(bf[k] - sn_pmf_general(rho, r, static_cast<std::int64_t>(k))) < 1e-12);
    total += sn_pmf_general(rho, r, static_cast<std::int64_t>(k));
  }
  CHECK(static_cast<double>(total) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("constant q example") {
  const double p = 0.25, c = (1.0 - 2.0 * p) / (1.0 - p);
  const auto qp = qset_construct(QTarget{PiecewiseQ::constant(1.0, kLn2, c), 1.0});
  CHECK(qp.params.r == doctest::Approx(p).epsilon(1e-14));
  CHECK(qp.params.rescale_j == 0);
  CHECK(constant_q_tail(p, 4.0) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  CHECK(qp.tail(4.0) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  for (double x : {2.5, 3.0, 7.0, 1e5}) CHECK(qp.tail(x) == doctest::Approx(constant_q_tail(p, x)).epsilon(1e-13));
  CHECK_THROWS_AS(constant_q_tail(p, 1.5), Error);
  // H(y) = 2 - 2/y
  const auto& h = std::get<QsetHB>(qp.pair.components()[0].b);
  CHECK(h.cdf(1.5) == doctest::Approx(2.0 - 2.0 / 1.5).epsilon(1e-14));
  CHECK(h.quantile(h.cdf(1.3)) == doctest::Approx(1.3).epsilon(1e-12));
}

TEST_CASE("round trips for native and general targets") {
  std::vector<QTarget> targets;
  targets.push_back({PiecewiseQ::constant(1.0, kLn2, 0.4), 1.0});
  targets.push_back({PiecewiseQ(1.0, kLn2, {1.0, 2.0}, {1.0}, {2.0, 2.0}), 1.0});                 // dyadic shape
  targets.push_back({PiecewiseQ(1.0, kLn2, {1.0, 1.4, 2.0}, {0.5, 0.6}, {0.8, 0.65, 0.8}), 2.5});  // with a jump
  targets.push_back({PiecewiseQ::constant(0.5, 1.0, 3.0), 1.0});                                  // needs rescaling
  targets.push_back({PiecewiseQ::from_function(2.0, 0.4, [](double y) { return y * y * (1.2 - 0.1 * y); }, 7), 0.7});
  for (const auto& t : targets) {
    const auto qp = qset_construct(t);
    CHECK(mellin_moment(qp.pair.marginal_a(), qp.params.kappa) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(relative_roundtrip_error(qp, 5) < 1e-9);
    CHECK(qp.tail(0.5 * qp.params.total_scale()) == 1.0);
  }
  CHECK(qset_construct(targets[3]).params.rescale_j >= 1);
}

TEST_CASE("scale_c shifts the tail") {
  const PiecewiseQ q(1.0, kLn2, {1.0, 1.4, 2.0}, {0.5, 0.6}, {0.8, 0.65, 0.8});
  const auto base = qset_construct({q, 1.0});
  for (double c : {0.5, 3.0}) {
    const auto scaled = qset_construct({q, c});
    for (double x : {5.0, 11.3, 100.0}) CHECK(scaled.tail(x) == doctest::Approx(base.tail(x / c)).epsilon(1e-12));
  }
}

TEST_CASE("q target parsing") {
  const auto t = parse_qtarget("y,q,q_left\n1,0.5,\n1.5,0.6,0.7\n2,0.78,\n", {{"kappa", 1.0}, {"h", kLn2}, {"scale_c", 2.0}});
  CHECK(t.scale_c == 2.0);
  CHECK(t.q(1.25) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(t.q.left_limit(1.5) == doctest::Approx(0.7));
  CHECK_THROWS_AS(parse_qtarget("a,b\n1,2\n", {{"kappa", 1.0}, {"h", kLn2}}), Error);
  CHECK_THROWS_AS(parse_qtarget("y,q\n1,0.5\n2,0.9\n", nlohmann::json::object()), Error);
  CHECK_THROWS_AS(parse_qtarget("y,q\n1,0.5\n2,x\n", {{"kappa", 1.0}, {"h", kLn2}}), Error);
  // q(y)/y increasing: rejected
  CHECK_THROWS_AS(parse_qtarget("y,q\n1,0.5\n2,1.5\n", {{"kappa", 1.0}, {"h", kLn2}}), Error);
}
