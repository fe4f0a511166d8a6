#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "latren/cramer_tilt.hpp"
#include "latren/error.hpp"
#include "latren/implicit_q.hpp"
#include "latren/oracles.hpp"
#include "latren/piecewise_q.hpp"

using namespace latren;

namespace {
const double kLn2 = std::numbers::ln2;

double dyadic_q(double x) {
  int e = 0;
  return 2.0 * std::frexp(x, &e);
}

struct SpFixture {
  JointABLaw pair = st_petersburg_pair();
  ArithmeticLaw marginal = pair.marginal_a();
  CramerInfo info = analyze(marginal, 50.0);
  PsiFunction psi{st_petersburg_tail_function(), marginal, info.kappa};
};
}  // namespace

TEST_CASE("psi of the dyadic pair is P{A=0} x P{B>x} x") {
  SpFixture f;
  for (double y : {1.5, 3.0, 10.0, 1000.0}) {
    const auto& b = f.pair.components()[0];
    const double expect = y * b.weight * b_tail(b.b, b.b_scale, y);
    CHECK(f.psi.at_exp(y) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("implicit sum recovers the dyadic profile") {
  SpFixture f;
  const auto grid = jittered_grid(kLn2, 64);
  REQUIRE(grid.size() == 64);
  CHECK(grid.front() >= 1.0);
  CHECK(grid.back() < 2.0);
  const auto q = q_from_psi(f.psi, f.info.mu, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(std::abs(q.q[i] - dyadic_q(grid[i])) < 1e-9);
    CHECK(q.trunc_error[i] < 1e-9);
  }
  CHECK(class_q_violations(q).empty());
  CHECK_THROWS_AS(q_from_psi(f.psi, std::numeric_limits<double>::infinity(), grid), Error);
}

TEST_CASE("smoothing route agrees with the implicit sum") {
  SpFixture f;
  const auto grid = jittered_grid(kLn2, 8);
  const auto a = q_from_psi(f.psi, f.info.mu, grid);
  const auto b = q_from_smoothing(f.psi, f.info.mu, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(std::abs(a.q[i] - b.q[i]) < 1e-8);
}

TEST_CASE("smooth_hat of a constant") {
  const auto r = smooth_hat([](double) { return 1.0; }, 0.3);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("class Q violations are reported") {
  PeriodicQ bad;
  bad.kappa = 1.0;
  bad.span_h = kLn2;
  bad.x = {1.0, 1.2, 1.5};
  bad.q = {1.0, 1.5, 1.4};  // q/x rises from 1 to 1.25
  bad.trunc_error = {0.0, 0.0, 0.0};
  auto v = class_q_violations(bad);
  CHECK_FALSE(v.empty());
  bad.q = {1.0, 1.1, -0.1};
  v = class_q_violations(bad);
  bool negative = false;
  for (const auto& e : v) negative = negative || e.what == "negative q";
  CHECK(negative);
  // seam: q(x_last)/x_last must not be below q(x_0)/(x_0 e^h)
  bad.x = {1.0, 1.9};
  bad.q = {1.0, 0.1};
  v = class_q_violations(bad);
  REQUIRE(v.size() == 1);
  CHECK(v[0].what.find("seam") != std::string::npos);
}

TEST_CASE("bounds between grid points extend to the whole tail") {
  PeriodicQ q;
  q.kappa = 1.0;
  q.span_h = kLn2;
  q.x = jittered_grid(kLn2, 32);
  for (double x : q.x) q.q.push_back(dyadic_q(x));
  q.trunc_error.assign(q.x.size(), 0.0);
  const auto [lo, up] = q.bounds_at(1.4142);
  CHECK(lo <= 1.4142 + 1e-12);
  CHECK(up >= 1.4142 - 1e-12);
  std::vector<double> xs;
  for (int i = 0; i < 50; ++i) xs.push_back(2.0 + 1.37 * i * i);
  const auto rep = extend_bounds(q, st_petersburg_tail_function(), xs, 1e-12);
  CHECK(rep.outside == 0);
  const auto t = q.to_table().to_csv();
  CHECK(t.rfind("x,q,normalizer_kind,trunc_error\n", 0) == 0);
}

TEST_CASE("tail route: exact and empirical") {
  const auto tail = st_petersburg_tail_function();
  const auto grid = jittered_grid(kLn2, 16);
  const auto one = [](std::int64_t) { return 1.0; };
  const auto r = q_from_tail(tail, 1.0, kLn2, NormalizerKind::Unit, one, grid, 1, 6);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(r.q.q[i] == doctest::Approx(dyadic_q(grid[i])).epsilon(1e-14));
  for (double c : r.max_step_change) CHECK(c < 1e-13);

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> s(20000);
  for (auto& v : s) v = 1.0 / (1.0 - u(rng));  // P{X > x} = 1/x
  const auto emp = TailFunction::empirical(s);
  const auto e = q_from_tail(emp, 1.0, kLn2, NormalizerKind::Unit, one, grid, 1, 3);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(e.q.trunc_error[i] > 0.0);
    CHECK(std::abs(e.q.q[i] - 1.0) <= e.q.trunc_error[i] * 1.5);
  }
  CHECK_THROWS_AS(q_from_tail(emp, 1.0, kLn2, NormalizerKind::Unit, one, grid, 1, 14), Error);
  CHECK_NOTHROW(q_from_tail(emp, 1.0, kLn2, NormalizerKind::Unit, one, grid, 1, 14, true));
}

TEST_CASE("scaling covariance of the tail route") {
  const auto tail = st_petersburg_tail_function();
  const auto grid = jittered_grid(kLn2, 16);
  const auto one = [](std::int64_t) { return 1.0; };
  for (double c : {0.3, 1.7, 5.0}) {
    const auto r = q_from_tail(tail.scaled(c), 1.0, kLn2, NormalizerKind::Unit, one, grid, 4, 4);
    for (std::size_t i = 0; i < grid.size(); ++i)
      CHECK(std::abs(r.q.q[i] - c * dyadic_q(grid[i] / c)) < 1e-10);
  }
}

TEST_CASE("sum and integral conditions are finite for the dyadic pair") {
  SpFixture f;
  const auto a = check_conditions(f.psi, ConditionMode::Integral, -15.0, 15.0);
  CHECK(a.value > 0.0);
  CHECK(a.looks_finite());
  const auto s = check_conditions(f.psi, ConditionMode::Sum, -15.0, 15.0);
  CHECK(s.looks_finite());
  const auto d = check_conditions(f.psi, ConditionMode::DeltaIntegral, -15.0, 15.0, 0.5);
  CHECK(d.looks_finite(1e-2));
  CHECK(to_json(d).contains("value"));
}

TEST_CASE("piecewise q validation") {
  CHECK_NOTHROW(PiecewiseQ(1.0, kLn2, {1.0, 2.0}, {1.0}, {2.0, 2.0}));
  // q/y increasing on the piece
  CHECK_THROWS_AS(PiecewiseQ(1.0, kLn2, {1.0, 2.0}, {1.0}, {3.0, 3.0}), Error);
  // upward jump at an interior knot
  CHECK_THROWS_AS(PiecewiseQ(1.0, kLn2, {1.0, 1.5, 2.0}, {1.0, 1.2}, {1.0, 1.0, 1.2}), Error);
  // knots must span the period
  CHECK_THROWS_AS(PiecewiseQ(1.0, kLn2, {1.0, 1.5}, {1.0}, {1.0, 1.0}), Error);
  CHECK_THROWS_AS(PiecewiseQ::constant(1.0, kLn2, -1.0), Error);
  const auto sp = PiecewiseQ(1.0, kLn2, {1.0, 2.0}, {1.0}, {2.0, 2.0});
  CHECK(sp(3.0) == doctest::Approx(1.5));
  CHECK(sp(4.0) == doctest::Approx(1.0));
  CHECK(sp.left_limit(4.0) == doctest::Approx(2.0));
  CHECK(sp.is_jump(2.0));
  CHECK_FALSE(sp.is_jump(1.5));
}
