#include <doctest.h>

#include <cmath>
#include <numbers>

#include "latren/cramer_tilt.hpp"
#include "latren/error.hpp"
#include "latren/series.hpp"

using namespace latren;

namespace {
const double kLn2 = std::numbers::ln2;

// zero atom plus a power generator damped by e^{-k}: E A = w, abscissa 1
ArithmeticLaw damped_power(double w) {
  long double c0 = 0.0L;
  for (int k = 1; k < 200; ++k) c0 += std::exp(-static_cast<double>(k)) * std::pow(k, -2.5);
  const double lattice = w * static_cast<double>(c0) / hurwitz_zeta(2.5, 1);
  return ArithmeticLaw(1.0, {}, 1.0 - lattice, PowerTail{2.5, 1, w, 1.0});
}
}  // namespace

TEST_CASE("kappa for the dyadic pair and the two-sided law") {
  const ArithmeticLaw sp(kLn2, {}, 1.0 / 3.0, GeometricTail{0.25, 0, 2.0 / 3.0});
  const auto s = solve_kappa(sp, 50.0);
  CHECK_FALSE(s.defective);
  CHECK(s.kappa == doctest::Approx(1.0).epsilon(1e-14));

  // P{log A = h} = 1/3, P{log A = -h} = 2/3: E A^k = 1 at e^{k h} = 2
  const ArithmeticLaw two(0.5, {{1, 1.0 / 3.0}, {-1, 2.0 / 3.0}});
  const auto t = solve_kappa(two, 50.0);
  CHECK(t.kappa * 0.5 == doctest::Approx(kLn2).epsilon(1e-13));
  const auto info = analyze(two, 50.0);
  CHECK(regime_name(info.regime) == "finite-mean");
  CHECK(info.tilted.mass(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-13));
  CHECK(info.tilted.mass(-1) == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
  CHECK(info.mu == doctest::Approx(0.5 / 3.0).epsilon(1e-12));
}

TEST_CASE("drift and root errors") {
  try {
    solve_kappa(ArithmeticLaw(1.0, {{1, 0.6}, {-1, 0.4}}), 50.0);
    FAIL("expected PositiveDrift");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::PositiveDrift);
  }
  // all mass below zero: E A^s decreases, no root
  try {
    solve_kappa(ArithmeticLaw(1.0, {{-1, 0.5}, {-2, 0.5}}), 50.0);
    FAIL("expected NoCramerRoot");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NoCramerRoot);
  }
}

TEST_CASE("defective regime detected at the moment abscissa") {
  const auto law = damped_power(0.5);
  const auto s = solve_kappa(law, 50.0);
  CHECK(s.defective);
  CHECK(s.kappa == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.theta == doctest::Approx(0.5).epsilon(1e-10));
  const auto info = analyze(law, 50.0);
  REQUIRE(std::holds_alternative<Defective>(info.regime));
  CHECK(info.tilted.mass(3) == doctest::Approx(std::pow(3.0, -2.5) / hurwitz_zeta(2.5, 1)).epsilon(1e-9));
  CHECK(info.tilted.lattice_mass() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("infinite mean regime takes alpha from the generator") {
  // tilted law power 1.7 brought back to a law of log A
  const ArithmeticLaw f(1.0, {}, 0.0, PowerTail{1.7, 1, 1.0, 0.0});
  const auto law = invert_tilt(f, 1.0);
  const auto info = analyze(law, 50.0);
  REQUIRE(std::holds_alternative<InfiniteMeanRegVar>(info.regime));
  CHECK(std::get<InfiniteMeanRegVar>(info.regime).alpha == doctest::Approx(0.7));
  CHECK(std::isinf(info.mu));
  for (std::int64_t k = 1; k < 30; ++k) CHECK(info.tilted.mass(k) == doctest::Approx(f.mass(k)).epsilon(1e-10));
}

TEST_CASE("tilt and invert_tilt are inverse") {
  const ArithmeticLaw law(0.5, {{1, 0.2}, {-1, 0.5}, {-3, 0.3}});
  const auto sol = solve_kappa(law, 50.0);
  const auto f = tilt(law, sol.kappa);
  const auto back = invert_tilt(f, sol.kappa);
  for (std::int64_t k = -3; k <= 1; ++k) CHECK(back.mass(k) == doctest::Approx(law.mass(k)).epsilon(1e-12));
}

TEST_CASE("strong renewal constant and truncated mean") {
  CHECK(c_alpha(0.5) == doctest::Approx(2.0 / std::numbers::pi).epsilon(1e-15));
  CHECK(c_alpha(1.0) == doctest::Approx(1.0));
  const ArithmeticLaw f(1.0, {{1, 0.5}, {3, 0.5}});
  // m(x) = int_0^x P{Y > y} dy: 1 on [0,1), 1/2 on [1,3)
  CHECK(truncated_mean_m(f, 0.5) == doctest::Approx(0.5));
  CHECK(truncated_mean_m(f, 2.0) == doctest::Approx(1.5));
  CHECK(truncated_mean_m(f, 10.0) == doctest::Approx(2.0));
  const auto tab = truncated_mean_table(f, 4);
  CHECK(tab[2] == doctest::Approx(1.5));
}

TEST_CASE("Doney diagnostic only in its regime") {
  const ArithmeticLaw f(1.0, {}, 0.0, PowerTail{1.3, 1, 1.0, 0.0});
  CHECK_THROWS_AS(doney_diagnostic(f, 0.7, {100}, {0.1}), Error);
  const auto rep = doney_diagnostic(f, 0.3, {100, 200, 400}, {0.05, 0.1});
  CHECK(rep.rows.size() == 6);
  CHECK(rep.tail_trend.size() == 2);
}
