#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "latren/error.hpp"
#include "latren/lattice_law.hpp"

using namespace latren;

TEST_CASE("mass accounting with atoms, zero atom and generator") {
  const ArithmeticLaw law(std::numbers::ln2, {}, 1.0 / 3.0, GeometricTail{0.25, 0, 2.0 / 3.0});
  CHECK(law.zero_atom() == doctest::Approx(1.0 / 3.0));
  CHECK(law.mass(0) == doctest::Approx(0.5));
  CHECK(law.mass(1) == doctest::Approx(0.125));
  CHECK(law.lattice_mass() == doctest::Approx(2.0 / 3.0));
  CHECK(law.tail_above(0) == doctest::Approx(2.0 / 3.0 - 0.5));
  CHECK(law.moment_abscissa() == doctest::Approx(std::log(4.0) / std::numbers::ln2));
  // E A = sum 2^l (2/3)(3/4) 4^{-l} = 1
  CHECK(mellin_moment(law, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(mellin_moment(law, 0.0) == 1.0);
  CHECK_THROWS_AS(mellin_moment(law, -1.0), Error);
}

TEST_CASE("invalid laws are rejected") {
  CHECK_THROWS_AS(ArithmeticLaw(1.0, {{1, 0.5}, {2, 0.4}}), Error);
  CHECK_THROWS_AS(ArithmeticLaw(1.0, {{1, -0.1}, {2, 1.1}}), Error);
  CHECK_THROWS_AS(ArithmeticLaw(0.0, {{1, 1.0}}), Error);
  // span 1 declared but the atoms sit on 2Z
  try {
    ArithmeticLaw(1.0, {{2, 0.5}, {4, 0.5}});
    FAIL("expected a span error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::InvalidLaw);
  }
  CHECK_NOTHROW(ArithmeticLaw(1.0, {{2, 0.5}, {4, 0.5}}, 0.0, std::nullopt, SpanCheck::Relaxed));
}

TEST_CASE("detect_span finds the lattice and rejects non-lattice input") {
  const double h = 0.3;
  CHECK(detect_span(std::vector<double>{2 * h, 5 * h, -3 * h}) == doctest::Approx(h).epsilon(1e-12));
  CHECK_THROWS_AS(detect_span(std::vector<double>{1.0, std::sqrt(2.0)}), Error);
}

TEST_CASE("power generator masses and truncated sums") {
  const ArithmeticLaw law(1.0, {}, 0.0, PowerTail{2.5, 1, 1.0, 0.0});
  double s = 0.0;
  for (std::int64_t k = 1; k <= 1000; ++k) s += law.mass(k);
  CHECK(s + law.tail_above(1000) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(law.mass(2) / law.mass(1) == doctest::Approx(std::pow(2.0, -2.5)));
  CHECK(std::isfinite(law.lattice_mean()));
  const ArithmeticLaw heavy(1.0, {}, 0.0, PowerTail{1.7, 1, 1.0, 0.0});
  CHECK(std::isinf(heavy.lattice_mean()));
}

TEST_CASE("lattice convolution") {
  const ArithmeticLaw f(1.0, {{1, 0.5}, {2, 0.5}});
  const auto g = convolve(f, f);
  CHECK(g.mass(2) == doctest::Approx(0.25));
  CHECK(g.mass(3) == doctest::Approx(0.5));
  CHECK(g.mass(4) == doctest::Approx(0.25));
  CHECK_THROWS_AS(convolve(f, ArithmeticLaw(2.0, {{1, 1.0}})), Error);
  CHECK_THROWS_AS(convolve(f, ArithmeticLaw(1.0, {{1, 0.5}}, 0.5)), Error);
}

TEST_CASE("subexponential diagnostic separates heavy and light tails") {
  const ArithmeticLaw heavy(1.0, {}, 0.0, PowerTail{2.5, 1, 1.0, 0.0});
  const auto d = subexp_diagnostic(heavy, 5000);
  CHECK(d.plausibly_subexponential(0.02));
  const ArithmeticLaw light(1.0, {}, 0.0, GeometricTail{0.5, 1, 1.0});
  const auto l = subexp_diagnostic(light, 200);
  CHECK_FALSE(l.plausibly_subexponential(0.02));
}

TEST_CASE("JSON round trip") {
  const ArithmeticLaw law(0.5, {{-1, 0.25}, {2, 0.25}}, 0.0, PowerTail{3.0, 3, 0.5, 0.0});
  const auto back = law_from_json(to_json(law));
  for (std::int64_t k = -2; k < 20; ++k) CHECK(back.mass(k) == doctest::Approx(law.mass(k)).epsilon(1e-14));
  CHECK_THROWS_AS(law_from_json(nlohmann::json{{"atoms", 1}}), Error);
}
