#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "latren/cramer_tilt.hpp"
#include "latren/error.hpp"
#include "latren/renewal.hpp"

using namespace latren;

TEST_CASE("point mass kernel gives u identically 1") {
  const auto f = ArithmeticLaw::point_mass(1.0, 1);
  const auto u = renewal_sequence(f, 1.0, 0, 300);
  for (std::int64_t n = 0; n <= 300; ++n) CHECK(u.at(n) == doctest::Approx(1.0).epsilon(1e-13));
  const auto rep = blackwell_check(u, 1.0, 100, 300);
  CHECK(rep.band_within(1.0 - 1e-12, 1.0 + 1e-12));
}

TEST_CASE("two-atom kernel matches the renewal recursion") {
  const ArithmeticLaw f(1.0, {{1, 0.5}, {2, 0.5}});
  const auto u = renewal_sequence(f, 1.0, 0, 400);
  std::vector<double> r(401, 0.0);
  r[0] = 1.0;
  r[1] = 0.5;
  for (std::size_t n = 2; n <= 400; ++n) r[n] = 0.5 * r[n - 1] + 0.5 * r[n - 2];
  CHECK(r[2] == doctest::Approx(0.75));
  for (std::int64_t n = 0; n <= 400; ++n) {
    CHECK(std::abs(u.at(n) - r[static_cast<std::size_t>(n)]) < 1e-12);
    CHECK(u.error_at(n) >= 0.0);
  }
  const auto rep = blackwell_check(u, 1.5, 150, 400);
  CHECK(rep.limit == doctest::Approx(2.0 / 3.0));
  CHECK(rep.band_within(1.0 - 1e-10, 1.0 + 1e-10));
}

TEST_CASE("two-sided kernel: u_n = 3 for n >= 0 and 3 2^{-|n|} below") {
  const double h = std::numbers::ln2;
  const ArithmeticLaw f(h, {{1, 2.0 / 3.0}, {-1, 1.0 / 3.0}});
  const auto u = renewal_sequence(f, 1.0, -30, 100);
  for (std::int64_t n = 0; n <= 100; ++n) CHECK(u.at(n) == doctest::Approx(3.0).epsilon(1e-10));
  for (std::int64_t n = 1; n <= 30; ++n)
    CHECK(u.at(-n) == doctest::Approx(3.0 * std::pow(2.0, -static_cast<double>(n))).epsilon(1e-9));
  CHECK(u.pad > 0);
}

TEST_CASE("defective point mass: u_n = theta^n") {
  const auto f = ArithmeticLaw::point_mass(1.0, 1);
  const auto u = renewal_sequence(f, 0.5, 0, 60);
  for (std::int64_t n = 0; n <= 60; ++n) CHECK(u.at(n) == doctest::Approx(std::pow(0.5, n)).epsilon(1e-12));
  CHECK_THROWS_AS(blackwell_check(u, 1.0, 10, 60), Error);
}

TEST_CASE("defective heavy-tailed kernel approaches theta/(1-theta)^2 p_n") {
  const ArithmeticLaw f(1.0, {}, 0.0, PowerTail{2.5, 1, 1.0, 0.0});
  const auto u = renewal_sequence(f, 0.5, 0, 4000);
  const auto rep = defective_check(u, f, 0.5, 2000, 4000);
  CHECK(rep.limit == doctest::Approx(2.0));
  CHECK(rep.band_within(0.9, 1.1));
  CHECK_THROWS_AS(defective_check(u, f, 0.4, 2000, 4000), Error);
}

TEST_CASE("input validation") {
  const ArithmeticLaw drift_down(1.0, {{1, 0.3}, {-1, 0.7}});
  CHECK_THROWS_AS(renewal_sequence(drift_down, 1.0, 0, 10), Error);
  CHECK_THROWS_AS(renewal_sequence(ArithmeticLaw(1.0, {{1, 0.5}}, 0.5), 1.0, 0, 10), Error);
  RenewalOptions tight;
  tight.max_window = 100;
  CHECK_THROWS_AS(renewal_sequence(ArithmeticLaw::point_mass(1.0, 1), 1.0, 0, 1000, tight), Error);
  const ArithmeticLaw finite(1.0, {{1, 1.0}});
  const auto u = renewal_sequence(finite, 1.0, 0, 10);
  CHECK_THROWS_AS(srt_check(u, finite, 0.5, 1, 10), Error);
}

TEST_CASE("key renewal sum converges to h/mu times the z sum") {
  const ArithmeticLaw f(1.0, {{1, 0.5}, {2, 0.5}});
  const auto u = renewal_sequence(f, 1.0, 0, 400);
  const auto z = [](std::int64_t i) { return i >= 0 ? std::pow(0.5, static_cast<double>(i)) : 0.0; };
  const auto r = key_renewal_eval(z, u, 300, FiniteMeanLimit{1.5});
  CHECK(r.z_sum == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r.predicted == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  CHECK(std::abs(r.value - r.predicted) < 1e-9 + r.remainder_bound);
  CHECK_THROWS_AS(key_renewal_eval([](std::int64_t) { return 1.0; }, u, 300, FiniteMeanLimit{1.5}), Error);
}

TEST_CASE("decade statistics cover the window") {
  const ArithmeticLaw f(1.0, {}, 0.0, PowerTail{1.7, 1, 1.0, 0.0});
  const auto u = renewal_sequence(f, 1.0, 0, 2000);
  const auto rep = srt_check(u, f, 0.7, 1000, 2000);
  REQUIRE(rep.decades.size() == 3);
  CHECK(rep.decades.front().from == 10);
  CHECK(rep.decades.back().to == 2000);
  CHECK(rep.band_within(0.8, 1.2));
}
