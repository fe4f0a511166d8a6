#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "latren/convolution.hpp"

using namespace latren;

namespace {
std::vector<double> random_pmf(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(n);
  double s = 0.0;
  for (auto& x : v) s += (x = u(rng));
  for (auto& x : v) x /= s;
  return v;
}
}  // namespace

TEST_CASE("direct convolution of small sequences") {
  const std::vector<double> a{0.5, 0.5}, b{0.25, 0.5, 0.25};
  const auto c = convolve(a, b, ConvolutionMethod::Direct);
  REQUIRE(c.size() == 4);
  CHECK(c[0] == doctest::Approx(0.125));
  CHECK(c[1] == doctest::Approx(0.375));
  CHECK(c[2] == doctest::Approx(0.375));
  CHECK(c[3] == doctest::Approx(0.125));
}

TEST_CASE("transform and direct methods agree") {
  std::mt19937_64 rng(42);
  for (std::size_t n : {3u, 100u, 5000u}) {
    const auto a = random_pmf(rng, n), b = random_pmf(rng, n / 2 + 1);
    const auto d = convolve(a, b, ConvolutionMethod::Direct);
    const auto t = convolve(a, b, ConvolutionMethod::Transform);
    REQUIRE(d.size() == t.size());
    double err = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) err = std::max(err, std::abs(d[i] - t[i]));
    CHECK(err < 1e-15);
  }
}

TEST_CASE("convolution preserves total mass and is commutative") {
  std::mt19937_64 rng(7);
  const auto a = random_pmf(rng, 300), b = random_pmf(rng, 41);
  const auto ab = convolve(a, b), ba = convolve(b, a);
  double s = 0.0, diff = 0.0;
  for (std::size_t i = 0; i < ab.size(); ++i) {
    s += ab[i];
    diff = std::max(diff, std::abs(ab[i] - ba[i]));
  }
  CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(diff < 1e-16);
}

TEST_CASE("convolve_head returns the leading part") {
  std::mt19937_64 rng(3);
  const auto a = random_pmf(rng, 6000), b = random_pmf(rng, 6000);
  const auto full = convolve(a, b);
  const auto head = convolve_head(a, b, 100);
  REQUIRE(head.size() == 100);
  for (std::size_t i = 0; i < head.size(); ++i) CHECK(head[i] == doctest::Approx(full[i]).epsilon(1e-9));
}
