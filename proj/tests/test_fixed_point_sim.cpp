#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "latren/error.hpp"
#include "latren/fixed_point_sim.hpp"
#include "latren/oracles.hpp"

using namespace latren;

namespace {
// non-AB0 pair: log A on {-1, 1} (span 1, negative drift) with uniform B
JointABLaw uniform_b_pair(double lo, double hi) {
  return JointABLaw({ABComponent{1.0, ArithmeticLaw(1.0, {{-1, 0.9}, {1, 0.1}}), UniformB{lo, hi}, 1.0}});
}

std::vector<double> sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v;
}
}  // namespace

TEST_CASE("samplers are deterministic and independent of the thread count") {
  const auto pair = st_petersburg_pair();
  SimConfig a;
  a.sample_count = 10000;
  a.seed = 99;
  a.threads = 1;
  SimConfig b = a;
  b.threads = 4;
  CHECK(sample_perpetuity(pair, a).samples == sample_perpetuity(pair, b).samples);
  CHECK(sample_max(pair, a).samples == sample_max(pair, b).samples);
  CHECK(sample_ab0_exact(pair, a).samples == sample_ab0_exact(pair, b).samples);
  SimConfig c = a;
  c.seed = 100;
  CHECK(sample_ab0_exact(pair, a).samples != sample_ab0_exact(pair, c).samples);
}

TEST_CASE("dyadic pair: samplers agree with each other and the exact tail") {
  const auto pair = st_petersburg_pair();
  SimConfig cfg;
  cfg.sample_count = 100000;
  cfg.seed = 5;
  const auto p = sample_perpetuity(pair, cfg);
  cfg.seed = 6;
  const auto m = sample_max(pair, cfg);
  cfg.seed = 7;
  const auto e = sample_ab0_exact(pair, cfg);
  CHECK(p.truncated == 0);
  const auto ps = sorted(p.samples), ms = sorted(m.samples), es = sorted(e.samples);
  const double crit = ks_critical_1pct(ps.size(), es.size());
  CHECK(ks_statistic(ps, es) < crit);
  CHECK(ks_statistic(ms, es) < crit);
  const auto tail = TailFunction::empirical(e.samples);
  for (double x : {2.0, 3.0, 4.0, 6.0, 8.0}) {
    const double ex = st_petersburg_tail(x);
    CHECK(std::abs(tail(x) - ex) < 4.0 * binomial_se(ex, cfg.sample_count));
  }
  // every sample is a power of two
  for (std::size_t i = 0; i < 1000; ++i) {
    int ex = 0;
    CHECK(std::frexp(e.samples[i], &ex) == 0.5);
  }
}

TEST_CASE("pair checks") {
  CHECK_THROWS_AS(sample_ab0_exact(uniform_b_pair(0.0, 1.0), SimConfig{}), Error);
  CHECK_NOTHROW(check_contractive(uniform_b_pair(0.0, 1.0)));
  const JointABLaw expanding({ABComponent{1.0, ArithmeticLaw(1.0, {{1, 0.6}, {-1, 0.4}}), UniformB{0.0, 1.0}, 1.0}});
  try {
    check_contractive(expanding);
    FAIL("expected NonContractive");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NonContractive);
  }
}

TEST_CASE("perpetuity with uniform B: mean matches E B / (1 - E A)") {
  const auto pair = uniform_b_pair(0.0, 1.0);
  SimConfig cfg;
  cfg.sample_count = 200000;
  cfg.seed = 3;
  const auto r = sample_perpetuity(pair, cfg);
  double mean = 0.0;
  for (double v : r.samples) mean += v;
  mean /= static_cast<double>(r.samples.size());
  const double ea = 0.9 * std::exp(-1.0) + 0.1 * std::exp(1.0);
  CHECK(ea < 1.0);
  CHECK(mean == doctest::Approx(0.5 / (1.0 - ea)).epsilon(0.02));
}

TEST_CASE("IFS maps and the pathwise sandwich") {
  CHECK(ifs_apply(IfsMap::Affine, 2.0, 1.0, 3.0) == 7.0);
  CHECK(ifs_apply(IfsMap::Max, 2.0, 1.0, 3.0) == 6.0);
  CHECK(ifs_apply(IfsMap::Hypot, 3.0, 4.0, 1.0) == doctest::Approx(5.0));
  CHECK(ifs_map_from_string("hypot") == IfsMap::Hypot);
  CHECK(to_string(IfsMap::Max) == "max");
  CHECK_THROWS_AS(ifs_map_from_string("nope"), Error);

  for (const auto& pair : {st_petersburg_pair(), uniform_b_pair(0.0, 2.0)}) {
    IFSDescriptor d{IfsMap::Hypot, pair, 200};
    CHECK_NOTHROW(validate_sandwich(d, 1));
    SimConfig cfg;
    cfg.sample_count = 5000;
    cfg.seed = 11;
    const auto r = sample_ifs(d, cfg);
    CHECK(r.violations == 0);
    CHECK(r.checked_steps > 0);
    for (std::size_t i = 0; i < r.samples.size(); ++i) {
      CHECK(r.lower[i] <= r.samples[i]);
      CHECK(r.samples[i] <= r.upper[i]);
    }
  }
  // with negative B the hypot map exceeds Ax + B
  IFSDescriptor neg{IfsMap::Hypot, uniform_b_pair(-1.0, -0.5), 100};
  CHECK_THROWS_AS(validate_sandwich(neg, 1), Error);
}

TEST_CASE("KS and binomial helpers") {
  const std::vector<double> a{1, 2, 3, 4}, b{1, 2, 3, 4};
  CHECK(ks_statistic(a, b) == 0.0);
  const std::vector<double> c{5, 6, 7, 8};
  CHECK(ks_statistic(a, c) == doctest::Approx(1.0));
  CHECK(ks_critical_1pct(100, 100) == doctest::Approx(1.628 * std::sqrt(0.02)));
  CHECK(binomial_se(0.5, 100) == doctest::Approx(0.05));
}
