#include "latren/fixed_point_sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <thread>

#include "latren/error.hpp"
#include "latren/series.hpp"

namespace latren {

namespace {

constexpr std::size_t kBlock = 4096;
constexpr double kInf = std::numeric_limits<double>::infinity();

using Rng = std::mt19937_64;

double uniform01(Rng& rng) { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; }

// P(K = j) = (1 - r) r^j, j >= 0
std::int64_t geometric(Rng& rng, double r) {
  return static_cast<std::int64_t>(std::floor(std::log(uniform01(rng)) / std::log(r)));
}

class LatticeSampler {
 public:
  explicit LatticeSampler(const ArithmeticLaw& law) : law_(law) {
    long double acc = 0.0L;
    for (double m : law.dense_masses()) {
      acc += m;
      cdf_.push_back(static_cast<double>(acc));
    }
    dense_total_ = static_cast<double>(acc);
    total_ = law.lattice_mass();
    if (law.generator()) {
      if (const auto* p = std::get_if<PowerTail>(&*law.generator())) {
        // envelope constant for rejection from the discretized continuous Pareto
        c_ = std::pow(1.0 + 1.0 / static_cast<double>(p->k_min), p->exponent);
      }
    }
  }

  std::int64_t draw(Rng& rng) const {
    const double u = uniform01(rng) * total_;
    if (u < dense_total_ || !law_.generator()) {
      const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
      const auto i = std::min<std::ptrdiff_t>(it - cdf_.begin(), static_cast<std::ptrdiff_t>(cdf_.size()) - 1);
      return law_.dense_offset() + i;
    }
    const auto& g = *law_.generator();
    if (const auto* q = std::get_if<GeometricTail>(&g)) return q->k_min + geometric(rng, q->ratio);
    const auto& p = std::get<PowerTail>(g);
    const double s = p.exponent, k0 = static_cast<double>(p.k_min);
    for (;;) {
      const double y = k0 * std::pow(uniform01(rng), -1.0 / (s - 1.0));
      if (!(y < 9e18)) continue;
      const double k = std::floor(y);
      const double cell = (std::pow(k, 1.0 - s) - std::pow(k + 1.0, 1.0 - s)) / (s - 1.0);
      // proposal mass of k is proportional to cell, the target to k^{-s} e^{-decay k h}
      const double accept = std::pow(k, -s) / (c_ * cell) * std::exp(-p.decay * (k - k0) * law_.span());
      if (uniform01(rng) <= accept) return static_cast<std::int64_t>(k);
    }
  }

 private:
  const ArithmeticLaw& law_;
  std::vector<double> cdf_;
  double dense_total_ = 0.0;
  double total_ = 1.0;
  double c_ = 1.0;
};

double draw_b(const BDist& b, double scale, Rng& rng) {
  const double v = std::visit(
      [&](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, ConstantB>) {
          return d.value;
        } else if constexpr (std::is_same_v<T, GeometricPowerB>) {
          const std::int64_t k = d.k_min + geometric(rng, d.ratio);
          return d.base == 2.0 ? std::ldexp(1.0, static_cast<int>(k)) : std::pow(d.base, static_cast<double>(k));
        } else if constexpr (std::is_same_v<T, QsetHB>) {
          return d.quantile(uniform01(rng));
        } else if constexpr (std::is_same_v<T, ParetoB>) {
          return d.x_m * std::pow(uniform01(rng), -1.0 / d.alpha);
        } else {
          return d.lo + (d.hi - d.lo) * uniform01(rng);
        }
      },
      b);
  return scale * v;
}

class PairSampler {
 public:
  explicit PairSampler(const JointABLaw& pair) : pair_(pair) {
    double acc = 0.0;
    for (const auto& c : pair.components()) {
      acc += c.weight;
      cdf_.push_back(acc);
      lattice_.emplace_back(c.a ? std::make_optional<LatticeSampler>(*c.a) : std::nullopt);
    }
  }
  std::size_t pick(Rng& rng, const std::vector<std::size_t>& subset, const std::vector<double>& sub_cdf) const {
    const double u = uniform01(rng) * sub_cdf.back();
    const auto i = std::upper_bound(sub_cdf.begin(), sub_cdf.end(), u) - sub_cdf.begin();
    return subset[static_cast<std::size_t>(std::min<std::ptrdiff_t>(i, static_cast<std::ptrdiff_t>(subset.size()) - 1))];
  }
  std::size_t pick(Rng& rng) const {
    const double u = uniform01(rng) * cdf_.back();
    const auto i = std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin();
    return static_cast<std::size_t>(std::min<std::ptrdiff_t>(i, static_cast<std::ptrdiff_t>(cdf_.size()) - 1));
  }
  double draw_a(std::size_t c, Rng& rng) const {
    if (!lattice_[c]) return 0.0;
    return lattice_power(lattice_[c]->draw(rng), pair_.span());
  }
  double draw_b(std::size_t c, Rng& rng) const {
    const auto& comp = pair_.components()[c];
    return latren::draw_b(comp.b, comp.b_scale, rng);
  }
  std::pair<double, double> draw(Rng& rng) const {
    const std::size_t c = pick(rng);
    const double a = draw_a(c, rng);
    return {a, draw_b(c, rng)};
  }

 private:
  const JointABLaw& pair_;
  std::vector<double> cdf_;
  std::vector<std::optional<LatticeSampler>> lattice_;
};

// Runs body(path_index, rng) for every path; one RNG stream per block of paths.
void parallel_paths(std::size_t count, std::uint64_t seed, unsigned threads,
                    const std::function<void(std::size_t, Rng&)>& body) {
  const std::size_t blocks = (count + kBlock - 1) / kBlock;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(blocks, 1)));
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t b; (b = next.fetch_add(1)) < blocks;) {
      std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                        static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
      Rng rng(seq);
      for (std::size_t i = b * kBlock; i < std::min(count, (b + 1) * kBlock); ++i) body(i, rng);
    }
  };
  std::vector<std::jthread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
}

SampleResult run_series(const JointABLaw& pair, const SimConfig& cfg, bool maximum) {
  check_contractive(pair);
  if (!(cfg.stop.weight_floor > 0.0 && cfg.stop.weight_floor < 1.0) || cfg.stop.max_steps < 1)
    throw Error(Errc::InvalidArgument, "stop rule needs weight_floor in (0,1) and max_steps >= 1");
  const PairSampler sampler(pair);
  SampleResult out;
  out.samples.assign(cfg.sample_count, 0.0);
  std::vector<unsigned char> cut(cfg.sample_count, 0);
  parallel_paths(cfg.sample_count, cfg.seed, cfg.threads, [&](std::size_t i, Rng& rng) {
    double w = 1.0;
    double x = maximum ? -kInf : 0.0;
    for (std::int64_t step = 0;; ++step) {
      const auto [a, b] = sampler.draw(rng);
      if (maximum) x = std::max(x, w * b);
      else x += w * b;
      w *= a;
      if (w == 0.0) {
        if (maximum) x = std::max(x, 0.0);  // every later term is 0 * B = 0
        break;
      }
      if (w < cfg.stop.weight_floor || step + 1 >= cfg.stop.max_steps) {
        cut[i] = 1;
        break;
      }
    }
    out.samples[i] = x;
  });
  double mean_abs = 0.0;
  for (std::size_t i = 0; i < cfg.sample_count; ++i) {
    out.truncated += cut[i];
    mean_abs += std::abs(out.samples[i]);
  }
  if (out.truncated > 0 && cfg.sample_count > 0)
    out.bias_bound = cfg.stop.weight_floor * mean_abs / static_cast<double>(cfg.sample_count);
  return out;
}

}  // namespace

void check_contractive(const JointABLaw& pair) {
  bool has_zero = false;
  for (const auto& c : pair.components()) has_zero = has_zero || !c.a;
  if (!has_zero) {
    const double m = pair.marginal_a().lattice_mean();
    if (!(m < 0.0)) throw Error(Errc::NonContractive, "E log A >= 0");
  }
  if (!std::isfinite(pair.log_plus_b_mean())) throw Error(Errc::NonContractive, "E log+ |B| = inf");
}

SampleResult sample_perpetuity(const JointABLaw& pair, const SimConfig& cfg) { return run_series(pair, cfg, false); }

SampleResult sample_max(const JointABLaw& pair, const SimConfig& cfg) { return run_series(pair, cfg, true); }

SampleResult sample_ab0_exact(const JointABLaw& pair, const SimConfig& cfg) {
  if (!pair.is_ab0() || !pair.b_nonnegative()) throw Error(Errc::NotAB0Pair, "pair needs A B = 0 and B >= 0");
  std::vector<std::size_t> with_a, without_a;
  std::vector<double> cdf_a, cdf_0;
  double p0 = 0.0;
  for (std::size_t c = 0; c < pair.components().size(); ++c) {
    const auto& comp = pair.components()[c];
    if (comp.a) {
      with_a.push_back(c);
      cdf_a.push_back((cdf_a.empty() ? 0.0 : cdf_a.back()) + comp.weight);
    } else {
      without_a.push_back(c);
      cdf_0.push_back((cdf_0.empty() ? 0.0 : cdf_0.back()) + comp.weight);
      p0 += comp.weight;
    }
  }
  if (without_a.empty()) throw Error(Errc::NotAB0Pair, "P{A = 0} = 0");
  const PairSampler sampler(pair);
  SampleResult out;
  out.samples.assign(cfg.sample_count, 0.0);
  parallel_paths(cfg.sample_count, cfg.seed, cfg.threads, [&](std::size_t i, Rng& rng) {
    // N - 1 = number of A != 0 factors before the first A = 0 draw
    const std::int64_t failures = with_a.empty() ? 0 : geometric(rng, 1.0 - p0);
    double x = 1.0;
    for (std::int64_t k = 0; k < failures; ++k) x *= sampler.draw_a(sampler.pick(rng, with_a, cdf_a), rng);
    out.samples[i] = x * sampler.draw_b(sampler.pick(rng, without_a, cdf_0), rng);
  });
  return out;
}

IfsMap ifs_map_from_string(const std::string& s) {
  if (s == "affine") return IfsMap::Affine;
  if (s == "max") return IfsMap::Max;
  if (s == "hypot") return IfsMap::Hypot;
  throw Error(Errc::ConfigError, "unknown IFS map '" + s + "'");
}

std::string to_string(IfsMap m) {
  switch (m) {
    case IfsMap::Affine: return "affine";
    case IfsMap::Max: return "max";
    case IfsMap::Hypot: return "hypot";
  }
  return "?";
}

double ifs_apply(IfsMap m, double a, double b, double x) {
  switch (m) {
    case IfsMap::Affine: return a * x + b;
    case IfsMap::Max: return std::max(a * x, b);
    case IfsMap::Hypot: return std::hypot(a * x, b);
  }
  return 0.0;
}

void validate_sandwich(const IFSDescriptor& d, std::uint64_t seed) {
  const PairSampler sampler(d.pair);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0xabcdu};
  Rng rng(seq);
  const double xs[] = {0.0, 1e-3, 0.1, 0.5, 1.0, 2.0, 3.0, 10.0, 1e3, 1e6};
  for (int t = 0; t < 512; ++t) {
    const auto [a, b] = sampler.draw(rng);
    for (double x : xs) {
      const double v = ifs_apply(d.map, a, b, x);
      if (!(std::max(a * x, b) <= v && v <= a * x + b))
        throw Error(Errc::SandwichViolated, "at A=" + std::to_string(a) + " B=" + std::to_string(b) +
                                                " x=" + std::to_string(x));
    }
  }
}

IfsResult sample_ifs(const IFSDescriptor& d, const SimConfig& cfg) {
  check_contractive(d.pair);
  validate_sandwich(d, cfg.seed);
  const PairSampler sampler(d.pair);
  IfsResult out;
  out.samples.assign(cfg.sample_count, 0.0);
  out.lower.assign(cfg.sample_count, 0.0);
  out.upper.assign(cfg.sample_count, 0.0);
  std::vector<std::uint32_t> bad(cfg.sample_count, 0);
  parallel_paths(cfg.sample_count, cfg.seed, cfg.threads, [&](std::size_t i, Rng& rng) {
    double lo = 0.0, x = 0.0, up = 0.0;
    for (std::int64_t s = 0; s < d.steps; ++s) {
      const auto [a, b] = sampler.draw(rng);
      lo = std::max(a * lo, b);
      x = ifs_apply(d.map, a, b, x);
      up = a * up + b;
      if (!(lo <= x && x <= up)) ++bad[i];
    }
    out.samples[i] = x;
    out.lower[i] = lo;
    out.upper[i] = up;
  });
  for (auto v : bad) out.violations += v;
  out.checked_steps = cfg.sample_count * static_cast<std::size_t>(d.steps);
  return out;
}

double ks_statistic(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw Error(Errc::InvalidArgument, "KS needs two nonempty samples");
  std::size_t i = 0, j = 0;
  double d = 0.0;
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;  // consume ties on both sides before comparing
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_critical_1pct(std::size_t n, std::size_t m) {
  const double dn = static_cast<double>(n), dm = static_cast<double>(m);
  return 1.628 * std::sqrt((dn + dm) / (dn * dm));
}

double binomial_se(double p, std::size_t n) { return std::sqrt(p * (1.0 - p) / static_cast<double>(n)); }

}  // namespace latren
