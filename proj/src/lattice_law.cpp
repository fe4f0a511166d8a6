#include "latren/lattice_law.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "latren/convolution.hpp"
#include "latren/error.hpp"
#include "latren/series.hpp"

namespace latren {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMassTol = 1e-12;

double generator_norm(const Generator& g) {
  if (const auto* p = std::get_if<PowerTail>(&g)) return hurwitz_zeta(p->exponent, p->k_min);
  return 1.0;
}

void validate_generator(const Generator& g) {
  if (const auto* p = std::get_if<PowerTail>(&g)) {
    if (!(p->exponent > 1.0) || p->k_min < 1 || !(p->weight > 0.0) || !(p->decay >= 0.0) ||
        !std::isfinite(p->decay))
      throw Error(Errc::InvalidLaw, "power tail needs exponent > 1, k_min >= 1, weight > 0, decay >= 0");
  } else {
    const auto& q = std::get<GeometricTail>(g);
    if (!(q.ratio > 0.0 && q.ratio < 1.0) || !(q.weight > 0.0))
      throw Error(Errc::InvalidLaw, "geometric tail needs ratio in (0,1) and weight > 0");
  }
}

}  // namespace

ArithmeticLaw::ArithmeticLaw(double span_h, const std::map<std::int64_t, double>& atoms, double zero_atom,
                             std::optional<Generator> generator, SpanCheck span_check) {
  h_ = span_h;
  zero_ = zero_atom;
  gen_ = std::move(generator);
  if (!atoms.empty()) {
    offset_ = atoms.begin()->first;
    dense_.assign(static_cast<std::size_t>(atoms.rbegin()->first - offset_ + 1), 0.0);
    for (const auto& [k, m] : atoms) dense_[static_cast<std::size_t>(k - offset_)] += m;
  }
  validate(span_check);
}

ArithmeticLaw ArithmeticLaw::from_dense(double span_h, std::int64_t offset, std::vector<double> masses,
                                        double zero_atom, std::optional<Generator> generator,
                                        SpanCheck span_check) {
  ArithmeticLaw law;
  law.h_ = span_h;
  law.zero_ = zero_atom;
  law.gen_ = std::move(generator);
  law.offset_ = offset;
  law.dense_ = std::move(masses);
  law.validate(span_check);
  return law;
}

ArithmeticLaw ArithmeticLaw::point_mass(double span_h, std::int64_t k) {
  return from_dense(span_h, k, {1.0});
}

void ArithmeticLaw::validate(SpanCheck span_check) {
  if (!(h_ > 0.0) || !std::isfinite(h_)) throw Error(Errc::InvalidLaw, "span must be positive");
  if (!(zero_ >= 0.0 && zero_ < 1.0)) throw Error(Errc::InvalidLaw, "zero atom must lie in [0,1)");
  for (double m : dense_)
    if (!(m >= 0.0) || !std::isfinite(m)) throw Error(Errc::InvalidLaw, "masses must be finite and >= 0");
  if (gen_) validate_generator(*gen_);

  // trim zero masses at both ends so min_index/max_index are exact
  auto& dense = dense_;
  auto& offset = offset_;
  const auto first = std::find_if(dense.begin(), dense.end(), [](double m) { return m > 0.0; });
  if (first == dense.end()) {
    dense.clear();
    offset = 0;
  } else {
    const auto last = std::find_if(dense.rbegin(), dense.rend(), [](double m) { return m > 0.0; }).base();
    offset += first - dense.begin();
    dense.assign(first, last);
  }
  dense_suffix_.assign(dense_.size() + 1, 0.0L);
  for (std::size_t i = dense_.size(); i-- > 0;) dense_suffix_[i] = dense_suffix_[i + 1] + dense_[i];
  if (dense_.empty() && !gen_) throw Error(Errc::InvalidLaw, "law has no lattice mass");

  const double total = zero_ + lattice_mass();
  if (std::abs(total - 1.0) > kMassTol)
    throw Error(Errc::InvalidLaw, "total mass " + std::to_string(total) + " differs from 1");

  if (span_check == SpanCheck::Strict && !has_maximal_span())
    throw Error(Errc::InvalidLaw, "support indices share a common factor; span is not maximal");
}

double ArithmeticLaw::generator_mass(std::int64_t k) const {
  if (!gen_) return 0.0;
  if (const auto* p = std::get_if<PowerTail>(&*gen_)) {
    if (k < p->k_min) return 0.0;
    const double kd = static_cast<double>(k);
    return p->weight * std::exp(-p->decay * kd * h_) * std::pow(kd, -p->exponent) / generator_norm(*gen_);
  }
  const auto& q = std::get<GeometricTail>(*gen_);
  if (k < q.k_min) return 0.0;
  return q.weight * (1.0 - q.ratio) * std::pow(q.ratio, static_cast<double>(k - q.k_min));
}

double ArithmeticLaw::generator_tail_from(std::int64_t k0) const {
  if (!gen_) return 0.0;
  if (const auto* p = std::get_if<PowerTail>(&*gen_)) {
    k0 = std::max(k0, p->k_min);
    return p->weight * power_exp_sum(p->exponent, p->decay * h_, k0) / generator_norm(*gen_);
  }
  const auto& q = std::get<GeometricTail>(*gen_);
  k0 = std::max(k0, q.k_min);
  return q.weight * std::pow(q.ratio, static_cast<double>(k0 - q.k_min));
}

std::int64_t ArithmeticLaw::min_index() const {
  std::int64_t lo = std::numeric_limits<std::int64_t>::max();
  if (!dense_.empty()) lo = offset_;
  if (gen_) {
    const std::int64_t g = std::visit([](const auto& x) { return x.k_min; }, *gen_);
    lo = std::min(lo, g);
  }
  return lo;
}

std::optional<std::int64_t> ArithmeticLaw::max_index() const {
  if (gen_) return std::nullopt;
  return offset_ + static_cast<std::int64_t>(dense_.size()) - 1;
}

double ArithmeticLaw::mass(std::int64_t k) const {
  double m = generator_mass(k);
  const std::int64_t i = k - offset_;
  if (i >= 0 && i < static_cast<std::int64_t>(dense_.size())) m += dense_[static_cast<std::size_t>(i)];
  return m;
}

std::vector<double> ArithmeticLaw::masses(std::int64_t lo, std::int64_t hi) const {
  if (hi < lo) return {};
  std::vector<double> out(static_cast<std::size_t>(hi - lo + 1), 0.0);
  for (std::size_t i = 0; i < dense_.size(); ++i) {
    const std::int64_t k = offset_ + static_cast<std::int64_t>(i);
    if (k >= lo && k <= hi) out[static_cast<std::size_t>(k - lo)] += dense_[i];
  }
  if (gen_) {
    const double norm = generator_norm(*gen_);
    if (const auto* p = std::get_if<PowerTail>(&*gen_)) {
      for (std::int64_t k = std::max(lo, p->k_min); k <= hi; ++k) {
        const double kd = static_cast<double>(k);
        out[static_cast<std::size_t>(k - lo)] +=
            p->weight * std::exp(-p->decay * kd * h_) * std::pow(kd, -p->exponent) / norm;
      }
    } else {
      for (std::int64_t k = std::max(lo, std::get<GeometricTail>(*gen_).k_min); k <= hi; ++k)
        out[static_cast<std::size_t>(k - lo)] += generator_mass(k);
    }
  }
  return out;
}

double ArithmeticLaw::tail_above(std::int64_t j) const {
  const std::int64_t first = std::clamp<std::int64_t>(j + 1 - offset_, 0, static_cast<std::int64_t>(dense_.size()));
  return static_cast<double>(dense_suffix_[static_cast<std::size_t>(first)]) + generator_tail_from(j + 1);
}

double ArithmeticLaw::lattice_mass() const {
  const long double dense = dense_suffix_.empty() ? 0.0L : dense_suffix_[0];
  return static_cast<double>(dense) + generator_tail_from(std::numeric_limits<std::int64_t>::min() / 2);
}

double ArithmeticLaw::lattice_mean() const {
  long double sum = 0.0L;
  for (std::size_t i = 0; i < dense_.size(); ++i)
    sum += dense_[i] * static_cast<long double>(offset_ + static_cast<std::int64_t>(i)) * h_;
  double g = 0.0;
  if (gen_) {
    if (const auto* p = std::get_if<PowerTail>(&*gen_)) {
      if (p->decay == 0.0 && p->exponent <= 2.0) return kInf;
      g = p->weight * h_ * power_exp_sum(p->exponent - 1.0, p->decay * h_, p->k_min) / generator_norm(*gen_);
    } else {
      const auto& q = std::get<GeometricTail>(*gen_);
      g = q.weight * h_ * (static_cast<double>(q.k_min) + q.ratio / (1.0 - q.ratio));
    }
  }
  return static_cast<double>(sum) + g;
}

double ArithmeticLaw::exponential_moment(double t) const {
  long double sum = 0.0L;
  for (std::size_t i = 0; i < dense_.size(); ++i)
    sum += dense_[i] * std::exp(static_cast<long double>(t) * (offset_ + static_cast<std::int64_t>(i)) * h_);
  if (!std::isfinite(static_cast<double>(sum))) return kInf;
  double g = 0.0;
  if (gen_) {
    if (const auto* p = std::get_if<PowerTail>(&*gen_)) {
      const double tt = (p->decay - t) * h_;
      if (tt < 0.0) return kInf;
      g = p->weight * power_exp_sum(p->exponent, tt, p->k_min) / generator_norm(*gen_);
    } else {
      const auto& q = std::get<GeometricTail>(*gen_);
      const double rr = q.ratio * std::exp(t * h_);
      if (rr >= 1.0) return kInf;
      g = q.weight * (1.0 - q.ratio) * std::exp(t * static_cast<double>(q.k_min) * h_) / (1.0 - rr);
    }
  }
  return static_cast<double>(sum) + g;
}

double ArithmeticLaw::moment_abscissa() const {
  if (!gen_) return kInf;
  if (const auto* p = std::get_if<PowerTail>(&*gen_)) return p->decay;
  return -std::log(std::get<GeometricTail>(*gen_).ratio) / h_;
}

bool ArithmeticLaw::has_maximal_span() const {
  if (gen_) return true;  // generators occupy consecutive indices
  std::int64_t g = 0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < dense_.size(); ++i) {
    if (dense_[i] <= 0.0) continue;
    ++count;
    g = std::gcd(g, offset_ + static_cast<std::int64_t>(i));
  }
  return count <= 1 || g == 1;
}

double detect_span(std::span<const double> log_atoms) {
  constexpr double kTol = 1e-9;
  constexpr std::int64_t kMaxDenominator = 1000;
  constexpr std::int64_t kMaxIndex = 1000000;

  double base = kInf;
  for (double v : log_atoms) {
    if (!std::isfinite(v)) throw Error(Errc::InvalidArgument, "log-atoms must be finite");
    if (std::abs(v) > kTol) base = std::min(base, std::abs(v));
  }
  if (!std::isfinite(base)) throw Error(Errc::NoCommonSpan, "support has no nonzero log-atom");

  // rational approximation of each ratio v/base by continued fractions
  std::vector<std::pair<std::int64_t, std::int64_t>> fracs;
  std::int64_t lcm = 1;
  for (double v : log_atoms) {
    const double r = v / base;
    std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    double x = r;
    bool found = false;
    for (int it = 0; it < 64; ++it) {
      const double a = std::floor(x);
      const std::int64_t ai = static_cast<std::int64_t>(a);
      const std::int64_t p2 = ai * p1 + p0, q2 = ai * q1 + q0;
      if (q2 > kMaxDenominator) break;
      p0 = p1; q0 = q1; p1 = p2; q1 = q2;
      if (std::abs(r - static_cast<double>(p1) / static_cast<double>(q1)) <= kTol * std::max(1.0, std::abs(r))) {
        found = true;
        break;
      }
      const double frac = x - a;
      if (frac < 1e-15) break;
      x = 1.0 / frac;
    }
    if (!found) throw Error(Errc::NoCommonSpan, "log-atoms are not commensurable");
    fracs.emplace_back(p1, q1);
    lcm = std::lcm(lcm, q1);
    if (lcm > kMaxDenominator) throw Error(Errc::NoCommonSpan, "common grid too fine");
  }
  std::int64_t g = 0;
  for (const auto& [p, q] : fracs) {
    const std::int64_t idx = p * (lcm / q);
    if (std::abs(idx) > kMaxIndex) throw Error(Errc::NoCommonSpan, "lattice indices too large");
    g = std::gcd(g, idx);
  }
  return base * static_cast<double>(g) / static_cast<double>(lcm);
}

ArithmeticLaw convolve(const ArithmeticLaw& f, const ArithmeticLaw& g) {
  if (std::abs(f.span() - g.span()) > 1e-12 * f.span())
    throw Error(Errc::SpanMismatch, "convolution needs equal spans");
  if (f.zero_atom() > 0.0 || g.zero_atom() > 0.0)
    throw Error(Errc::ZeroAtomPresent, "convolution is defined on proper lattice laws");
  if (!f.has_finite_support() || !g.has_finite_support())
    throw Error(Errc::InvalidArgument, "convolution of generator laws needs an explicit truncation");
  auto out = convolve(std::span<const double>(f.dense_masses()), std::span<const double>(g.dense_masses()));
  for (double& m : out) m = std::max(m, 0.0);
  return ArithmeticLaw::from_dense(f.span(), f.dense_offset() + g.dense_offset(), std::move(out), 0.0,
                                   std::nullopt, SpanCheck::Relaxed);
}

double mellin_moment(const ArithmeticLaw& law, double s) {
  if (s == 0.0) return 1.0;
  if (s < 0.0) throw Error(Errc::InvalidArgument, "mellin_moment needs s >= 0");
  return law.exponential_moment(s);
}

SubexpDiagnostic subexp_diagnostic(const ArithmeticLaw& law, std::int64_t n_max) {
  if (n_max < 10) throw Error(Errc::InvalidArgument, "subexp_diagnostic needs n_max >= 10");
  const std::int64_t lo = law.min_index();
  const std::int64_t n0 = std::max<std::int64_t>(1, lo);
  if (n0 >= n_max) throw Error(Errc::InvalidArgument, "n_max below the support");
  const auto p = law.masses(lo, n_max + 1);
  const auto at = [&](std::int64_t k) { return p[static_cast<std::size_t>(k - lo)]; };
  // p*2 at n sits at position n - 2 lo of the self-convolution
  const auto sq = convolve_head(p, p, static_cast<std::size_t>(n_max - 2 * lo + 1));

  SubexpDiagnostic d;
  const std::int64_t decade_start = n_max - n_max / 10;
  std::vector<double> suffix_max(static_cast<std::size_t>(n_max - n0 + 2), 0.0);
  for (std::int64_t n = n_max + 1; n >= n0; --n) {
    const double v = at(n);
    const std::size_t i = static_cast<std::size_t>(n - n0);
    suffix_max[i] = (n == n_max + 1) ? v : std::max(v, suffix_max[i + 1]);
  }
  for (std::int64_t n = n0; n <= n_max; ++n) {
    const double pn = at(n);
    if (!(pn > 0.0)) throw Error(Errc::ZeroMassTail, "p_n = 0 at n = " + std::to_string(n));
    const double sq_n = sq[static_cast<std::size_t>(n - 2 * lo)];
    SubexpRow row{n, at(n + 1) / pn, sq_n / (2.0 * pn)};
    if (n >= decade_start) {
      d.max_next_dev = std::max(d.max_next_dev, std::abs(row.next_ratio - 1.0));
      d.max_square_dev = std::max(d.max_square_dev, std::abs(row.square_ratio - 1.0));
      d.sup_ratio = std::max(d.sup_ratio, suffix_max[static_cast<std::size_t>(n - n0)] / pn);
    }
    d.rows.push_back(row);
  }
  return d;
}

nlohmann::json to_json(const ArithmeticLaw& law) {
  nlohmann::json j;
  j["span_h"] = law.span();
  j["zero_atom"] = law.zero_atom();
  auto atoms = nlohmann::json::array();
  const auto& d = law.dense_masses();
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d[i] > 0.0) atoms.push_back({law.dense_offset() + static_cast<std::int64_t>(i), d[i]});
  j["atoms"] = atoms;
  if (const auto& g = law.generator()) {
    if (const auto* p = std::get_if<PowerTail>(&*g))
      j["generator"] = {{"kind", "power"},
                        {"params", {{"exponent", p->exponent}, {"k_min", p->k_min},
                                    {"weight", p->weight}, {"decay", p->decay}}}};
    else {
      const auto& q = std::get<GeometricTail>(*g);
      j["generator"] = {{"kind", "geometric"},
                        {"params", {{"ratio", q.ratio}, {"k_min", q.k_min}, {"weight", q.weight}}}};
    }
  }
  return j;
}

ArithmeticLaw law_from_json(const nlohmann::json& j) {
  try {
    const double h = j.at("span_h").get<double>();
    const double zero = j.value("zero_atom", 0.0);
    std::map<std::int64_t, double> atoms;
    if (j.contains("atoms"))
      for (const auto& a : j.at("atoms")) atoms[a.at(0).get<std::int64_t>()] += a.at(1).get<double>();
    std::optional<Generator> gen;
    if (j.contains("generator")) {
      const auto& g = j.at("generator");
      const auto kind = g.at("kind").get<std::string>();
      const auto& p = g.at("params");
      if (kind == "power")
        gen = PowerTail{p.at("exponent").get<double>(), p.value("k_min", std::int64_t{1}),
                        p.value("weight", 1.0), p.value("decay", 0.0)};
      else if (kind == "geometric")
        gen = GeometricTail{p.at("ratio").get<double>(), p.value("k_min", std::int64_t{0}),
                            p.value("weight", 1.0)};
      else
        throw Error(Errc::ConfigError, "unknown generator kind '" + kind + "'");
    }
    const bool strict = j.value("strict_span", true);
    return ArithmeticLaw(h, atoms, zero, gen, strict ? SpanCheck::Strict : SpanCheck::Relaxed);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ConfigError, std::string("law JSON: ") + e.what());
  }
}

}  // namespace latren
