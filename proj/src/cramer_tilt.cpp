#include "latren/cramer_tilt.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "latren/error.hpp"
#include "latren/series.hpp"

namespace latren {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool negative_drift(const ArithmeticLaw& law) {
  if (law.zero_atom() > 0.0) return true;  // log 0 = -inf
  const double m = law.lattice_mean();
  return std::isfinite(m) && m < 0.0;
}

std::vector<double> scaled_dense(const ArithmeticLaw& law, double kappa) {
  std::vector<double> out = law.dense_masses();
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] *= std::exp(kappa * static_cast<double>(law.dense_offset() + static_cast<std::int64_t>(i)) * law.span());
  return out;
}

// Generator whose masses are e^{kappa k h} times those of g.
Generator scaled_generator(const Generator& g, double kappa, double h) {
  if (const auto* p = std::get_if<PowerTail>(&g)) {
    PowerTail out = *p;
    out.decay = p->decay - kappa;
    return out;
  }
  const auto& q = std::get<GeometricTail>(g);
  GeometricTail out = q;
  out.ratio = q.ratio * std::exp(kappa * h);
  out.weight = q.weight * (1.0 - q.ratio) * std::exp(kappa * static_cast<double>(q.k_min) * h) / (1.0 - out.ratio);
  return out;
}

Generator rescaled(Generator g, double factor) {
  std::visit([&](auto& x) { x.weight *= factor; }, g);
  return g;
}

}  // namespace

std::string regime_name(const Regime& r) {
  if (std::holds_alternative<FiniteMean>(r)) return "finite-mean";
  if (std::holds_alternative<InfiniteMeanRegVar>(r)) return "infinite-mean-regvar";
  return "defective";
}

double find_moment_abscissa(const ArithmeticLaw& law, double s_max) {
  if (std::isfinite(law.exponential_moment(s_max))) return kInf;
  double lo = 0.0, hi = s_max;
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    (std::isfinite(law.exponential_moment(mid)) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

KappaSolution solve_kappa(const ArithmeticLaw& law, double s_max) {
  if (!negative_drift(law)) throw Error(Errc::PositiveDrift, "E log A >= 0");
  if (!(s_max > 0.0)) throw Error(Errc::InvalidArgument, "s_max must be positive");

  double upper = s_max;
  const double s_star = find_moment_abscissa(law, s_max);
  if (std::isfinite(s_star)) {
    // the bisection only locates the jump; the generator knows it exactly
    const double exact = law.moment_abscissa();
    const double s_abs = std::abs(exact - s_star) <= 1e-8 ? exact : s_star;
    const double m_star = law.exponential_moment(s_abs);
    if (std::isfinite(m_star)) {
      if (std::abs(m_star - 1.0) <= 1e-12) return {s_abs, false, 1.0};
      if (m_star < 1.0) return {s_abs, true, m_star};
    }
    upper = s_abs;
  } else if (law.exponential_moment(s_max) < 1.0) {
    throw Error(Errc::NoCramerRoot, "E A^s < 1 on (0, s_max]");
  }

  // M(s) < 1 just right of 0 (negative drift) and M(upper) >= 1 (infinite counts as >= 1)
  // bisect down to adjacent doubles
  double lo = 0.0, hi = upper;
  for (int it = 0; it < 2100; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (law.exponential_moment(mid) >= 1.0 ? hi : lo) = mid;
  }
  return {0.5 * (lo + hi), false, 1.0};
}

ArithmeticLaw tilt(const ArithmeticLaw& law, double kappa) {
  const double m = kappa == 0.0 ? law.lattice_mass() : law.exponential_moment(kappa);
  if (!std::isfinite(m)) throw Error(Errc::DivergentTilt, "E A^kappa diverges");
  auto dense = scaled_dense(law, kappa);
  std::optional<Generator> gen;
  if (law.generator()) gen = scaled_generator(*law.generator(), kappa, law.span());
  // m = 1 up to root-finding error in the proper case; dividing keeps the mass exact
  for (double& x : dense) x /= m;
  if (gen) gen = rescaled(*gen, 1.0 / m);
  return ArithmeticLaw::from_dense(law.span(), law.dense_offset(), std::move(dense), 0.0, gen,
                                   SpanCheck::Relaxed);
}

ArithmeticLaw invert_tilt(const ArithmeticLaw& f_kappa, double kappa) {
  if (f_kappa.zero_atom() > 0.0) throw Error(Errc::ZeroAtomPresent, "tilted law has no A = 0 atom");
  auto dense = scaled_dense(f_kappa, -kappa);
  long double s = 0.0L;
  for (double x : dense) s += x;
  std::optional<Generator> gen;
  if (f_kappa.generator()) {
    gen = scaled_generator(*f_kappa.generator(), -kappa, f_kappa.span());
    if (const auto* p = std::get_if<PowerTail>(&*gen))
      s += p->weight * power_exp_sum(p->exponent, p->decay * f_kappa.span(), p->k_min) /
           hurwitz_zeta(p->exponent, p->k_min);
    else
      s += std::get<GeometricTail>(*gen).weight;
  }
  const double total = static_cast<double>(s);
  if (total > 1.0 + 1e-12)
    throw Error(Errc::MassExceedsOne, "sum e^{-kappa k h} f[k] = " + std::to_string(total) + " > 1");
  return ArithmeticLaw::from_dense(f_kappa.span(), f_kappa.dense_offset(), std::move(dense),
                                   std::max(0.0, 1.0 - total), gen, SpanCheck::Relaxed);
}

double truncated_mean_m(const ArithmeticLaw& f_kappa, double x) {
  if (x < 0.0) throw Error(Errc::InvalidArgument, "truncated mean needs x >= 0");
  const double h = f_kappa.span();
  const auto big_j = static_cast<std::int64_t>(std::floor(x / h));
  long double acc = 0.0L;
  for (std::int64_t j = 0; j < big_j; ++j) acc += f_kappa.tail_above(j);
  return static_cast<double>(h * acc + (x - static_cast<double>(big_j) * h) * f_kappa.tail_above(big_j));
}

std::vector<double> truncated_mean_table(const ArithmeticLaw& f_kappa, std::int64_t n_max) {
  std::vector<double> out(static_cast<std::size_t>(std::max<std::int64_t>(n_max, 0) + 1), 0.0);
  long double acc = 0.0L;
  for (std::int64_t n = 1; n <= n_max; ++n) {
    acc += f_kappa.tail_above(n - 1);
    out[static_cast<std::size_t>(n)] = static_cast<double>(f_kappa.span() * acc);
  }
  return out;
}

double c_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw Error(Errc::InvalidArgument, "alpha must lie in (0,1]");
  if (alpha == 1.0) return 1.0;
  return std::sin(alpha * std::numbers::pi) / ((1.0 - alpha) * std::numbers::pi);
}

CramerInfo analyze(const ArithmeticLaw& law, double s_max, const RegimeHint& hint) {
  const auto sol = solve_kappa(law, s_max);
  ArithmeticLaw tilted = tilt(law, sol.kappa);
  const double mean = tilted.lattice_mean();
  if (sol.defective)
    return CramerInfo{sol.kappa, sol.theta * mean, Defective{sol.theta}, std::move(tilted)};
  if (std::isfinite(mean)) {
    if (!(mean > 0.0)) throw Error(Errc::InvalidLaw, "tilted mean is not positive");
    return CramerInfo{sol.kappa, mean, FiniteMean{}, std::move(tilted)};
  }
  InfiniteMeanRegVar reg;
  reg.slowly_varying = hint.slowly_varying;
  if (hint.alpha) {
    reg.alpha = *hint.alpha;
  } else if (const auto* p = tilted.generator() ? std::get_if<PowerTail>(&*tilted.generator()) : nullptr) {
    reg.alpha = p->exponent - 1.0;
  } else {
    throw Error(Errc::WrongRegime, "infinite mean without a tail index");
  }
  if (!(reg.alpha > 0.0 && reg.alpha <= 1.0))
    throw Error(Errc::WrongRegime, "tail index outside (0,1] for an infinite mean");
  return CramerInfo{sol.kappa, kInf, reg, std::move(tilted)};
}

DoneyReport doney_diagnostic(const ArithmeticLaw& f_kappa, double alpha, const std::vector<std::int64_t>& n_grid,
                             const std::vector<double>& delta_grid) {
  if (alpha > 0.5) throw Error(Errc::WrongRegime, "condition holds automatically for alpha > 1/2");
  const double h = f_kappa.span();
  DoneyReport rep;
  std::int64_t n_top = 0;
  for (auto n : n_grid) n_top = std::max(n_top, n);
  std::vector<double> tail(static_cast<std::size_t>(n_top + 1));
  for (std::int64_t j = 0; j <= n_top; ++j) tail[static_cast<std::size_t>(j)] = f_kappa.tail_above(j);
  const auto f = f_kappa.masses(0, n_top);

  for (double delta : delta_grid) {
    std::vector<double> values;
    for (auto n : n_grid) {
      const double tn = tail[static_cast<std::size_t>(n)];
      if (n < 1 || !(tn > 0.0)) continue;  // no tail mass at x: excluded
      long double sum = 0.0L;
      const auto j_max = static_cast<std::int64_t>(std::floor(delta * static_cast<double>(n)));
      for (std::int64_t j = 1; j <= j_max; ++j) {
        const double tj = tail[static_cast<std::size_t>(j)];
        if (tj > 0.0) sum += f[static_cast<std::size_t>(n - j)] / (static_cast<double>(j) * h * tj * tj);
      }
      const double v = static_cast<double>(n) * h * tn * static_cast<double>(sum);
      rep.rows.push_back({n, delta, v});
      values.push_back(v);
    }
    double upper_max = 0.0;
    for (std::size_t i = values.size() / 2; i < values.size(); ++i) upper_max = std::max(upper_max, values[i]);
    rep.tail_trend.emplace_back(values.empty() ? 0.0 : values.back(), upper_max);
  }
  return rep;
}

nlohmann::json to_json(const CramerInfo& info) {
  nlohmann::json j;
  j["kappa"] = info.kappa;
  j["mu"] = std::isfinite(info.mu) ? nlohmann::json(info.mu) : nlohmann::json("inf");
  nlohmann::json r;
  r["kind"] = regime_name(info.regime);
  if (const auto* im = std::get_if<InfiniteMeanRegVar>(&info.regime)) {
    r["alpha"] = im->alpha;
    r["slowly_varying"] = im->slowly_varying;
  } else if (const auto* d = std::get_if<Defective>(&info.regime)) {
    r["theta"] = d->theta;
  }
  j["regime"] = r;
  j["tilted"] = to_json(info.tilted);
  return j;
}

}  // namespace latren
