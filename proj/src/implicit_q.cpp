#include "latren/implicit_q.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "latren/error.hpp"
#include "latren/series.hpp"

namespace latren {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

PsiFunction::PsiFunction(TailFunction tail, ArithmeticLaw law_a, double kappa)
    : tail_(std::move(tail)), law_(std::move(law_a)), kappa_(kappa) {
  if (!(kappa > 0.0)) throw Error(Errc::InvalidArgument, "kappa must be positive");
}

double PsiFunction::at_exp(double y) const {
  const double h = law_.span();
  long double shifted = 0.0L;  // P{AX > y}; the A = 0 atom contributes nothing
  const auto& d = law_.dense_masses();
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d[i] > 0.0) shifted += d[i] * tail_(y * lattice_power(-(law_.dense_offset() + static_cast<std::int64_t>(i)), h));
  if (law_.generator()) {
    const std::int64_t k0 = std::visit([](const auto& g) { return g.k_min; }, *law_.generator());
    for (std::int64_t k = k0;; ++k) {
      const double t = tail_(y * lattice_power(-k, h));
      shifted += law_.generator_mass(k) * t;
      // the mass beyond k sits at smaller arguments, so its contribution lies in [rest * t, rest]
      const double rest = law_.generator_tail_from(k + 1);
      if (rest * (1.0 - t) <= 1e-17 * static_cast<double>(shifted) || rest < 1e-300 || k - k0 > 1000000) {
        shifted += rest * t;
        break;
      }
    }
  }
  return std::pow(y, kappa_) * static_cast<double>(tail_(y) - shifted);
}

std::vector<double> PsiFunction::tabulate(const std::vector<double>& xs) const {
  std::vector<double> out;
  out.reserve(xs.size());
  for (double x : xs) out.push_back((*this)(x));
  return out;
}

std::string to_string(NormalizerKind k) {
  switch (k) {
    case NormalizerKind::Unit: return "unit";
    case NormalizerKind::TruncatedMean: return "truncated_mean";
    case NormalizerKind::DefectiveMass: return "defective_mass";
  }
  return "?";
}

std::pair<double, double> PeriodicQ::bounds_at(double z) const {
  if (x.empty()) throw Error(Errc::InvalidArgument, "empty q grid");
  z = lattice_split(z, span_h).second;
  const double eh = std::exp(span_h);
  const auto g = [&](double xi, double qi) { return qi * std::pow(xi, -kappa); };
  const auto it = std::upper_bound(x.begin(), x.end(), z);
  double g_up, g_lo;
  if (it == x.begin()) {
    g_up = g(x.back() / eh, q.back());
    g_lo = g(x.front(), q.front());
  } else if (it == x.end()) {
    g_up = g(x.back(), q.back());
    g_lo = g(x.front() * eh, q.front());
  } else {
    const auto i = static_cast<std::size_t>(it - x.begin());
    g_up = g(x[i - 1], q[i - 1]);
    g_lo = g(x[i], q[i]);
  }
  const double zk = std::pow(z, kappa);
  return {zk * g_lo, zk * g_up};
}

Table PeriodicQ::to_table() const {
  Table t({"x", "q", "normalizer_kind", "trunc_error"});
  for (std::size_t i = 0; i < x.size(); ++i) t.add({x[i], q[i], to_string(normalizer), trunc_error[i]});
  return t;
}

std::vector<double> jittered_grid(double h, std::size_t n) {
  std::vector<double> out;
  const double jitter = 1.0 / std::sqrt(5.0);
  for (std::size_t i = 0; i < n; ++i) out.push_back(std::exp(h * (static_cast<double>(i) + jitter) / static_cast<double>(n)));
  return out;
}

std::vector<ClassQViolation> class_q_violations(const PeriodicQ& p, double rel_tol) {
  std::vector<ClassQViolation> out;
  const std::size_t n = p.x.size();
  const auto g = [&](std::size_t i, double scale) { return p.q[i] * std::pow(p.x[i] * scale, -p.kappa); };
  const auto ge = [&](std::size_t i, double scale) {
    return (i < p.trunc_error.size() ? p.trunc_error[i] : 0.0) * std::pow(p.x[i] * scale, -p.kappa);
  };
  for (std::size_t i = 0; i < n; ++i) {
    const double err = i < p.trunc_error.size() ? p.trunc_error[i] : 0.0;
    if (p.q[i] < -err) out.push_back({i, "negative q"});
    if (!std::isfinite(p.q[i])) out.push_back({i, "non-finite q"});
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double a = g(i, 1.0), b = g(i + 1, 1.0);
    if (b > a + rel_tol * std::max(std::abs(a), std::abs(b)) + ge(i, 1.0) + ge(i + 1, 1.0))
      out.push_back({i + 1, "y^-kappa q(y) increases"});
  }
  if (n > 0) {
    const double last = g(n - 1, 1.0), wrapped = g(0, std::exp(p.span_h));
    if (wrapped > last + rel_tol * std::max(std::abs(last), std::abs(wrapped)) + ge(n - 1, 1.0) + ge(0, std::exp(p.span_h)))
      out.push_back({0, "y^-kappa q(y) increases across the seam"});
  }
  return out;
}

PeriodicQ q_from_psi(const PsiFunction& psi, double mu, const std::vector<double>& x_grid, std::int64_t j_limit) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw Error(Errc::WrongRegime, "q_from_psi needs a finite positive mean");
  const double h = psi.span();
  PeriodicQ out;
  out.kappa = psi.kappa();
  out.span_h = h;
  out.normalizer = NormalizerKind::Unit;
  out.label = "q_from_psi";
  for (double x : x_grid) {
    long double sum = psi.at_exp(x);
    double tail_err = 0.0;
    for (int dir : {+1, -1}) {
      int quiet = 0;
      double quiet_abs = 0.0;  // magnitude of the run of small terms that ended the sum
      for (std::int64_t j = dir;; j += dir) {
        if (std::abs(j) > j_limit) throw Error(Errc::SumDivergence, "partial sums of psi do not settle");
        const double t = psi.at_exp(x * lattice_power(j, h));
        sum += t;
        const bool small = std::abs(t) < 1e-12 * (std::abs(static_cast<double>(sum)) + 1e-300);
        quiet = small ? quiet + 1 : 0;
        quiet_abs = small ? quiet_abs + std::abs(t) : 0.0;
        if (quiet >= 20) break;
      }
      tail_err += quiet_abs;
    }
    out.x.push_back(x);
    out.q.push_back(h / mu * static_cast<double>(sum));
    out.trunc_error.push_back(h / mu * tail_err);
  }
  return out;
}

QuadResult smooth_hat(const std::function<double(double)>& g, double s, double tol, double t_max) {
  return adaptive_simpson([&](double t) { return std::exp(-t) * g(s - t); }, 0.0, t_max, tol);
}

QuadResult smoothing_c(const PsiFunction& psi, double mu, double s, double tol) {
  const double h = psi.span();
  QuadResult total;
  // piece m covers y in [s - (m+1)h, s - mh], where the kernel is e^{-(s - y - m h)}
  const auto piece = [&](std::int64_t m) {
    const double a = s - static_cast<double>(m + 1) * h, b = s - static_cast<double>(m) * h;
    const auto f = [&](double y) { return std::exp(-(s - y - static_cast<double>(m) * h)) * psi(y); };
    // split at lattice points jh, where lattice oracle tails make psi jump
    QuadResult r;
    double lo = a;
    const double cut = std::ceil(a / h) * h;
    if (cut > a && cut < b) {
      r = adaptive_simpson(f, a, cut, tol);
      lo = cut;
    }
    const auto r2 = adaptive_simpson(f, lo, b, tol);
    r.value += r2.value;
    r.error += r2.error;
    return r;
  };
  for (int dir : {+1, -1}) {
    int quiet = 0;
    for (std::int64_t step = 0;; ++step) {
      const std::int64_t m = dir > 0 ? step : -1 - step;
      const auto r = piece(m);
      total.value += r.value;
      total.error += r.error;
      quiet = std::abs(r.value) <= 1e-17 * (std::abs(total.value) + 1e-300) ? quiet + 1 : 0;
      if (quiet >= 5 && step >= 8) break;
      if (step > 4000) throw Error(Errc::QuadratureDivergence, "C(s) integral does not settle");
    }
  }
  const double c = h / mu / (1.0 - std::exp(-h));
  return {c * total.value, c * total.error};
}

PeriodicQ q_from_smoothing(const PsiFunction& psi, double mu, const std::vector<double>& x_grid, double rel_width) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw Error(Errc::WrongRegime, "q_from_smoothing needs a finite positive mean");
  const double h = psi.span();
  if (rel_width <= 0.0) rel_width = 1e-3 * h;
  PeriodicQ out;
  out.kappa = psi.kappa();
  out.span_h = h;
  out.normalizer = NormalizerKind::Unit;
  out.label = "q_from_smoothing";
  for (double y : x_grid) {
    const double v1 = y * (1.0 - 0.5 * rel_width), v2 = y * (1.0 + 0.5 * rel_width);
    const auto c1 = smoothing_c(psi, mu, std::log(v1));
    const auto c2 = smoothing_c(psi, mu, std::log(v2));
    const double dv = v2 - v1;
    out.x.push_back(y);
    out.q.push_back((v2 * c2.value - v1 * c1.value) / dv);
    out.trunc_error.push_back((v2 * c2.error + v1 * c1.error) / dv);
  }
  return out;
}

TailQResult q_from_tail(const TailFunction& tail, double kappa, double h, NormalizerKind kind,
                        const std::function<double(std::int64_t)>& normalizer, const std::vector<double>& x_grid,
                        std::int64_t n_from, std::int64_t n_to, bool allow_sparse) {
  if (n_to < n_from) throw Error(Errc::InvalidArgument, "empty n range");
  TailQResult out;
  std::vector<double> prev;
  for (std::int64_t n = n_from; n <= n_to; ++n) {
    const double en = lattice_power(n, h);
    const double scale = normalizer(n) * std::pow(en, kappa);
    std::vector<double> row;
    std::size_t min_exc = std::numeric_limits<std::size_t>::max();
    for (double x : x_grid) {
      const double arg = x * en;
      const double v = scale * std::pow(x, kappa) * tail(arg);
      const std::size_t exc = tail.is_empirical() ? tail.exceedances(arg) : 0;
      min_exc = std::min(min_exc, exc);
      out.table.push_back({n, x, v, exc});
      row.push_back(v);
    }
    out.min_exceedances.push_back(tail.is_empirical() ? min_exc : 0);
    if (!prev.empty()) {
      double ch = 0.0;
      for (std::size_t i = 0; i < row.size(); ++i) ch = std::max(ch, std::abs(row[i] - prev[i]));
      out.max_step_change.push_back(ch);
    }
    prev = std::move(row);
  }
  if (tail.is_empirical() && !allow_sparse && out.min_exceedances.back() < 100)
    throw Error(Errc::InsufficientTailSamples,
                "only " + std::to_string(out.min_exceedances.back()) + " exceedances at n = " + std::to_string(n_to));

  out.q.kappa = kappa;
  out.q.span_h = h;
  out.q.normalizer = kind;
  out.q.label = "q_from_tail";
  const double en = lattice_power(n_to, h);
  const double scale = normalizer(n_to) * std::pow(en, kappa);
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    const double x = x_grid[i];
    out.q.x.push_back(x);
    out.q.q.push_back(prev[i]);
    double err = 0.0;
    if (tail.is_empirical()) err = 3.0 * scale * std::pow(x, kappa) * tail.standard_error(x * en);
    out.q.trunc_error.push_back(err);
  }
  return out;
}

SandwichReport extend_bounds(const PeriodicQ& q, const TailFunction& tail, const std::vector<double>& x_seq,
                             double tol) {
  SandwichReport rep;
  for (double x : x_seq) {
    const double z = lattice_split(x, q.span_h).second;
    const double v = std::pow(x, q.kappa) * tail(x);
    const auto [lo, up] = q.bounds_at(z);
    const bool inside = lo - tol <= v && v <= up + tol;
    rep.rows.push_back({x, z, v, lo, up, inside});
    if (!inside) ++rep.outside;
  }
  return rep;
}

ConditionReport check_conditions(const PsiFunction& psi, ConditionMode mode, double x_lo, double x_hi, double delta) {
  if (!(x_hi > x_lo)) throw Error(Errc::InvalidArgument, "empty truncation range");
  ConditionReport r;
  r.mode = mode;
  r.delta = delta;
  r.x_lo = x_lo;
  r.x_hi = x_hi;
  const double h = psi.span();
  const double tenth = 0.1 * (x_hi - x_lo);

  if (mode == ConditionMode::Sum) {
    // sup over x in [0,h) of sum_j |psi(x + jh)|, j covering the range
    const auto j_lo = static_cast<std::int64_t>(std::floor(x_lo / h));
    const auto j_hi = static_cast<std::int64_t>(std::ceil(x_hi / h));
    for (double x : jittered_grid(h, 32)) {
      const double base = std::log(x);
      double total = 0.0, low = 0.0, high = 0.0;
      for (std::int64_t j = j_lo; j <= j_hi; ++j) {
        const double pt = base + static_cast<double>(j) * h;
        const double t = std::abs(psi(pt));
        total += t;
        if (pt < x_lo + tenth) low += t;
        if (pt > x_hi - tenth) high += t;
      }
      if (total > r.value) {
        r.value = total;
        r.low_end = low;
        r.high_end = high;
      }
    }
    return r;
  }

  const auto integrand = [&](double x) {
    const double w = mode == ConditionMode::DeltaIntegral ? std::exp(delta * x) : 1.0;
    return w * std::abs(psi(x));
  };
  const double cell = h / 8.0;
  for (double a = x_lo; a < x_hi; a += cell) {
    const double b = std::min(a + cell, x_hi);
    const auto q = adaptive_simpson(integrand, a, b, 1e-13, 40);
    r.value += q.value;
    if (b <= x_lo + tenth + 1e-12) r.low_end += q.value;
    if (a >= x_hi - tenth - 1e-12) r.high_end += q.value;
  }
  return r;
}

nlohmann::json to_json(const ConditionReport& r) {
  const char* mode = r.mode == ConditionMode::Integral ? "integral" : r.mode == ConditionMode::Sum ? "sum" : "delta_integral";
  return {{"mode", mode},     {"delta", r.delta},       {"x_lo", r.x_lo},         {"x_hi", r.x_hi},
          {"value", r.value}, {"low_end", r.low_end},   {"high_end", r.high_end}, {"looks_finite", r.looks_finite()}};
}

}  // namespace latren
