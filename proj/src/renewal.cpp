#include "latren/renewal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "latren/cramer_tilt.hpp"
#include "latren/error.hpp"

namespace latren {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// c[k] = (a * b)[k] for k in [c_lo, c_hi], where a starts at index a_lo and b at b_lo.
std::vector<double> clipped_convolution(const std::vector<double>& a, std::int64_t a_lo, const std::vector<double>& b,
                                        std::int64_t b_lo, std::int64_t c_lo, std::int64_t c_hi,
                                        ConvolutionMethod method) {
  std::vector<double> out(static_cast<std::size_t>(c_hi - c_lo + 1), 0.0);
  const std::int64_t base = a_lo + b_lo;
  if (c_hi < base) return out;
  const auto keep = static_cast<std::size_t>(c_hi - base + 1);
  const auto full = convolve_head(a, b, keep, method);
  for (std::int64_t k = std::max(c_lo, base); k <= c_hi; ++k) {
    const auto i = static_cast<std::size_t>(k - base);
    if (i < full.size()) out[static_cast<std::size_t>(k - c_lo)] = std::max(full[i], 0.0);
  }
  return out;
}

// gamma = sup{lambda >= 0 : theta phi(lambda) <= 1}, phi(lambda) = E e^{-lambda L}.
double lundberg_exponent(const ArithmeticLaw& f, double theta) {
  if (f.min_index() >= 0) return kInf;
  const double h = f.span();
  const auto tp = [&](double lam) { return theta * f.exponential_moment(-lam); };
  double hi = 1.0 / h;
  while (tp(hi) <= 1.0) {
    hi *= 2.0;
    if (hi > 1e6 / h) return kInf;
  }
  double lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (tp(mid) <= 1.0 ? lo : hi) = mid;
  }
  return lo;
}

// log of sup-bounds: log[e^{lambda n h} (theta phi)^M / (1 - theta phi)] over a lambda grid.
struct ChernoffGrid {
  std::vector<double> lambda, log_tp, log_denom;

  ChernoffGrid(const ArithmeticLaw& f, double theta, double gamma) {
    const double h = f.span();
    if (theta < 1.0) add(0.0, std::log(theta), std::log1p(-theta));
    const double cap = std::min(gamma, 60.0 / h);
    for (int i = 0; i <= 400; ++i) {
      const double lam = cap * std::pow(1e-7, 1.0 - i / 400.0);
      const double tp = theta * f.exponential_moment(-lam);
      if (tp < 1.0 && tp > 0.0) add(lam * h, std::log(tp), std::log1p(-tp));
    }
  }
  void add(double lh, double ltp, double ld) {
    lambda.push_back(lh);
    log_tp.push_back(ltp);
    log_denom.push_back(ld);
  }
  // bound on sum_{m >= M} theta^m P(S_m <= n h); lambda stored as lambda*h
  double bound(std::int64_t n, double big_m) const {
    double best = kInf;
    for (std::size_t i = 0; i < lambda.size(); ++i) {
      const double lg = lambda[i] * static_cast<double>(n) + big_m * log_tp[i] - log_denom[i];
      best = std::min(best, lg);
    }
    return std::isfinite(best) ? std::exp(best) : kInf;
  }
};

}  // namespace

std::int64_t default_window_lo(double kappa, double h) {
  return -static_cast<std::int64_t>(std::ceil(40.0 / (kappa * h)));
}

RenewalSequence renewal_sequence(const ArithmeticLaw& f, double theta, std::int64_t n_lo, std::int64_t n_hi,
                                 const RenewalOptions& opt) {
  if (f.zero_atom() > 0.0) throw Error(Errc::ZeroAtomPresent, "renewal kernel must be a proper lattice law");
  if (!(theta > 0.0 && theta <= 1.0)) throw Error(Errc::InvalidArgument, "theta must lie in (0,1]");
  if (n_hi < n_lo) throw Error(Errc::InvalidArgument, "empty window");
  if (theta == 1.0 && !(f.lattice_mean() > 0.0))
    throw Error(Errc::NonconvergentU, "proper kernel with nonpositive drift");

  const double h = f.span();
  const double gamma = lundberg_exponent(f, theta);
  std::int64_t pad = 0;
  if (std::isfinite(gamma)) {
    if (!(gamma > 0.0)) throw Error(Errc::NonconvergentU, "no exponential moment on the left tail");
    pad = static_cast<std::int64_t>(std::ceil((std::log(1.0 / opt.tol) + 5.0) / (gamma * h)));
  }
  const bool one_sided = f.min_index() >= 0;
  const std::int64_t w_lo = std::min<std::int64_t>(0, n_lo) - pad;
  const std::int64_t w_hi = std::max<std::int64_t>(0, n_hi) + pad;
  const std::int64_t w_len = w_hi - w_lo + 1;
  if (w_len > opt.max_window) throw Error(Errc::WindowTooWide, "window of " + std::to_string(w_len) + " cells");
  const std::int64_t d_lo = one_sided ? 0 : w_lo - w_hi;
  const std::int64_t d_hi = w_hi - w_lo;

  std::vector<double> acc(static_cast<std::size_t>(w_len), 0.0);
  acc[static_cast<std::size_t>(-w_lo)] = 1.0;
  auto gp = f.masses(d_lo, d_hi);
  for (double& x : gp) x *= theta;

  const ChernoffGrid chernoff(f, theta, gamma);
  const std::int64_t n_ref = std::max<std::int64_t>(n_hi, 0);
  double big_m = 1.0;
  bool done = false;
  for (int level = 0; level < opt.max_levels; ++level) {
    const auto add = clipped_convolution(acc, w_lo, gp, d_lo, w_lo, w_hi, opt.method);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += add[i];
    big_m *= 2.0;
    if (chernoff.bound(n_ref, big_m) <= opt.tol) {
      done = true;
      break;
    }
    gp = clipped_convolution(gp, d_lo, gp, d_lo, d_lo, d_hi, opt.method);
    if (std::all_of(gp.begin(), gp.end(), [](double x) { return x == 0.0; })) {
      // every longer path has left the window; only the leak bound remains
      done = true;
      big_m = kInf;
      break;
    }
  }
  if (!done) throw Error(Errc::WindowTooWide, "remainder bound above tolerance after the level cap");

  RenewalSequence out;
  out.span_h = h;
  out.n_lo = n_lo;
  out.n_hi = n_hi;
  out.defect_theta = theta;
  out.pad = pad;
  out.terms = std::isfinite(big_m) ? static_cast<std::int64_t>(big_m) : -1;
  const double u_max = *std::max_element(acc.begin(), acc.end()) + opt.tol;
  out.leak_bound = one_sided ? 0.0 : 2.0 * std::exp(-gamma * h * static_cast<double>(pad)) * u_max;
  for (std::int64_t n = n_lo; n <= n_hi; ++n) {
    out.u.push_back(acc[static_cast<std::size_t>(n - w_lo)]);
    const double rem = std::isfinite(big_m) ? chernoff.bound(n, big_m) : 0.0;
    out.trunc_error.push_back(std::min(rem, 1e300) + out.leak_bound);
  }
  return out;
}

bool ConvergenceReport::decades_decreasing() const {
  for (std::size_t i = 1; i < decades.size(); ++i)
    if (!(decades[i].mean_abs_dev < decades[i - 1].mean_abs_dev)) return false;
  return decades.size() >= 2;
}

namespace {

ConvergenceReport finish_report(std::string kind, double limit, std::vector<ConvergenceRow> rows,
                                std::int64_t band_from, std::int64_t band_to) {
  ConvergenceReport r;
  r.kind = std::move(kind);
  r.limit = limit;
  r.rows = std::move(rows);
  r.band_from = band_from;
  r.band_to = band_to;
  r.band_min = kInf;
  r.band_max = -kInf;
  bool any = false;
  std::int64_t n_top = 0;
  for (const auto& row : r.rows) {
    n_top = std::max(n_top, row.n);
    if (row.n < band_from || row.n > band_to) continue;
    any = true;
    r.band_min = std::min(r.band_min, row.ratio);
    r.band_max = std::max(r.band_max, row.ratio);
  }
  if (!any) throw Error(Errc::InvalidArgument, "report band outside the renewal window");
  for (std::int64_t lo = 10; lo < n_top; lo *= 10) {
    const std::int64_t hi = (lo * 10 >= n_top) ? n_top : lo * 10 - 1;
    double sum = 0.0;
    std::int64_t cnt = 0;
    for (const auto& row : r.rows)
      if (row.n >= lo && row.n <= hi) {
        sum += std::abs(row.ratio - 1.0);
        ++cnt;
      }
    if (cnt > 0) r.decades.push_back({lo, hi, sum / static_cast<double>(cnt)});
  }
  return r;
}

}  // namespace

ConvergenceReport blackwell_check(const RenewalSequence& u, double mu, std::int64_t band_from, std::int64_t band_to) {
  if (u.defect_theta < 1.0 || !std::isfinite(mu) || !(mu > 0.0))
    throw Error(Errc::WrongRegime, "Blackwell check needs a proper finite-mean sequence");
  std::vector<ConvergenceRow> rows;
  const double norm = mu / u.span_h;
  for (std::int64_t n = std::max<std::int64_t>(1, u.n_lo); n <= u.n_hi; ++n)
    rows.push_back({n, u.at(n), norm, u.at(n) * norm, u.error_at(n) * norm});
  return finish_report("blackwell", u.span_h / mu, std::move(rows), band_from, band_to);
}

ConvergenceReport srt_check(const RenewalSequence& u, const ArithmeticLaw& f_kappa, double alpha,
                            std::int64_t band_from, std::int64_t band_to) {
  if (u.defect_theta < 1.0 || !std::isinf(f_kappa.lattice_mean()))
    throw Error(Errc::WrongRegime, "strong renewal check needs a proper infinite-mean sequence");
  const double denom = u.span_h * c_alpha(alpha);
  const auto m = truncated_mean_table(f_kappa, u.n_hi);
  std::vector<ConvergenceRow> rows;
  for (std::int64_t n = std::max<std::int64_t>(1, u.n_lo); n <= u.n_hi; ++n) {
    const double mn = m[static_cast<std::size_t>(n)];
    rows.push_back({n, u.at(n), mn, u.at(n) * mn / denom, u.error_at(n) * mn / denom});
  }
  return finish_report("srt", denom, std::move(rows), band_from, band_to);
}

ConvergenceReport defective_check(const RenewalSequence& u, const ArithmeticLaw& f_kappa, double theta,
                                  std::int64_t band_from, std::int64_t band_to) {
  if (!(theta < 1.0) || std::abs(u.defect_theta - theta) > 1e-12)
    throw Error(Errc::WrongRegime, "defective check needs theta < 1 matching the sequence");
  const double c = theta / ((1.0 - theta) * (1.0 - theta));
  std::vector<ConvergenceRow> rows;
  for (std::int64_t n = std::max<std::int64_t>(1, u.n_lo); n <= u.n_hi; ++n) {
    const double pn = f_kappa.mass(n);
    if (!(pn > 0.0)) continue;
    rows.push_back({n, u.at(n), pn, u.at(n) / (c * pn), u.error_at(n) / (c * pn)});
  }
  return finish_report("defective", c, std::move(rows), band_from, band_to);
}

KeyRenewalResult key_renewal_eval(const std::function<double(std::int64_t)>& z, const RenewalSequence& u,
                                  std::int64_t n, const KeyRenewalLimit& limit) {
  constexpr std::int64_t kScan = 10000000;
  // sum of |z(i)| for i moving away from `start` in direction `dir`, until it settles
  const auto tail_sum = [&](std::int64_t start, int dir) {
    long double s = 0.0L;
    int quiet = 0;
    std::int64_t i = start;
    for (std::int64_t step = 0; step < kScan; ++step, i += dir) {
      const double t = std::abs(z(i));
      s += t;
      quiet = (t <= 1e-13 * static_cast<double>(s) || t == 0.0) ? quiet + 1 : 0;
      if (quiet >= 64) return static_cast<double>(s);
    }
    throw Error(Errc::DecayViolation, "sum of |z(x + jh)| does not settle");
  };

  KeyRenewalResult r;
  long double v = 0.0L;
  for (std::int64_t j = u.n_lo; j <= u.n_hi; ++j) v += z(n - j) * static_cast<long double>(u.at(j));
  r.value = static_cast<double>(v);

  double u_max = 0.0;
  for (double x : u.u) u_max = std::max(u_max, x);
  // j > n_hi  <=>  i = n - j < n - n_hi ;  j < n_lo  <=>  i > n - n_lo
  r.remainder_bound = u_max * (tail_sum(n - u.n_hi - 1, -1) + tail_sum(n - u.n_lo + 1, +1));

  long double zs = z(0);
  for (std::int64_t i = 1;; ++i) {
    const double a = z(i), b = z(-i);
    zs += a + b;
    if ((std::abs(a) + std::abs(b) <= 1e-13 * std::abs(static_cast<double>(zs)) || (a == 0.0 && b == 0.0)) && i > 64)
      break;
    if (i > kScan) throw Error(Errc::DecayViolation, "sum of z(x + jh) does not settle");
  }
  r.z_sum = static_cast<double>(zs);

  const double h = u.span_h;
  if (const auto* fm = std::get_if<FiniteMeanLimit>(&limit)) {
    r.predicted = h / fm->mu * r.z_sum;
  } else if (const auto* im = std::get_if<InfiniteMeanLimit>(&limit)) {
    // O(1/x) prerequisite: |i z(i)| must stay bounded along the scan
    double worst = 0.0;
    for (std::int64_t i = 1; i <= std::max<std::int64_t>(n, 1000); i *= 2)
      worst = std::max(worst, static_cast<double>(i) * std::abs(z(i)));
    if (worst > 1e6 * (std::abs(z(1)) + 1e-300)) throw Error(Errc::DecayViolation, "z is not O(1/x)");
    r.predicted = h * c_alpha(im->alpha) * r.z_sum / im->m_nh;
  } else {
    const auto& d = std::get<DefectiveLimit>(limit);
    if (!(d.p_n > 0.0) || std::abs(z(n)) > 1e-2 * d.p_n)
      throw Error(Errc::DecayViolation, "z(x + nh) is not small against p_n");
    r.predicted = d.theta / ((1.0 - d.theta) * (1.0 - d.theta)) * r.z_sum * d.p_n;
  }
  return r;
}

nlohmann::json summary_json(const RenewalSequence& u) {
  double max_err = 0.0;
  for (double e : u.trunc_error) max_err = std::max(max_err, e);
  return {{"span_h", u.span_h},     {"n_lo", u.n_lo},       {"n_hi", u.n_hi},
          {"defect_theta", u.defect_theta}, {"terms", u.terms}, {"pad", u.pad},
          {"leak_bound", u.leak_bound}, {"max_trunc_error", max_err}};
}

nlohmann::json summary_json(const ConvergenceReport& r) {
  nlohmann::json dec = nlohmann::json::array();
  for (const auto& d : r.decades) dec.push_back({{"from", d.from}, {"to", d.to}, {"mean_abs_dev", d.mean_abs_dev}});
  return {{"kind", r.kind},         {"limit", r.limit},       {"band_from", r.band_from},
          {"band_to", r.band_to},   {"band_min", r.band_min}, {"band_max", r.band_max},
          {"decades", dec},         {"decades_decreasing", r.decades_decreasing()}};
}

}  // namespace latren
