#include "latren/series.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_gamma.h>
#include <gsl/gsl_sf_zeta.h>

#include "latren/error.hpp"

namespace latren {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct GslQuiet {
  GslQuiet() { gsl_set_error_handler_off(); }
};
const GslQuiet gsl_quiet;

// n-th derivative of f(x) = e^{-t x} x^{-s} at x (Leibniz rule).
double power_exp_derivative(double s, double t, double x, int n) {
  double total = 0.0;
  double binom = 1.0;
  for (int i = 0; i <= n; ++i) {
    double rising = 1.0;
    for (int j = 0; j < i; ++j) rising *= (s + j);
    const double dpow = ((i % 2) ? -1.0 : 1.0) * rising * std::pow(x, -s - i);
    const double dexp = std::pow(-t, n - i);
    total += binom * dexp * dpow;
    binom = binom * (n - i) / (i + 1);
  }
  return total * std::exp(-t * x);
}

}  // namespace

double hurwitz_zeta(double s, std::int64_t k0) {
  if (!(s > 1.0)) return kInf;
  if (k0 < 1) throw Error(Errc::InvalidArgument, "hurwitz_zeta needs k0 >= 1");
  gsl_sf_result r;
  if (gsl_sf_hzeta_e(s, static_cast<double>(k0), &r) != GSL_SUCCESS)
    throw Error(Errc::InvalidArgument, "hurwitz zeta evaluation failed");
  return r.val;
}

double power_exp_sum(double s, double t, std::int64_t k0) {
  if (k0 < 1) throw Error(Errc::InvalidArgument, "power_exp_sum needs k0 >= 1");
  if (t < 0.0) return kInf;
  if (t == 0.0) return hurwitz_zeta(s, k0);

  if (t >= 0.05) {
    // geometric convergence; stop once the remainder bound is negligible
    double sum = 0.0;
    const double ratio = std::exp(-t);
    for (std::int64_t k = k0;; ++k) {
      const double term = std::exp(-t * static_cast<double>(k)) * std::pow(static_cast<double>(k), -s);
      sum += term;
      const double bound = term * ratio / (1.0 - ratio);
      if (bound <= 1e-18 * sum || term == 0.0) break;
    }
    return sum;
  }

  constexpr std::int64_t kExplicit = 64;
  double sum = 0.0;
  const std::int64_t big_k = k0 + kExplicit;
  for (std::int64_t k = k0; k < big_k; ++k)
    sum += std::exp(-t * static_cast<double>(k)) * std::pow(static_cast<double>(k), -s);

  const double x = static_cast<double>(big_k);
  gsl_sf_result g;
  if (gsl_sf_gamma_inc_e(1.0 - s, t * x, &g) != GSL_SUCCESS)
    throw Error(Errc::InvalidArgument, "incomplete gamma evaluation failed");
  const double integral = std::pow(t, s - 1.0) * g.val;
  const double em = integral + 0.5 * power_exp_derivative(s, t, x, 0) -
                    power_exp_derivative(s, t, x, 1) / 12.0 +
                    power_exp_derivative(s, t, x, 3) / 720.0 -
                    power_exp_derivative(s, t, x, 5) / 30240.0;
  return sum + em;
}

std::pair<std::int64_t, double> lattice_split(double x, double h) {
  if (!(x > 0.0) || !(h > 0.0)) throw Error(Errc::InvalidArgument, "lattice_split needs x > 0, h > 0");
  if (h == std::numbers::ln2) {
    int e = 0;
    const double m = std::frexp(x, &e);
    return {static_cast<std::int64_t>(e - 1), 2.0 * m};
  }
  auto n = static_cast<std::int64_t>(std::floor(std::log(x) / h));
  double z = x * std::exp(-static_cast<double>(n) * h);
  const double eh = std::exp(h);
  if (z >= eh * (1.0 - 4 * std::numeric_limits<double>::epsilon())) {
    ++n;
    z = std::max(1.0, z / eh);
  } else if (z < 1.0) {
    if (z > 1.0 - 4 * std::numeric_limits<double>::epsilon()) {
      z = 1.0;
    } else {
      --n;
      z *= eh;
    }
  }
  return {n, z};
}

double lattice_power(std::int64_t k, double h) {
  if (h == std::numbers::ln2) return std::ldexp(1.0, static_cast<int>(k));
  return std::exp(static_cast<double>(k) * h);
}

}  // namespace latren
