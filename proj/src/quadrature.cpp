#include "latren/quadrature.hpp"

#include <cmath>

#include "latren/error.hpp"

namespace latren {

namespace {

struct Panel {
  double a, fa, m, fm, b, fb, whole;
};

void refine(const std::function<double(double)>& g, const Panel& p, double tol, int depth, QuadResult& acc,
            bool& exhausted) {
  const double lm = 0.5 * (p.a + p.m), rm = 0.5 * (p.m + p.b);
  const double flm = g(lm), frm = g(rm);
  if (!std::isfinite(flm) || !std::isfinite(frm))
    throw Error(Errc::QuadratureDivergence, "integrand is not finite");
  const double left = (p.m - p.a) / 6.0 * (p.fa + 4.0 * flm + p.fm);
  const double right = (p.b - p.m) / 6.0 * (p.fm + 4.0 * frm + p.fb);
  const double diff = left + right - p.whole;
  if (depth <= 0 || std::abs(diff) <= 15.0 * tol) {
    if (depth <= 0 && std::abs(diff) > 15.0 * tol) exhausted = true;
    acc.value += left + right + diff / 15.0;
    acc.error += std::abs(diff) / 15.0;
    return;
  }
  refine(g, {p.a, p.fa, lm, flm, p.m, p.fm, left}, 0.5 * tol, depth - 1, acc, exhausted);
  refine(g, {p.m, p.fm, rm, frm, p.b, p.fb, right}, 0.5 * tol, depth - 1, acc, exhausted);
}

}  // namespace

QuadResult adaptive_simpson(const std::function<double(double)>& g, double a, double b, double tol, int max_depth) {
  QuadResult acc;
  if (a == b) return acc;
  const double m = 0.5 * (a + b);
  const double fa = g(a), fm = g(m), fb = g(b);
  if (!std::isfinite(fa) || !std::isfinite(fm) || !std::isfinite(fb))
    throw Error(Errc::QuadratureDivergence, "integrand is not finite");
  bool exhausted = false;
  refine(g, {a, fa, m, fm, b, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb)}, tol, max_depth, acc, exhausted);
  if (exhausted && acc.error > 1e3 * tol)
    throw Error(Errc::QuadratureDivergence, "error estimate stays above tolerance at the depth limit");
  return acc;
}

}  // namespace latren
