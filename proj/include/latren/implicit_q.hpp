#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "latren/io.hpp"
#include "latren/lattice_law.hpp"
#include "latren/quadrature.hpp"
#include "latren/tail.hpp"

namespace latren {

/// psi(x) = e^{kappa x} (P{X > e^x} - P{AX > e^x}), X independent of A.
class PsiFunction {
 public:
  PsiFunction(TailFunction tail, ArithmeticLaw law_a, double kappa);

  double operator()(double x) const { return at_exp(std::exp(x)); }
  /// psi(log y), evaluated without the exp/log round trip.
  double at_exp(double y) const;
  std::vector<double> tabulate(const std::vector<double>& xs) const;

  double kappa() const { return kappa_; }
  double span() const { return law_.span(); }
  const TailFunction& tail() const { return tail_; }
  const ArithmeticLaw& law_a() const { return law_; }

 private:
  TailFunction tail_;
  ArithmeticLaw law_;
  double kappa_;
};

enum class NormalizerKind { Unit, TruncatedMean, DefectiveMass };
std::string to_string(NormalizerKind k);

/// q on one period [1, e^h); log-periodicity is implied by storing one period.
struct PeriodicQ {
  double kappa = 1.0;
  double span_h = 1.0;
  std::vector<double> x;
  std::vector<double> q;
  std::vector<double> trunc_error;
  NormalizerKind normalizer = NormalizerKind::Unit;
  std::string label;

  /// Bracket for q(z), z > 0, from monotonicity of y^-kappa q(y) between grid points.
  std::pair<double, double> bounds_at(double z) const;
  Table to_table() const;
};

/// x_i = exp(h (i + 1/sqrt 5) / n): points avoid the lattice seams e^{jh} and dyadic knots.
std::vector<double> jittered_grid(double h, std::size_t n);

struct ClassQViolation {
  std::size_t index;
  std::string what;
};
/// q >= 0 and y^-kappa q(y) nonincreasing across the grid and the seam, each
/// within `rel_tol` plus the stored per-point error.
std::vector<ClassQViolation> class_q_violations(const PeriodicQ& q, double rel_tol = 1e-9);

/// q(x) = (h / mu) sum_j psi(log x + jh).  Each side is summed until 20
/// consecutive terms fall below 1e-12 of the running sum.
PeriodicQ q_from_psi(const PsiFunction& psi, double mu, const std::vector<double>& x_grid,
                     std::int64_t j_limit = 100000);

/// g^(s) = int_{-inf}^s e^{-(s - x)} g(x) dx, integrated over t = s - x in [0, t_max].
QuadResult smooth_hat(const std::function<double(double)>& g, double s, double tol = 1e-12, double t_max = 50.0);

/// C(s) = (h / mu) sum_j psi^(s + jh) in the single-integral form
/// (h / mu) / (1 - e^{-h}) int e^{-h frac((s - y) / h)} psi(y) dy.
QuadResult smoothing_c(const PsiFunction& psi, double mu, double s, double tol = 1e-14);

/// q at continuity points by central divided differences of V(v) = v C(log v),
/// bracket [y (1 - w/2), y (1 + w/2)] with w = rel_width.
PeriodicQ q_from_smoothing(const PsiFunction& psi, double mu, const std::vector<double>& x_grid,
                           double rel_width = -1.0);

struct TailQRow {
  std::int64_t n;
  double x;
  double value;
  std::size_t exceedances;  // empirical tails only
};

struct TailQResult {
  PeriodicQ q;                       // from the deepest n
  std::vector<TailQRow> table;       // every (n, x)
  std::vector<double> max_step_change;  // per n after the first: max_x |q_n(x) - q_{n-1}(x)|
  std::vector<std::size_t> min_exceedances;  // per n
};

/// normalizer(n) x^kappa e^{kappa n h} T(x e^{nh}) for n in [n_from, n_to].
/// Empirical tails throw InsufficientTailSamples when a deepest-row point has
/// fewer than 100 exceedances, unless allow_sparse is set.
TailQResult q_from_tail(const TailFunction& tail, double kappa, double h, NormalizerKind kind,
                        const std::function<double(std::int64_t)>& normalizer, const std::vector<double>& x_grid,
                        std::int64_t n_from, std::int64_t n_to, bool allow_sparse = false);

struct SandwichRow {
  double x;
  double frac;  // e^{h frac(log x / h)}
  double value;  // x^kappa T(x)
  double lower, upper;
  bool inside;
};
struct SandwichReport {
  std::vector<SandwichRow> rows;
  std::size_t outside = 0;
};

/// q(frac+) - tol <= x^kappa T(x) <= q(frac-) + tol with the grid brackets of q.
SandwichReport extend_bounds(const PeriodicQ& q, const TailFunction& tail, const std::vector<double>& x_seq,
                             double tol);

enum class ConditionMode { Integral, Sum, DeltaIntegral };

struct ConditionReport {
  ConditionMode mode;
  double delta = 0.0;
  double x_lo = 0.0, x_hi = 0.0;
  double value = 0.0;      // partial integral / max over x of the partial sum
  double low_end = 0.0;    // contribution of the lowest tenth of the range
  double high_end = 0.0;   // contribution of the highest tenth of the range
  /// Heuristic: both end contributions are negligible against the total.
  bool looks_finite(double rel = 1e-3) const {
    return low_end <= rel * (value + 1e-300) && high_end <= rel * (value + 1e-300);
  }
};

/// Integral: int |psi(x)| dx (= int y^{kappa-1} |P{X>y} - P{AX>y}| dy);
/// Sum: sup over x in [0,h) of sum_j |psi(x + jh)|;
/// DeltaIntegral: int e^{delta x} |psi(x)| dx.  All over log-range [x_lo, x_hi].
ConditionReport check_conditions(const PsiFunction& psi, ConditionMode mode, double x_lo, double x_hi,
                                 double delta = 0.0);

nlohmann::json to_json(const ConditionReport& r);

}  // namespace latren
