#pragma once

#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "latren/lattice_law.hpp"

namespace latren {

struct FiniteMean {};
struct InfiniteMeanRegVar {
  double alpha = 1.0;
  std::string slowly_varying = "constant";
};
struct Defective {
  double theta = 0.5;
};
using Regime = std::variant<FiniteMean, InfiniteMeanRegVar, Defective>;

std::string regime_name(const Regime& r);

struct KappaSolution {
  double kappa = 0.0;
  bool defective = false;
  double theta = 1.0;  // E A^kappa; < 1 only when defective
};

/// Root of E A^s = 1 on (0, s_max] by bisection (relative tolerance 1e-12).
/// When E A^s jumps to +inf at its abscissa s* with E A^{s*} < 1, returns
/// the defective solution kappa = s*, theta = E A^{s*}.
KappaSolution solve_kappa(const ArithmeticLaw& law, double s_max);

/// Abscissa of convergence of s -> E A^s located by bisection on finiteness
/// over [0, s_max] to 1e-9; +inf when E A^{s_max} is finite.
double find_moment_abscissa(const ArithmeticLaw& law, double s_max);

/// F_kappa[k] = e^{kappa k h} law[k] / E A^kappa (the division only matters
/// in the defective case).  The A = 0 atom is annihilated.
ArithmeticLaw tilt(const ArithmeticLaw& law, double kappa);

/// Original law with e^{-kappa k h} f[k] on the lattice and the deficit on A = 0.
ArithmeticLaw invert_tilt(const ArithmeticLaw& f_kappa, double kappa);

/// m(x) = int_0^x P_kappa(log A > y) dy, exact over lattice cells.
double truncated_mean_m(const ArithmeticLaw& f_kappa, double x);
/// m(nh) for n = 0..n_max.
std::vector<double> truncated_mean_table(const ArithmeticLaw& f_kappa, std::int64_t n_max);

struct CramerInfo {
  double kappa = 0.0;
  double mu = 0.0;  // E A^kappa log A, +inf in the infinite-mean regime
  Regime regime;
  ArithmeticLaw tilted;  // proper law F_kappa (normalized by theta when defective)
};

struct RegimeHint {
  std::optional<double> alpha;
  std::string slowly_varying = "constant";
};

CramerInfo analyze(const ArithmeticLaw& law, double s_max, const RegimeHint& hint = {});

/// C_alpha = sin(alpha pi) / ((1 - alpha) pi), with C_1 = 1.
double c_alpha(double alpha);

struct DoneyRow {
  std::int64_t n;
  double delta;
  double value;
};

struct DoneyReport {
  std::vector<DoneyRow> rows;
  /// Per delta: value at the largest n and the max over the upper half of the n grid.
  std::vector<std::pair<double, double>> tail_trend;
};

/// x F(x) sum_{1 <= j <= delta n} f_{n-j} / (j h F(j)^2) with x = n h and F the
/// tilted tail; only meaningful (and only accepted) for alpha <= 1/2.
DoneyReport doney_diagnostic(const ArithmeticLaw& f_kappa, double alpha, const std::vector<std::int64_t>& n_grid,
                             const std::vector<double>& delta_grid);

nlohmann::json to_json(const CramerInfo& info);

}  // namespace latren
