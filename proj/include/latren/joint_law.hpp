#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "latren/lattice_law.hpp"
#include "latren/piecewise_q.hpp"

namespace latren {

struct ConstantB {
  double value = 0.0;
};
/// B = base^K with P(K = k) = (1 - ratio) ratio^(k - k_min), k >= k_min.
struct GeometricPowerB {
  double base = 2.0;
  double ratio = 0.5;
  std::int64_t k_min = 0;
};
/// B on [1, e^h) with df H(y) = rho / (rho - 1) - q(y) y^-kappa / b, rho = e^{kappa h}.
struct QsetHB {
  PiecewiseQ q;
  double b = 0.5;
  double cdf(double y) const;
  double quantile(double u) const;
};
/// P(B > x) = (x_m / x)^alpha for x >= x_m.
struct ParetoB {
  double x_m = 1.0;
  double alpha = 1.0;
};
struct UniformB {
  double lo = 0.0;
  double hi = 1.0;
};
using BDist = std::variant<ConstantB, GeometricPowerB, QsetHB, ParetoB, UniformB>;

/// E log+ |scale * B|, +inf when it diverges.
double log_plus_mean(const BDist& b, double scale);
bool is_identically_zero(const BDist& b, double scale);
/// P(scale * B > x) for B >= 0 kinds (used by exact-tail oracles).
double b_tail(const BDist& b, double scale, double x);

/// One mixture component: with probability `weight`, A is drawn from `a`
/// (A = 0 when absent) and, independently, B = b_scale * (draw from b).
struct ABComponent {
  double weight = 1.0;
  std::optional<ArithmeticLaw> a;  // conditional law of log A; zero_atom must be 0
  BDist b;
  double b_scale = 1.0;
};

class JointABLaw {
 public:
  explicit JointABLaw(std::vector<ABComponent> components);

  const std::vector<ABComponent>& components() const { return comps_; }
  double span() const { return h_; }
  /// Law of log A with the A = 0 mass from every A-free component.
  ArithmeticLaw marginal_a() const;
  bool is_ab0() const;
  bool b_nonnegative() const;
  double log_plus_b_mean() const;

  /// Same pair with B replaced by c B.
  JointABLaw with_b_scale(double c) const;

 private:
  std::vector<ABComponent> comps_;
  double h_ = 1.0;
};

nlohmann::json to_json(const JointABLaw& law);
JointABLaw joint_law_from_json(const nlohmann::json& j);

}  // namespace latren
