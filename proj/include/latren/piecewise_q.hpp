#pragma once

#include <functional>
#include <vector>

#include <nlohmann/json.hpp>

namespace latren {

/// Right-continuous, log-periodic profile on one period [1, e^h).
/// Knots 1 = y_0 < ... < y_m = e^h; on [y_i, y_{i+1}) the value runs linearly
/// from q_right[i] to q_left[i+1].  q_right has m entries, q_left has m + 1
/// (q_left[0] is unused and mirrors q_left[m] through periodicity).
class PiecewiseQ {
 public:
  PiecewiseQ(double kappa, double h, std::vector<double> y, std::vector<double> q_right, std::vector<double> q_left);

  static PiecewiseQ constant(double kappa, double h, double c);
  /// Continuous profile sampled at `pieces + 1` equally spaced knots.
  static PiecewiseQ from_function(double kappa, double h, const std::function<double(double)>& q, int pieces);

  double kappa() const { return kappa_; }
  double span() const { return h_; }
  const std::vector<double>& knots() const { return y_; }
  const std::vector<double>& right_values() const { return qr_; }
  const std::vector<double>& left_values() const { return ql_; }

  /// q(x) for any x > 0 through log-periodicity.
  double operator()(double x) const;
  /// lim_{t -> x-} q(t).
  double left_limit(double x) const;
  /// q(e^h -).
  double seam_left() const { return ql_.back(); }
  /// True when x reduced to the period sits on a knot with a jump.
  bool is_jump(double x, double tol = 1e-12) const;

  PiecewiseQ times(double factor) const;

  nlohmann::json to_json() const;

 private:
  void validate() const;
  double reduce(double x) const;  // representative in [1, e^h)
  double on_period(double z) const;

  double kappa_, h_;
  std::vector<double> y_, qr_, ql_;
};

}  // namespace latren
