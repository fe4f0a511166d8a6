#include "latren/piecewise_q.hpp"

#include <algorithm>
#include <cmath>

#include "latren/error.hpp"
#include "latren/series.hpp"

namespace latren {

PiecewiseQ::PiecewiseQ(double kappa, double h, std::vector<double> y, std::vector<double> q_right,
                       std::vector<double> q_left)
    : kappa_(kappa), h_(h), y_(std::move(y)), qr_(std::move(q_right)), ql_(std::move(q_left)) {
  validate();
}

PiecewiseQ PiecewiseQ::constant(double kappa, double h, double c) {
  return PiecewiseQ(kappa, h, {1.0, std::exp(h)}, {c}, {c, c});
}

PiecewiseQ PiecewiseQ::from_function(double kappa, double h, const std::function<double(double)>& q, int pieces) {
  if (pieces < 1) throw Error(Errc::InvalidQ, "need at least one piece");
  const double top = std::exp(h);
  std::vector<double> y, qr, ql;
  for (int i = 0; i <= pieces; ++i) {
    const double yi = i == pieces ? top : 1.0 + (top - 1.0) * i / pieces;
    y.push_back(yi);
    ql.push_back(q(yi));
    if (i < pieces) qr.push_back(q(yi));
  }
  ql[0] = ql.back();
  return PiecewiseQ(kappa, h, std::move(y), std::move(qr), std::move(ql));
}

void PiecewiseQ::validate() const {
  if (!(kappa_ > 0.0) || !(h_ > 0.0)) throw Error(Errc::InvalidQ, "kappa and h must be positive");
  const std::size_t m = qr_.size();
  if (m < 1 || y_.size() != m + 1 || ql_.size() != m + 1) throw Error(Errc::InvalidQ, "knot arrays disagree in size");
  if (std::abs(y_.front() - 1.0) > 1e-12 || std::abs(y_.back() - std::exp(h_)) > 1e-12 * std::exp(h_))
    throw Error(Errc::InvalidQ, "knots must span [1, e^h]");
  bool nonzero = false;
  for (std::size_t i = 0; i < m; ++i) {
    if (!(y_[i + 1] > y_[i])) throw Error(Errc::InvalidQ, "knots must increase");
    if (!(qr_[i] >= 0.0) || !(ql_[i + 1] >= 0.0)) throw Error(Errc::InvalidQ, "q must be nonnegative");
    nonzero = nonzero || qr_[i] > 0.0 || ql_[i + 1] > 0.0;
    // d/dy [q y^{-kappa}] has the sign of s y - kappa q(y), linear in y: check both ends
    const double s = (ql_[i + 1] - qr_[i]) / (y_[i + 1] - y_[i]);
    const double tol = 1e-12 * (1.0 + std::abs(s) * y_[i + 1]);
    if (s * y_[i] - kappa_ * qr_[i] > tol || s * y_[i + 1] - kappa_ * ql_[i + 1] > tol)
      throw Error(Errc::InvalidQ, "q(y) y^-kappa increases on piece " + std::to_string(i));
    if (i > 0 && qr_[i] > ql_[i] * (1.0 + 1e-15))
      throw Error(Errc::InvalidQ, "upward jump at knot " + std::to_string(i));
  }
  if (!nonzero) throw Error(Errc::InvalidQ, "q vanishes identically");
  if (qr_[0] > ql_[m] * (1.0 + 1e-15)) throw Error(Errc::InvalidQ, "q(1) exceeds q(e^h -) across the seam");
}

double PiecewiseQ::reduce(double x) const {
  if (!(x > 0.0)) throw Error(Errc::InvalidArgument, "q is defined for x > 0");
  return lattice_split(x, h_).second;
}

double PiecewiseQ::on_period(double z) const {
  auto it = std::upper_bound(y_.begin(), y_.end(), z);
  std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - y_.begin() - 1, 0));
  i = std::min(i, qr_.size() - 1);
  const double t = (z - y_[i]) / (y_[i + 1] - y_[i]);
  return qr_[i] + (ql_[i + 1] - qr_[i]) * t;
}

double PiecewiseQ::operator()(double x) const { return on_period(reduce(x)); }

double PiecewiseQ::left_limit(double x) const {
  const double z = reduce(x);
  for (std::size_t i = 0; i + 1 < y_.size(); ++i)
    if (std::abs(z - y_[i]) <= 1e-12 * y_[i]) return ql_[i == 0 ? ql_.size() - 1 : i];
  return on_period(z);
}

bool PiecewiseQ::is_jump(double x, double tol) const {
  const double z = reduce(x);
  for (std::size_t i = 0; i + 1 < y_.size(); ++i)
    if (std::abs(z - y_[i]) <= tol * y_[i]) return std::abs(qr_[i] - ql_[i == 0 ? ql_.size() - 1 : i]) > 0.0;
  return false;
}

PiecewiseQ PiecewiseQ::times(double factor) const {
  auto qr = qr_, ql = ql_;
  for (double& v : qr) v *= factor;
  for (double& v : ql) v *= factor;
  return PiecewiseQ(kappa_, h_, y_, std::move(qr), std::move(ql));
}

nlohmann::json PiecewiseQ::to_json() const {
  return {{"kappa", kappa_}, {"h", h_}, {"y", y_}, {"q_right", qr_}, {"q_left", ql_}};
}

}  // namespace latren
