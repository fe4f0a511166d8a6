#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "latren/convolution.hpp"
#include "latren/lattice_law.hpp"

namespace latren {

struct RenewalOptions {
  double tol = 1e-12;
  int max_levels = 40;                      // up to 2^max_levels convolution powers
  std::int64_t max_window = std::int64_t{1} << 23;
  ConvolutionMethod method = ConvolutionMethod::Auto;
};

/// u_n = sum_{m >= 0} theta^m f^{*m}[n] on [n_lo, n_hi].
struct RenewalSequence {
  double span_h = 1.0;
  std::int64_t n_lo = 0;
  std::int64_t n_hi = 0;
  double defect_theta = 1.0;
  std::vector<double> u;
  std::vector<double> trunc_error;
  std::int64_t terms = 0;     // number of convolution powers summed
  std::int64_t pad = 0;       // extra lattice cells computed on each side
  double leak_bound = 0.0;    // part of trunc_error due to the finite window

  double at(std::int64_t n) const { return u[static_cast<std::size_t>(n - n_lo)]; }
  double error_at(std::int64_t n) const { return trunc_error[static_cast<std::size_t>(n - n_lo)]; }
  bool contains(std::int64_t n) const { return n >= n_lo && n <= n_hi; }
};

/// Sum of convolution powers via the doubling product
///   sum_{m < 2^L} G^m = prod_{i < L} (I + G^{2^i}),  G = theta f,
/// evaluated on a padded window.  The remainder sum_{m >= 2^L} is bounded by
/// theta^M / (1 - theta) or by a Chernoff bound on the lower tail of S_M; the
/// window leak by a Lundberg bound on excursions beyond the padding.
RenewalSequence renewal_sequence(const ArithmeticLaw& f, double theta, std::int64_t n_lo, std::int64_t n_hi,
                                 const RenewalOptions& opt = {});

/// Default left edge -ceil(40 / (kappa h)).
std::int64_t default_window_lo(double kappa, double h);

struct ConvergenceRow {
  std::int64_t n;
  double u;
  double normalizer;
  double ratio;
  double trunc_error;
};

struct DecadeStat {
  std::int64_t from;
  std::int64_t to;
  double mean_abs_dev;  // mean |ratio - 1|
};

struct ConvergenceReport {
  std::string kind;
  double limit = 1.0;                  // constant the raw product is compared with
  std::vector<ConvergenceRow> rows;    // all n in [max(1, n_lo), n_hi]
  std::vector<DecadeStat> decades;
  std::int64_t band_from = 0, band_to = 0;
  double band_min = 0.0, band_max = 0.0;  // ratio range on [band_from, band_to]

  bool band_within(double lo, double hi) const { return band_min >= lo && band_max <= hi; }
  bool decades_decreasing() const;
};

/// Ratio u_n mu / h.
ConvergenceReport blackwell_check(const RenewalSequence& u, double mu, std::int64_t band_from, std::int64_t band_to);
/// Ratio u_n m(nh) / (h C_alpha).
ConvergenceReport srt_check(const RenewalSequence& u, const ArithmeticLaw& f_kappa, double alpha,
                            std::int64_t band_from, std::int64_t band_to);
/// Ratio u_n / (p_n theta / (1 - theta)^2).
ConvergenceReport defective_check(const RenewalSequence& u, const ArithmeticLaw& f_kappa, double theta,
                                  std::int64_t band_from, std::int64_t band_to);

struct FiniteMeanLimit {
  double mu;
};
struct InfiniteMeanLimit {
  double alpha;
  double m_nh;
};
struct DefectiveLimit {
  double theta;
  double p_n;
};
using KeyRenewalLimit = std::variant<FiniteMeanLimit, InfiniteMeanLimit, DefectiveLimit>;

struct KeyRenewalResult {
  double value = 0.0;            // sum_j z(x + nh - jh) u_j over the window
  double remainder_bound = 0.0;  // contribution of j outside the window
  double z_sum = 0.0;            // sum_j z(x + jh)
  double predicted = 0.0;        // regime limit built from z_sum
};

/// `z(i)` returns z(x + i h).  Throws DecayViolation when sum_i |z(x + ih)|
/// does not settle, or when the decay prerequisite of the chosen path fails
/// (|z| = O(1/x) for infinite mean, z = o(p_n) for the defective path).
KeyRenewalResult key_renewal_eval(const std::function<double(std::int64_t)>& z, const RenewalSequence& u,
                                  std::int64_t n, const KeyRenewalLimit& limit);

nlohmann::json summary_json(const RenewalSequence& u);
nlohmann::json summary_json(const ConvergenceReport& r);

}  // namespace latren
