#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace latren {

/// mass(k) = weight * exp(-decay * k * h) * k^{-exponent} / zeta(exponent, k_min), k >= k_min.
/// With decay == 0 the total mass is exactly `weight`.
struct PowerTail {
  double exponent = 2.0;
  std::int64_t k_min = 1;
  double weight = 1.0;
  double decay = 0.0;
};

/// mass(k) = weight * (1 - ratio) * ratio^(k - k_min), k >= k_min.
struct GeometricTail {
  double ratio = 0.5;
  std::int64_t k_min = 0;
  double weight = 1.0;
};

using Generator = std::variant<PowerTail, GeometricTail>;

enum class SpanCheck { Strict, Relaxed };

/// Law of log A on the lattice h*Z plus an explicit atom for A = 0.
/// Indices are exact integers; only the masses are floating point.
/// Infinite-support laws carry a parametric generator that is summed in
/// closed form (or with certified remainders), never by plain truncation.
class ArithmeticLaw {
 public:
  ArithmeticLaw(double span_h, const std::map<std::int64_t, double>& atoms, double zero_atom = 0.0,
                std::optional<Generator> generator = std::nullopt,
                SpanCheck span_check = SpanCheck::Strict);

  /// Dense constructor: masses[i] is the mass at index offset + i.
  static ArithmeticLaw from_dense(double span_h, std::int64_t offset, std::vector<double> masses,
                                  double zero_atom = 0.0, std::optional<Generator> generator = std::nullopt,
                                  SpanCheck span_check = SpanCheck::Strict);
  static ArithmeticLaw point_mass(double span_h, std::int64_t k);

  double span() const { return h_; }
  double zero_atom() const { return zero_; }
  const std::optional<Generator>& generator() const { return gen_; }
  std::int64_t dense_offset() const { return offset_; }
  const std::vector<double>& dense_masses() const { return dense_; }

  bool has_finite_support() const { return !gen_.has_value(); }
  std::int64_t min_index() const;
  std::optional<std::int64_t> max_index() const;

  double mass(std::int64_t k) const;
  /// Masses on [lo, hi] inclusive.
  std::vector<double> masses(std::int64_t lo, std::int64_t hi) const;
  /// sum_{k > j} mass(k)
  double tail_above(std::int64_t j) const;
  /// Generator part alone: its mass at k and sum_{k >= k0}.
  double generator_mass(std::int64_t k) const;
  double generator_tail_from(std::int64_t k0) const;
  /// Sum of all lattice masses (excludes the A = 0 atom).
  double lattice_mass() const;
  /// sum_k mass(k) * k * h, +inf when it diverges.
  double lattice_mean() const;
  /// sum_k mass(k) * exp(t * k * h); +inf when divergent.
  double exponential_moment(double t) const;

  /// Largest s with exponential_moment(s) finite (+inf for finite support).
  /// Exact from the generator description.
  double moment_abscissa() const;

  bool has_maximal_span() const;

 private:
  ArithmeticLaw() = default;
  void validate(SpanCheck span_check);

  double h_ = 1.0;
  std::int64_t offset_ = 0;
  std::vector<double> dense_;
  std::vector<long double> dense_suffix_;  // dense_suffix_[i] = sum_{i' >= i} dense_[i']
  double zero_ = 0.0;
  std::optional<Generator> gen_;
};

/// Largest h such that every log-atom lies in h*Z.  Throws NoCommonSpan when
/// the atoms are not commensurable at tolerance 1e-9.
double detect_span(std::span<const double> log_atoms);

/// Convolution of two proper finite-support laws on the same lattice.
ArithmeticLaw convolve(const ArithmeticLaw& f, const ArithmeticLaw& g);

/// E A^s = sum_k mass(k) e^{s k h}; A = 0 contributes only at s = 0 (0^0 = 1).
double mellin_moment(const ArithmeticLaw& law, double s);

struct SubexpRow {
  std::int64_t n;
  double next_ratio;     // p_{n+1} / p_n
  double square_ratio;   // p^{*2}_n / (2 p_n)
};

struct SubexpDiagnostic {
  std::vector<SubexpRow> rows;
  double max_next_dev = 0.0;    // over the last decade
  double max_square_dev = 0.0;  // over the last decade
  double sup_ratio = 0.0;       // max_{n in last decade} sup_{k >= n} p_k / p_n
  bool plausibly_subexponential(double tol, double sup_bound = 10.0) const {
    return max_next_dev <= tol && max_square_dev <= tol && sup_ratio <= sup_bound;
  }
};

/// Ratios behind h-subexponentiality for n in [max(1, min index), n_max].
SubexpDiagnostic subexp_diagnostic(const ArithmeticLaw& law, std::int64_t n_max);

nlohmann::json to_json(const ArithmeticLaw& law);
ArithmeticLaw law_from_json(const nlohmann::json& j);

}  // namespace latren
