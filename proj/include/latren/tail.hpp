#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace latren {

/// P{X > x}, either from a closed form or from a sorted sample.
class TailFunction {
 public:
  static TailFunction exact(std::function<double(double)> tail, std::string descriptor);
  /// Takes ownership of the samples and sorts them.
  static TailFunction empirical(std::vector<double> samples, std::string descriptor = "empirical");

  double operator()(double x) const;
  bool is_empirical() const { return samples_ != nullptr; }
  std::size_t sample_count() const { return samples_ ? samples_->size() : 0; }
  /// Number of samples strictly above x (empirical only).
  std::size_t exceedances(double x) const;
  /// Binomial standard error sqrt(T (1 - T) / N) (empirical only).
  double standard_error(double x) const;
  const std::string& descriptor() const { return descriptor_; }
  const std::vector<double>& sorted_samples() const;

  /// Tail of cX for c > 0: x -> T(x / c).
  TailFunction scaled(double c) const;

 private:
  std::function<double(double)> exact_;
  std::shared_ptr<const std::vector<double>> samples_;
  std::string descriptor_;
};

}  // namespace latren
