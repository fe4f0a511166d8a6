#include "latren/tail.hpp"

#include <algorithm>
#include <cmath>

#include "latren/error.hpp"

namespace latren {

TailFunction TailFunction::exact(std::function<double(double)> tail, std::string descriptor) {
  TailFunction t;
  t.exact_ = std::move(tail);
  t.descriptor_ = std::move(descriptor);
  return t;
}

TailFunction TailFunction::empirical(std::vector<double> samples, std::string descriptor) {
  if (samples.empty()) throw Error(Errc::InvalidArgument, "empirical tail needs samples");
  std::sort(samples.begin(), samples.end());
  TailFunction t;
  t.samples_ = std::make_shared<const std::vector<double>>(std::move(samples));
  t.descriptor_ = std::move(descriptor);
  return t;
}

std::size_t TailFunction::exceedances(double x) const {
  const auto& s = sorted_samples();
  return static_cast<std::size_t>(s.end() - std::upper_bound(s.begin(), s.end(), x));
}

double TailFunction::operator()(double x) const {
  if (samples_) return static_cast<double>(exceedances(x)) / static_cast<double>(samples_->size());
  return exact_(x);
}

double TailFunction::standard_error(double x) const {
  const double t = (*this)(x);
  return std::sqrt(t * (1.0 - t) / static_cast<double>(sorted_samples().size()));
}

const std::vector<double>& TailFunction::sorted_samples() const {
  if (!samples_) throw Error(Errc::InvalidArgument, "tail '" + descriptor_ + "' has no samples");
  return *samples_;
}

TailFunction TailFunction::scaled(double c) const {
  if (!(c > 0.0)) throw Error(Errc::InvalidArgument, "scale must be positive");
  if (samples_) {
    std::vector<double> s(*samples_);
    for (double& v : s) v *= c;
    return empirical(std::move(s), descriptor_ + " scaled");
  }
  auto base = exact_;
  return exact([base, c](double x) { return base(x / c); }, descriptor_ + " scaled");
}

}  // namespace latren
