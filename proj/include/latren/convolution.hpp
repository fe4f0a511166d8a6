#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace latren {

enum class ConvolutionMethod { Auto, Direct, Transform };

/// Supports at or above this size switch the Auto method to the FFT branch.
inline constexpr std::size_t kTransformThreshold = 4096;

/// Full linear convolution, result length a.size() + b.size() - 1.
/// Direct accumulates in long double; Transform uses a real FFT.
std::vector<double> convolve(std::span<const double> a, std::span<const double> b,
                             ConvolutionMethod method = ConvolutionMethod::Auto);

/// Same as convolve but only the first `keep` outputs are returned.
std::vector<double> convolve_head(std::span<const double> a, std::span<const double> b,
                                  std::size_t keep,
                                  ConvolutionMethod method = ConvolutionMethod::Auto);

}  // namespace latren
