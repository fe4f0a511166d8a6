#pragma once

#include <functional>

namespace latren {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;  // Richardson estimate |S_fine - S_coarse| / 15, summed over panels
};

/// Adaptive Simpson on [a, b].  Throws QuadratureDivergence when the
/// integrand produces non-finite values or the error budget is exhausted.
QuadResult adaptive_simpson(const std::function<double(double)>& g, double a, double b, double tol,
                            int max_depth = 48);

}  // namespace latren
