#pragma once

#include <cstdint>
#include <utility>

namespace latren {

/// sum_{k >= k0} exp(-t k) k^{-s}, for k0 >= 1 and t >= 0.
/// Returns +inf when t == 0 and s <= 1.  Small t is handled with an
/// Euler-Maclaurin remainder so the sum stays accurate near t = 0.
double power_exp_sum(double s, double t, std::int64_t k0);

/// Hurwitz zeta sum_{k >= k0} k^{-s}, s > 1.
double hurwitz_zeta(double s, std::int64_t k0);

/// e^{k h}; exact powers of two when h = log 2.
double lattice_power(std::int64_t k, double h);

/// Split x > 0 as x = z * e^{n h} with z in [1, e^h).  Exact for h = log 2.
std::pair<std::int64_t, double> lattice_split(double x, double h);

}  // namespace latren
