#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "latren/joint_law.hpp"
#include "latren/piecewise_q.hpp"
#include "latren/tail.hpp"

namespace latren {

/// P{A = 0, B = 2^k} = 2^{-2k} (k >= 1), P{A = 2^l, B = 0} = 2^{-(2l+1)} (l >= 0).
JointABLaw st_petersburg_pair();
/// P{X > x} = 1 for x < 2, else 2^{frac(log2 x)} / x (= 2^{-floor(log2 x)}, computed exactly).
double st_petersburg_tail(double x);
TailFunction st_petersburg_tail_function();
/// P{X = 2^k} = 2^{-k}, k >= 1.
double st_petersburg_pmf(std::int64_t k);
/// P{AX + B = 2^k} for X with the St. Petersburg law, from the pair's own masses.
double st_petersburg_pushforward(const JointABLaw& pair, std::int64_t k);

struct QTarget {
  PiecewiseQ q;
  double scale_c = 1.0;
};

/// CSV columns y,q[,q_left] covering [1, e^h]; the row at y = e^h carries q(e^h -).
/// Header JSON: {"kappa", "h", "scale_c"}.
QTarget parse_qtarget(const std::string& csv, const nlohmann::json& header);
QTarget load_qtarget(const std::filesystem::path& csv_path, const std::filesystem::path& header_path);

/// Parameters of the AB = 0 construction for a target with q(e^h -) in (0,1):
/// rho = e^{kappa h}, b = (rho - 1) q(e^h -) / rho, r = (rho - 1 - b rho) / (rho (rho - 1 - b)),
/// P{A = 0} = r (rho - 1) / (1 - r), and log A / h geometric(r) given A != 0.
struct QsetParams {
  double kappa = 1.0;
  double h = 0.0;
  double rho = 2.0;
  double r = 0.25;
  double b = 0.0;
  double p0 = 0.0;
  std::int64_t rescale_j = 0;  // internal B multiplier e^{jh} bringing q(e^h -) below 1
  double scale_c = 1.0;        // user (A, cB) factor
  double total_scale() const;  // scale_c * e^{jh}
};

struct QsetPair {
  QsetParams params;
  QTarget target;
  PiecewiseQ q_native;  // target q times rho^{-j}; the profile the construction realizes before scaling
  JointABLaw pair;
  TailFunction tail;    // exact P{X > x}
  /// c^kappa q(x / c): the profile the exact tail carries.
  double expected_q(double x) const;
};

QsetPair qset_construct(const QTarget& target);

/// P{S_{N-1} = k} for the construction: 1 - b/(rho - 1) at k = 0, b rho^{-k} for k >= 1,
/// with b = (rho - 1)(1 - r rho) / (rho (1 - r)).
double sn_pmf_general(double rho, double r, std::int64_t k);
/// Native case rho = 2, r = p: 1/(2(1-p)) at 0, ((1-2p)/(2(1-p))) 2^{-k} for k >= 1.
double sn_pmf(double p, std::int64_t k);
/// P{S_{N-1} >= n + 1} = b rho^{-n} / (rho - 1).
double sn_upper_tail(const QsetParams& prm, std::int64_t n);

/// Exact tail of the native construction (before total scaling):
/// x = e^{nh} z, T = P{S >= n+1} + P{S = n}(1 - H(z)); T = 1 for x < 1.
double qset_exact_tail(const QsetParams& prm, const QsetHB& h_dist, double x);

/// Native constant-q example: P{X > x} = (2 - 1/(1-p)) / x for x > 2.
double constant_q_tail(double p, double x);

nlohmann::json to_json(const QsetParams& p);

}  // namespace latren
