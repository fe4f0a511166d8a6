#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "latren/joint_law.hpp"

namespace latren {

struct StopRule {
  double weight_floor = 1e-9;
  std::int64_t max_steps = 10000;
};

struct SimConfig {
  std::size_t sample_count = 100000;
  std::uint64_t seed = 1;
  StopRule stop;
  unsigned threads = 0;  // 0: hardware concurrency; output does not depend on it
};

struct SampleResult {
  std::vector<double> samples;  // in path order (not sorted)
  std::size_t truncated = 0;    // paths stopped by the weight floor or the step cap
  double bias_bound = 0.0;      // weight_floor * mean |X|; 0 when no path was truncated
};

/// Forward series sum_n (A_1 ... A_{n-1}) B_n, stopped when the running weight
/// hits 0 (exact), drops below the floor, or reaches max_steps.
SampleResult sample_perpetuity(const JointABLaw& pair, const SimConfig& cfg);
/// sup_n (A_1 ... A_{n-1}) B_n with the same stopping rule.
SampleResult sample_max(const JointABLaw& pair, const SimConfig& cfg);
/// X = A_1 ... A_{N-1} B_N with N geometric; requires A B = 0 and B >= 0.
SampleResult sample_ab0_exact(const JointABLaw& pair, const SimConfig& cfg);

enum class IfsMap { Affine, Max, Hypot };
IfsMap ifs_map_from_string(const std::string& s);
std::string to_string(IfsMap m);

/// X_{n+1} = Psi(theta, X_n) with theta = (A, B) drawn from `pair`, bounded by
/// A x v B <= Psi <= A x + B.
struct IFSDescriptor {
  IfsMap map = IfsMap::Hypot;
  JointABLaw pair;
  std::int64_t steps = 1000;
};

struct IfsResult {
  std::vector<double> samples, lower, upper;  // end states of the coupled chains
  std::size_t violations = 0;
  std::size_t checked_steps = 0;
};

double ifs_apply(IfsMap m, double a, double b, double x);

/// Checks the bounds on a seeded grid of (theta, x); throws SandwichViolated.
void validate_sandwich(const IFSDescriptor& d, std::uint64_t seed);
IfsResult sample_ifs(const IFSDescriptor& d, const SimConfig& cfg);

/// Two-sample Kolmogorov-Smirnov statistic of sorted samples (ties handled).
double ks_statistic(const std::vector<double>& a_sorted, const std::vector<double>& b_sorted);
/// Asymptotic 1% critical value 1.628 sqrt((n + m) / (n m)).
double ks_critical_1pct(std::size_t n, std::size_t m);
/// sqrt(p (1 - p) / n)
double binomial_se(double p, std::size_t n);

/// Contraction check: E log A < 0 and E log+ |B| < inf; throws NonContractive.
void check_contractive(const JointABLaw& pair);

}  // namespace latren
