#include "latren/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "latren/error.hpp"
#include "latren/io.hpp"
#include "latren/series.hpp"

namespace latren {

JointABLaw st_petersburg_pair() {
  const double h = std::numbers::ln2;
  // given A != 0, log2 A is geometric with ratio 1/4; given A = 0, log2 B - 1 is
  ArithmeticLaw a_given_nonzero(h, {}, 0.0, GeometricTail{0.25, 0, 1.0});
  return JointABLaw({ABComponent{1.0 / 3.0, std::nullopt, GeometricPowerB{2.0, 0.25, 1}, 1.0},
                     ABComponent{2.0 / 3.0, a_given_nonzero, ConstantB{0.0}, 1.0}});
}

double st_petersburg_tail(double x) {
  if (x < 2.0) return 1.0;
  int e = 0;
  (void)std::frexp(x, &e);  // x = m 2^e, m in [1/2, 1): floor(log2 x) = e - 1
  return std::ldexp(1.0, 1 - e);
}

TailFunction st_petersburg_tail_function() { return TailFunction::exact(st_petersburg_tail, "st_petersburg"); }

double st_petersburg_pmf(std::int64_t k) { return k >= 1 ? std::ldexp(1.0, -static_cast<int>(k)) : 0.0; }

double st_petersburg_pushforward(const JointABLaw& pair, std::int64_t k) {
  // AX + B = 2^k: either A = 0 and B = 2^k, or A = 2^l, B = 0 and X = 2^{k-l}
  long double p = 0.0L;
  for (const auto& c : pair.components()) {
    if (!c.a) {
      const auto& g = std::get<GeometricPowerB>(c.b);
      if (g.base != 2.0 || c.b_scale != 1.0) throw Error(Errc::InvalidArgument, "not a dyadic B law");
      if (k >= g.k_min) p += c.weight * (1.0 - g.ratio) * std::pow(g.ratio, static_cast<double>(k - g.k_min));
    } else {
      for (std::int64_t l = c.a->min_index(); l <= k - 1; ++l)
        p += static_cast<long double>(c.weight) * c.a->mass(l) * st_petersburg_pmf(k - l);
    }
  }
  return static_cast<double>(p);
}

QTarget parse_qtarget(const std::string& csv, const nlohmann::json& header) {
  double kappa, h, c;
  try {
    kappa = header.at("kappa").get<double>();
    h = header.at("h").get<double>();
    c = header.value("scale_c", 1.0);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ConfigError, std::string("q target header: ") + e.what());
  }
  std::istringstream in(csv);
  std::string line;
  std::vector<double> y, q, ql;
  bool has_left = false;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
    if (first) {
      first = false;
      if (cells.size() < 2 || cells[0] != "y" || cells[1] != "q")
        throw Error(Errc::ConfigError, "q target CSV header must start with y,q");
      has_left = cells.size() >= 3 && cells[2] == "q_left";
      continue;
    }
    try {
      y.push_back(std::stod(cells.at(0)));
      q.push_back(std::stod(cells.at(1)));
      ql.push_back(has_left && cells.size() >= 3 && !cells[2].empty() ? std::stod(cells[2]) : q.back());
    } catch (const std::exception&) {
      throw Error(Errc::ConfigError, "bad q target row: " + line);
    }
  }
  if (y.size() < 2) throw Error(Errc::InvalidQ, "q target needs at least the rows y = 1 and y = e^h");
  const std::size_t m = y.size() - 1;
  std::vector<double> q_right(q.begin(), q.begin() + static_cast<std::ptrdiff_t>(m));
  std::vector<double> q_left(ql);
  q_left[0] = q_left[m];
  return QTarget{PiecewiseQ(kappa, h, std::move(y), std::move(q_right), std::move(q_left)), c};
}

QTarget load_qtarget(const std::filesystem::path& csv_path, const std::filesystem::path& header_path) {
  return parse_qtarget(read_text(csv_path), read_json(header_path));
}

double QsetParams::total_scale() const { return scale_c * lattice_power(rescale_j, h); }

double sn_pmf_general(double rho, double r, std::int64_t k) {
  if (k < 0) return 0.0;
  const double b = (rho - 1.0) * (1.0 - r * rho) / (rho * (1.0 - r));
  if (k == 0) return 1.0 - b / (rho - 1.0);
  return b * std::pow(rho, -static_cast<double>(k));
}

double sn_pmf(double p, std::int64_t k) {
  if (!(p > 0.0 && p < 0.5)) throw Error(Errc::InvalidArgument, "p must lie in (0, 1/2)");
  if (k < 0) return 0.0;
  if (k == 0) return 1.0 / (2.0 * (1.0 - p));
  return (1.0 - 2.0 * p) / (2.0 * (1.0 - p)) * std::ldexp(1.0, -static_cast<int>(k));
}

double sn_upper_tail(const QsetParams& prm, std::int64_t n) {
  if (n < 0) return 1.0;
  return prm.b * std::pow(prm.rho, -static_cast<double>(n)) / (prm.rho - 1.0);
}

double qset_exact_tail(const QsetParams& prm, const QsetHB& h_dist, double x) {
  if (x < 1.0) return 1.0;
  const auto [n, z] = lattice_split(x, prm.h);
  return sn_upper_tail(prm, n) + sn_pmf_general(prm.rho, prm.r, n) * (1.0 - h_dist.cdf(z));
}

double QsetPair::expected_q(double x) const {
  const double c = target.scale_c;
  return std::pow(c, params.kappa) * target.q(x / c);
}

QsetPair qset_construct(const QTarget& target) {
  if (!(target.scale_c > 0.0)) throw Error(Errc::InvalidQ, "scale_c must be positive");
  QsetParams prm;
  prm.kappa = target.q.kappa();
  prm.h = target.q.span();
  prm.rho = std::exp(prm.kappa * prm.h);
  prm.scale_c = target.scale_c;

  // rescaling B by e^{jh} multiplies q by rho^j, so pick the smallest j with q(e^h -) rho^{-j} < 1
  const double top = target.q.seam_left();
  if (!(top > 0.0)) throw Error(Errc::InvalidQ, "q(e^h -) must be positive");
  std::int64_t j = 0;
  while (top * std::pow(prm.rho, -static_cast<double>(j)) >= 1.0) ++j;
  while (j > 0 && top * std::pow(prm.rho, -static_cast<double>(j - 1)) < 1.0) --j;
  prm.rescale_j = j;
  const PiecewiseQ qn = target.q.times(std::pow(prm.rho, -static_cast<double>(j)));
  const double c = qn.seam_left();

  prm.b = (prm.rho - 1.0) * c / prm.rho;
  prm.r = (prm.rho - 1.0 - prm.b * prm.rho) / (prm.rho * (prm.rho - 1.0 - prm.b));
  prm.p0 = prm.r * (prm.rho - 1.0) / (1.0 - prm.r);
  if (!(prm.r > 0.0 && prm.r * prm.rho < 1.0 && prm.p0 > 0.0 && prm.p0 < 1.0))
    throw Error(Errc::InvalidQ, "target leads to an invalid pair (r = " + std::to_string(prm.r) + ")");

  // H is nondecreasing by the class-Q property; it must also start nonnegative
  if (prm.rho / (prm.rho - 1.0) - qn(1.0) / prm.b < -1e-12) throw Error(Errc::InvalidQ, "H(1) < 0");
  QsetHB h_dist{qn, prm.b};

  ArithmeticLaw a_given_nonzero(prm.h, {}, 0.0, GeometricTail{prm.r, 0, 1.0});
  JointABLaw pair({ABComponent{prm.p0, std::nullopt, h_dist, prm.total_scale()},
                   ABComponent{1.0 - prm.p0, a_given_nonzero, ConstantB{0.0}, 1.0}});
  const double s = prm.total_scale();
  auto tail = TailFunction::exact([prm, h_dist, s](double x) { return qset_exact_tail(prm, h_dist, x / s); },
                                  "qset_exact");
  return QsetPair{prm, target, qn, std::move(pair), std::move(tail)};
}

double constant_q_tail(double p, double x) {
  if (!(x > 2.0)) throw Error(Errc::InvalidArgument, "closed form holds for x > 2");
  return (2.0 - 1.0 / (1.0 - p)) / x;
}

nlohmann::json to_json(const QsetParams& p) {
  return {{"kappa", p.kappa}, {"h", p.h},   {"rho", p.rho},           {"r", p.r},
          {"b", p.b},         {"p0", p.p0}, {"rescale_j", p.rescale_j}, {"scale_c", p.scale_c}};
}

}  // namespace latren
