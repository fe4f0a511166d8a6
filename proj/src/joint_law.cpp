#include "latren/joint_law.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "latren/error.hpp"

namespace latren {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

double QsetHB::cdf(double y) const {
  const double top = std::exp(q.span());
  if (y < 1.0) return 0.0;
  if (y >= top) return 1.0;
  const double rho = std::exp(q.kappa() * q.span());
  return std::clamp(rho / (rho - 1.0) - q(y) * std::pow(y, -q.kappa()) / b, 0.0, 1.0);
}

double QsetHB::quantile(double u) const {
  // smallest y with H(y) >= u; H is increasing, continuous between knots, jumps up at knots
  const auto& y = q.knots();
  const double rho = std::exp(q.kappa() * q.span());
  const auto h_right = [&](std::size_t i) { return cdf(y[i]); };
  const auto h_left = [&](std::size_t i) {
    return rho / (rho - 1.0) - q.left_values()[i] * std::pow(y[i], -q.kappa()) / b;
  };
  for (std::size_t i = 0; i + 1 < y.size(); ++i) {
    if (h_right(i) >= u) return y[i];
    if (h_left(i + 1) >= u) {
      double lo = y[i], hi = y[i + 1];
      for (int it = 0; it < 200 && hi - lo > 4e-16 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (cdf(mid) >= u ? hi : lo) = mid;
      }
      return hi;
    }
  }
  return std::nextafter(y.back(), 0.0);
}

double log_plus_mean(const BDist& b, double scale) {
  const double ls = std::log(std::abs(scale));
  return std::visit(
      [&](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, ConstantB>) {
          return d.value == 0.0 ? 0.0 : std::max(0.0, ls + std::log(std::abs(d.value)));
        } else if constexpr (std::is_same_v<T, GeometricPowerB>) {
          // log|sB| = ls + K log base; E of its positive part by summation
          double acc = 0.0, p = 1.0 - d.ratio;
          for (std::int64_t k = d.k_min; p > 1e-18; ++k, p *= d.ratio)
            acc += p * std::max(0.0, ls + static_cast<double>(k) * std::log(d.base));
          return acc;
        } else if constexpr (std::is_same_v<T, QsetHB>) {
          return std::max(0.0, ls + d.q.span());  // B < e^h
        } else if constexpr (std::is_same_v<T, ParetoB>) {
          // log(B / x_m) ~ Exp(alpha)
          return std::max(0.0, ls + std::log(d.x_m)) + 1.0 / d.alpha;
        } else {
          return std::max(0.0, ls + std::log(std::max(std::abs(d.lo), std::abs(d.hi))));
        }
      },
      b);
}

bool is_identically_zero(const BDist& b, double scale) {
  if (scale == 0.0) return true;
  const auto* c = std::get_if<ConstantB>(&b);
  return c && c->value == 0.0;
}

double b_tail(const BDist& b, double scale, double x) {
  if (!(scale > 0.0)) throw Error(Errc::InvalidArgument, "b_tail needs a positive scale");
  const double t = x / scale;
  return std::visit(
      [&](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, ConstantB>) {
          return d.value > t ? 1.0 : 0.0;
        } else if constexpr (std::is_same_v<T, GeometricPowerB>) {
          // smallest k >= k_min with base^k > t
          if (t < std::pow(d.base, static_cast<double>(d.k_min))) return 1.0;
          auto k = static_cast<std::int64_t>(std::floor(std::log(t) / std::log(d.base))) + 1;
          while (std::pow(d.base, static_cast<double>(k - 1)) > t) --k;
          while (std::pow(d.base, static_cast<double>(k)) <= t) ++k;
          return std::pow(d.ratio, static_cast<double>(std::max(k, d.k_min) - d.k_min));
        } else if constexpr (std::is_same_v<T, QsetHB>) {
          return 1.0 - d.cdf(t);
        } else if constexpr (std::is_same_v<T, ParetoB>) {
          return t < d.x_m ? 1.0 : std::pow(d.x_m / t, d.alpha);
        } else {
          return std::clamp((d.hi - t) / (d.hi - d.lo), 0.0, 1.0);
        }
      },
      b);
}

JointABLaw::JointABLaw(std::vector<ABComponent> components) : comps_(std::move(components)) {
  if (comps_.empty()) throw Error(Errc::InvalidLaw, "pair law needs at least one component");
  double total = 0.0;
  bool have_span = false;
  int generators = 0;
  for (const auto& c : comps_) {
    if (!(c.weight > 0.0)) throw Error(Errc::InvalidLaw, "component weights must be positive");
    total += c.weight;
    if (c.a) {
      if (c.a->zero_atom() > 0.0) throw Error(Errc::InvalidLaw, "conditional law of log A has an A = 0 atom");
      if (c.a->generator()) ++generators;
      if (!have_span) {
        h_ = c.a->span();
        have_span = true;
      } else if (std::abs(h_ - c.a->span()) > 1e-12 * h_) {
        throw Error(Errc::SpanMismatch, "components use different spans");
      }
    }
    if (const auto* g = std::get_if<GeometricPowerB>(&c.b); g && !(g->ratio > 0.0 && g->ratio < 1.0 && g->base > 0.0))
      throw Error(Errc::InvalidLaw, "geometric-power B needs ratio in (0,1) and base > 0");
    if (const auto* p = std::get_if<ParetoB>(&c.b); p && !(p->x_m > 0.0 && p->alpha > 0.0))
      throw Error(Errc::InvalidLaw, "Pareto B needs x_m > 0 and alpha > 0");
    if (const auto* u = std::get_if<UniformB>(&c.b); u && !(u->hi > u->lo))
      throw Error(Errc::InvalidLaw, "uniform B needs hi > lo");
  }
  if (generators > 1) throw Error(Errc::InvalidLaw, "at most one component may carry an infinite-support A law");
  if (std::abs(total - 1.0) > 1e-12) throw Error(Errc::InvalidLaw, "component weights must sum to 1");
}

ArithmeticLaw JointABLaw::marginal_a() const {
  std::map<std::int64_t, double> atoms;
  double zero = 0.0;
  std::optional<Generator> gen;
  for (const auto& c : comps_) {
    if (!c.a) {
      zero += c.weight;
      continue;
    }
    const auto& d = c.a->dense_masses();
    for (std::size_t i = 0; i < d.size(); ++i)
      if (d[i] > 0.0) atoms[c.a->dense_offset() + static_cast<std::int64_t>(i)] += c.weight * d[i];
    if (c.a->generator()) {
      gen = *c.a->generator();
      std::visit([&](auto& g) { g.weight *= c.weight; }, *gen);
    }
  }
  return ArithmeticLaw(h_, atoms, zero, gen, SpanCheck::Relaxed);
}

bool JointABLaw::is_ab0() const {
  return std::all_of(comps_.begin(), comps_.end(),
                     [](const ABComponent& c) { return !c.a || is_identically_zero(c.b, c.b_scale); });
}

bool JointABLaw::b_nonnegative() const {
  return std::all_of(comps_.begin(), comps_.end(), [](const ABComponent& c) {
    if (is_identically_zero(c.b, c.b_scale)) return true;
    if (c.b_scale < 0.0) return false;
    if (const auto* k = std::get_if<ConstantB>(&c.b)) return k->value >= 0.0;
    if (const auto* u = std::get_if<UniformB>(&c.b)) return u->lo >= 0.0;
    return true;
  });
}

double JointABLaw::log_plus_b_mean() const {
  double acc = 0.0;
  for (const auto& c : comps_) acc += c.weight * (c.b_scale == 0.0 ? 0.0 : log_plus_mean(c.b, c.b_scale));
  return acc;
}

JointABLaw JointABLaw::with_b_scale(double c) const {
  auto comps = comps_;
  for (auto& comp : comps) comp.b_scale *= c;
  return JointABLaw(std::move(comps));
}

namespace {

nlohmann::json b_to_json(const BDist& b) {
  return std::visit(
      [](const auto& d) -> nlohmann::json {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, ConstantB>) return {{"kind", "constant"}, {"value", d.value}};
        else if constexpr (std::is_same_v<T, GeometricPowerB>)
          return {{"kind", "geometric_power"}, {"base", d.base}, {"ratio", d.ratio}, {"k_min", d.k_min}};
        else if constexpr (std::is_same_v<T, QsetHB>)
          return {{"kind", "qset_h"}, {"b", d.b}, {"q", d.q.to_json()}};
        else if constexpr (std::is_same_v<T, ParetoB>)
          return {{"kind", "pareto"}, {"x_m", d.x_m}, {"alpha", d.alpha}};
        else return {{"kind", "uniform"}, {"lo", d.lo}, {"hi", d.hi}};
      },
      b);
}

BDist b_from_json(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "constant") return ConstantB{j.at("value").get<double>()};
  if (kind == "geometric_power")
    return GeometricPowerB{j.at("base").get<double>(), j.at("ratio").get<double>(), j.value("k_min", std::int64_t{0})};
  if (kind == "qset_h") {
    const auto& q = j.at("q");
    return QsetHB{PiecewiseQ(q.at("kappa").get<double>(), q.at("h").get<double>(), q.at("y").get<std::vector<double>>(),
                             q.at("q_right").get<std::vector<double>>(), q.at("q_left").get<std::vector<double>>()),
                  j.at("b").get<double>()};
  }
  if (kind == "pareto") return ParetoB{j.at("x_m").get<double>(), j.at("alpha").get<double>()};
  if (kind == "uniform") return UniformB{j.at("lo").get<double>(), j.at("hi").get<double>()};
  throw Error(Errc::ConfigError, "unknown B kind '" + kind + "'");
}

}  // namespace

nlohmann::json to_json(const JointABLaw& law) {
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& c : law.components()) {
    nlohmann::json jc = {{"weight", c.weight}, {"b", b_to_json(c.b)}, {"b_scale", c.b_scale}};
    jc["a"] = c.a ? to_json(*c.a) : nlohmann::json("zero");
    comps.push_back(jc);
  }
  return {{"components", comps}};
}

JointABLaw joint_law_from_json(const nlohmann::json& j) {
  try {
    std::vector<ABComponent> comps;
    for (const auto& jc : j.at("components")) {
      ABComponent c{jc.at("weight").get<double>(), std::nullopt, b_from_json(jc.at("b")), jc.value("b_scale", 1.0)};
      if (!(jc.at("a").is_string() && jc.at("a").get<std::string>() == "zero")) c.a = law_from_json(jc.at("a"));
      comps.push_back(std::move(c));
    }
    return JointABLaw(std::move(comps));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ConfigError, std::string("pair JSON: ") + e.what());
  }
}

}  // namespace latren
