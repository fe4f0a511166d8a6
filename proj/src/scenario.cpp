#include "latren/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <functional>
#include <iomanip>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>

#include "latren/cramer_tilt.hpp"
#include "latren/error.hpp"
#include "latren/fixed_point_sim.hpp"
#include "latren/implicit_q.hpp"
#include "latren/joint_law.hpp"
#include "latren/lattice_law.hpp"
#include "latren/oracles.hpp"
#include "latren/renewal.hpp"
#include "latren/series.hpp"

#ifndef LATREN_VERSION
#define LATREN_VERSION "0.0.0"
#endif

namespace latren {

using nlohmann::json;

namespace {

constexpr double kLn2 = std::numbers::ln2;

json two_atom_kernel() {
  return {{"span_h", 1.0}, {"atoms", json::array({json::array({1, 0.5}), json::array({2, 0.5})})}};
}

json power_kernel(double exponent) {
  return {{"span_h", 1.0}, {"generator", {{"kind", "power"}, {"params", {{"exponent", exponent}, {"k_min", 1}}}}}};
}

json kernel_defaults(json law, std::int64_t n_hi, std::int64_t band_from, std::int64_t band_to) {
  return {{"law", std::move(law)}, {"input", "kernel"}, {"s_max", 50.0}, {"alpha", nullptr},
          {"n_lo", 0},             {"n_hi", n_hi},      {"band_from", band_from}, {"band_to", band_to},
          {"tol", 1e-12}};
}

const std::map<std::string, json>& scenario_defaults() {
  static const std::map<std::string, json> d = [] {
    std::map<std::string, json> m;
    m["stpetersburg"] = {{"grid_points", 64},   {"j_limit", 100000}, {"pushforward_k_max", 40},
                         {"tol_tail", 1e-15},   {"tol_pushforward", 1e-14}, {"tol_q", 1e-6},
                         {"mc_samples", 100000}, {"mc_x", {2.0, 3.0, 4.0, 6.0, 8.0}}, {"mc_z_max", 3.0}};
    m["qset-roundtrip"] = {{"target", {{"builtin", "st_petersburg_shape"}}},
                           {"grid_points", 64},
                           {"n_count", 5},
                           {"tol", 1e-9}};
    m["constant-q"] = {{"p", 0.25}, {"x", {4.0, 2.5, 3.0, 10.0, 1000.0}}, {"tol", 1e-12}};
    {
      json b = kernel_defaults(two_atom_kernel(), 200, 150, 200);
      b["ratio_tol"] = 1e-4;
      b["recursion_tol"] = 1e-10;
      m["blackwell"] = b;
    }
    {
      json s = kernel_defaults(power_kernel(1.7), 10000, 5000, 10000);
      s["ratio_lo"] = 0.9;
      s["ratio_hi"] = 1.1;
      s["require_decreasing"] = true;
      m["srt"] = s;
    }
    {
      json s = kernel_defaults(power_kernel(2.5), 10000, 5000, 10000);
      s["theta"] = 0.5;
      s["ratio_lo"] = 0.9;
      s["ratio_hi"] = 1.1;
      s["subexp_tol"] = 0.02;
      m["defective"] = s;
    }
    const json mc = {{"pair", "st_petersburg"}, {"samples", 100000},     {"x", {2.0, 3.0, 4.0, 6.0, 8.0}},
                     {"z_max", 3.0},            {"compare_with", {"ab0_exact"}}, {"weight_floor", 1e-9},
                     {"max_steps", 10000},      {"ecdf_points", 2000},   {"write_samples", false}};
    m["mc-perpetuity"] = mc;
    m["mc-max"] = mc;
    m["ifs-sandwich"] = {{"pair", "st_petersburg"}, {"map", "hypot"}, {"paths", 100000}, {"steps", 1000},
                         {"grid_points", 16},       {"n_from", 1},    {"n_to", 12},       {"min_exceedances", 100}};
    m["conditions-check"] = {{"pair", "st_petersburg"}, {"x_lo", -20.0}, {"x_hi", 20.0}, {"delta", 0.5},
                             {"rel", 1e-3},             {"grid_points", 16}};
    return m;
  }();
  return d;
}

bool same_kind(const json& def, const json& v) {
  if (def.is_null()) return true;
  if (def.is_number()) return v.is_number();
  return def.type() == v.type();
}

Check make_check(std::string name, bool ok, double value, double threshold, std::string detail = {}) {
  return Check{std::move(name), ok, value, threshold, std::move(detail)};
}

Check at_most(std::string name, double value, double threshold) {
  return make_check(std::move(name), value <= threshold, value, threshold);
}

// pair given by name, an inline joint law, or {"qset": target}
struct PairSource {
  JointABLaw pair;
  std::optional<TailFunction> exact;
  std::string label;
  json detail = json::object();
};

QTarget resolve_target(const json& t, const std::filesystem::path& base) {
  try {
    const double kappa = t.value("kappa", 1.0);
    const double h = t.value("h", kLn2);
    const double c = t.value("scale_c", 1.0);
    if (t.contains("builtin")) {
      const auto kind = t.at("builtin").get<std::string>();
      if (kind == "constant") return QTarget{PiecewiseQ::constant(kappa, h, t.at("c").get<double>()), c};
      if (kind == "st_petersburg_shape") return QTarget{PiecewiseQ(1.0, kLn2, {1.0, 2.0}, {1.0}, {2.0, 2.0}), c};
      throw Error(Errc::ConfigError, "unknown target builtin '" + kind + "'");
    }
    if (t.contains("rows")) {
      std::ostringstream csv;
      csv << "y,q,q_left\n";
      for (const auto& r : t.at("rows")) {
        csv << format_double(r.at(0).get<double>()) << ',' << format_double(r.at(1).get<double>()) << ',';
        if (r.size() > 2) csv << format_double(r.at(2).get<double>());
        csv << '\n';
      }
      return parse_qtarget(csv.str(), json{{"kappa", kappa}, {"h", h}, {"scale_c", c}});
    }
    if (t.contains("csv")) {
      const auto header = t.contains("header") ? read_json(base / t.at("header").get<std::string>())
                                               : json{{"kappa", kappa}, {"h", h}, {"scale_c", c}};
      return parse_qtarget(read_text(base / t.at("csv").get<std::string>()), header);
    }
  } catch (const json::exception& e) {
    throw Error(Errc::ConfigError, std::string("target: ") + e.what());
  }
  throw Error(Errc::ConfigError, "target needs one of builtin, rows, csv");
}

PairSource resolve_pair(const json& desc, const std::filesystem::path& base) {
  if (desc.is_string()) {
    if (desc.get<std::string>() != "st_petersburg")
      throw Error(Errc::ConfigError, "unknown pair '" + desc.get<std::string>() + "'");
    return PairSource{st_petersburg_pair(), st_petersburg_tail_function(), "st_petersburg"};
  }
  if (desc.is_object() && desc.contains("qset")) {
    auto qp = qset_construct(resolve_target(desc.at("qset"), base));
    return PairSource{qp.pair, qp.tail, "qset", to_json(qp.params)};
  }
  if (desc.is_object() && desc.contains("components")) return PairSource{joint_law_from_json(desc), std::nullopt, "inline"};
  throw Error(Errc::ConfigError, "pair must be \"st_petersburg\", {\"qset\": ...} or a joint law");
}

struct Kernel {
  ArithmeticLaw f;
  double theta = 1.0;
  double mu = 0.0;
  std::optional<double> alpha;
  json info = json::object();
};

Kernel resolve_kernel(const json& p) {
  const auto law = law_from_json(p.at("law"));
  const auto input = p.at("input").get<std::string>();
  RegimeHint hint;
  if (!p.at("alpha").is_null()) hint.alpha = p.at("alpha").get<double>();
  if (input == "log_a") {
    auto info = analyze(law, p.at("s_max").get<double>(), hint);
    Kernel k{info.tilted, 1.0, info.mu, hint.alpha, to_json(info)};
    if (const auto* d = std::get_if<Defective>(&info.regime)) k.theta = d->theta;
    if (const auto* r = std::get_if<InfiniteMeanRegVar>(&info.regime)) k.alpha = r->alpha;
    return k;
  }
  if (input != "kernel") throw Error(Errc::ConfigError, "input must be kernel or log_a");
  Kernel k{law, 1.0, law.lattice_mean(), hint.alpha};
  if (!k.alpha && std::isinf(k.mu) && law.generator())
    if (const auto* pw = std::get_if<PowerTail>(&*law.generator())) k.alpha = pw->exponent - 1.0;
  k.info = {{"input", "kernel"}, {"mean", k.mu}, {"law", to_json(law)}};
  return k;
}

RenewalOptions renewal_options(const json& p) {
  RenewalOptions o;
  o.tol = p.at("tol").get<double>();
  return o;
}

Table convergence_table(const ConvergenceReport& r) {
  Table t({"n", "u", "normalizer", "ratio", "trunc_error"});
  for (const auto& row : r.rows) t.add({row.n, row.u, row.normalizer, row.ratio, row.trunc_error});
  return t;
}

Table decade_table(const ConvergenceReport& r) {
  Table t({"from", "to", "mean_abs_dev"});
  for (const auto& d : r.decades) t.add({d.from, d.to, d.mean_abs_dev});
  return t;
}

double dyadic_q(double x) {
  int e = 0;
  const double m = std::frexp(x, &e);
  return 2.0 * m;
}

ScenarioOutput run_stpetersburg(const ScenarioConfig& cfg) {
  const auto& p = cfg.params;
  ScenarioOutput out;
  const auto pair = st_petersburg_pair();

  double tail_err = 0.0;
  for (const auto& [x, v] : std::vector<std::pair<double, double>>{{2.0, 0.5}, {3.0, 0.5}, {4.0, 0.25}})
    tail_err = std::max(tail_err, std::abs(st_petersburg_tail(x) - v));
  out.checks.push_back(at_most("tail_values", tail_err, p.at("tol_tail").get<double>()));

  const auto k_max = p.at("pushforward_k_max").get<std::int64_t>();
  Table push({"k", "pushforward", "expected", "pmf_from_tail", "abs_err"});
  double push_err = 0.0, pmf_err = 0.0;
  for (std::int64_t k = 1; k <= k_max; ++k) {
    const double expected = st_petersburg_pmf(k);
    const double v = st_petersburg_pushforward(pair, k);
    const double xk = std::ldexp(1.0, static_cast<int>(k));
    const double from_tail = st_petersburg_tail(std::nextafter(xk, 0.0)) - st_petersburg_tail(xk);
    push_err = std::max(push_err, std::abs(v - expected));
    pmf_err = std::max(pmf_err, std::abs(from_tail - expected));
    push.add({k, v, expected, from_tail, std::abs(v - expected)});
  }
  out.checks.push_back(at_most("pushforward_fixed_point", push_err, p.at("tol_pushforward").get<double>()));
  out.checks.push_back(at_most("pmf_from_tail_differences", pmf_err, p.at("tol_tail").get<double>()));
  out.tables.emplace_back("pushforward", std::move(push));

  const auto marginal = pair.marginal_a();
  const auto info = analyze(marginal, 50.0);
  out.report["cramer"] = to_json(info);
  const PsiFunction psi(st_petersburg_tail_function(), marginal, info.kappa);
  const auto grid = jittered_grid(kLn2, p.at("grid_points").get<std::size_t>());
  const auto q = q_from_psi(psi, info.mu, grid, p.at("j_limit").get<std::int64_t>());
  Table qt({"x", "q", "expected", "abs_err", "trunc_error"});
  double q_err = 0.0;
  for (std::size_t i = 0; i < q.x.size(); ++i) {
    const double e = dyadic_q(q.x[i]);
    q_err = std::max(q_err, std::abs(q.q[i] - e));
    qt.add({q.x[i], q.q[i], e, std::abs(q.q[i] - e), q.trunc_error[i]});
  }
  out.checks.push_back(at_most("q_from_psi_matches_dyadic_profile", q_err, p.at("tol_q").get<double>()));
  const auto viol = class_q_violations(q);
  out.checks.push_back(make_check("class_q", viol.empty(), static_cast<double>(viol.size()), 0.0));
  out.tables.emplace_back("q_grid", std::move(qt));

  const auto n_mc = p.at("mc_samples").get<std::size_t>();
  if (n_mc > 0) {
    SimConfig sc;
    sc.sample_count = n_mc;
    sc.seed = cfg.seed;
    auto res = sample_ab0_exact(pair, sc);
    const auto tail = TailFunction::empirical(std::move(res.samples));
    const double z_max = p.at("mc_z_max").get<double>();
    Table mt({"x", "exact", "empirical", "se", "z"});
    double worst = 0.0;
    for (const auto& xv : p.at("mc_x")) {
      const double x = xv.get<double>();
      const double ex = st_petersburg_tail(x);
      const double se = binomial_se(ex, n_mc);
      const double z = (tail(x) - ex) / se;
      worst = std::max(worst, std::abs(z));
      mt.add({x, ex, tail(x), se, z});
    }
    out.checks.push_back(at_most("mc_tail_within_se", worst, z_max));
    out.tables.emplace_back("mc_tail", std::move(mt));
    out.report["mc_samples"] = n_mc;
  }
  out.report["grid_points"] = grid.size();
  out.report["max_q_error"] = q_err;
  out.report["max_pushforward_error"] = push_err;
  return out;
}

ScenarioOutput run_qset_roundtrip(const ScenarioConfig& cfg) {
  const auto& p = cfg.params;
  ScenarioOutput out;
  const auto target = resolve_target(p.at("target"), cfg.base_dir);
  const auto qp = qset_construct(target);
  const double h = qp.params.h, kappa = qp.params.kappa, c = target.scale_c;

  const auto marginal = qp.pair.marginal_a();
  const double ea = mellin_moment(marginal, kappa);
  out.checks.push_back(at_most("cramer_condition", std::abs(ea - 1.0), 1e-12));

  const auto n0 = static_cast<std::int64_t>(std::floor(std::log(qp.params.total_scale()) / h)) + 2;
  const auto n_count = p.at("n_count").get<std::int64_t>();
  std::vector<double> grid;
  for (double x : jittered_grid(h, p.at("grid_points").get<std::size_t>()))
    if (!target.q.is_jump(x / c, 1e-9)) grid.push_back(x);
  const auto res = q_from_tail(qp.tail, kappa, h, NormalizerKind::Unit, [](std::int64_t) { return 1.0; }, grid, n0,
                               n0 + n_count - 1);
  Table t({"n", "x", "recovered", "target", "abs_err"});
  double err = 0.0;
  for (const auto& row : res.table) {
    const double e = qp.expected_q(row.x);
    const double d = std::abs(row.value - e) / std::max(1.0, std::abs(e));
    err = std::max(err, d);
    t.add({row.n, row.x, row.value, e, std::abs(row.value - e)});
  }
  out.checks.push_back(at_most("round_trip", err, p.at("tol").get<double>()));
  const auto viol = class_q_violations(res.q);
  out.checks.push_back(make_check("class_q", viol.empty(), static_cast<double>(viol.size()), 0.0));
  out.tables.emplace_back("roundtrip", std::move(t));
  out.report["params"] = to_json(qp.params);
  out.report["target"] = target.q.to_json();
  out.report["pair"] = to_json(qp.pair);
  out.report["n_range"] = {n0, n0 + n_count - 1};
  out.report["max_rel_error"] = err;
  return out;
}

ScenarioOutput run_constant_q(const ScenarioConfig& cfg) {
  const auto& p = cfg.params;
  ScenarioOutput out;
  const double prob = p.at("p").get<double>();
  if (!(prob > 0.0 && prob < 0.5)) throw Error(Errc::ConfigError, "p must lie in (0, 1/2)");
  const double c = (1.0 - 2.0 * prob) / (1.0 - prob);
  const auto qp = qset_construct(QTarget{PiecewiseQ::constant(1.0, kLn2, c), 1.0});
  out.checks.push_back(at_most("p_recovered", std::abs(qp.params.r - prob), 1e-12));
  Table t({"x", "exact_tail", "closed_form", "abs_err"});
  double err = 0.0;
  for (const auto& xv : p.at("x")) {
    const double x = xv.get<double>();
    const double a = qp.tail(x), b = constant_q_tail(prob, x);
    err = std::max(err, std::abs(a - b));
    t.add({x, a, b, std::abs(a - b)});
  }
  out.checks.push_back(at_most("closed_form_tail", err, p.at("tol").get<double>()));
  long double total = 0.0L;
  for (std::int64_t k = 0; k < 1100; ++k) total += sn_pmf(prob, k);
  out.checks.push_back(at_most("sn_pmf_total_mass", std::abs(static_cast<double>(total) - 1.0), 1e-14));
  out.tables.emplace_back("tail", std::move(t));
  out.report["p"] = prob;
  out.report["c"] = c;
  out.report["params"] = to_json(qp.params);
  return out;
}

ScenarioOutput run_blackwell(const ScenarioConfig& cfg) {
  const auto& p = cfg.params;
  ScenarioOutput out;
  const auto k = resolve_kernel(p);
  const auto n_lo = p.at("n_lo").get<std::int64_t>(), n_hi = p.at("n_hi").get<std::int64_t>();
  const auto u = renewal_sequence(k.f, k.theta, n_lo, n_hi, renewal_options(p));
  const auto rep = blackwell_check(u, k.mu, p.at("band_from").get<std::int64_t>(), p.at("band_to").get<std::int64_t>());
  const double tol = p.at("ratio_tol").get<double>();
  out.checks.push_back(make_check("blackwell_band", rep.band_within(1.0 - tol, 1.0 + tol),
                                  std::max(std::abs(rep.band_min - 1.0), std::abs(rep.band_max - 1.0)), tol));

  // u_0 = 1, u_n = sum_k f_k u_{n-k} for kernels on {1, 2, ...}
  if (k.f.has_finite_support() && k.f.min_index() >= 1) {
    std::vector<long double> r(static_cast<std::size_t>(n_hi + 1), 0.0L);
    r[0] = 1.0L;
    for (std::int64_t n = 1; n <= n_hi; ++n)
      for (std::int64_t j = k.f.min_index(); j <= std::min(n, *k.f.max_index()); ++j)
        r[static_cast<std::size_t>(n)] += k.f.mass(j) * r[static_cast<std::size_t>(n - j)];
    double err = 0.0;
    for (std::int64_t n = std::max<std::int64_t>(0, n_lo); n <= n_hi; ++n)
      err = std::max(err, std::abs(u.at(n) - static_cast<double>(r[static_cast<std::size_t>(n)])));
    out.checks.push_back(at_most("recursion_oracle", err, p.at("recursion_tol").get<double>()));
  }
  out.tables.emplace_back("convergence", convergence_table(rep));
  out.tables.emplace_back("decades", decade_table(rep));
  out.report["kernel"] = k.info;
  out.report["renewal"] = summary_json(u);
  out.report["convergence"] = summary_json(rep);
  return out;
}

ScenarioOutput run_srt(const ScenarioConfig& cfg) {
  const auto& p = cfg.params;
  ScenarioOutput out;
  const auto k = resolve_kernel(p);
  if (!k.alpha) throw Error(Errc::ConfigError, "srt needs alpha (from a power generator or the alpha key)");
  const auto u = renewal_sequence(k.f, k.theta, p.at("n_lo").get<std::int64_t>(), p.at("n_hi").get<std::int64_t>(),
                                  renewal_options(p));
  const auto rep = srt_check(u, k.f, *k.alpha, p.at("band_from").get<std::int64_t>(), p.at("band_to").get<std::int64_t>());
  const double lo = p.at("ratio_lo").get<double>(), hi = p.at("ratio_hi").get<double>();
  out.checks.push_back(make_check("srt_band", rep.band_within(lo, hi), rep.band_min, lo,
                                  "ratio range [" + format_double(rep.band_min) + ", " + format_double(rep.band_max) + "]"));
  if (p.at("require_decreasing").get<bool>())
    out.checks.push_back(make_check("decade_deviation_decreasing", rep.decades_decreasing(),
                                    rep.decades.empty() ? 0.0 : rep.decades.back().mean_abs_dev, 0.0));
  out.checks.push_back(at_most("c_half_equals_two_over_pi", std::abs(c_alpha(0.5) - 2.0 / std::numbers::pi), 1e-15));
  out.tables.emplace_back("convergence", convergence_table(rep));
  out.tables.emplace_back("decades", decade_table(rep));
  out.report["kernel"] = k.info;
  out.report["alpha"] = *k.alpha;
  out.report["c_alpha"] = c_alpha(*k.alpha);
  out.report["renewal"] = summary_json(u);
  out.report["convergence"] = summary_json(rep);
  return out;
}

ScenarioOutput run_defective(const ScenarioConfig& cfg) {
  const auto& p = cfg.params;
  ScenarioOutput out;
  auto k = resolve_kernel(p);
  if (p.at("input").get<std::string>() == "kernel") k.theta = p.at("theta").get<double>();
  const auto n_hi = p.at("n_hi").get<std::int64_t>();
  const auto u = renewal_sequence(k.f, k.theta, p.at("n_lo").get<std::int64_t>(), n_hi, renewal_options(p));
  const auto rep =
      defective_check(u, k.f, k.theta, p.at("band_from").get<std::int64_t>(), p.at("band_to").get<std::int64_t>());
  const double lo = p.at("ratio_lo").get<double>(), hi = p.at("ratio_hi").get<double>();
  out.checks.push_back(make_check("defective_band", rep.band_within(lo, hi), rep.band_min, lo,
                                  "normalized ratio range [" + format_double(rep.band_min) + ", " +
                                      format_double(rep.band_max) + "], limit " + format_double(rep.limit)));
  const auto sd = subexp_diagnostic(k.f, n_hi);
  const double tol = p.at("subexp_tol").get<double>();
  out.checks.push_back(at_most("subexp_next_ratio", sd.max_next_dev, tol));
  out.checks.push_back(at_most("subexp_square_ratio", sd.max_square_dev, tol));
  Table st({"n", "next_ratio", "square_ratio"});
  for (const auto& r : sd.rows) st.add({r.n, r.next_ratio, r.square_ratio});
  out.tables.emplace_back("convergence", convergence_table(rep));
  out.tables.emplace_back("decades", decade_table(rep));
  out.tables.emplace_back("subexp", std::move(st));
  out.report["kernel"] = k.info;
  out.report["theta"] = k.theta;
  out.report["renewal"] = summary_json(u);
  out.report["convergence"] = summary_json(rep);
  out.report["subexp"] = {{"max_next_dev", sd.max_next_dev}, {"max_square_dev", sd.max_square_dev},
                          {"sup_ratio", sd.sup_ratio}};
  return out;
}

using Sampler = std::function<SampleResult(const JointABLaw&, const SimConfig&)>;

Sampler sampler_by_name(const std::string& s) {
  if (s == "perpetuity") return sample_perpetuity;
  if (s == "max") return sample_max;
  if (s == "ab0_exact") return sample_ab0_exact;
  throw Error(Errc::ConfigError, "unknown sampler '" + s + "'");
}

ScenarioOutput run_mc(const ScenarioConfig& cfg, const std::string& own) {
  const auto& p = cfg.params;
  ScenarioOutput out;
  const auto src = resolve_pair(p.at("pair"), cfg.base_dir);
  SimConfig sc;
  sc.sample_count = p.at("samples").get<std::size_t>();
  sc.seed = cfg.seed;
  sc.stop.weight_floor = p.at("weight_floor").get<double>();
  sc.stop.max_steps = p.at("max_steps").get<std::int64_t>();
  auto res = sampler_by_name(own)(src.pair, sc);
  out.report["pair"] = src.label;
  out.report["pair_detail"] = src.detail;
  out.report["samples"] = sc.sample_count;
  out.report["truncated"] = res.truncated;
  out.report["bias_bound"] = res.bias_bound;
  if (p.at("write_samples").get<bool>()) out.samples.emplace_back("samples_" + own, res.samples);
  const auto tail = TailFunction::empirical(std::move(res.samples));
  out.tables.emplace_back("ecdf", ecdf_table(tail.sorted_samples(), p.at("ecdf_points").get<std::size_t>()));

  if (src.exact) {
    const double z_max = p.at("z_max").get<double>();
    Table t({"x", "exact", "empirical", "se", "z"});
    double worst = 0.0;
    for (const auto& xv : p.at("x")) {
      const double x = xv.get<double>();
      const double ex = (*src.exact)(x);
      const double se = binomial_se(ex, sc.sample_count);
      const double z = se > 0.0 ? (tail(x) - ex) / se : (tail(x) == ex ? 0.0 : INFINITY);
      worst = std::max(worst, std::abs(z));
      t.add({x, ex, tail(x), se, z});
    }
    out.checks.push_back(at_most("exact_tail_within_se", worst, z_max));
    out.tables.emplace_back("tail_check", std::move(t));
  }

  Table ks({"against", "ks", "critical_1pct"});
  std::uint64_t offset = 1;
  for (const auto& other : p.at("compare_with")) {
    const auto name = other.get<std::string>();
    if (name == own) throw Error(Errc::ConfigError, "compare_with must name a different sampler");
    if (name == "ab0_exact" && !src.pair.is_ab0()) continue;
    SimConfig oc = sc;
    oc.seed = cfg.seed + 0x9E3779B97F4A7C15ULL * offset++;  // independent stream
    auto r2 = sampler_by_name(name)(src.pair, oc);
    std::sort(r2.samples.begin(), r2.samples.end());
    const double d = ks_statistic(tail.sorted_samples(), r2.samples);
    const double crit = ks_critical_1pct(sc.sample_count, r2.samples.size());
    out.checks.push_back(at_most("ks_vs_" + name, d, crit));
    ks.add({name, d, crit});
  }
  out.tables.emplace_back("ks", std::move(ks));
  return out;
}

ScenarioOutput run_ifs_sandwich(const ScenarioConfig& cfg) {
  const auto& p = cfg.params;
  ScenarioOutput out;
  const auto src = resolve_pair(p.at("pair"), cfg.base_dir);
  IFSDescriptor d{ifs_map_from_string(p.at("map").get<std::string>()), src.pair, p.at("steps").get<std::int64_t>()};
  validate_sandwich(d, cfg.seed);
  SimConfig sc;
  sc.sample_count = p.at("paths").get<std::size_t>();
  sc.seed = cfg.seed;
  const auto res = sample_ifs(d, sc);
  out.checks.push_back(make_check("pathwise_sandwich", res.violations == 0, static_cast<double>(res.violations), 0.0));

  const auto info = analyze(src.pair.marginal_a(), 50.0);
  const double h = src.pair.span();
  const auto grid = jittered_grid(h, p.at("grid_points").get<std::size_t>());
  const auto n_from = p.at("n_from").get<std::int64_t>(), n_to = p.at("n_to").get<std::int64_t>();
  const auto profile = [&](const std::vector<double>& s) {
    return q_from_tail(TailFunction::empirical(s), info.kappa, h, NormalizerKind::Unit,
                       [](std::int64_t) { return 1.0; }, grid, n_from, n_to, true);
  };
  const auto lo = profile(res.lower), mid = profile(res.samples), hi = profile(res.upper);
  const auto min_exc = p.at("min_exceedances").get<std::size_t>();
  Table t({"n", "x", "lower", "ifs", "upper", "exc_lower", "exc_ifs", "exc_upper", "compared", "inside"});
  std::size_t compared = 0, outside = 0;
  for (std::size_t i = 0; i < mid.table.size(); ++i) {
    const auto &a = lo.table[i], &b = mid.table[i], &c = hi.table[i];
    const bool use = std::min({a.exceedances, b.exceedances, c.exceedances}) >= min_exc;
    const bool inside = a.value <= b.value && b.value <= c.value;
    if (use) {
      ++compared;
      if (!inside) ++outside;
    }
    t.add({b.n, b.x, a.value, b.value, c.value, static_cast<std::int64_t>(a.exceedances),
           static_cast<std::int64_t>(b.exceedances), static_cast<std::int64_t>(c.exceedances),
           static_cast<std::int64_t>(use), static_cast<std::int64_t>(inside)});
  }
  out.checks.push_back(make_check("profile_between_bounds", outside == 0 && compared > 0,
                                  static_cast<double>(outside), 0.0,
                                  std::to_string(compared) + " grid points with enough exceedances"));
  out.tables.emplace_back("profiles", std::move(t));
  out.report["map"] = to_string(d.map);
  out.report["paths"] = sc.sample_count;
  out.report["steps"] = d.steps;
  out.report["checked_steps"] = res.checked_steps;
  out.report["compared_points"] = compared;
  out.report["kappa"] = info.kappa;
  return out;
}

ScenarioOutput run_conditions(const ScenarioConfig& cfg) {
  const auto& p = cfg.params;
  ScenarioOutput out;
  const auto src = resolve_pair(p.at("pair"), cfg.base_dir);
  if (!src.exact) throw Error(Errc::ConfigError, "conditions-check needs a pair with an exact tail");
  const auto marginal = src.pair.marginal_a();
  const auto info = analyze(marginal, 50.0);
  const PsiFunction psi(*src.exact, marginal, info.kappa);
  const double x_lo = p.at("x_lo").get<double>(), x_hi = p.at("x_hi").get<double>();
  const double rel = p.at("rel").get<double>();
  Table t({"mode", "delta", "x_lo", "x_hi", "value", "low_end", "high_end", "looks_finite"});
  json reports = json::array();
  for (const auto& [mode, name, delta] :
       std::vector<std::tuple<ConditionMode, std::string, double>>{{ConditionMode::Integral, "integral", 0.0},
                                                                   {ConditionMode::Sum, "sum", 0.0},
                                                                   {ConditionMode::DeltaIntegral, "delta_integral",
                                                                    p.at("delta").get<double>()}}) {
    const auto r = check_conditions(psi, mode, x_lo, x_hi, delta);
    out.checks.push_back(make_check(name + "_finite", r.looks_finite(rel), std::max(r.low_end, r.high_end), rel * r.value));
    t.add({name, r.delta, r.x_lo, r.x_hi, r.value, r.low_end, r.high_end, static_cast<std::int64_t>(r.looks_finite(rel))});
    reports.push_back(to_json(r));
  }
  // both implicit routes should give the same profile when the conditions hold
  const auto grid = jittered_grid(src.pair.span(), p.at("grid_points").get<std::size_t>());
  const auto q1 = q_from_psi(psi, info.mu, grid);
  const auto q2 = q_from_smoothing(psi, info.mu, grid);
  Table qt({"x", "q_sum", "q_smoothing", "abs_diff"});
  double diff = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    diff = std::max(diff, std::abs(q1.q[i] - q2.q[i]));
    qt.add({grid[i], q1.q[i], q2.q[i], std::abs(q1.q[i] - q2.q[i])});
  }
  out.report["q_route_max_diff"] = diff;
  out.tables.emplace_back("conditions", std::move(t));
  out.tables.emplace_back("q_routes", std::move(qt));
  out.report["conditions"] = reports;
  out.report["cramer"] = to_json(info);
  out.report["pair"] = src.label;
  return out;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

}  // namespace

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = {"stpetersburg", "qset-roundtrip", "constant-q",    "blackwell",
                                                 "srt",          "defective",      "mc-perpetuity", "mc-max",
                                                 "ifs-sandwich", "conditions-check"};
  return names;
}

const char* version_string() { return LATREN_VERSION; }

bool ScenarioOutput::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

ScenarioConfig parse_scenario(const std::string& text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::ConfigError, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(Errc::ConfigError, "config must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (key != "scenario" && key != "seed" && key != "params")
      throw Error(Errc::ConfigError, "unknown top-level key '" + key + "'");
  if (!j.contains("scenario") || !j.at("scenario").is_string())
    throw Error(Errc::ConfigError, "config needs a string 'scenario'");
  ScenarioConfig cfg;
  cfg.name = j.at("scenario").get<std::string>();
  const auto& defaults = scenario_defaults();
  const auto it = defaults.find(cfg.name);
  if (it == defaults.end()) throw Error(Errc::ConfigError, "unknown scenario '" + cfg.name + "'");
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw Error(Errc::ConfigError, "seed must be a nonnegative integer");
    cfg.seed = j.at("seed").get<std::uint64_t>();
  }
  cfg.params = it->second;
  if (j.contains("params")) {
    if (!j.at("params").is_object()) throw Error(Errc::ConfigError, "params must be an object");
    for (const auto& [key, v] : j.at("params").items()) {
      if (!cfg.params.contains(key)) throw Error(Errc::ConfigError, "unknown parameter '" + key + "' for " + cfg.name);
      if (!same_kind(cfg.params.at(key), v) && !(key == "pair" && v.is_object()) && !(key == "alpha" && v.is_null()))
        throw Error(Errc::ConfigError, "parameter '" + key + "' has the wrong type");
      cfg.params[key] = v;
    }
  }
  cfg.base_dir = base_dir;
  cfg.config_sha256 = sha256_hex(text);
  return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  return parse_scenario(read_text(path), path.parent_path());
}

ScenarioOutput run_scenario(const ScenarioConfig& cfg) {
  try {
    if (cfg.name == "stpetersburg") return run_stpetersburg(cfg);
    if (cfg.name == "qset-roundtrip") return run_qset_roundtrip(cfg);
    if (cfg.name == "constant-q") return run_constant_q(cfg);
    if (cfg.name == "blackwell") return run_blackwell(cfg);
    if (cfg.name == "srt") return run_srt(cfg);
    if (cfg.name == "defective") return run_defective(cfg);
    if (cfg.name == "mc-perpetuity") return run_mc(cfg, "perpetuity");
    if (cfg.name == "mc-max") return run_mc(cfg, "max");
    if (cfg.name == "ifs-sandwich") return run_ifs_sandwich(cfg);
    if (cfg.name == "conditions-check") return run_conditions(cfg);
  } catch (const json::exception& e) {
    throw Error(Errc::ConfigError, cfg.name + ": " + e.what());
  } catch (const Error& e) {
    throw Error(e.code(), cfg.name + ": " + e.detail());
  }
  throw Error(Errc::ConfigError, "unknown scenario '" + cfg.name + "'");
}

nlohmann::json to_json(const Check& c) {
  return {{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"threshold", c.threshold}, {"detail", c.detail}};
}

int run_to_directory(const ScenarioConfig& cfg, const std::filesystem::path& out_dir) {
  const auto out = run_scenario(cfg);
  std::filesystem::create_directories(out_dir);
  json files = json::array();
  for (const auto& [name, table] : out.tables) {
    table.write(out_dir / (name + ".csv"));
    files.push_back(name + ".csv");
  }
  for (const auto& [name, samples] : out.samples) {
    write_samples(out_dir / (name + ".bin"), samples,
                  {{"seed", cfg.seed}, {"config_sha256", cfg.config_sha256}, {"count", samples.size()}});
    files.push_back(name + ".bin");
  }
  json checks = json::array();
  for (const auto& c : out.checks) checks.push_back(to_json(c));
  const json manifest = {{"tool", "latren"},
                         {"version", version_string()},
                         {"scenario", cfg.name},
                         {"seed", cfg.seed},
                         {"config_sha256", cfg.config_sha256},
                         {"params", cfg.params},
                         {"created_utc", utc_timestamp()},
                         {"status", out.all_passed() ? "pass" : "fail"},
                         {"checks", checks},
                         {"report", out.report},
                         {"files", files}};
  write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");
  return out.all_passed() ? 0 : 2;
}

}  // namespace latren
