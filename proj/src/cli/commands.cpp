#include <algorithm>
#include <limits>
#include <random>

#include <fmt/format.h>

#include "wlfield/ccr.hpp"
#include "wlfield/cli.hpp"
#include "wlfield/hadamard.hpp"
#include "wlfield/one_particle.hpp"
#include "wlfield/wavefront.hpp"

namespace wlf::cli {

using nlohmann::json;

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

WorldlinePtr worldline_of(const json& j) { return std::make_shared<const Worldline>(Worldline::from_json(j)); }

// JSON null for NaN, so summaries never carry non-standard tokens.
json number(double v) { return std::isfinite(v) ? json(v) : json(); }

CommandResult outputs(std::vector<Artifact> a) {
  CommandResult r;
  r.artifacts = std::move(a);
  return r;
}

json summary_head(const json& cfg) {
  return {{"command", cfg["command"]}, {"seed", cfg["seed"]}, {"mass", cfg["mass"]}};
}

PulledBackKernel kernel_of(const json& cfg) {
  PulledBackKernel K(worldline_of(cfg["worldline"]), kernel_backend_from_string(cfg["backend"].get<std::string>()),
                     cfg["mass"].get<double>());
  K.eps_schedule = cfg["eps_schedule"].get<std::vector<double>>();
  return K;
}

// Thermal reference for uniformly accelerated curves, null otherwise.
json expected_beta(const Worldline& w, double mass) {
  if (mass == 0.0 && w.kind() == Worldline::Kind::Rindler) return 2.0 * pi / w.acceleration_parameter();
  return nullptr;
}

CommandResult cmd_detector(const json& cfg) {
  const auto K = kernel_of(cfg);
  const auto window = CoefficientFunction::from_json(cfg["window"]);
  const auto omegas = cfg["omegas"].get<std::vector<double>>();
  const double bandwidth = cfg["bandwidth"].get<double>(), mass = K.mass;
  const auto rows = spectrum_table(K, window, omegas);

  json s = summary_head(cfg);
  s["worldline"] = K.worldline->id();
  s["backend"] = to_string(K.backend);
  s["bandwidth"] = bandwidth;
  json spec = json::array();
  double ratio_max = 0.0;
  bool any = false;
  for (const auto& r : rows) {
    spec.push_back({{"omega", r.omega}, {"F", r.f}});
    if (r.omega >= bandwidth) {
      ratio_max = std::max(ratio_max, r.ratio);
      any = true;
    }
  }
  s["spectrum"] = spec;
  s["ratio_max_above_bandwidth"] = any ? json(ratio_max) : json();
  if (mass > 0.0) {
    // Excitation against de-excitation across the mass gap: F(w) / F(-w - 2m).
    std::vector<double> shifted;
    for (double w : omegas) shifted.push_back(-w - 2.0 * mass);
    const auto Fs = detector_spectrum(K, window, shifted);
    json gap = json::array();
    double gap_max = 0.0;
    for (std::size_t i = 0; i < omegas.size(); ++i) {
      const auto it = std::find_if(rows.begin(), rows.end(), [&](const auto& r) { return r.omega == omegas[i]; });
      const double ratio = it->f / Fs[i];
      gap.push_back({{"omega", omegas[i]}, {"F_shifted", Fs[i]}, {"ratio", number(ratio)}});
      if (omegas[i] >= bandwidth) gap_max = std::max(gap_max, ratio);
    }
    s["mass_gap"] = gap;
    s["mass_gap_ratio_max"] = gap_max;
  }
  if (omegas.size() >= 4) {
    try {
      json fit = kms_fit(K, window, omegas, cfg["noise_rel"].get<double>()).to_json();
      fit["beta_expected"] = expected_beta(*K.worldline, mass);
      s["kms"] = fit;
    } catch (const NumericalError& e) {
      s["kms"] = {{"error", e.what()}};
    }
  } else {
    s["kms"] = nullptr;
  }
  return outputs({{"spectrum.csv", spectrum_csv(rows)}, {"summary.json", json_text(s)}});
}

CommandResult cmd_kms(const json& cfg) {
  const auto K = kernel_of(cfg);
  const auto window = CoefficientFunction::from_json(cfg["window"]);
  const auto omegas = cfg["omegas"].get<std::vector<double>>();
  const auto fit = kms_fit(K, window, omegas, cfg["noise_rel"].get<double>());
  const auto rows = spectrum_table(K, window, omegas);

  json s = summary_head(cfg);
  s["worldline"] = K.worldline->id();
  s["backend"] = to_string(K.backend);
  s["beta"] = fit.beta;
  s["stderr"] = fit.stderr_beta;
  s["residual"] = fit.residual;
  s["points_used"] = fit.omegas_used.size();
  s["fit"] = fit.to_json();
  const json expected = expected_beta(*K.worldline, K.mass);
  s["beta_expected"] = expected;
  s["beta_rel_error"] = expected.is_null() ? json() : json(std::abs(fit.beta / expected.get<double>() - 1.0));
  return outputs({{"spectrum.csv", spectrum_csv(rows)}, {"summary.json", json_text(s)}});
}

struct Pair {
  std::string kind;
  JetDistribution T, S;
  GridOptions grid;
};

// Order-0 Gaussians on two rest curves placed symmetrically about the spatial origin.
Pair random_pair(std::mt19937_64& rng, bool timelike, const json& r, const GridOptions& base) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> nd;
  Vec3 n{nd(rng), nd(rng), nd(rng)};
  const double nn = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
  for (auto& c : n) c /= nn;
  const double sigma = r["sigma"].get<double>();
  double d, sa = sigma, sb = sigma, ca = 0.0, cb;
  if (timelike) {
    d = 1.0 + 2.0 * u(rng);
    sa = sigma * (0.6 + 0.6 * u(rng));
    sb = sigma * (0.6 + 0.6 * u(rng));
    cb = d + sigma * (2.0 * u(rng) - 1.0);  // S sits near the future light cone of T
  } else {
    d = r["spacelike_distance"].get<double>();
    ca = sigma * (2.0 * u(rng) - 1.0);
    cb = sigma * (2.0 * u(rng) - 1.0);
  }
  auto rest = [&](double side) {
    return std::make_shared<const Worldline>(Worldline::inertial(
        0.0, {1.0, 0.0, 0.0}, FourVector{0.0, side * n[0] * d / 2, side * n[1] * d / 2, side * n[2] * d / 2}));
  };
  JetDistribution T(rest(-1.0), 0, {{{}, CoefficientFunction::gaussian(ca, sa)}});
  JetDistribution S(rest(1.0), 0, {{{}, CoefficientFunction::gaussian(cb, sb)}});
  GridOptions g = base;
  g.origin = {0.5 * (ca + cb), 0.0, 0.0, 0.0};
  return {timelike ? "timelike" : "spacelike", std::move(T), std::move(S), g};
}

CommandResult cmd_commutator(const json& cfg) {
  const auto base = GridOptions::from_json(cfg["grid"]);
  std::vector<Pair> pairs;
  for (const auto& p : cfg["pairs"])
    pairs.push_back({"explicit", JetDistribution::from_json(p["T"]), JetDistribution::from_json(p["S"]), base});
  std::mt19937_64 rng(cfg["seed"].get<std::uint64_t>());
  const auto& r = cfg["random_pairs"];
  for (int k = 0; k < r["timelike"].get<int>(); ++k) pairs.push_back(random_pair(rng, true, r, base));
  for (int k = 0; k < r["spacelike"].get<int>(); ++k) pairs.push_back(random_pair(rng, false, r, base));

  std::string csv = "pair,kind,commutator,oracle,rel_error,causal_ratio,norm_T,norm_S\n";
  json rows = json::array();
  double worst_rel = 0.0, worst_causal = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    if (!p.T.is_real() || !p.S.is_real()) throw DomainError("commutator pairs must be real distributions");
    const auto g = make_grid(p.grid, {&p.T, &p.S});
    const auto u = k_map(p.T, g), v = k_map(p.S, g);
    const double G = inner_product(u, v).imag(), nT = std::sqrt(u.norm2()), nS = std::sqrt(v.norm2());
    double oracle = nan;
    if (g->mass() == 0.0) {
      try {
        oracle = commutator_light_cone(p.T, p.S);
      } catch (const DomainError&) {
      }
    }
    const double rel = std::abs(G - oracle) / std::abs(oracle), causal = std::abs(G) / (nT * nS);
    if (p.kind == "timelike") worst_rel = std::max(worst_rel, rel);
    if (p.kind == "spacelike") worst_causal = std::max(worst_causal, causal);
    csv += fmt::format("{},{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", i, p.kind, G, oracle, rel, causal,
                       nT, nS);
    rows.push_back({{"kind", p.kind},
                    {"commutator", G},
                    {"oracle", number(oracle)},
                    {"rel_error", number(rel)},
                    {"causal_ratio", causal},
                    {"grid", g->options().to_json()}});
  }
  json s = summary_head(cfg);
  s["pairs"] = rows;
  s["max_rel_error_timelike"] = worst_rel;
  s["max_causal_ratio_spacelike"] = worst_causal;
  return outputs({{"commutator.csv", csv}, {"summary.json", json_text(s)}});
}

CommandResult cmd_wavefront(const json& cfg) {
  ScanOptions so;
  const auto& sc = cfg["scan"];
  so.r_min = sc["r_min"].get<double>();
  so.decades = sc["decades"].get<double>();
  so.per_decade = sc["per_decade"].get<int>();
  so.n_max = sc["n_max"].get<int>();
  so.noise_rel = sc["noise_rel"].get<double>();
  const auto& d = cfg["directions"];
  std::mt19937_64 rng(cfg["seed"].get<std::uint64_t>());
  auto dirs = spatial_directions(d["spatial"].get<std::size_t>(), rng, d["min_component"].get<double>());
  const std::size_t n_spatial = dirs.size();
  for (const auto& c : timelike_directions(d["timelike"].get<std::size_t>(), rng, d["min_time"].get<double>()))
    dirs.push_back(c);

  std::vector<DirectionSample> samples;
  json expected = nullptr;
  if (cfg.contains("distribution")) {
    const auto T = JetDistribution::from_json(cfg["distribution"]);
    expected = T.order();
    samples = wavefront_scan(T, dirs, so);
  } else {
    std::array<CoefficientFunction, 4> f;
    for (int i = 0; i < 4; ++i) f[i] = CoefficientFunction::from_json(cfg["product"]["factors"][i]);
    samples = wavefront_scan(product_function_transform(f), dirs, so);
  }
  if (std::all_of(samples.begin(), samples.end(), [](const auto& s) { return s.noise; }))
    throw NumericalError("every scan direction is below the noise floor");

  std::size_t sp_sing = 0, tl_reg = 0, noise = 0;
  double slope_lo = std::numeric_limits<double>::infinity(), slope_hi = -slope_lo;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& smp = samples[i];
    noise += smp.noise;
    if (i < n_spatial && smp.singular) {
      ++sp_sing;
      slope_lo = std::min(slope_lo, smp.slope);
      slope_hi = std::max(slope_hi, smp.slope);
    }
    if (i >= n_spatial && !smp.singular) ++tl_reg;
  }
  json s = summary_head(cfg);
  s["expected_degree"] = expected;
  s["spatial_directions"] = n_spatial;
  s["spatial_singular"] = sp_sing;
  s["timelike_directions"] = samples.size() - n_spatial;
  s["timelike_regular"] = tl_reg;
  s["noise_directions"] = noise;
  s["spatial_slope_min"] = sp_sing ? json(slope_lo) : json();
  s["spatial_slope_max"] = sp_sing ? json(slope_hi) : json();
  return outputs({{"wavefront.csv", scan_csv(samples)}, {"summary.json", json_text(s)}});
}

CommandResult cmd_translate(const json& cfg) {
  const auto& lat = cfg["lattice"];
  const auto T = JetDistribution::from_json(lat["template"]);
  const auto fam = shift_lattice(T, lat["step"].get<double>(), lat["sites"].get<int>(),
                                 transport_rule_from_string(lat["rule"].get<std::string>()),
                                 GridOptions::from_json(cfg["grid"]));
  const auto& tr = cfg["translation"];
  TranslationOptions opt;
  opt.snap_rel = tr["snap_rel"].get<double>();
  opt.check_words = tr["check_words"].get<std::size_t>();
  opt.check_tol = tr["check_tol"].get<double>();
  opt.max_escalations = tr["max_escalations"].get<int>();
  opt.seed = cfg["seed"].get<std::uint64_t>();
  const auto& ch = cfg["checks"];
  const auto sets = ch["word_sets"].get<std::uint64_t>();

  CommandResult res;
  json maps = json::array();
  const auto vac = QuasifreeState::vacuum(fam);
  for (const auto& sh : cfg["shifts"]) {
    const auto map = translation_map_build(fam, sh.get<int>(), opt);
    const QuasifreeState noise{map.Q_rho};
    const auto composed = compose(vac, map);
    double noise_min = std::numeric_limits<double>::infinity(), comp_min = noise_min;
    for (std::uint64_t k = 0; k < sets; ++k) {
      const auto words = random_words(ch["words"].get<std::size_t>(), map.domain.size(), ch["scale"].get<double>(),
                                      opt.seed * 1000003 + k);
      noise_min = std::min(noise_min, gns_gram_check(noise, map.s_L, words));
      comp_min = std::min(comp_min, gns_gram_check(composed, map.s_domain, words));
    }
    json m = map.to_json();
    m["dropped_count"] = map.dropped.size();
    m["automorphism"] = map.mu == 0.0;
    m["gns_noise_min"] = noise_min;
    m["gns_composed_min"] = comp_min;
    maps.push_back(m);
    if (std::min(noise_min, comp_min) < -opt.check_tol && res.status == 0) {
      res.status = 4;
      res.message = fmt::format("shift {}: GNS Gram check failed (min eigenvalue {:.3e})", sh.get<int>(),
                                std::min(noise_min, comp_min));
    }
  }
  json s = summary_head(cfg);
  json fj = fam.to_json();
  fj.erase("generators");
  s["family"] = fj;
  s["maps"] = maps;
  res.artifacts.push_back({"summary.json", json_text(s)});
  return res;
}

CommandResult cmd_hadamard(const json& cfg) {
  const double mass = cfg["mass"].get<double>();
  const int order = cfg["order"].get<int>();
  const auto h = hadamard_recursion(mass, order);
  const auto b = bessel_tail_coefficients(mass, order);
  json s = summary_head(cfg);
  s["recursion"] = h.to_json();
  // b_j against c V_j / j! with c fixed at j = 0, in exact arithmetic.
  json cmp = json::array();
  double worst = 0.0;
  if (mass > 0.0) {
    const Rational c = b[0] / h.exact[0];
    Rational fact = 1;
    for (int j = 0; j <= order; ++j) {
      if (j > 0) fact *= j;
      const Rational diff = b[std::size_t(j)] - c * h.exact[std::size_t(j)] / fact;
      const double rel = static_cast<double>(abs(diff) / abs(b[std::size_t(j)]));
      worst = std::max(worst, rel);
      cmp.push_back({{"j", j}, {"bessel", static_cast<double>(b[std::size_t(j)])}, {"rel_error", rel}});
    }
    s["bessel_constant"] = static_cast<double>(c);
  } else {
    s["bessel_constant"] = nullptr;
  }
  s["bessel_comparison"] = cmp;
  s["bessel_max_rel_error"] = worst;

  CommandResult res;
  const auto& sd = cfg["short_distance"];
  if (sd["enabled"].get<bool>()) {
    auto K = PulledBackKernel::for_worldline(worldline_of(sd["worldline"]), mass);
    K.eps_schedule = sd["eps_schedule"].get<std::vector<double>>();
    const auto rep = short_distance_check(K, sd["dtau"].get<std::vector<double>>());
    json r = rep.to_json();
    r["expected_leading"] = 1.0 / (4.0 * pi * pi);
    r["leading_rel_error"] = std::abs(rep.limit_abs * 4.0 * pi * pi - 1.0);
    s["short_distance"] = r;
    std::string csv = "dtau,leading_re,leading_im,leading_abs,residual_re,residual_im\n";
    for (const auto& row : rep.rows)
      csv += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", row.dtau, row.leading.real(),
                         row.leading.imag(), row.leading_abs, row.residual.real(), row.residual.imag());
    res.artifacts.push_back({"short_distance.csv", csv});
  }
  res.artifacts.push_back({"summary.json", json_text(s)});
  return res;
}

CommandResult cmd_angular(const json& cfg) {
  std::vector<JetDistribution> dists;
  for (const auto& d : cfg["distributions"]) dists.push_back(JetDistribution::from_json(d));
  std::vector<const JetDistribution*> ptrs;
  for (const auto& d : dists) ptrs.push_back(&d);
  const auto g = make_grid(GridOptions::from_json(cfg["grid"]), ptrs);
  const double zero_rel = cfg["zero_rel"].get<double>();

  std::string csv = "distribution,l,power\n";
  json out = json::array();
  for (std::size_t i = 0; i < dists.size(); ++i) {
    const auto P = angular_spectrum(k_map(dists[i], g));
    double total = 0.0, leak = 0.0;
    for (double p : P) total += p;
    const int l = dists[i].order();
    for (std::size_t k = 0; k < P.size(); ++k) {
      csv += fmt::format("{},{},{:.17g}\n", i, k, P[k]);
      if (int(k) > l) leak = std::max(leak, P[k] / total);
    }
    const double top = P[std::size_t(l)] / total;
    out.push_back({{"order", l},
                   {"total", total},
                   {"leakage_above_order", leak},
                   {"top_fraction", top},
                   {"top_nonzero", top > zero_rel},
                   {"vanishes_above_order", leak <= zero_rel}});
  }
  json s = summary_head(cfg);
  s["grid"] = g->options().to_json();
  s["distributions"] = out;
  return outputs({{"angular.csv", csv}, {"summary.json", json_text(s)}});
}

}  // namespace

CommandResult run_command(const json& cfg) {
  const auto cmd = cfg.at("command").get<std::string>();
  if (cmd == "detector") return cmd_detector(cfg);
  if (cmd == "kms") return cmd_kms(cfg);
  if (cmd == "commutator") return cmd_commutator(cfg);
  if (cmd == "wavefront") return cmd_wavefront(cfg);
  if (cmd == "translate") return cmd_translate(cfg);
  if (cmd == "hadamard") return cmd_hadamard(cfg);
  if (cmd == "angular") return cmd_angular(cfg);
  throw ConfigError("unknown command '" + cmd + "'");
}

}  // namespace wlf::cli
