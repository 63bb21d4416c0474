#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <toml.hpp>

#include "wlfield/ccr.hpp"
#include "wlfield/cli.hpp"
#include "wlfield/hadamard.hpp"
#include "wlfield/one_particle.hpp"
#include "wlfield/wavefront.hpp"

namespace wlf::cli {

using nlohmann::json;

namespace {

json from_toml(const toml::node& n) {
  if (const auto* t = n.as_table()) {
    json j = json::object();
    for (auto&& [k, v] : *t) j[std::string(k.str())] = from_toml(v);
    return j;
  }
  if (const auto* a = n.as_array()) {
    json j = json::array();
    for (auto&& v : *a) j.push_back(from_toml(v));
    return j;
  }
  if (const auto* v = n.as_string()) return v->get();
  if (const auto* v = n.as_integer()) return v->get();
  if (const auto* v = n.as_floating_point()) return v->get();
  if (const auto* v = n.as_boolean()) return v->get();
  throw ConfigError("config: date and time values are not supported");
}

double positive(const json& j, const std::string& key) {
  const double v = j.at(key).get<double>();
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(fmt::format("config: '{}' must be positive", key));
  return v;
}

int at_least(const json& j, const std::string& key, int lo) {
  const int v = j.at(key).get<int>();
  if (v < lo) throw ConfigError(fmt::format("config: '{}' must be at least {}", key, lo));
  return v;
}

// Missing keys of `defaults` are copied into cfg[key]; cfg[key] must be an object if present.
void with_defaults(json& cfg, const std::string& key, const json& defaults) {
  json& sec = cfg[key];
  if (sec.is_null()) sec = json::object();
  if (!sec.is_object()) throw ConfigError(fmt::format("config: '{}' must be a table", key));
  for (const auto& [k, v] : defaults.items())
    if (!sec.contains(k)) sec[k] = v;
}

json resolve_grid(json& cfg) {
  with_defaults(cfg, "grid", json::object());
  json g = cfg["grid"];
  g["mass"] = cfg["mass"];
  return GridOptions::from_json(g).to_json();
}

std::vector<double> resolve_omegas(const json& j) {
  std::vector<double> out;
  if (j.is_array()) {
    out = j.get<std::vector<double>>();
  } else if (j.is_object()) {
    const double lo = positive(j, "min"), hi = positive(j, "max");
    const int n = at_least(j, "count", 1);
    if (hi < lo) throw ConfigError("config: omega range has max < min");
    for (int k = 0; k < n; ++k) out.push_back(n == 1 ? lo : lo + (hi - lo) * k / (n - 1));
  } else {
    throw ConfigError("config: 'omegas' must be a list or a {min, max, count} table");
  }
  if (out.empty()) throw ConfigError("config: empty omega grid");
  for (double w : out)
    if (!(w > 0.0) || !std::isfinite(w)) throw ConfigError("config: omegas must be positive (negative ones are added)");
  return out;
}

void resolve_detector(json& cfg, bool kms) {
  if (!cfg.contains("worldline")) throw ConfigError("config: missing [worldline]");
  if (!cfg.contains("window")) throw ConfigError("config: missing [window]");
  const auto w = std::make_shared<const Worldline>(Worldline::from_json(cfg["worldline"]));
  cfg["worldline"] = w->to_json();
  cfg["window"] = CoefficientFunction::from_json(cfg["window"]).to_json();
  if (!cfg.contains("omegas")) throw ConfigError("config: missing 'omegas'");
  cfg["omegas"] = resolve_omegas(cfg["omegas"]);
  if (kms && cfg["omegas"].size() < 4) throw ConfigError("config: the KMS fit needs at least 4 omegas");
  const double mass = cfg["mass"].get<double>();
  auto K = PulledBackKernel::for_worldline(w, mass);
  if (cfg.contains("backend")) K = PulledBackKernel(w, kernel_backend_from_string(cfg["backend"].get<std::string>()), mass);
  cfg["backend"] = to_string(K.backend);
  if (!cfg.contains("eps_schedule")) cfg["eps_schedule"] = default_eps_schedule();
  const auto eps = cfg["eps_schedule"].get<std::vector<double>>();
  if (eps.empty()) throw ConfigError("config: empty eps_schedule");
  for (double e : eps)
    if (!(e > 0.0)) throw ConfigError("config: eps_schedule entries must be positive");
  if (!cfg.contains("noise_rel")) cfg["noise_rel"] = 1e-11;
  positive(cfg, "noise_rel");
  if (!kms) {
    if (!cfg.contains("bandwidth")) cfg["bandwidth"] = 1.0;
    positive(cfg, "bandwidth");
  }
}

void resolve_commutator(json& cfg) {
  cfg["grid"] = resolve_grid(cfg);
  if (!cfg.contains("pairs")) cfg["pairs"] = json::array();
  if (!cfg["pairs"].is_array()) throw ConfigError("config: 'pairs' must be a list");
  for (auto& p : cfg["pairs"]) {
    p["T"] = JetDistribution::from_json(p.at("T")).to_json();
    p["S"] = JetDistribution::from_json(p.at("S")).to_json();
  }
  with_defaults(cfg, "random_pairs",
                {{"timelike", 0}, {"spacelike", 0}, {"sigma", 1.0}, {"spacelike_distance", 10.0}});
  const auto& r = cfg["random_pairs"];
  const int n = at_least(r, "timelike", 0) + at_least(r, "spacelike", 0);
  positive(r, "sigma");
  if (positive(r, "spacelike_distance") < 10.0 * r["sigma"].get<double>())
    throw ConfigError("config: spacelike_distance must be at least 10 sigma");
  if (n + cfg["pairs"].size() == 0) throw ConfigError("config: no commutator pairs");
}

void resolve_wavefront(json& cfg) {
  const bool dist = cfg.contains("distribution"), prod = cfg.contains("product");
  if (dist == prod) throw ConfigError("config: give exactly one of 'distribution' or 'product'");
  if (dist) {
    const auto T = JetDistribution::from_json(cfg["distribution"]);
    if (!T.worldline().is_at_rest()) throw ConfigError("config: wavefront scans need a curve at rest");
    cfg["distribution"] = T.to_json();
  } else {
    auto& f = cfg["product"]["factors"];
    if (!f.is_array() || f.size() != 4) throw ConfigError("config: product needs 4 factors (t, x, y, z)");
    for (auto& c : f) c = CoefficientFunction::from_json(c).to_json();
  }
  with_defaults(cfg, "directions", {{"spatial", 20}, {"timelike", 20}, {"min_time", 0.1}, {"min_component", 0.05}});
  const auto& d = cfg["directions"];
  if (at_least(d, "spatial", 0) + at_least(d, "timelike", 0) == 0) throw ConfigError("config: no scan directions");
  const ScanOptions so;
  with_defaults(cfg, "scan",
                {{"r_min", so.r_min},
                 {"decades", so.decades},
                 {"per_decade", so.per_decade},
                 {"n_max", so.n_max},
                 {"noise_rel", so.noise_rel}});
  const auto& s = cfg["scan"];
  positive(s, "r_min");
  positive(s, "decades");
  at_least(s, "per_decade", 1);
  positive(s, "noise_rel");
}

void resolve_translate(json& cfg) {
  cfg["grid"] = resolve_grid(cfg);
  if (!cfg.contains("lattice")) throw ConfigError("config: missing [lattice]");
  auto& lat = cfg["lattice"];
  const auto T = JetDistribution::from_json(lat.at("template"));
  if (!T.is_real()) throw ConfigError("config: lattice template must be real");
  lat["template"] = T.to_json();
  positive(lat, "step");
  at_least(lat, "sites", 1);
  if (!lat.contains("rule")) lat["rule"] = to_string(T.frame());
  lat["rule"] = to_string(transport_rule_from_string(lat["rule"].get<std::string>()));
  if (!cfg.contains("shifts")) cfg["shifts"] = {1};
  if (!cfg["shifts"].is_array() || cfg["shifts"].empty()) throw ConfigError("config: 'shifts' must be a nonempty list");
  for (const auto& s : cfg["shifts"]) s.get<int>();
  with_defaults(cfg, "checks", {{"word_sets", 20}, {"words", 6}, {"scale", 1.5}});
  at_least(cfg["checks"], "word_sets", 1);
  at_least(cfg["checks"], "words", 1);
  positive(cfg["checks"], "scale");
  const TranslationOptions to;
  with_defaults(cfg, "translation",
                {{"snap_rel", to.snap_rel},
                 {"check_words", to.check_words},
                 {"check_tol", to.check_tol},
                 {"max_escalations", to.max_escalations}});
  positive(cfg["translation"], "snap_rel");
  at_least(cfg["translation"], "check_words", 1);
  positive(cfg["translation"], "check_tol");
  at_least(cfg["translation"], "max_escalations", 0);
}

void resolve_hadamard(json& cfg) {
  if (!cfg.contains("order")) cfg["order"] = 8;
  const int n = at_least(cfg, "order", 0);
  if (n > 12) throw ConfigError("config: 'order' must be at most 12");
  with_defaults(cfg, "short_distance",
                {{"enabled", true},
                 {"worldline", Worldline::inertial().to_json()},
                 {"dtau", {0.05, 0.1, 0.15, 0.2}},
                 {"eps_schedule", default_eps_schedule()}});
  auto& sd = cfg["short_distance"];
  sd["worldline"] = Worldline::from_json(sd["worldline"]).to_json();
  if (sd["dtau"].get<std::vector<double>>().empty()) throw ConfigError("config: empty dtau list");
}

void resolve_angular(json& cfg) {
  cfg["grid"] = resolve_grid(cfg);
  if (!cfg.contains("distributions") || !cfg["distributions"].is_array() || cfg["distributions"].empty())
    throw ConfigError("config: 'distributions' must be a nonempty list");
  for (auto& d : cfg["distributions"]) d = JetDistribution::from_json(d).to_json();
  if (!cfg.contains("zero_rel")) cfg["zero_rel"] = 1e-8;
  positive(cfg, "zero_rel");
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"detector",  "kms",       "commutator", "wavefront",
                                              "translate", "hadamard", "angular"};
  return names;
}

json parse_config_text(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  try {
    if (first != std::string::npos && text[first] == '{') return json::parse(text);
    return from_toml(toml::parse(text));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const toml::parse_error& e) {
    throw ConfigError(fmt::format("config: {} at line {}", e.description(), e.source().begin.line));
  }
}

json load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str());
}

json resolve_config(const std::string& command, json cfg) {
  if (!cfg.is_object()) throw ConfigError("config must be a table");
  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), command) == names.end())
    throw ConfigError("unknown command '" + command + "'");
  if (cfg.contains("command") && cfg["command"] != command)
    throw ConfigError(fmt::format("config is for '{}', not '{}'", cfg["command"].get<std::string>(), command));
  try {
    cfg["command"] = command;
    if (!cfg.contains("seed")) cfg["seed"] = 1;
    cfg["seed"].get<std::uint64_t>();
    if (!cfg.contains("threads")) cfg["threads"] = 1;
    at_least(cfg, "threads", 0);
    if (!cfg.contains("out")) cfg["out"] = "wlf-out";
    if (!cfg.contains("mass")) cfg["mass"] = 0.0;
    const double m = cfg["mass"].get<double>();
    if (!(m >= 0.0) || !std::isfinite(m)) throw ConfigError("config: mass must be non-negative");

    if (command == "detector" || command == "kms") resolve_detector(cfg, command == "kms");
    if (command == "commutator") resolve_commutator(cfg);
    if (command == "wavefront") resolve_wavefront(cfg);
    if (command == "translate") resolve_translate(cfg);
    if (command == "hadamard") resolve_hadamard(cfg);
    if (command == "angular") resolve_angular(cfg);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

}  // namespace wlf::cli
