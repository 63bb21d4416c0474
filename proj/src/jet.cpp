#include "wlfield/jet.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "wlfield/quadrature.hpp"

namespace wlf {

std::vector<MultiIndex> multi_indices(int l) {
  std::vector<MultiIndex> out;
  for (int n = 0; n <= l; ++n)
    for (int a1 = n; a1 >= 0; --a1)
      for (int a2 = n - a1; a2 >= 0; --a2) out.emplace_back(a1, a2, n - a1 - a2);
  return out;
}

JetDistribution::JetDistribution(WorldlinePtr w, int order, Terms terms, TransportRule frame)
    : w_(std::move(w)), l_(order), frame_(frame) {
  if (!w_) throw DomainError("jet distribution: null worldline");
  if (order < 0) throw DomainError("jet distribution: order must be nonnegative");
  if (w_->parametrization() != Parametrization::ProperTime)
    throw DomainError("jet distribution: worldline must be in proper-time parametrization");
  for (auto& [alpha, c] : terms) {
    if (alpha.a[0] < 0 || alpha.a[1] < 0 || alpha.a[2] < 0 || alpha.order() > order)
      throw DomainError(fmt::format("jet distribution: multi-index ({},{},{}) exceeds order {}", alpha.a[0],
                                    alpha.a[1], alpha.a[2], order));
    if (c.is_zero()) continue;
    const auto [lo, hi] = c.support();
    if (lo < w_->domain_lo() || hi > w_->domain_hi())
      throw DomainError("jet distribution: coefficient support leaves the worldline domain");
    terms_.emplace(alpha, c);
  }
}

CoefficientFunction JetDistribution::coeff(const MultiIndex& alpha) const {
  auto it = terms_.find(alpha);
  return it == terms_.end() ? CoefficientFunction{} : it->second;
}

bool JetDistribution::is_real() const {
  return std::all_of(terms_.begin(), terms_.end(), [](const auto& kv) { return kv.second.is_real(); });
}

std::pair<double, double> JetDistribution::support() const {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& [alpha, c] : terms_) {
    const auto [a, b] = c.support();
    lo = std::min(lo, a);
    hi = std::max(hi, b);
  }
  if (terms_.empty()) return {0.0, 0.0};
  return {lo, hi};
}

JetDistribution JetDistribution::with_term(const MultiIndex& alpha, const CoefficientFunction& c) const {
  Terms t = terms_;
  t[alpha] = c;
  return JetDistribution(w_, std::max(l_, alpha.order()), std::move(t), frame_);
}

JetDistribution JetDistribution::conj() const {
  Terms t;
  for (const auto& [alpha, c] : terms_) t.emplace(alpha, c.conj());
  return JetDistribution(w_, l_, std::move(t), frame_);
}

JetDistribution operator+(const JetDistribution& a, const JetDistribution& b) {
  if (a.w_ != b.w_ && a.w_->id() != b.w_->id())
    throw DomainError("jet distribution sum: different worldlines");
  if (a.frame_ != b.frame_) throw DomainError("jet distribution sum: different frames");
  JetDistribution::Terms t = a.terms_;
  for (const auto& [alpha, c] : b.terms_) {
    auto it = t.find(alpha);
    if (it == t.end())
      t.emplace(alpha, c);
    else
      it->second = it->second + c;
  }
  return JetDistribution(a.w_, std::max(a.l_, b.l_), std::move(t), a.frame_);
}

JetDistribution operator*(cplx c, const JetDistribution& a) {
  JetDistribution::Terms t;
  for (const auto& [alpha, f] : a.terms_) t.emplace(alpha, c * f);
  return JetDistribution(a.w_, a.l_, std::move(t), a.frame_);
}

nlohmann::json JetDistribution::to_json() const {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [alpha, c] : terms_) terms.push_back({{"alpha", alpha.a}, {"coeff", c.to_json()}});
  return {{"order", l_},
          {"worldline_id", w_->id()},
          {"worldline", w_->to_json()},
          {"frame", to_string(frame_)},
          {"terms", terms},
          {"real", is_real()}};
}

JetDistribution JetDistribution::from_json(const nlohmann::json& j, WorldlinePtr w) {
  try {
    if (!w) w = std::make_shared<const Worldline>(Worldline::from_json(j.at("worldline")));
    const int order = j.at("order").get<int>();
    const TransportRule frame = j.contains("frame")
                                    ? transport_rule_from_string(j.at("frame").get<std::string>())
                                    : TransportRule::FermiWalker;
    Terms terms;
    for (const auto& t : j.at("terms")) {
      const auto a = t.at("alpha").get<std::array<int, 3>>();
      const MultiIndex alpha(a[0], a[1], a[2]);
      if (terms.count(alpha)) throw ConfigError("jet JSON: repeated multi-index");
      terms.emplace(alpha, CoefficientFunction::from_json(t.at("coeff")));
    }
    JetDistribution T(w, order, std::move(terms), frame);
    if (j.value("real", false) && !T.is_real())
      throw ConfigError("jet JSON: marked real but has complex coefficients");
    return T;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("jet JSON: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("jet JSON: ") + e.what());
  }
}

GeneralJet& GeneralJet::add(const CoefficientFunction& c) { return add(GeneralTerm{c, {}, 0, 1.0}); }

GeneralJet& GeneralJet::add(const CoefficientFunction& c, std::function<FourVector(double)> direction,
                            double direction_feature) {
  return add(GeneralTerm{c, std::move(direction), 1, direction_feature});
}

GeneralJet& GeneralJet::add(GeneralTerm term) {
  if (term.derivatives < 0 || term.derivatives > 1)
    throw DomainError("general jet: only terms with at most one derivative are supported");
  if (term.derivatives == 1 && !term.direction) throw DomainError("general jet: derivative term needs a direction");
  if (!(term.direction_feature > 0.0)) throw DomainError("general jet: direction feature must be positive");
  terms_.push_back(std::move(term));
  return *this;
}

namespace {

// Adaptive integral of g over [lo, hi] with an absolute tolerance tied to the integrand scale.
cplx integrate_scaled(const std::function<cplx(double)>& g, double lo, double hi, double panel) {
  if (!(hi > lo)) return 0.0;
  const int n = std::max(4, static_cast<int>(std::ceil((hi - lo) / panel)));
  const auto ns = quad::composite(lo, hi, n, 16);
  double scale = 0.0;
  for (std::size_t i = 0; i < ns.size(); ++i) scale += ns.w[i] * std::abs(g(ns.x[i]));
  if (scale == 0.0) return 0.0;
  quad::AdaptiveOptions opt;
  opt.initial_panels = n;
  opt.abs_tol = 1e-13 * scale;
  opt.rel_tol = 1e-12;
  opt.max_panels = 200000;
  return quad::adaptive(g, lo, hi, opt);
}

double panel_width(const CoefficientFunction& c) {
  return 0.5 * std::min(c.feature(), c.frequency() > 0.0 ? 2.0 * pi / c.frequency() : c.feature());
}

std::vector<FourVector> leg_list(const Frame& fr, const MultiIndex& alpha) {
  std::vector<FourVector> dirs;
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < alpha.a[i]; ++k) dirs.push_back(fr.e[i + 1]);
  return dirs;
}

}  // namespace

cplx evaluate_against(const JetDistribution& T, const TestFunction& f) {
  const Worldline& w = T.worldline();
  cplx acc = 0.0;
  for (const auto& [alpha, c] : T.terms()) {
    const auto [lo, hi] = c.support();
    auto g = [&, alpha = alpha, c = c](double tau) -> cplx {
      const cplx a = c(tau);
      if (a == 0.0) return 0.0;
      const FourVector x = w.evaluate(tau).event;
      if (alpha.order() == 0) return a * f.value(x);
      return a * f.derivative(x, leg_list(w.tetrad(T.frame(), tau), alpha));
    };
    acc += integrate_scaled(g, lo, hi, panel_width(c));
  }
  return acc;
}

cplx evaluate_against(const GeneralJet& G, const TestFunction& f) {
  const Worldline& w = G.worldline();
  cplx acc = 0.0;
  for (const auto& term : G.terms()) {
    if (term.coeff.is_zero()) continue;
    const auto [lo, hi] = term.coeff.support();
    auto g = [&](double tau) -> cplx {
      const cplx a = term.coeff(tau);
      if (a == 0.0) return 0.0;
      const FourVector x = w.evaluate(tau).event;
      if (term.derivatives == 0) return a * f.value(x);
      return a * f.derivative(x, {term.direction(tau)});
    };
    acc += integrate_scaled(g, lo, hi, std::min(panel_width(term.coeff), 0.5 * term.direction_feature));
  }
  return acc;
}

JetDistribution canonicalize(const GeneralJet& G) {
  const WorldlinePtr& wp = G.worldline_ptr();
  const Worldline& w = *wp;
  const TransportRule frame = G.frame();
  JetDistribution::Terms terms;
  int order = 0;
  auto accumulate = [&](const MultiIndex& alpha, const CoefficientFunction& c) {
    auto it = terms.find(alpha);
    if (it == terms.end())
      terms.emplace(alpha, c);
    else
      it->second = it->second + c;
  };
  const double dlo = w.domain_lo(), dhi = w.domain_hi();

  for (const auto& term : G.terms()) {
    if (term.coeff.is_zero()) continue;
    if (term.derivatives == 0) {
      accumulate({0, 0, 0}, term.coeff);
      continue;
    }
    order = 1;
    auto dir = term.direction;
    // Components of v in the adapted frame: v = v0 e0 + v^i e_i.
    auto component = [wp, frame, dir, dlo, dhi](int mu) {
      return [wp, frame, dir, dlo, dhi, mu](double tau) {
        tau = std::clamp(tau, dlo, dhi);
        const Frame fr = wp->tetrad(frame, tau);
        const double g = minkowski(dir(tau), fr.e[mu]);
        return mu == 0 ? -g : g;
      };
    };
    const auto [lo, hi] = term.coeff.support();
    double vnorm = 0.0;
    for (int k = 0; k <= 16; ++k) vnorm = std::max(vnorm, euclidean_norm(dir(std::clamp(lo + (hi - lo) * k / 16.0, dlo, dhi))));
    for (int mu = 0; mu < 4; ++mu) {
      auto comp = component(mu);
      double vmin = std::numeric_limits<double>::infinity(), vmax = -vmin;
      for (int k = 0; k <= 16; ++k) {
        const double v = comp(lo + (hi - lo) * k / 16.0);
        if (!std::isfinite(v)) throw DomainError("canonicalize: direction not decomposable in the frame");
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
      }
      const double scale = std::max(std::abs(vmin), std::abs(vmax));
      const bool constant = (vmax - vmin) <= 1e-12 * std::max(scale, vnorm);
      if (constant && scale <= 1e-12 * vnorm) continue;
      CoefficientFunction part =
          constant ? cplx(0.5 * (vmin + vmax)) * term.coeff : term.coeff.times(comp, term.direction_feature);
      if (mu == 0)
        accumulate({0, 0, 0}, part.neg_derivative());
      else
        accumulate(MultiIndex(mu == 1, mu == 2, mu == 3), part);
    }
  }
  return JetDistribution(wp, order, std::move(terms), frame);
}

cplx fourier_transform(const JetDistribution& T, double rho, const std::array<double, 3>& xi) {
  const Worldline& w = T.worldline();
  if (!w.is_at_rest()) throw DomainError("fourier_transform: requires an inertial curve at rest");
  const FourVector x0 = w.offset();
  const cplx phase = std::exp(I * (rho * x0[0] - (xi[0] * x0[1] + xi[1] * x0[2] + xi[2] * x0[3])));
  cplx acc = 0.0;
  for (const auto& [alpha, c] : T.terms()) {
    cplx mono = 1.0;
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < alpha.a[i]; ++k) mono *= -I * xi[i];
    acc += mono * c.transform(rho);
  }
  return phase * acc;
}

cplx fourier_transform_numeric(const JetDistribution& T, const FourVector& k) {
  return evaluate_against(T, *plane_wave(k[0], {k[1], k[2], k[3]}));
}

cplx fourier_transform_numeric(const GeneralJet& G, const FourVector& k) {
  return evaluate_against(G, *plane_wave(k[0], {k[1], k[2], k[3]}));
}

double mollifier_profile(double s) {
  s = std::abs(s);
  if (s <= 0.5) return 1.0;
  if (s >= 1.0) return 0.0;
  auto h = [](double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; };
  const double a = h(1.0 - s), b = h(s - 0.5);
  return a / (a + b);
}

MollifiedJet::MollifiedJet(JetDistribution T, double k) : T_(std::move(T)), k_(k) {
  if (!(k > 0.0)) throw DomainError("mollify: scale must be positive");
}

double MollifiedJet::multiplier(double rho, const std::array<double, 3>& xi) const {
  const double p = std::sqrt(rho * rho + xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]);
  return mollifier_profile(p / k_);
}

cplx MollifiedJet::fourier_transform(double rho, const std::array<double, 3>& xi) const {
  const double m = multiplier(rho, xi);
  return m == 0.0 ? cplx(0.0) : m * wlf::fourier_transform(T_, rho, xi);
}

MollifiedJet mollify(const JetDistribution& T, double k) { return MollifiedJet(T, k); }

FourVector transport(const Worldline& w, TransportRule rule, const FourVector& v, double tau1, double tau2) {
  if (rule == TransportRule::ParallelLab || w.is_inertial()) return v;
  const Frame a = w.tetrad(TransportRule::FermiWalker, tau1);
  const Frame b = w.tetrad(TransportRule::FermiWalker, tau2);
  FourVector out = (-minkowski(v, a.e[0])) * b.e[0];
  for (int i = 1; i < 4; ++i) out += minkowski(v, a.e[i]) * b.e[i];
  return out;
}

JetDistribution pushforward(const JetDistribution& T, double t, TransportRule rule) {
  const Worldline& w = T.worldline();
  if (!T.terms().empty()) {
    const auto [lo, hi] = T.support();
    if (lo + t < w.domain_lo() || hi + t > w.domain_hi())
      throw DomainError("pushforward: shifted support leaves the worldline domain");
  }
  const int max_order = [&] {
    int m = 0;
    for (const auto& [alpha, c] : T.terms()) m = std::max(m, alpha.order());
    return m;
  }();
  const bool exact = max_order == 0 || w.is_inertial() ||
                     (rule == TransportRule::FermiWalker && T.frame() == TransportRule::FermiWalker);
  if (max_order >= 2 && !w.is_inertial())
    throw DomainError("pushforward: order >= 2 is supported only on inertial curves");
  if (exact) {
    JetDistribution::Terms terms;
    for (const auto& [alpha, c] : T.terms()) terms.emplace(alpha, c.shifted(t));
    return JetDistribution(T.worldline_ptr(), T.order(), std::move(terms), T.frame());
  }
  GeneralJet G(T.worldline_ptr(), T.frame());
  const WorldlinePtr wp = T.worldline_ptr();
  const TransportRule frame = T.frame();
  double feature = 1.0;
  if (w.kind() == Worldline::Kind::Rindler) feature = 1.0 / w.acceleration_parameter();
  if (w.kind() == Worldline::Kind::Circular) feature = 1.0 / std::abs(w.omega());
  for (const auto& [alpha, c] : T.terms()) {
    if (alpha.order() == 0) {
      G.add(c.shifted(t));
      continue;
    }
    const int leg = alpha.a[0] ? 1 : (alpha.a[1] ? 2 : 3);
    auto dir = [wp, frame, rule, leg, t](double tau) {
      const FourVector e = wp->tetrad(frame, tau - t).e[leg];
      return transport(*wp, rule, e, tau - t, tau);
    };
    G.add(c.shifted(t), dir, feature);
  }
  JetDistribution out = canonicalize(G);
  return JetDistribution(out.worldline_ptr(), T.order(), out.terms(), frame);
}

}  // namespace wlf
