#include "wlfield/hadamard.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <boost/math/special_functions/bessel.hpp>
#include <fmt/format.h>

#include "wlfield/parallel.hpp"
#include "wlfield/quadrature.hpp"

namespace wlf {

namespace {

constexpr double inv4pi2 = 1.0 / (4.0 * pi * pi);
constexpr double euler_gamma = 0.57721566490153286061;

struct Table {
  std::vector<double> u, w;
  std::vector<cplx> a;
};

// Autocorrelation A(u) = int f(v + u) conj(f(v)) dv on u >= 0. A(-u) = conj(A(u)).
class WindowCorrelation {
 public:
  WindowCorrelation(const CoefficientFunction& f, double omega_max, bool graded_head) {
    auto [lo, hi] = f.support();
    len_ = hi - lo;
    if (!(len_ > 0.0)) throw DomainError("detector window has empty support");
    const double feature = f.feature();
    const double freq = f.frequency();
    const double hv = std::min(0.5 * feature, freq > 0.0 ? pi / (2.0 * freq) : 0.5 * feature);
    const double hu = std::min(hv, pi / (2.0 * (omega_max + freq) + 1e-300));
    const double head = std::min(2.0 * hu, 0.5 * len_);
    const int tail_panels = std::max(1, int(std::ceil((len_ - head) / hu)));

    quad::NodeSet smooth = quad::composite(0.0, head, 2);
    quad::NodeSet tail = quad::composite(head, len_, tail_panels);
    smooth.append(tail);
    fill(f, lo, hi, hv, smooth, smooth_);
    if (graded_head) {
      // Log-singular remainders need the head refined geometrically towards u = 0.
      quad::NodeSet g = quad::graded(0.0, head, 30, 1);
      g.append(tail);
      fill(f, lo, hi, hv, g, graded_);
    }
    a0_ = quad::integrate(quad::composite(lo, hi, panels(len_, hv)), [&](double v) { return std::norm(f(v)); });
    a1_ = quad::integrate(quad::composite(lo, hi, panels(len_, hv)),
                          [&](double v) { return f.derivative(v) * std::conj(f(v)); });
  }

  double length() const { return len_; }
  double a0() const { return a0_; }
  cplx a1() const { return a1_; }
  const Table& smooth() const { return smooth_; }
  const Table& graded() const { return graded_; }

 private:
  static int panels(double span, double h) { return std::max(1, int(std::ceil(span / h))); }

  static void fill(const CoefficientFunction& f, double lo, double hi, double hv, const quad::NodeSet& ns,
                   Table& t) {
    t.u = ns.x;
    t.w = ns.w;
    t.a.assign(ns.size(), cplx{});
    parallel_for(ns.size(), [&](std::size_t k) {
      const double u = ns.x[k];
      const double top = hi - u;
      if (top <= lo) return;
      auto nodes = quad::composite(lo, top, panels(top - lo, hv));
      t.a[k] = quad::integrate(nodes, [&](double v) { return f(v + u) * std::conj(f(v)); });
    });
  }

  double len_ = 0.0;
  double a0_ = 0.0;
  cplx a1_;
  Table smooth_, graded_;
};

void check_curve(const PulledBackKernel& K) {
  const Worldline& w = *K.worldline;
  switch (K.backend) {
    case KernelBackend::ClosedMasslessInertial:
      if (!w.is_inertial()) throw DomainError("closed inertial kernel needs an inertial curve");
      if (K.mass != 0.0) throw DomainError("closed inertial kernel is massless");
      break;
    case KernelBackend::ClosedMasslessRindler:
      if (w.kind() != Worldline::Kind::Rindler) throw DomainError("closed Rindler kernel needs a Rindler curve");
      if (K.mass != 0.0) throw DomainError("closed Rindler kernel is massless");
      break;
    case KernelBackend::ModeIntegral:
      if (!w.is_inertial()) throw DomainError("mode-integral kernel is implemented for inertial curves");
      if (!(K.mass >= 0.0)) throw DomainError("mass must be non-negative");
      break;
  }
}

// int_m^inf sqrt(lambda^2 - m^2) exp(-i lambda z) d lambda for Re z >= 0, Im z <= 0, z != 0,
// along the ray lambda = m + exp(i phi) s of steepest descent.
cplx mode_radial_integral(double m, cplx z) {
  const double az = std::abs(z);
  const double phi = -0.5 * pi - std::arg(z);
  const cplx e = std::polar(1.0, phi);
  const double top = std::sqrt(60.0 / az);
  quad::AdaptiveOptions opt;
  opt.abs_tol = 1e-14 / (az * az);
  opt.rel_tol = 1e-13;
  const cplx integral = quad::adaptive(
      [&](double u) {
        const double s = u * u;
        return 2.0 * s * std::sqrt(2.0 * m + e * s) * std::exp(-az * s);
      },
      0.0, top, opt);
  return std::polar(1.0, 1.5 * phi) * std::exp(-I * m * z) * integral;
}

// (1 / u^2) (x^2 / sinh^2 x - 1) with x = a u / 2, divided out for small x.
double rindler_smooth_part(double a, double u) {
  const double x = 0.5 * a * u;
  if (std::abs(x) < 0.05) {
    const double x2 = x * x;
    return 0.25 * a * a * (-1.0 / 3.0 + x2 / 15.0 - 2.0 * x2 * x2 / 189.0 + x2 * x2 * x2 / 675.0);
  }
  const double sh = std::sinh(x);
  return (x * x / (sh * sh) - 1.0) / (u * u);
}

// W_m(u) + 1 / (4 pi^2 u^2) for u > 0: the part of the massive kernel that is only log singular.
cplx massive_remainder(double m, double u) {
  if (m == 0.0) return 0.0;
  const double x = m * u;
  const double j1 = boost::math::cyl_bessel_j(1, x);
  double re;
  if (x < 0.5) {
    // Y1(x) + 2 / (pi x) from its ascending series.
    double sum = 0.0, term = 0.5 * x;  // (x/2)^(2k+1) / (k! (k+1)!)
    double psi1 = -euler_gamma, psi2 = 1.0 - euler_gamma;
    for (int k = 0; k < 12; ++k) {
      sum += (k % 2 ? -1.0 : 1.0) * (psi1 + psi2) * term;
      term *= 0.25 * x * x / ((k + 1.0) * (k + 2.0));
      psi1 += 1.0 / (k + 1.0);
      psi2 += 1.0 / (k + 2.0);
    }
    const double y1_reg = (2.0 * std::log(0.5 * x) * j1 - sum) / pi;
    re = m * y1_reg / (8.0 * pi * u);
  } else {
    re = m * boost::math::cyl_neumann(1, x) / (8.0 * pi * u) + inv4pi2 / (u * u);
  }
  return {re, m * j1 / (8.0 * pi * u)};
}

}  // namespace

std::string to_string(KernelBackend b) {
  switch (b) {
    case KernelBackend::ClosedMasslessInertial: return "closed-massless-inertial";
    case KernelBackend::ClosedMasslessRindler: return "closed-massless-rindler";
    case KernelBackend::ModeIntegral: return "mode-integral";
  }
  return "?";
}

KernelBackend kernel_backend_from_string(const std::string& s) {
  if (s == "closed-massless-inertial") return KernelBackend::ClosedMasslessInertial;
  if (s == "closed-massless-rindler") return KernelBackend::ClosedMasslessRindler;
  if (s == "mode-integral") return KernelBackend::ModeIntegral;
  throw ConfigError("unknown kernel backend '" + s + "'");
}

std::vector<double> default_eps_schedule() {
  std::vector<double> e;
  for (double x = 1e-2; x >= 1e-4 * (1.0 - 1e-12); x *= 0.5) e.push_back(x);
  return e;
}

PulledBackKernel::PulledBackKernel(std::shared_ptr<const Worldline> w, KernelBackend b, double m)
    : worldline(std::move(w)), backend(b), mass(m) {
  if (!worldline) throw DomainError("kernel needs a worldline");
  check_curve(*this);
}

PulledBackKernel PulledBackKernel::for_worldline(std::shared_ptr<const Worldline> w, double m) {
  if (!w) throw DomainError("kernel needs a worldline");
  if (m == 0.0 && w->is_inertial()) return {std::move(w), KernelBackend::ClosedMasslessInertial};
  if (m == 0.0 && w->kind() == Worldline::Kind::Rindler) return {std::move(w), KernelBackend::ClosedMasslessRindler};
  return {std::move(w), KernelBackend::ModeIntegral, m};
}

cplx kernel_at_separation(const PulledBackKernel& K, double u, double eps) {
  if (!(eps >= 0.0)) throw DomainError("regulator must be non-negative");
  if (eps == 0.0 && u == 0.0) throw DomainError("kernel is singular at coincidence without regulator");
  const cplx z{u, -eps};
  switch (K.backend) {
    case KernelBackend::ClosedMasslessInertial:
      return -inv4pi2 / (z * z);
    case KernelBackend::ClosedMasslessRindler: {
      const double a = K.worldline->acceleration_parameter();
      const cplx sh = std::sinh(0.5 * a * z);
      return -inv4pi2 * 0.25 * a * a / (sh * sh);
    }
    case KernelBackend::ModeIntegral:
      if (u < 0.0) return std::conj(kernel_at_separation(K, -u, eps));
      return inv4pi2 * mode_radial_integral(K.mass, z);
  }
  throw Error("unreachable");
}

cplx kernel_value(const PulledBackKernel& K, double s1, double s2, double eps) {
  const Worldline& w = *K.worldline;
  return kernel_at_separation(K, w.proper_time(s1) - w.proper_time(s2), eps);
}

cplx kernel_limit(const PulledBackKernel& K, double s1, double s2) {
  std::vector<cplx> y;
  for (double e : K.eps_schedule) y.push_back(kernel_value(K, s1, s2, e));
  return quad::richardson(K.eps_schedule, y);
}

cplx massive_kernel_bessel(double m, double u) {
  if (u == 0.0) throw DomainError("kernel is singular at coincidence");
  if (u < 0.0) return std::conj(massive_kernel_bessel(m, -u));
  if (m == 0.0) return -inv4pi2 / (u * u);
  const double x = m * u;
  return m * cplx{boost::math::cyl_neumann(1, x), boost::math::cyl_bessel_j(1, x)} / (8.0 * pi * u);
}

std::vector<double> detector_spectrum(const PulledBackKernel& K, const CoefficientFunction& window,
                                      const std::vector<double>& omegas) {
  if (K.worldline->parametrization() != Parametrization::ProperTime)
    throw DomainError("detector response needs a proper-time parametrized curve");
  if (omegas.empty()) return {};
  double omax = 0.0;
  for (double w : omegas) omax = std::max(omax, std::abs(w));
  const bool massive = K.backend == KernelBackend::ModeIntegral && K.mass > 0.0;
  const WindowCorrelation A(window, omax, massive);
  const double a0 = A.a0();
  const double rindler_a =
      K.backend == KernelBackend::ClosedMasslessRindler ? K.worldline->acceleration_parameter() : 0.0;

  std::vector<double> out(omegas.size());
  parallel_for(omegas.size(), [&](std::size_t i) {
    const double om = omegas[i];
    // 1/(u - i0)^2 = Pf 1/u^2 - i pi delta'(u), applied to g(u) = exp(-i om u) A(u).
    const Table& s = A.smooth();
    double pf = -2.0 * a0 / A.length();
    double smooth_rest = 0.0;
    for (std::size_t k = 0; k < s.u.size(); ++k) {
      const double u = s.u[k];
      const cplx g = std::polar(1.0, -om * u) * s.a[k];
      pf += s.w[k] * (2.0 * g.real() - 2.0 * a0) / (u * u);
      if (rindler_a != 0.0) smooth_rest += s.w[k] * 2.0 * g.real() * -rindler_smooth_part(rindler_a, u);
    }
    double f = -inv4pi2 * (pf + pi * om * a0 - pi * A.a1().imag()) + inv4pi2 * smooth_rest;
    if (massive) {
      const Table& t = A.graded();
      double rest = 0.0;
      for (std::size_t k = 0; k < t.u.size(); ++k) {
        const cplx g = std::polar(1.0, -om * t.u[k]) * t.a[k];
        rest += t.w[k] * 2.0 * (g * massive_remainder(K.mass, t.u[k])).real();
      }
      f += rest;
    }
    out[i] = f;
  });
  return out;
}

double detector_response(const PulledBackKernel& K, const CoefficientFunction& window, double omega) {
  return detector_spectrum(K, window, {omega})[0];
}

std::vector<SpectrumRow> spectrum_table(const PulledBackKernel& K, const CoefficientFunction& window,
                                        const std::vector<double>& positive_omegas) {
  std::vector<double> om;
  for (double w : positive_omegas) {
    if (!(w > 0.0)) throw DomainError("spectrum frequencies must be positive");
    om.push_back(w);
    om.push_back(-w);
  }
  const auto F = detector_spectrum(K, window, om);
  std::vector<SpectrumRow> rows;
  for (std::size_t i = 0; i < positive_omegas.size(); ++i) {
    const double fp = F[2 * i], fm = F[2 * i + 1];
    rows.push_back({-positive_omegas[i], fm, fm / fp, std::log(std::abs(fm / fp))});
  }
  for (std::size_t i = 0; i < positive_omegas.size(); ++i) {
    const double fp = F[2 * i], fm = F[2 * i + 1];
    rows.push_back({positive_omegas[i], fp, fp / fm, std::log(std::abs(fp / fm))});
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.omega < b.omega; });
  return rows;
}

std::string spectrum_csv(const std::vector<SpectrumRow>& rows) {
  std::string out = "omega,F,F_ratio,ln_ratio\n";
  for (const auto& r : rows) out += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g}\n", r.omega, r.f, r.ratio, r.ln_ratio);
  return out;
}

void write_spectrum_csv(const std::string& path, const std::vector<SpectrumRow>& rows) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << spectrum_csv(rows);
}

KmsFit kms_fit(const PulledBackKernel& K, const CoefficientFunction& window,
               const std::vector<double>& positive_omegas, double noise_rel) {
  if (positive_omegas.size() < 4) throw DomainError("detailed-balance fit needs at least 4 positive frequencies");
  std::vector<double> om;
  for (double w : positive_omegas) {
    if (!(w > 0.0)) throw DomainError("fit frequencies must be positive");
    om.push_back(w);
    om.push_back(-w);
  }
  const auto F = detector_spectrum(K, window, om);
  double fmax = 0.0;
  for (double f : F) fmax = std::max(fmax, std::abs(f));
  const double floor = noise_rel * fmax;

  KmsFit fit;
  double sxx = 0.0, sxy = 0.0;
  std::vector<double> x, y;
  for (std::size_t i = 0; i < positive_omegas.size(); ++i) {
    const double fp = F[2 * i], fm = F[2 * i + 1];
    if (fp <= floor || fm <= floor) {
      fit.omegas_dropped.push_back(positive_omegas[i]);
      continue;
    }
    fit.omegas_used.push_back(positive_omegas[i]);
    fit.f_plus.push_back(fp);
    fit.f_minus.push_back(fm);
    x.push_back(positive_omegas[i]);
    y.push_back(std::log(fp / fm));
    sxx += x.back() * x.back();
    sxy += x.back() * y.back();
  }
  if (x.size() < 2)
    throw NumericalError(fmt::format("detailed-balance fit rejected: {} of {} frequencies below the noise floor",
                                     fit.omegas_dropped.size(), positive_omegas.size()));
  // Through the origin: the ratio is 1 at omega = 0.
  const double slope = sxy / sxx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) ss += std::pow(y[i] - slope * x[i], 2);
  fit.beta = -slope;
  fit.residual = std::sqrt(ss / x.size());
  fit.stderr_beta = std::sqrt(ss / double(x.size() - 1) / sxx);
  return fit;
}

nlohmann::json KmsFit::to_json() const {
  return {{"beta", beta},           {"stderr", stderr_beta},        {"residual", residual},
          {"points_used", omegas_used.size()}, {"omegas_used", omegas_used}, {"omegas_dropped", omegas_dropped},
          {"F_plus", f_plus},       {"F_minus", f_minus}};
}

HadamardCoefficients hadamard_recursion(double mass, int n) {
  if (n < 0 || n > 12) throw DomainError("recursion order must be in [0, 12]");
  if (!(mass >= 0.0) || !std::isfinite(mass)) throw DomainError("mass must be finite and non-negative");
  HadamardCoefficients h;
  h.mass = mass;
  const Rational m2 = Rational(mass) * Rational(mass);
  // Flat background: unit determinant, and every V_j is a constant so its box vanishes.
  const Rational delta = 1;
  Rational prev = delta;
  for (int j = 0; j <= n; ++j) {
    const Rational box_prev = 0;
    const Rational transported = (box_prev - m2 * prev) / delta;
    const Rational s_moment = Rational(1, j + 1);  // int_0^1 s^j ds
    const Rational v = -Rational(1, 4) * delta * transported * s_moment;
    h.exact.push_back(v);
    h.values.push_back(static_cast<double>(v));
    prev = v;
  }
  if (mass > 0.0) {
    const auto b = bessel_tail_coefficients(mass, 0);
    h.bessel_constant = static_cast<double>(b[0] / h.exact[0]);
  }
  return h;
}

std::vector<Rational> bessel_tail_coefficients(double mass, int n) {
  // J1(x)/x-type series: (m/2) sum_j (m^2/4)^j Gamma^j / (j! (j+1)!), the sign of Gamma
  // absorbing the alternation of J1.
  const Rational m = mass;
  const Rational q = m * m / 4;
  std::vector<Rational> out;
  Rational term = m / 2;
  for (int j = 0; j <= n; ++j) {
    out.push_back(term);
    term *= q / Rational((j + 1) * (j + 2));
  }
  return out;
}

nlohmann::json HadamardCoefficients::to_json() const {
  nlohmann::json ex = nlohmann::json::array();
  for (const auto& v : exact) ex.push_back(v.str());
  return {{"mass", mass}, {"V", values}, {"V_exact", ex}, {"bessel_constant", bessel_constant}};
}

ShortDistanceReport short_distance_check(const PulledBackKernel& K, const std::vector<double>& dtau) {
  if (!K.worldline->is_inertial()) throw DomainError("short-distance check needs an inertial curve");
  if (dtau.empty()) throw DomainError("empty separation grid");
  const double emin = *std::min_element(K.eps_schedule.begin(), K.eps_schedule.end());
  for (double d : dtau)
    if (!(d > 0.0 && d <= 0.5) || !(emin < 0.2 * d)) throw DomainError("separations must lie in (0, 0.5] above the regulator");

  ShortDistanceReport rep;
  rep.mass = K.mass;
  rep.rows.resize(dtau.size());
  std::vector<double> half = K.eps_schedule;
  for (double& e : half) e *= 0.5;
  auto extrapolate = [&](double d, const std::vector<double>& eps, bool weighted) {
    std::vector<cplx> y;
    for (double e : eps) {
      const cplx z{d, -e};
      y.push_back(kernel_at_separation(K, d, e) * (weighted ? z * z : cplx{1.0}));
    }
    return quad::richardson(eps, y);
  };
  parallel_for(dtau.size(), [&](std::size_t i) {
    const double d = dtau[i];
    auto& r = rep.rows[i];
    r.dtau = d;
    r.leading = extrapolate(d, K.eps_schedule, true);
    r.leading_abs = std::abs(r.leading);
    r.leading_half = extrapolate(d, half, true);
    r.residual = extrapolate(d, K.eps_schedule, false) + inv4pi2 / (d * d);
  });
  auto smallest = std::min_element(rep.rows.begin(), rep.rows.end(), [](auto& a, auto& b) { return a.dtau < b.dtau; });
  rep.limit_abs = smallest->leading_abs;
  rep.predicted_slope = K.mass * K.mass / 4.0 * inv4pi2;
  if (K.mass > 0.0 && dtau.size() >= 3) {
    std::vector<double> x, y;
    for (const auto& r : rep.rows) {
      x.push_back(std::log(r.dtau * r.dtau));
      y.push_back(r.residual.real());
    }
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    rep.ill_conditioned = (*hi - *lo) < 1.0;
    const auto fit = quad::fit_line(x, y);
    rep.log_slope = fit.slope;
    rep.log_intercept = fit.intercept;
  }
  return rep;
}

nlohmann::json ShortDistanceReport::to_json() const {
  nlohmann::json rows_j = nlohmann::json::array();
  for (const auto& r : rows)
    rows_j.push_back({{"dtau", r.dtau},
                      {"leading", {r.leading.real(), r.leading.imag()}},
                      {"leading_abs", r.leading_abs},
                      {"leading_half_eps", {r.leading_half.real(), r.leading_half.imag()}},
                      {"residual", {r.residual.real(), r.residual.imag()}}});
  return {{"mass", mass},
          {"rows", rows_j},
          {"limit_abs", limit_abs},
          {"log_slope", log_slope},
          {"log_intercept", log_intercept},
          {"predicted_slope", predicted_slope},
          {"ill_conditioned", ill_conditioned}};
}

}  // namespace wlf
