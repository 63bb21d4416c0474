#include "wlfield/one_particle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>
#include <unsupported/Eigen/FFT>

#include "wlfield/parallel.hpp"
#include "wlfield/quadrature.hpp"

namespace wlf {

namespace {

const double kNorm = std::pow(2.0 * pi, -1.5);

double dot3(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
Vec3 cross3(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
Vec3 spatial(const FourVector& v) { return {v[1], v[2], v[3]}; }

std::array<Vec3, 3> orthonormal_axes(const std::array<Vec3, 3>& axes) {
  Vec3 a = axes[2];
  double n = std::sqrt(dot3(a, a));
  if (!(n > 0.0)) throw DomainError("mode grid: zero polar axis");
  for (double& v : a) v /= n;
  Vec3 b1 = axes[0];
  const double p = dot3(b1, a);
  for (int i = 0; i < 3; ++i) b1[i] -= p * a[i];
  n = std::sqrt(dot3(b1, b1));
  if (!(n > 1e-12)) throw DomainError("mode grid: first axis parallel to the polar axis");
  for (double& v : b1) v /= n;
  const Vec3 b2{a[1] * b1[2] - a[2] * b1[1], a[2] * b1[0] - a[0] * b1[2], a[0] * b1[1] - a[1] * b1[0]};
  return {b1, b2, a};
}

std::size_t plm_index(int l, int m) { return std::size_t(l) * (l + 1) / 2 + m; }

// Orthonormal P_l^m(x) with the Condon-Shortley phase, 0 <= m <= l <= L.
void legendre_table(int L, double x, double* out) {
  const double s = std::sqrt(std::max(0.0, 1.0 - x * x));
  double pmm = 1.0 / std::sqrt(4.0 * pi);
  for (int m = 0; m <= L; ++m) {
    if (m > 0) pmm *= -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s;
    out[plm_index(m, m)] = pmm;
    if (m == L) break;
    double p1 = std::sqrt(2.0 * m + 3.0) * x * pmm;
    out[plm_index(m + 1, m)] = p1;
    double p0 = pmm;
    for (int l = m + 2; l <= L; ++l) {
      const double a = std::sqrt((4.0 * l * l - 1.0) / (double(l) * l - double(m) * m));
      const double b = std::sqrt((double(l - 1) * (l - 1) - double(m) * m) / (4.0 * (l - 1) * (l - 1) - 1.0));
      const double p = a * (x * p1 - b * p0);
      out[plm_index(l, m)] = p;
      p0 = p1;
      p1 = p;
    }
  }
}

// Time-quadrature data along the curve for one radial node.
struct CurveNodes {
  std::vector<double> w;
  std::vector<FourVector> dx;  // event minus grid origin
  std::vector<Frame> frame;
  std::vector<std::vector<cplx>> a;  // per term, coefficient at each node
};

struct TermList {
  std::vector<MultiIndex> alpha;
  std::vector<CoefficientFunction> coeff;
  double lo = 0.0, hi = 0.0, feature = 1.0, frequency = 0.0;
  // Where some coefficient exceeds 1e-7 of its maximum.
  double eff_lo = 0.0, eff_hi = 0.0;
  int order = 0;
};

TermList collect_terms(const JetDistribution& T) {
  TermList out;
  out.lo = std::numeric_limits<double>::infinity();
  out.hi = -out.lo;
  out.feature = std::numeric_limits<double>::infinity();
  for (const auto& [alpha, c] : T.terms()) {
    if (c.is_zero()) continue;
    out.alpha.push_back(alpha);
    out.coeff.push_back(c);
    const auto [lo, hi] = c.support();
    out.lo = std::min(out.lo, lo);
    out.hi = std::max(out.hi, hi);
    out.feature = std::min(out.feature, c.feature());
    out.frequency = std::max(out.frequency, c.frequency());
    out.order = std::max(out.order, alpha.order());
  }
  out.eff_lo = out.hi;
  out.eff_hi = out.lo;
  for (const auto& c : out.coeff) {
    const auto [lo, hi] = c.support();
    const int n = 512;
    std::vector<double> mag(n + 1);
    for (int k = 0; k <= n; ++k) mag[k] = std::abs(c(lo + (hi - lo) * k / n));
    const double peak = *std::max_element(mag.begin(), mag.end());
    for (int k = 0; k <= n; ++k)
      if (mag[k] > 1e-7 * peak) {
        const double t = lo + (hi - lo) * k / n;
        out.eff_lo = std::min(out.eff_lo, t - (hi - lo) / n);
        out.eff_hi = std::max(out.eff_hi, t + (hi - lo) / n);
      }
  }
  return out;
}

CurveNodes curve_nodes(const JetDistribution& T, const TermList& terms, double lambda, const FourVector& origin) {
  const Worldline& w = T.worldline();
  // Panels of at most one local period; the Doppler factor can grow along the curve.
  const double span = terms.hi - terms.lo, wide = std::min(terms.feature / 2.0, span / 2.0);
  quad::NodeSet ns;
  for (double t = terms.lo; t < terms.hi - 1e-12 * span;) {
    double width = std::min(wide, terms.hi - t);
    const double freq = lambda * w.max_doppler(t, t + width) + terms.frequency;
    if (freq > 0.0) width = std::min(width, 2.0 * pi / freq);
    ns.append(quad::composite(t, t + width, 1, 16));
    t += width;
  }
  CurveNodes cn;
  cn.w = ns.w;
  cn.dx.resize(ns.size());
  cn.frame.resize(ns.size());
  cn.a.assign(terms.alpha.size(), std::vector<cplx>(ns.size()));
  for (std::size_t j = 0; j < ns.size(); ++j) {
    cn.dx[j] = w.evaluate(ns.x[j]).event - origin;
    if (terms.order > 0) cn.frame[j] = w.tetrad(T.frame(), ns.x[j]);
    for (std::size_t t = 0; t < terms.alpha.size(); ++t) cn.a[t][j] = terms.coeff[t](ns.x[j]);
  }
  return cn;
}

// i (lambda e^0 - xi . e) for a frame leg e.
cplx leg_factor(double lambda, const Vec3& xi, const FourVector& e) {
  return I * (lambda * e[0] - dot3(xi, spatial(e)));
}

cplx multi_factor(double lambda, const Vec3& xi, const Frame& fr, const MultiIndex& alpha) {
  cplx f = 1.0;
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < alpha.a[i]; ++k) f *= leg_factor(lambda, xi, fr.e[i + 1]);
  return f;
}

cplx general_value(const TermList& terms, const CurveNodes& cn, double lambda, const Vec3& xi) {
  cplx acc = 0.0;
  for (std::size_t j = 0; j < cn.w.size(); ++j) {
    const FourVector& d = cn.dx[j];
    const cplx e = std::polar(cn.w[j], lambda * d[0] - (xi[0] * d[1] + xi[1] * d[2] + xi[2] * d[3]));
    cplx s = 0.0;
    for (std::size_t t = 0; t < terms.alpha.size(); ++t) {
      const cplx a = cn.a[t][j];
      if (a == 0.0) continue;
      s += terms.alpha[t].order() == 0 ? a : a * multi_factor(lambda, xi, cn.frame[j], terms.alpha[t]);
    }
    acc += s * e;
  }
  return kNorm / std::sqrt(lambda) * acc;
}

// Closed form on an inertial curve: the time integral is a coefficient transform.
cplx inertial_value(const JetDistribution& T, double lambda, const FourVector& origin, const Vec3& xi) {
  const Worldline& w = T.worldline();
  const FourVector x0 = w.evaluate(0.0).event - origin;
  const FourVector u = w.four_velocity(0.0);
  const Frame fr = w.tetrad(T.frame(), 0.0);
  const double omega = lambda * u[0] - dot3(xi, spatial(u));
  cplx acc = 0.0;
  for (const auto& [alpha, c] : T.terms()) {
    if (c.is_zero()) continue;
    acc += multi_factor(lambda, xi, fr, alpha) * c.transform(omega);
  }
  const double phase = lambda * x0[0] - dot3(xi, spatial(x0));
  return kNorm / std::sqrt(lambda) * std::polar(1.0, phase) * acc;
}

}  // namespace

nlohmann::json GridOptions::to_json() const {
  return {{"mass", mass},
          {"r_max", r_max},
          {"radial_panels", radial_panels},
          {"l_max", l_max},
          {"origin", origin.c},
          {"axes", axes},
          {"points_per_panel", points_per_panel},
          {"align_axes", align_axes}};
}

GridOptions GridOptions::from_json(const nlohmann::json& j) {
  GridOptions o;
  try {
    o.mass = j.value("mass", 0.0);
    o.r_max = j.value("r_max", 0.0);
    o.radial_panels = j.value("radial_panels", 0);
    o.l_max = j.value("l_max", -1);
    if (j.contains("origin")) o.origin.c = j.at("origin").get<std::array<double, 4>>();
    if (j.contains("axes")) o.axes = j.at("axes").get<std::array<Vec3, 3>>();
    o.points_per_panel = j.value("points_per_panel", 16);
    o.align_axes = j.value("align_axes", true);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
  return o;
}

ModeGrid::ModeGrid(const GridOptions& opt) : opt_(opt) {
  if (!(opt.mass >= 0.0)) throw DomainError("mode grid: mass must be nonnegative");
  if (!(opt.r_max > 0.0)) throw DomainError("mode grid: r_max must be positive");
  if (opt.radial_panels <= 0) throw DomainError("mode grid: radial_panels must be positive");
  if (opt.l_max < 0) throw DomainError("mode grid: l_max must be nonnegative");
  if (opt.points_per_panel < 2) throw DomainError("mode grid: points_per_panel must be at least 2");
  opt_.axes = orthonormal_axes(opt.axes);
  const auto ns = quad::composite(0.0, opt.r_max, opt.radial_panels, opt.points_per_panel);
  r_ = ns.x;
  wr_ = ns.w;
  lam_.resize(r_.size());
  for (std::size_t i = 0; i < r_.size(); ++i) lam_[i] = std::sqrt(r_[i] * r_[i] + opt.mass * opt.mass);

  const int L = opt.l_max;
  nth_ = L + 1;
  nph_ = 2 * L + 2;
  const auto& rule = quad::gauss_legendre(nth_);
  x_ = rule.nodes;
  wx_ = rule.weights;
  const std::size_t per = plm_index(L, L) + 1;
  plm_.resize(per * nth_);
  for (int j = 0; j < nth_; ++j) legendre_table(L, x_[j], plm_.data() + j * per);
  const auto& ax = opt_.axes;
  dirs_.resize(std::size_t(nth_) * nph_);
  for (int j = 0; j < nth_; ++j) {
    const double x = x_[j], st = std::sqrt(std::max(0.0, 1.0 - x * x));
    for (int k = 0; k < nph_; ++k) {
      const double ph = 2.0 * pi * k / nph_;
      Vec3& n = dirs_[std::size_t(j) * nph_ + k];
      for (int i = 0; i < 3; ++i) n[i] = st * std::cos(ph) * ax[0][i] + st * std::sin(ph) * ax[1][i] + x * ax[2][i];
    }
  }
}

Vec3 ModeGrid::direction(int j, int k) const { return dirs_[std::size_t(j) * nph_ + k]; }

void ModeGrid::project(std::span<const cplx> values, std::span<cplx> coeffs) const {
  const int L = opt_.l_max;
  const std::size_t per = plm_index(L, L) + 1;
  std::fill(coeffs.begin(), coeffs.end(), cplx(0.0));
  Eigen::FFT<double> fft;
  std::vector<cplx> row(nph_), spec(std::size_t(nth_) * nph_);
  for (int j = 0; j < nth_; ++j) {
    std::copy_n(values.begin() + std::size_t(j) * nph_, nph_, row.begin());
    std::vector<cplx> out(nph_);
    fft.fwd(out, row);
    std::copy(out.begin(), out.end(), spec.begin() + std::size_t(j) * nph_);
  }
  // Azimuthal orders at round-off level contribute nothing; skipping them makes
  // axisymmetric data cost O(L^2) instead of O(L^3).
  std::vector<double> mmax(nph_, 0.0);
  double top = 0.0;
  for (int j = 0; j < nth_; ++j)
    for (int k = 0; k < nph_; ++k) {
      const double a = std::abs(spec[std::size_t(j) * nph_ + k]);
      mmax[k] = std::max(mmax[k], a);
      top = std::max(top, a);
    }
  const double dphi = 2.0 * pi / nph_;
  for (int m = -L; m <= L; ++m) {
    const int slot = (m + nph_) % nph_;
    if (mmax[slot] <= 1e-17 * top) continue;
    const int am = std::abs(m);
    const double sign = (m < 0 && (am % 2)) ? -1.0 : 1.0;
    for (int j = 0; j < nth_; ++j) {
      const cplx Fm = sign * wx_[j] * dphi * spec[std::size_t(j) * nph_ + slot];
      const double* p = plm_.data() + j * per;
      for (int l = am; l <= L; ++l) coeffs[index(l, m)] += p[plm_index(l, am)] * Fm;
    }
  }
}

cplx ModeGrid::harmonic(int l, int m, double x, double phi) const {
  if (l < 0 || l > opt_.l_max || std::abs(m) > l) throw DomainError("harmonic: index out of range");
  std::vector<double> p(plm_index(opt_.l_max, opt_.l_max) + 1);
  legendre_table(opt_.l_max, x, p.data());
  const int am = std::abs(m);
  const double sign = (m < 0 && (am % 2)) ? -1.0 : 1.0;
  return sign * p[plm_index(l, am)] * std::polar(1.0, m * phi);
}

bool ModeGrid::compatible(const ModeGrid& o) const {
  return this == &o || (o.opt_.to_json() == opt_.to_json());
}

GridOptions resolve_grid_options(GridOptions opt, const std::vector<const JetDistribution*>& dists) {
  const double thresh = 1e-12;
  double rho_cut = 0.0, extent = 0.0, reach = 0.0;
  int order = 0;
  for (const auto* T : dists) {
    const TermList terms = collect_terms(*T);
    if (terms.alpha.empty()) continue;
    order = std::max(order, terms.order);
    // Probe r |KT| along a fixed set of directions until it stays below the threshold.
    static const std::array<Vec3, 14> probes = [] {
      std::array<Vec3, 14> p{};
      int n = 0;
      for (int i = 0; i < 3; ++i)
        for (double s : {-1.0, 1.0}) {
          Vec3 v{0.0, 0.0, 0.0};
          v[i] = s;
          p[n++] = v;
        }
      const double c = 1.0 / std::sqrt(3.0);
      for (double a : {-c, c})
        for (double b : {-c, c})
          for (double d : {-c, c}) p[n++] = {a, b, d};
      return p;
    }();
    if (opt.r_max <= 0.0 || opt.l_max < 0) {
    auto g = [&](double r) {
      double v = 0.0;
      for (const auto& n : probes)
        v = std::max(v, r * std::abs(k_map_point(*T, opt.mass, opt.origin, {r * n[0], r * n[1], r * n[2]})));
      return v;
    };
    const double step = 0.1 / terms.feature;
    double peak = 0.0, last = step;
    int quiet = 0;
    for (double r = step; r <= 4000.0 / terms.feature + terms.frequency; r += step) {
      const double v = g(r);
      if (v > peak) peak = v;
      if (v > thresh * peak) {
        last = r;
        quiet = 0;
      } else if (++quiet > 60) {
        break;
      }
    }
    rho_cut = std::max(rho_cut, last);
    }
    for (int k = 0; k <= 32; ++k) {
      const double tau = terms.eff_lo + (terms.eff_hi - terms.eff_lo) * k / 32.0;
      const FourVector d = T->worldline().evaluate(tau).event - opt.origin;
      extent = std::max(extent, std::abs(d[0]) + spatial_norm(d));
      reach = std::max(reach, spatial_norm(d));
    }
  }
  if (opt.align_axes) {
    // Polar axis along the common line of all curves through the origin, if there is one.
    std::vector<Vec3> disp;
    for (const auto* T : dists) {
      const TermList terms = collect_terms(*T);
      if (terms.alpha.empty()) continue;
      for (int k = 0; k <= 32; ++k) {
        const double tau = terms.eff_lo + (terms.eff_hi - terms.eff_lo) * k / 32.0;
        disp.push_back(spatial(T->worldline().evaluate(tau).event - opt.origin));
      }
    }
    Vec3 axis{0.0, 0.0, 0.0};
    double best = 0.0;
    for (const auto& v : disp)
      if (dot3(v, v) > best) {
        best = dot3(v, v);
        axis = v;
      }
    bool line = best > 1e-20;
    for (const auto& v : disp) {
      const Vec3 c = cross3(v, axis);
      if (dot3(c, c) > 1e-24 * best * (1.0 + dot3(v, v))) line = false;
    }
    if (line) {
      const double n = std::sqrt(best);
      for (double& c : axis) c /= n;
      const int i = std::abs(axis[0]) < 0.9 ? 0 : 1;
      Vec3 b1{0.0, 0.0, 0.0};
      b1[i] = 1.0;
      opt.axes = orthonormal_axes({b1, b1, axis});
    }
  }
  if (opt.r_max <= 0.0) opt.r_max = std::max(1.0, 2.0 * rho_cut);
  if (opt.radial_panels <= 0)
    opt.radial_panels = std::max(8, static_cast<int>(std::ceil(opt.r_max * (2.0 * extent + 1.0) / 12.0)));
  if (opt.l_max < 0) {
    // Band limit where the signal ends; beyond it the map is below the cutoff anyway.
    const double b = (rho_cut > 0.0 ? std::min(opt.r_max, rho_cut) : opt.r_max) * reach;
    opt.l_max = order + (b > 1e-12 ? static_cast<int>(std::ceil(b + 20.0 + 3.0 * std::cbrt(b))) : 2);
  }
  return opt;
}

ModeGridPtr make_grid(const GridOptions& opt, const std::vector<const JetDistribution*>& dists) {
  return std::make_shared<const ModeGrid>(resolve_grid_options(opt, dists));
}

OneParticleVector::OneParticleVector(ModeGridPtr grid)
    : grid_(std::move(grid)), stride_(grid_->n_harmonics()), c_(grid_->n_radial() * stride_) {}

cplx OneParticleVector::value(std::size_t ir, double x, double phi) const {
  const int L = grid_->l_max();
  cplx s = 0.0;
  for (int l = 0; l <= L; ++l)
    for (int m = -l; m <= l; ++m) s += at(ir, l, m) * grid_->harmonic(l, m, x, phi);
  return s;
}

double OneParticleVector::norm2() const {
  double s = 0.0;
  for (std::size_t i = 0; i < grid_->n_radial(); ++i) {
    double t = 0.0;
    for (const cplx& c : radial_slice(i)) t += std::norm(c);
    s += grid_->radial_weight(i) * grid_->r(i) * grid_->r(i) * t;
  }
  return s;
}

OneParticleVector& OneParticleVector::operator+=(const OneParticleVector& o) {
  if (!grid_->compatible(o.grid())) throw DomainError("one-particle vectors live on different grids");
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}

OneParticleVector operator*(cplx s, OneParticleVector a) {
  for (auto& c : a.c_) c *= s;
  return a;
}

namespace {

template <class ValueAt>
OneParticleVector project_all(const ModeGridPtr& grid, ValueAt&& value_at) {
  OneParticleVector out(grid);
  const int nth = grid->n_theta(), nph = grid->n_phi();
  parallel_for(grid->n_radial(), [&](std::size_t ir) {
    std::vector<cplx> vals(std::size_t(nth) * nph);
    value_at(ir, vals);
    grid->project(vals, out.radial_slice(ir));
  });
  return out;
}

// Curve stays on the line through the grid origin along the polar axis.
bool collinear_with_axis(const CurveNodes& cn, const Vec3& axis) {
  for (const auto& d : cn.dx) {
    const Vec3 c = cross3(spatial(d), axis);
    if (dot3(c, c) > 1e-24 * (1.0 + dot3(spatial(d), spatial(d)))) return false;
  }
  return true;
}

}  // namespace

OneParticleVector k_map_inertial(const JetDistribution& T, const ModeGridPtr& grid) {
  const Worldline& w = T.worldline();
  if (!w.is_inertial()) throw DomainError("k_map_inertial: worldline is not inertial");
  if (grid->l_max() < T.order()) throw DomainError("k_map_inertial: l_max below the distribution order");
  const FourVector u = w.four_velocity(0.0);
  const bool at_rest = spatial_norm(u) == 0.0;
  const Frame fr = w.tetrad(T.frame(), 0.0);
  const FourVector x0 = w.evaluate(0.0).event - grid->origin();
  std::vector<MultiIndex> alphas;
  std::vector<CoefficientFunction> coeffs;
  for (const auto& [alpha, c] : T.terms())
    if (!c.is_zero()) {
      alphas.push_back(alpha);
      coeffs.push_back(c);
    }
  // Per angular node: n . x0, n . u and n . e_i.
  const std::size_t na = std::size_t(grid->n_theta()) * grid->n_phi();
  std::vector<double> nx(na), nu(na);
  std::vector<std::array<double, 3>> ne(na);
  for (std::size_t q = 0; q < na; ++q) {
    const Vec3 n = grid->direction(int(q / grid->n_phi()), int(q % grid->n_phi()));
    nx[q] = dot3(n, spatial(x0));
    nu[q] = dot3(n, spatial(u));
    for (int i = 0; i < 3; ++i) ne[q][i] = dot3(n, spatial(fr.e[i + 1]));
  }
  return project_all(grid, [&](std::size_t ir, std::vector<cplx>& vals) {
    const double lam = grid->lambda(ir), r = grid->r(ir);
    const double pref = kNorm / std::sqrt(lam);
    std::vector<cplx> rest_hat;
    if (at_rest)
      for (const auto& c : coeffs) rest_hat.push_back(c.transform(lam));
    for (std::size_t q = 0; q < na; ++q) {
      cplx acc = 0.0;
      for (std::size_t t = 0; t < alphas.size(); ++t) {
        const cplx ah = at_rest ? rest_hat[t] : coeffs[t].transform(lam * u[0] - r * nu[q]);
        if (ah == 0.0) continue;
        cplx f = 1.0;
        for (int i = 0; i < 3; ++i)
          for (int k = 0; k < alphas[t].a[i]; ++k) f *= I * (lam * fr.e[i + 1][0] - r * ne[q][i]);
        acc += f * ah;
      }
      vals[q] = pref * std::polar(1.0, lam * x0[0] - r * nx[q]) * acc;
    }
  });
}

OneParticleVector k_map_general(const JetDistribution& T, const ModeGridPtr& grid) {
  const Worldline& w = T.worldline();
  const TermList terms = collect_terms(T);
  if (terms.order > 1 && !w.is_inertial())
    throw DomainError("k_map_general: order above 1 needs an inertial curve");
  if (grid->l_max() < T.order()) throw DomainError("k_map_general: l_max below the distribution order");
  if (terms.alpha.empty()) return OneParticleVector(grid);
  const auto& ax = grid->options().axes;
  const int nth = grid->n_theta(), nph = grid->n_phi();
  return project_all(grid, [&](std::size_t ir, std::vector<cplx>& vals) {
    const double lam = grid->lambda(ir), r = grid->r(ir);
    const CurveNodes cn = curve_nodes(T, terms, lam, grid->origin());
    const std::size_t nt = cn.w.size();
    if (!collinear_with_axis(cn, ax[2])) {
      for (int j = 0; j < nth; ++j)
        for (int k = 0; k < nph; ++k) {
          const Vec3 n = grid->direction(j, k);
          vals[std::size_t(j) * nph + k] = general_value(terms, cn, lam, {r * n[0], r * n[1], r * n[2]});
        }
      return;
    }
    // The phase depends on xi only through q = xi . axis, so time integrals are shared by each ring.
    std::vector<double> s(nt);
    for (std::size_t m = 0; m < nt; ++m) s[m] = dot3(spatial(cn.dx[m]), ax[2]);
    const double pref = kNorm / std::sqrt(lam);
    std::vector<cplx> E(nt);
    for (int j = 0; j < nth; ++j) {
      const double x = grid->cos_theta(j), st = std::sqrt(std::max(0.0, 1.0 - x * x));
      const double q = r * x;
      for (std::size_t m = 0; m < nt; ++m) E[m] = std::polar(cn.w[m], lam * cn.dx[m][0] - q * s[m]);
      if (w.is_inertial()) {
        // Constant legs: the derivative factors leave the time integral.
        std::vector<cplx> J(terms.alpha.size(), 0.0);
        for (std::size_t t = 0; t < terms.alpha.size(); ++t)
          for (std::size_t m = 0; m < nt; ++m) J[t] += cn.a[t][m] * E[m];
        const Frame fr = terms.order > 0 ? cn.frame[0] : Frame{};
        for (int k = 0; k < nph; ++k) {
          const Vec3 n = grid->direction(j, k);
          const Vec3 xi{r * n[0], r * n[1], r * n[2]};
          cplx acc = 0.0;
          for (std::size_t t = 0; t < terms.alpha.size(); ++t)
            acc += (terms.alpha[t].order() == 0 ? cplx(1.0) : multi_factor(lam, xi, fr, terms.alpha[t])) * J[t];
          vals[std::size_t(j) * nph + k] = pref * acc;
        }
        continue;
      }
      // Order <= 1 legs vary along the curve; xi . e splits into ring, cos(phi) and sin(phi) parts.
      cplx I0 = 0.0, C = 0.0, S = 0.0;
      for (std::size_t m = 0; m < nt; ++m) {
        cplx base = 0.0, cpart = 0.0, spart = 0.0;
        for (std::size_t t = 0; t < terms.alpha.size(); ++t) {
          const cplx a = cn.a[t][m];
          if (a == 0.0) continue;
          if (terms.alpha[t].order() == 0) {
            base += a;
            continue;
          }
          const int i = terms.alpha[t][0] ? 1 : terms.alpha[t][1] ? 2 : 3;
          const FourVector& e = cn.frame[m].e[i];
          const Vec3 ev = spatial(e);
          base += a * I * (lam * e[0] - q * dot3(ax[2], ev));
          cpart += a * (-I) * r * st * dot3(ax[0], ev);
          spart += a * (-I) * r * st * dot3(ax[1], ev);
        }
        I0 += base * E[m];
        C += cpart * E[m];
        S += spart * E[m];
      }
      for (int k = 0; k < nph; ++k) {
        const double ph = 2.0 * pi * k / nph;
        vals[std::size_t(j) * nph + k] = pref * (I0 + std::cos(ph) * C + std::sin(ph) * S);
      }
    }
  });
}

OneParticleVector k_map(const JetDistribution& T, const ModeGridPtr& grid) {
  return T.worldline().is_inertial() ? k_map_inertial(T, grid) : k_map_general(T, grid);
}

OneParticleVector k_map(const MollifiedJet& T, const ModeGridPtr& grid) {
  return apply_mollifier(k_map(T.base(), grid), T.scale());
}

cplx k_map_point(const JetDistribution& T, double mass, const FourVector& origin, const Vec3& xi) {
  const double lam = std::sqrt(dot3(xi, xi) + mass * mass);
  if (!(lam > 0.0)) throw DomainError("k_map_point: zero momentum in the massless case");
  if (T.worldline().is_inertial()) return inertial_value(T, lam, origin, xi);
  const TermList terms = collect_terms(T);
  if (terms.alpha.empty()) return 0.0;
  if (terms.order > 1) throw DomainError("k_map_point: order above 1 needs an inertial curve");
  return general_value(terms, curve_nodes(T, terms, lam, origin), lam, xi);
}

OneParticleVector apply_mollifier(const OneParticleVector& u, double k) {
  if (!(k > 0.0)) throw DomainError("mollify: scale must be positive");
  OneParticleVector out = u;
  const auto& g = u.grid();
  for (std::size_t i = 0; i < g.n_radial(); ++i) {
    const double p = std::sqrt(g.lambda(i) * g.lambda(i) + g.r(i) * g.r(i));
    const double m = mollifier_profile(p / k);
    for (cplx& c : out.radial_slice(i)) c *= m;
  }
  return out;
}

cplx inner_product(const OneParticleVector& u, const OneParticleVector& v) {
  const auto& g = u.grid();
  if (!g.compatible(v.grid())) throw DomainError("inner_product: vectors live on different grids");
  cplx s = 0.0;
  for (std::size_t i = 0; i < g.n_radial(); ++i) {
    cplx t = 0.0;
    const auto a = u.radial_slice(i), b = v.radial_slice(i);
    for (std::size_t h = 0; h < a.size(); ++h) t += std::conj(a[h]) * b[h];
    s += g.radial_weight(i) * g.r(i) * g.r(i) * t;
  }
  return s;
}

cplx two_point(const JetDistribution& T, const JetDistribution& S, const ModeGridPtr& grid) {
  return inner_product(k_map(T.conj(), grid), k_map(S, grid));
}

double commutator(const JetDistribution& T, const JetDistribution& S, const ModeGridPtr& grid) {
  if (!T.is_real() || !S.is_real()) throw DomainError("commutator: distributions must be real");
  return inner_product(k_map(T, grid), k_map(S, grid)).imag();
}

double commutator_light_cone(const JetDistribution& T, const JetDistribution& S) {
  for (const auto* D : {&T, &S}) {
    if (!D->worldline().is_at_rest()) throw DomainError("light-cone commutator needs curves at rest");
    for (const auto& [alpha, c] : D->terms())
      if (alpha.order() > 0 && !c.is_zero()) throw DomainError("light-cone commutator needs order-0 distributions");
    if (!D->is_real()) throw DomainError("light-cone commutator needs real distributions");
  }
  const FourVector x = T.worldline().offset(), y = S.worldline().offset();
  const double d = spatial_norm(y - x);
  if (!(d > 0.0)) throw DomainError("light-cone commutator needs distinct curves");
  const auto coeff = [](const JetDistribution& D) {
    const auto it = D.terms().find(MultiIndex(0, 0, 0));
    return it == D.terms().end() ? CoefficientFunction() : it->second;
  };
  const auto a = coeff(T), b = coeff(S);
  if (a.is_zero() || b.is_zero()) return 0.0;
  const double dt = x[0] - y[0];
  return a.integrate([&](double t) { return b(t + dt + d) - b(t + dt - d); }).real() / (4.0 * pi * d);
}

std::vector<double> angular_spectrum(const OneParticleVector& u) {
  const auto& g = u.grid();
  std::vector<double> out(g.l_max() + 1, 0.0);
  for (std::size_t i = 0; i < g.n_radial(); ++i) {
    const double w = g.radial_weight(i) * g.r(i) * g.r(i);
    for (int l = 0; l <= g.l_max(); ++l)
      for (int m = -l; m <= l; ++m) out[l] += w * std::norm(u.at(i, l, m));
  }
  return out;
}

double detector_norm(const JetDistribution& T, const ModeGridPtr& grid) { return k_map(T.conj(), grid).norm2(); }

void write_vector_csv(const std::string& path, const OneParticleVector& u) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path);
  const auto& g = u.grid();
  os << "r,l,m,re,im\n";
  for (std::size_t i = 0; i < g.n_radial(); ++i)
    for (int l = 0; l <= g.l_max(); ++l)
      for (int m = -l; m <= l; ++m) {
        const cplx c = u.at(i, l, m);
        os << fmt::format("{:.17g},{},{},{:.17g},{:.17g}\n", g.r(i), l, m, c.real(), c.imag());
      }
}

}  // namespace wlf
