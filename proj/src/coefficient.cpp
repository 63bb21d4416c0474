#include "wlfield/coefficient.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/special_functions/binomial.hpp>
#include <fmt/format.h>

#include "wlfield/quadrature.hpp"

namespace wlf {

struct CoefficientFunction::Node {
  virtual ~Node() = default;
  virtual cplx value(double t) const = 0;
  virtual cplx deriv(double t) const { return fd_deriv(t); }
  virtual cplx transform(double rho) const { return numeric_transform(rho); }
  virtual std::pair<double, double> support() const = 0;
  virtual double feature() const = 0;
  virtual double frequency() const { return 0.0; }
  virtual bool real() const = 0;
  virtual bool zero() const { return false; }
  virtual std::string family() const = 0;
  virtual nlohmann::json json() const;

  cplx fd_deriv(double t) const {
    const double h = 1e-3 * std::min(feature(), frequency() > 0.0 ? 1.0 / frequency() : feature());
    return (value(t - 2 * h) - 8.0 * value(t - h) + 8.0 * value(t + h) - value(t + 2 * h)) / (12.0 * h);
  }

  cplx numeric_transform(double rho) const {
    const auto [lo, hi] = support();
    if (!(hi > lo)) return 0.0;
    const auto edges = transform_panel_edges(lo, hi, feature(), std::abs(rho) + frequency());
    const auto& rule = quad::gauss_legendre(16);
    cplx acc = 0.0;
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
      const double half = 0.5 * (edges[p + 1] - edges[p]), mid = 0.5 * (edges[p + 1] + edges[p]);
      cplx part = 0.0;
      for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        const double t = mid + half * rule.nodes[k];
        part += rule.weights[k] * std::exp(I * (rho * t)) * value(t);
      }
      acc += half * part;
    }
    return acc;
  }
};

std::vector<double> transform_panel_edges(double lo, double hi, double feature, double frequency) {
  double width = feature > 0.0 ? feature / 4.0 : hi - lo;
  if (frequency > 0.0) width = std::min(width, 2.0 * pi / frequency);
  const int n = std::max(1, static_cast<int>(std::ceil((hi - lo) / width - 1e-9)));
  std::vector<double> e(n + 1);
  for (int k = 0; k <= n; ++k) e[k] = lo + (hi - lo) * k / n;
  return e;
}

namespace {

using Node = CoefficientFunction::Node;

nlohmann::json amplitude_json(cplx a) {
  if (a.imag() == 0.0) return a.real();
  return nlohmann::json::array({a.real(), a.imag()});
}

cplx amplitude_from_json(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  const auto v = j.get<std::array<double, 2>>();
  return {v[0], v[1]};
}

struct ZeroNode final : Node {
  cplx value(double) const override { return 0.0; }
  cplx deriv(double) const override { return 0.0; }
  cplx transform(double) const override { return 0.0; }
  std::pair<double, double> support() const override { return {0.0, 0.0}; }
  double feature() const override { return 1.0; }
  bool real() const override { return true; }
  bool zero() const override { return true; }
  std::string family() const override { return "zero"; }
  nlohmann::json json() const override { return {{"family", "zero"}}; }
};

// amp * shape(t - c) * exp(-i omega t) with a real even shape supported on [-h, h].
struct FamilyNode : Node {
  double c, h;
  cplx amp;
  double omega;
  FamilyNode(double c_, double h_, cplx a_, double w_) : c(c_), h(h_), amp(a_), omega(w_) {}

  virtual double shape(double s) const = 0;
  virtual double shape_prime(double s) const = 0;
  virtual double shape_transform(double kappa) const = 0;
  virtual double reach() const { return h; }

  cplx value(double t) const override {
    const double s = t - c;
    if (std::abs(s) >= reach()) return 0.0;
    return amp * shape(s) * std::exp(-I * (omega * t));
  }
  cplx deriv(double t) const override {
    const double s = t - c;
    if (std::abs(s) >= reach()) return 0.0;
    return amp * (shape_prime(s) - I * omega * shape(s)) * std::exp(-I * (omega * t));
  }
  cplx transform(double rho) const override {
    const double k = rho - omega;
    return amp * std::exp(I * (k * c)) * shape_transform(k);
  }
  std::pair<double, double> support() const override { return {c - reach(), c + reach()}; }
  double feature() const override { return h; }
  double frequency() const override { return std::abs(omega); }
  bool real() const override { return omega == 0.0 && amp.imag() == 0.0; }

  nlohmann::json params() const {
    return {{"center", c}, {"width", h}, {"amplitude", amplitude_json(amp)}, {"omega", omega}};
  }
  nlohmann::json json() const override { return {{"family", family()}, {"params", params()}}; }
};

struct GaussianNode final : FamilyNode {
  using FamilyNode::FamilyNode;
  double reach() const override { return 8.0 * h; }
  double shape(double s) const override { return std::exp(-s * s / (2.0 * h * h)); }
  double shape_prime(double s) const override { return -s / (h * h) * shape(s); }
  double shape_transform(double k) const override {
    return h * std::sqrt(2.0 * pi) * std::exp(-0.5 * h * h * k * k);
  }
  // The closed-form transform is of the untruncated Gaussian; the tail beyond 8 sigma is ~1e-14.
  std::string family() const override { return "gaussian"; }
};

struct CosinePowerNode final : FamilyNode {
  int p;
  CosinePowerNode(double c_, double h_, cplx a_, double w_, int p_) : FamilyNode(c_, h_, a_, w_), p(p_) {}
  double shape(double s) const override { return std::pow(std::cos(pi * s / (2.0 * h)), p); }
  double shape_prime(double s) const override {
    const double th = pi * s / (2.0 * h);
    return -p * std::pow(std::cos(th), p - 1) * std::sin(th) * pi / (2.0 * h);
  }
  double shape_transform(double k) const override {
    // cos^p = 2^-p sum_j C(p,j) exp(i (p-2j) theta), each term integrates to a sinc.
    double acc = 0.0;
    for (int j = 0; j <= p; ++j) {
      const double kk = k + (p - 2 * j) * pi / (2.0 * h);
      const double x = kk * h;
      const double sinc = std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x;
      acc += boost::math::binomial_coefficient<double>(p, j) * 2.0 * h * sinc;
    }
    return std::ldexp(acc, -p);
  }
  std::string family() const override { return "cosine-power"; }
  nlohmann::json json() const override {
    auto j = FamilyNode::json();
    j["params"]["power"] = p;
    return j;
  }
};

struct SmoothBumpNode final : FamilyNode {
  using FamilyNode::FamilyNode;
  double shape(double s) const override {
    const double x = s / h;
    if (std::abs(x) >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - x * x));
  }
  double shape_prime(double s) const override {
    const double x = s / h;
    if (std::abs(x) >= 1.0) return 0.0;
    const double q = 1.0 - x * x;
    return shape(s) * (-2.0 * x / (q * q)) / h;
  }
  double shape_transform(double k) const override {
    // Even shape: 2 * int_0^h cos(k s) shape(s) ds.
    const auto edges = transform_panel_edges(0.0, h, h / 4.0, std::abs(k));
    const auto& rule = quad::gauss_legendre(16);
    double acc = 0.0;
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
      const double half = 0.5 * (edges[p + 1] - edges[p]), mid = 0.5 * (edges[p + 1] + edges[p]);
      for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const double s = mid + half * rule.nodes[q];
        acc += half * rule.weights[q] * std::cos(k * s) * shape(s);
      }
    }
    return 2.0 * acc;
  }
  std::string family() const override { return "smooth-bump"; }
};

struct TabulatedNode final : Node {
  double t0, dt, lo, hi;
  std::vector<cplx> samples;
  boost::math::interpolators::cardinal_cubic_b_spline<double> re, im;
  bool is_real;
  double peak;

  static boost::math::interpolators::cardinal_cubic_b_spline<double> spline(const std::vector<double>& v, double t0,
                                                              double dt) {
    return boost::math::interpolators::cardinal_cubic_b_spline<double>(v.data(), v.size(), t0, dt, 0.0, 0.0);
  }

  TabulatedNode(double t0_, double dt_, std::vector<cplx> s, double lo_, double hi_)
      : t0(t0_), dt(dt_), lo(lo_), hi(hi_), samples(std::move(s)) {
    std::vector<double> r(samples.size()), i(samples.size());
    is_real = true;
    peak = 0.0;
    for (std::size_t k = 0; k < samples.size(); ++k) {
      r[k] = samples[k].real();
      i[k] = samples[k].imag();
      if (i[k] != 0.0) is_real = false;
      peak = std::max(peak, std::abs(samples[k]));
    }
    re = spline(r, t0, dt);
    im = spline(i, t0, dt);
  }

  bool inside(double t) const { return t >= lo && t <= hi; }
  cplx value(double t) const override { return inside(t) ? cplx(re(t), im(t)) : 0.0; }
  cplx deriv(double t) const override { return inside(t) ? cplx(re.prime(t), im.prime(t)) : 0.0; }
  cplx transform(double rho) const override {
    // Panels aligned with the spline knots so each piece is a cubic times exp(i rho t).
    const auto& rule = quad::gauss_legendre(8);
    const int sub = std::max(1, static_cast<int>(std::ceil(dt * std::abs(rho) / (2.0 * pi))));
    cplx acc = 0.0;
    const long k0 = static_cast<long>(std::floor((lo - t0) / dt));
    const long k1 = static_cast<long>(std::ceil((hi - t0) / dt));
    for (long k = k0; k < k1; ++k) {
      const double a = std::max(lo, t0 + k * dt), b = std::min(hi, t0 + (k + 1) * dt);
      if (!(b > a)) continue;
      for (int s = 0; s < sub; ++s) {
        const double pa = a + (b - a) * s / sub, pb = a + (b - a) * (s + 1) / sub;
        const double half = 0.5 * (pb - pa), mid = 0.5 * (pa + pb);
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
          const double t = mid + half * rule.nodes[q];
          acc += half * rule.weights[q] * std::exp(I * (rho * t)) * cplx(re(t), im(t));
        }
      }
    }
    return acc;
  }
  std::pair<double, double> support() const override { return {lo, hi}; }
  double feature() const override { return 4.0 * dt; }
  bool real() const override { return is_real; }
  std::string family() const override { return "tabulated"; }
  nlohmann::json json() const override {
    std::vector<double> r, i;
    for (const auto& s : samples) {
      r.push_back(s.real());
      i.push_back(s.imag());
    }
    nlohmann::json grid = {{"t0", t0}, {"dt", dt}, {"re", r}};
    if (!is_real) grid["im"] = i;
    return {{"family", "tabulated"}, {"grid", grid}, {"support", {lo, hi}}};
  }
};

using Ptr = std::shared_ptr<const Node>;

struct ShiftNode final : Node {
  Ptr child;
  double s;
  ShiftNode(Ptr c, double s_) : child(std::move(c)), s(s_) {}
  cplx value(double t) const override { return child->value(t - s); }
  cplx deriv(double t) const override { return child->deriv(t - s); }
  cplx transform(double rho) const override { return std::exp(I * (rho * s)) * child->transform(rho); }
  std::pair<double, double> support() const override {
    auto [a, b] = child->support();
    return {a + s, b + s};
  }
  double feature() const override { return child->feature(); }
  double frequency() const override { return child->frequency(); }
  bool real() const override { return child->real(); }
  std::string family() const override { return "shifted"; }
};

struct SumNode final : Node {
  std::vector<std::pair<cplx, Ptr>> terms;
  cplx value(double t) const override {
    cplx acc = 0.0;
    for (const auto& [c, n] : terms) acc += c * n->value(t);
    return acc;
  }
  cplx deriv(double t) const override {
    cplx acc = 0.0;
    for (const auto& [c, n] : terms) acc += c * n->deriv(t);
    return acc;
  }
  cplx transform(double rho) const override {
    cplx acc = 0.0;
    for (const auto& [c, n] : terms) acc += c * n->transform(rho);
    return acc;
  }
  std::pair<double, double> support() const override {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& [c, n] : terms) {
      auto [a, b] = n->support();
      lo = std::min(lo, a);
      hi = std::max(hi, b);
    }
    return {lo, hi};
  }
  double feature() const override {
    double f = std::numeric_limits<double>::infinity();
    for (const auto& [c, n] : terms) f = std::min(f, n->feature());
    return f;
  }
  double frequency() const override {
    double f = 0.0;
    for (const auto& [c, n] : terms) f = std::max(f, n->frequency());
    return f;
  }
  bool real() const override {
    for (const auto& [c, n] : terms)
      if (c.imag() != 0.0 || !n->real()) return false;
    return true;
  }
  std::string family() const override { return "sum"; }
};

struct ConjNode final : Node {
  Ptr child;
  explicit ConjNode(Ptr c) : child(std::move(c)) {}
  cplx value(double t) const override { return std::conj(child->value(t)); }
  cplx deriv(double t) const override { return std::conj(child->deriv(t)); }
  cplx transform(double rho) const override { return std::conj(child->transform(-rho)); }
  std::pair<double, double> support() const override { return child->support(); }
  double feature() const override { return child->feature(); }
  double frequency() const override { return child->frequency(); }
  bool real() const override { return child->real(); }
  std::string family() const override { return "conjugate"; }
};

struct ModulatedNode final : Node {
  Ptr child;
  double omega;
  ModulatedNode(Ptr c, double w) : child(std::move(c)), omega(w) {}
  cplx value(double t) const override { return child->value(t) * std::exp(-I * (omega * t)); }
  cplx deriv(double t) const override {
    return (child->deriv(t) - I * omega * child->value(t)) * std::exp(-I * (omega * t));
  }
  cplx transform(double rho) const override { return child->transform(rho - omega); }
  std::pair<double, double> support() const override { return child->support(); }
  double feature() const override { return child->feature(); }
  double frequency() const override { return child->frequency() + std::abs(omega); }
  bool real() const override { return child->real() && omega == 0.0; }
  std::string family() const override { return "modulated"; }
};

struct ProductNode final : Node {
  Ptr child;
  std::function<double(double)> g, gp;
  double g_feature;
  ProductNode(Ptr c, std::function<double(double)> g_, std::function<double(double)> gp_, double gf)
      : child(std::move(c)), g(std::move(g_)), gp(std::move(gp_)), g_feature(gf) {}
  double g_prime(double t) const {
    if (gp) return gp(t);
    const double h = 1e-3 * g_feature;
    return (g(t - 2 * h) - 8.0 * g(t - h) + 8.0 * g(t + h) - g(t + 2 * h)) / (12.0 * h);
  }
  cplx value(double t) const override {
    const cplx v = child->value(t);
    return v == 0.0 ? v : v * g(t);
  }
  cplx deriv(double t) const override { return child->deriv(t) * g(t) + child->value(t) * g_prime(t); }
  std::pair<double, double> support() const override { return child->support(); }
  double feature() const override { return std::min(child->feature(), g_feature); }
  double frequency() const override { return child->frequency(); }
  bool real() const override { return child->real(); }
  std::string family() const override { return "product"; }
};

struct NegDerivativeNode final : Node {
  Ptr child;
  explicit NegDerivativeNode(Ptr c) : child(std::move(c)) {}
  cplx value(double t) const override { return -child->deriv(t); }
  cplx transform(double rho) const override { return I * rho * child->transform(rho); }
  std::pair<double, double> support() const override { return child->support(); }
  double feature() const override { return child->feature(); }
  double frequency() const override { return child->frequency(); }
  bool real() const override { return child->real(); }
  std::string family() const override { return "neg-derivative"; }
};

}  // namespace

nlohmann::json CoefficientFunction::Node::json() const {
  // Derived expressions are stored as their sampled values.
  const auto [lo, hi] = support();
  const double f = frequency();
  double dt = feature() / 64.0;
  if (f > 0.0) dt = std::min(dt, pi / (16.0 * f));
  auto self = [this](double t) { return value(t); };
  return CoefficientFunction::sample(self, lo, hi, dt).to_json();
}

CoefficientFunction::CoefficientFunction() : node_(std::make_shared<ZeroNode>()) {}

CoefficientFunction CoefficientFunction::gaussian(double center, double sigma, cplx amplitude, double omega) {
  if (!(sigma > 0.0) || !std::isfinite(center) || !std::isfinite(omega))
    throw DomainError("gaussian coefficient: width must be positive");
  return CoefficientFunction(std::make_shared<GaussianNode>(center, sigma, amplitude, omega));
}

CoefficientFunction CoefficientFunction::cosine_power(double center, double half_width, cplx amplitude,
                                                      double omega, int power) {
  if (!(half_width > 0.0) || power < 2 || !std::isfinite(center) || !std::isfinite(omega))
    throw DomainError("cosine-power coefficient: need width > 0 and power >= 2");
  return CoefficientFunction(std::make_shared<CosinePowerNode>(center, half_width, amplitude, omega, power));
}

CoefficientFunction CoefficientFunction::smooth_bump(double center, double half_width, cplx amplitude,
                                                     double omega) {
  if (!(half_width > 0.0) || !std::isfinite(center) || !std::isfinite(omega))
    throw DomainError("smooth-bump coefficient: width must be positive");
  return CoefficientFunction(std::make_shared<SmoothBumpNode>(center, half_width, amplitude, omega));
}

CoefficientFunction CoefficientFunction::tabulated(double t0, double dt, std::vector<cplx> samples, double lo,
                                                   double hi) {
  if (!(dt > 0.0) || samples.size() < 4) throw DomainError("tabulated coefficient: need dt > 0 and >= 4 samples");
  const double t_end = t0 + dt * (samples.size() - 1);
  if (!(hi > lo) || lo < t0 - 1e-12 * dt || hi > t_end + 1e-9 * dt)
    throw DomainError("tabulated coefficient: support must lie inside the sample grid");
  auto node = std::make_shared<TabulatedNode>(t0, dt, std::move(samples), lo, hi);
  const double tol = 1e-12 * std::max(1.0, node->peak);
  if (std::abs(cplx(node->re(lo), node->im(lo))) > tol || std::abs(cplx(node->re(hi), node->im(hi))) > tol)
    throw DomainError("tabulated coefficient: samples must vanish at the support endpoints");
  return CoefficientFunction(node);
}

CoefficientFunction CoefficientFunction::sample(const std::function<cplx(double)>& f, double lo, double hi,
                                                double dt) {
  const int n = std::max(4, static_cast<int>(std::ceil((hi - lo) / dt)) + 1);
  const double step = (hi - lo) / (n - 1);
  std::vector<cplx> s(n);
  for (int k = 0; k < n; ++k) s[k] = f(lo + step * k);
  s.front() = 0.0;
  s.back() = 0.0;
  return tabulated(lo, step, std::move(s), lo, hi);
}

cplx CoefficientFunction::operator()(double t) const { return node_->value(t); }
cplx CoefficientFunction::derivative(double t) const { return node_->deriv(t); }
cplx CoefficientFunction::transform(double rho) const { return node_->transform(rho); }
cplx CoefficientFunction::transform_numeric(double rho) const { return node_->numeric_transform(rho); }
std::pair<double, double> CoefficientFunction::support() const { return node_->support(); }
double CoefficientFunction::feature() const { return node_->feature(); }
double CoefficientFunction::frequency() const { return node_->frequency(); }
bool CoefficientFunction::is_real() const { return node_->real(); }
bool CoefficientFunction::is_zero() const { return node_->zero(); }
std::string CoefficientFunction::family() const { return node_->family(); }

CoefficientFunction CoefficientFunction::shifted(double s) const {
  if (is_zero() || s == 0.0) return *this;
  return CoefficientFunction(std::make_shared<ShiftNode>(node_, s));
}

CoefficientFunction CoefficientFunction::conj() const {
  if (is_zero() || is_real()) return *this;
  return CoefficientFunction(std::make_shared<ConjNode>(node_));
}

CoefficientFunction CoefficientFunction::modulated(double omega) const {
  if (is_zero() || omega == 0.0) return *this;
  return CoefficientFunction(std::make_shared<ModulatedNode>(node_, omega));
}

CoefficientFunction CoefficientFunction::times(std::function<double(double)> g, double g_feature,
                                               std::function<double(double)> g_prime) const {
  if (is_zero()) return *this;
  return CoefficientFunction(std::make_shared<ProductNode>(node_, std::move(g), std::move(g_prime), g_feature));
}

CoefficientFunction CoefficientFunction::neg_derivative() const {
  if (is_zero()) return *this;
  return CoefficientFunction(std::make_shared<NegDerivativeNode>(node_));
}

CoefficientFunction operator+(const CoefficientFunction& a, const CoefficientFunction& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  auto n = std::make_shared<SumNode>();
  n->terms = {{1.0, a.node_}, {1.0, b.node_}};
  return CoefficientFunction(n);
}

CoefficientFunction operator-(const CoefficientFunction& a, const CoefficientFunction& b) {
  return a + (-1.0) * b;
}

CoefficientFunction operator*(cplx c, const CoefficientFunction& a) {
  if (a.is_zero() || c == 1.0) return a;
  if (c == 0.0) return {};
  auto n = std::make_shared<SumNode>();
  n->terms = {{c, a.node_}};
  return CoefficientFunction(n);
}

cplx CoefficientFunction::integrate(const std::function<cplx(double)>& g) const {
  if (is_zero()) return 0.0;
  const auto [lo, hi] = support();
  quad::AdaptiveOptions opt;
  opt.initial_panels = std::max(4, static_cast<int>(std::ceil((hi - lo) / (0.5 * feature()))));
  opt.abs_tol = 1e-15;
  return quad::adaptive([&](double t) { return node_->value(t) * g(t); }, lo, hi, opt);
}

nlohmann::json CoefficientFunction::to_json() const { return node_->json(); }

CoefficientFunction CoefficientFunction::from_json(const nlohmann::json& j) {
  try {
    const std::string fam = j.at("family").get<std::string>();
    if (fam == "zero") return {};
    if (fam == "tabulated") {
      const auto& g = j.at("grid");
      const auto re = g.at("re").get<std::vector<double>>();
      std::vector<double> im(re.size(), 0.0);
      if (g.contains("im")) im = g.at("im").get<std::vector<double>>();
      if (im.size() != re.size()) throw ConfigError("tabulated coefficient: re/im length mismatch");
      std::vector<cplx> s(re.size());
      for (std::size_t k = 0; k < re.size(); ++k) s[k] = {re[k], im[k]};
      const auto sup = j.at("support").get<std::array<double, 2>>();
      return tabulated(g.at("t0").get<double>(), g.at("dt").get<double>(), std::move(s), sup[0], sup[1]);
    }
    const auto& p = j.at("params");
    const double c = p.value("center", 0.0);
    const double w = p.at("width").get<double>();
    const cplx a = p.contains("amplitude") ? amplitude_from_json(p.at("amplitude")) : cplx(1.0);
    const double om = p.value("omega", 0.0);
    if (fam == "gaussian") return gaussian(c, w, a, om);
    if (fam == "cosine-power") return cosine_power(c, w, a, om, p.value("power", 8));
    if (fam == "smooth-bump") return smooth_bump(c, w, a, om);
    throw ConfigError("unknown coefficient family '" + fam + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("coefficient JSON: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace wlf
