#include "wlfield/quadrature.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <queue>

namespace wlf::quad {

namespace {

Rule make_gauss_legendre(int n) {
  Rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      dp = n * (z * p1 - p2) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      dp = n * (z * p1 - p2) / (z * z - 1.0);
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    r.nodes[i] = -z;
    r.nodes[n - 1 - i] = z;
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  return r;
}

void add_panel(NodeSet& ns, double a, double b, const Rule& rule) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    ns.x.push_back(mid + half * rule.nodes[k]);
    ns.w.push_back(half * rule.weights[k]);
  }
}

}  // namespace

const Rule& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, Rule> cache;
  if (n < 1) throw DomainError("gauss_legendre: n must be positive");
  std::lock_guard lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make_gauss_legendre(n)).first;
  return it->second;
}

void NodeSet::append(const NodeSet& other) {
  x.insert(x.end(), other.x.begin(), other.x.end());
  w.insert(w.end(), other.w.begin(), other.w.end());
}

NodeSet composite(double a, double b, int panels, int points_per_panel) {
  if (panels < 1) throw DomainError("composite: need at least one panel");
  const Rule& rule = gauss_legendre(points_per_panel);
  NodeSet ns;
  ns.x.reserve(static_cast<std::size_t>(panels) * points_per_panel);
  ns.w.reserve(ns.x.capacity());
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) add_panel(ns, a + p * h, a + (p + 1) * h, rule);
  return ns;
}

NodeSet oscillatory(double a, double b, double omega, double feature, int points_per_panel) {
  double width = b - a;
  if (omega > 0.0) width = std::min(width, pi / (4.0 * omega));
  if (feature > 0.0) width = std::min(width, feature);
  const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / width - 1e-9)));
  return composite(a, b, panels, points_per_panel);
}

NodeSet graded(double a, double b, int levels, int uniform_panels, int points_per_panel) {
  const Rule& rule = gauss_legendre(points_per_panel);
  NodeSet ns;
  // [a, a + L/2^levels], ..., [a + L/4, a + L/2] then uniform panels on the upper half.
  const double L = b - a;
  double lo = a;
  double hi = a + L * std::ldexp(1.0, -levels);
  add_panel(ns, lo, hi, rule);
  for (int k = levels; k > 1; --k) {
    lo = hi;
    hi = a + L * std::ldexp(1.0, -(k - 1));
    add_panel(ns, lo, hi, rule);
  }
  const double start = a + 0.5 * L;
  const double h = (b - start) / uniform_panels;
  for (int p = 0; p < uniform_panels; ++p) add_panel(ns, start + p * h, start + (p + 1) * h, rule);
  return ns;
}

namespace {

template <class T, class F>
T panel16(F& f, double a, double b) {
  const Rule& rule = gauss_legendre(16);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  T acc{};
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) acc += rule.weights[k] * f(mid + half * rule.nodes[k]);
  return acc * half;
}

template <class T, class F>
T adaptive_impl(F& f, double a, double b, const AdaptiveOptions& opt) {
  if (!(b > a)) return T{};
  struct Panel {
    double a, b;
    T coarse, fine;
    double err;
    bool operator<(const Panel& o) const { return err < o.err; }
  };
  auto make = [&](double lo, double hi) {
    const double mid = 0.5 * (lo + hi);
    Panel p{lo, hi, panel16<T>(f, lo, hi), T{}, 0.0};
    p.fine = panel16<T>(f, lo, mid) + panel16<T>(f, mid, hi);
    p.err = std::abs(p.fine - p.coarse);
    return p;
  };
  std::priority_queue<Panel> heap;
  T total{};
  double err_total = 0.0;
  const double h = (b - a) / opt.initial_panels;
  for (int i = 0; i < opt.initial_panels; ++i) {
    Panel p = make(a + i * h, (i + 1 == opt.initial_panels) ? b : a + (i + 1) * h);
    total += p.fine;
    err_total += p.err;
    heap.push(p);
  }
  int panels = opt.initial_panels;
  while (err_total > std::max(opt.abs_tol, opt.rel_tol * std::abs(total))) {
    if (panels >= opt.max_panels)
      throw NumericalError("adaptive quadrature: panel budget exceeded");
    Panel p = heap.top();
    heap.pop();
    total -= p.fine;
    err_total -= p.err;
    const double mid = 0.5 * (p.a + p.b);
    Panel l = make(p.a, mid), r = make(mid, p.b);
    total += l.fine + r.fine;
    err_total += l.err + r.err;
    heap.push(l);
    heap.push(r);
    ++panels;
    if (err_total < 0.0) err_total = 0.0;
  }
  return total;
}

}  // namespace

cplx adaptive(const std::function<cplx(double)>& f, double a, double b, const AdaptiveOptions& opt) {
  auto g = [&](double x) { return f(x); };
  return adaptive_impl<cplx>(g, a, b, opt);
}

double adaptive_real(const std::function<double(double)>& f, double a, double b,
                     const AdaptiveOptions& opt) {
  auto g = [&](double x) { return f(x); };
  return adaptive_impl<double>(g, a, b, opt);
}

cplx richardson(std::span<const double> h, std::span<const cplx> y) {
  if (h.size() != y.size() || h.empty()) throw DomainError("richardson: size mismatch");
  std::vector<cplx> p(y.begin(), y.end());
  const std::size_t n = p.size();
  for (std::size_t k = 1; k < n; ++k)
    for (std::size_t i = 0; i + k < n; ++i)
      p[i] = (h[i + k] * p[i] - h[i] * p[i + 1]) / (h[i + k] - h[i]);
  return p[0];
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  LineFit f;
  f.n = x.size();
  if (x.size() != y.size() || x.size() < 2) throw DomainError("fit_line: need >= 2 points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= x.size();
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw DomainError("fit_line: degenerate abscissae");
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.slope * x[i] + f.intercept);
    ss += r * r;
  }
  f.rms_residual = std::sqrt(ss / x.size());
  f.slope_stderr = x.size() > 2 ? std::sqrt(ss / (x.size() - 2) / sxx) : 0.0;
  return f;
}

}  // namespace wlf::quad
