#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "wlfield/common.hpp"

namespace wlf::quad {

/// Gauss-Legendre rule on [-1, 1].
struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Cached n-point Gauss-Legendre rule (Newton iteration on P_n).
const Rule& gauss_legendre(int n);

/// Nodes and weights of a composite rule, flattened.
struct NodeSet {
  std::vector<double> x;
  std::vector<double> w;

  std::size_t size() const { return x.size(); }
  void append(const NodeSet& other);
};

/// Composite Gauss-Legendre with `panels` equal panels on [a, b].
NodeSet composite(double a, double b, int panels, int points_per_panel = 16);

/// Composite rule with panel width bounded by pi / (4 * omega) and by `feature`.
/// Intended for integrands like a(t) exp(i omega t) where a varies on scale `feature`.
NodeSet oscillatory(double a, double b, double omega, double feature, int points_per_panel = 8);

/// Panels graded geometrically towards `a` (ratio 1/2, `levels` levels), then uniform.
/// Handles integrable endpoint singularities (log, r^-1/2).
NodeSet graded(double a, double b, int levels, int uniform_panels, int points_per_panel = 16);

template <class F>
auto integrate(const NodeSet& ns, F&& f) -> decltype(f(0.0)) {
  using R = decltype(f(0.0));
  R acc{};
  for (std::size_t i = 0; i < ns.size(); ++i) acc += ns.w[i] * f(ns.x[i]);
  return acc;
}

struct AdaptiveOptions {
  double abs_tol = 1e-13;
  double rel_tol = 1e-12;
  int max_panels = 20000;
  int initial_panels = 8;
};

/// Globally adaptive bisection using a 16-point rule against its two halves.
/// Throws NumericalError when the panel budget is exhausted.
cplx adaptive(const std::function<cplx(double)>& f, double a, double b,
              const AdaptiveOptions& opt = {});
double adaptive_real(const std::function<double(double)>& f, double a, double b,
                     const AdaptiveOptions& opt = {});

/// Polynomial (Neville) extrapolation of samples y(h_k) to h = 0.
cplx richardson(std::span<const double> h, std::span<const cplx> y);

/// Least-squares line y = slope * x + intercept.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double rms_residual = 0.0;
  std::size_t n = 0;
};
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace wlf::quad
