#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "wlfield/common.hpp"

namespace wlf {

/// Compactly supported smooth function of the curve parameter, a coefficient a_alpha(t)
/// of a jet distribution. Immutable value type sharing an expression tree.
class CoefficientFunction {
 public:
  struct Node;

  CoefficientFunction();  // identically zero

  /// A exp(-(t-c)^2 / (2 sigma^2)) exp(-i omega t); support [c - 8 sigma, c + 8 sigma].
  static CoefficientFunction gaussian(double center, double sigma, cplx amplitude = 1.0, double omega = 0.0);
  /// A cos^p(pi (t-c) / (2h)) on |t-c| < h, times exp(-i omega t).
  static CoefficientFunction cosine_power(double center, double half_width, cplx amplitude = 1.0,
                                          double omega = 0.0, int power = 8);
  /// A exp(-1 / (1 - s^2)), s = (t-c)/h, times exp(-i omega t).
  static CoefficientFunction smooth_bump(double center, double half_width, cplx amplitude = 1.0,
                                         double omega = 0.0);
  /// Cubic B-spline through samples at t0 + k dt; zero outside [lo, hi].
  static CoefficientFunction tabulated(double t0, double dt, std::vector<cplx> samples, double lo, double hi);
  /// Samples f on a uniform grid covering [lo, hi].
  static CoefficientFunction sample(const std::function<cplx(double)>& f, double lo, double hi, double dt);

  cplx operator()(double t) const;
  cplx derivative(double t) const;
  /// Integral of exp(i rho t) a(t) dt.
  cplx transform(double rho) const;

  std::pair<double, double> support() const;
  /// Length scale on which the envelope varies; used to size quadrature panels.
  double feature() const;
  /// Bound on the intrinsic oscillation frequency (modulation).
  double frequency() const;
  bool is_real() const;
  bool is_zero() const;
  std::string family() const;

  CoefficientFunction shifted(double s) const;
  CoefficientFunction conj() const;
  CoefficientFunction modulated(double omega) const;
  /// Pointwise product with a real smooth function g (g' by finite differences if absent).
  CoefficientFunction times(std::function<double(double)> g, double g_feature,
                            std::function<double(double)> g_prime = {}) const;
  /// -a'(t).
  CoefficientFunction neg_derivative() const;

  friend CoefficientFunction operator+(const CoefficientFunction& a, const CoefficientFunction& b);
  friend CoefficientFunction operator-(const CoefficientFunction& a, const CoefficientFunction& b);
  friend CoefficientFunction operator*(cplx c, const CoefficientFunction& a);

  /// Transform by direct quadrature regardless of closed forms.
  cplx transform_numeric(double rho) const;
  /// Integral of a(t) g(t) dt over the support.
  cplx integrate(const std::function<cplx(double)>& g) const;

  nlohmann::json to_json() const;
  static CoefficientFunction from_json(const nlohmann::json& j);

  const std::shared_ptr<const Node>& node() const { return node_; }

 private:
  explicit CoefficientFunction(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

/// Panel layout for integrating a coefficient against exp(i rho t).
std::vector<double> transform_panel_edges(double lo, double hi, double feature, double frequency);

}  // namespace wlf
