#pragma once

#include <array>
#include <functional>
#include <memory>
#include <vector>

#include "wlfield/common.hpp"

namespace wlf {

/// Truncated polynomial in k nilpotent generators (eps_i^2 = 0). Evaluating a
/// function at x + sum_i eps_i v_i and reading the top coefficient gives the mixed
/// directional derivative along v_1..v_k.
class Multilinear {
 public:
  Multilinear() = default;
  Multilinear(int generators, cplx constant);
  static Multilinear variable(int generators, cplx value, const std::vector<double>& slopes);

  int generators() const { return k_; }
  cplx constant() const { return c_.empty() ? 0.0 : c_[0]; }
  cplx top() const { return c_.back(); }
  cplx operator[](std::size_t mask) const { return c_[mask]; }

  Multilinear& operator+=(const Multilinear& o);
  Multilinear& operator-=(const Multilinear& o);
  Multilinear& operator*=(cplx s);
  friend Multilinear operator+(Multilinear a, const Multilinear& b) { return a += b; }
  friend Multilinear operator-(Multilinear a, const Multilinear& b) { return a -= b; }
  friend Multilinear operator*(cplx s, Multilinear a) { return a *= s; }
  friend Multilinear operator*(const Multilinear& a, const Multilinear& b);
  friend Multilinear exp(const Multilinear& a);
  friend Multilinear pow(const Multilinear& a, int n);

 private:
  int k_ = 0;
  std::vector<cplx> c_{0.0};
};

using Point4 = std::array<Multilinear, 4>;

/// Smooth spacetime function with exact directional derivatives.
class TestFunction {
 public:
  virtual ~TestFunction() = default;
  virtual Multilinear eval(const Point4& x) const = 0;

  cplx value(const FourVector& x) const;
  /// Mixed directional derivative (v_1 . d)...(v_k . d) f at x.
  virtual cplx derivative(const FourVector& x, const std::vector<FourVector>& dirs) const;
};

using TestFunctionPtr = std::shared_ptr<const TestFunction>;

TestFunctionPtr constant_function(cplx c);
/// exp(i (rho t - xi . x)).
TestFunctionPtr plane_wave(double rho, std::array<double, 3> xi);
/// Sum of c * t^e0 x^e1 y^e2 z^e3.
struct Monomial {
  cplx coeff;
  std::array<int, 4> exps;
};
TestFunctionPtr polynomial(std::vector<Monomial> terms);
/// exp(-sum_mu (x_mu - c_mu)^2 / (2 s^2)).
TestFunctionPtr gaussian_function(FourVector center, double width);
TestFunctionPtr product(TestFunctionPtr a, TestFunctionPtr b);
TestFunctionPtr sum(TestFunctionPtr a, TestFunctionPtr b);
/// Arbitrary callable; derivatives by nested central differences with the given step.
TestFunctionPtr finite_difference_function(std::function<cplx(const FourVector&)> f, double step);

}  // namespace wlf
