#include "wlfield/test_function.hpp"

namespace wlf {

Multilinear::Multilinear(int generators, cplx constant)
    : k_(generators), c_(std::size_t{1} << generators, 0.0) {
  c_[0] = constant;
}

Multilinear Multilinear::variable(int generators, cplx value, const std::vector<double>& slopes) {
  Multilinear m(generators, value);
  for (int i = 0; i < generators; ++i) m.c_[std::size_t{1} << i] = slopes[i];
  return m;
}

Multilinear& Multilinear::operator+=(const Multilinear& o) {
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}

Multilinear& Multilinear::operator-=(const Multilinear& o) {
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  return *this;
}

Multilinear& Multilinear::operator*=(cplx s) {
  for (auto& v : c_) v *= s;
  return *this;
}

Multilinear operator*(const Multilinear& a, const Multilinear& b) {
  Multilinear r(a.k_, 0.0);
  const std::size_t n = a.c_.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (a.c_[i] == 0.0) continue;
    const std::size_t rest = (n - 1) & ~i;
    // Enumerate subsets j of the complement of i.
    for (std::size_t j = rest;; j = (j - 1) & rest) {
      r.c_[i | j] += a.c_[i] * b.c_[j];
      if (j == 0) break;
    }
  }
  return r;
}

Multilinear exp(const Multilinear& a) {
  // exp(a0 + d) = exp(a0) * sum_{n<=k} d^n / n!, d nilpotent of order k+1.
  Multilinear d = a;
  d.c_[0] = 0.0;
  Multilinear term(a.k_, 1.0), acc(a.k_, 1.0);
  for (int n = 1; n <= a.k_; ++n) {
    term = term * d;
    term *= 1.0 / n;
    acc += term;
  }
  acc *= std::exp(a.c_[0]);
  return acc;
}

Multilinear pow(const Multilinear& a, int n) {
  Multilinear r(a.k_, 1.0);
  for (int i = 0; i < n; ++i) r = r * a;
  return r;
}

cplx TestFunction::value(const FourVector& x) const {
  Point4 p;
  for (int mu = 0; mu < 4; ++mu) p[mu] = Multilinear(0, x[mu]);
  return eval(p).constant();
}

cplx TestFunction::derivative(const FourVector& x, const std::vector<FourVector>& dirs) const {
  const int k = static_cast<int>(dirs.size());
  Point4 p;
  for (int mu = 0; mu < 4; ++mu) {
    std::vector<double> slopes(k);
    for (int i = 0; i < k; ++i) slopes[i] = dirs[i][mu];
    p[mu] = Multilinear::variable(k, x[mu], slopes);
  }
  return eval(p).top();
}

namespace {

struct ConstantFn final : TestFunction {
  cplx c;
  explicit ConstantFn(cplx c_) : c(c_) {}
  Multilinear eval(const Point4& x) const override { return Multilinear(x[0].generators(), c); }
};

struct PlaneWaveFn final : TestFunction {
  double rho;
  std::array<double, 3> xi;
  PlaneWaveFn(double r, std::array<double, 3> x) : rho(r), xi(x) {}
  Multilinear eval(const Point4& x) const override {
    Multilinear phase = rho * x[0];
    for (int i = 0; i < 3; ++i) phase -= xi[i] * x[i + 1];
    return exp(I * phase);
  }
};

struct PolynomialFn final : TestFunction {
  std::vector<Monomial> terms;
  explicit PolynomialFn(std::vector<Monomial> t) : terms(std::move(t)) {}
  Multilinear eval(const Point4& x) const override {
    Multilinear acc(x[0].generators(), 0.0);
    for (const auto& m : terms) {
      Multilinear t(x[0].generators(), m.coeff);
      for (int mu = 0; mu < 4; ++mu)
        if (m.exps[mu] > 0) t = t * pow(x[mu], m.exps[mu]);
      acc += t;
    }
    return acc;
  }
};

struct GaussianFn final : TestFunction {
  FourVector c;
  double s;
  GaussianFn(FourVector c_, double s_) : c(c_), s(s_) {}
  Multilinear eval(const Point4& x) const override {
    Multilinear q(x[0].generators(), 0.0);
    for (int mu = 0; mu < 4; ++mu) {
      Multilinear d = x[mu] - Multilinear(x[0].generators(), c[mu]);
      q += d * d;
    }
    return exp((-0.5 / (s * s)) * q);
  }
};

struct ProductFn final : TestFunction {
  TestFunctionPtr a, b;
  ProductFn(TestFunctionPtr a_, TestFunctionPtr b_) : a(std::move(a_)), b(std::move(b_)) {}
  Multilinear eval(const Point4& x) const override { return a->eval(x) * b->eval(x); }
};

struct SumFn final : TestFunction {
  TestFunctionPtr a, b;
  SumFn(TestFunctionPtr a_, TestFunctionPtr b_) : a(std::move(a_)), b(std::move(b_)) {}
  Multilinear eval(const Point4& x) const override { return a->eval(x) + b->eval(x); }
};

struct FiniteDifferenceFn final : TestFunction {
  std::function<cplx(const FourVector&)> f;
  double h;
  FiniteDifferenceFn(std::function<cplx(const FourVector&)> f_, double h_) : f(std::move(f_)), h(h_) {}
  Multilinear eval(const Point4& x) const override {
    if (x[0].generators() != 0) throw DomainError("finite-difference test function: use derivative()");
    return Multilinear(0, f({x[0].constant().real(), x[1].constant().real(), x[2].constant().real(),
                             x[3].constant().real()}));
  }
  cplx derivative(const FourVector& x, const std::vector<FourVector>& dirs) const override {
    if (dirs.empty()) return f(x);
    std::vector<FourVector> rest(dirs.begin() + 1, dirs.end());
    const FourVector v = dirs.front();
    return (derivative(x + h * v, rest) - derivative(x - h * v, rest)) / (2.0 * h);
  }
};

}  // namespace

TestFunctionPtr constant_function(cplx c) { return std::make_shared<ConstantFn>(c); }
TestFunctionPtr plane_wave(double rho, std::array<double, 3> xi) { return std::make_shared<PlaneWaveFn>(rho, xi); }
TestFunctionPtr polynomial(std::vector<Monomial> terms) { return std::make_shared<PolynomialFn>(std::move(terms)); }
TestFunctionPtr gaussian_function(FourVector center, double width) {
  if (!(width > 0.0)) throw DomainError("gaussian test function: width must be positive");
  return std::make_shared<GaussianFn>(center, width);
}
TestFunctionPtr product(TestFunctionPtr a, TestFunctionPtr b) {
  return std::make_shared<ProductFn>(std::move(a), std::move(b));
}
TestFunctionPtr sum(TestFunctionPtr a, TestFunctionPtr b) {
  return std::make_shared<SumFn>(std::move(a), std::move(b));
}
TestFunctionPtr finite_difference_function(std::function<cplx(const FourVector&)> f, double step) {
  if (!(step > 0.0)) throw DomainError("finite-difference step must be positive");
  return std::make_shared<FiniteDifferenceFn>(std::move(f), step);
}

}  // namespace wlf
