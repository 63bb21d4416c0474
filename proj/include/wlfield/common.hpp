#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace wlf {

using cplx = std::complex<double>;
inline constexpr cplx I{0.0, 1.0};
inline constexpr double pi = std::numbers::pi;

// Error hierarchy. The CLI maps these onto exit codes 2/3/4.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input: out-of-domain parameters, malformed configs, unsupported cases.
class DomainError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Quadrature budget exceeded, noise-floor saturation, etc.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// A computed object failed a positivity/consistency validation.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Event or covector in Minkowski space, components (t, x, y, z).
/// The metric has signature (-,+,+,+).
struct FourVector {
  std::array<double, 4> c{0.0, 0.0, 0.0, 0.0};

  constexpr FourVector() = default;
  constexpr FourVector(double t, double x, double y, double z) : c{t, x, y, z} {}

  constexpr double& operator[](std::size_t i) { return c[i]; }
  constexpr double operator[](std::size_t i) const { return c[i]; }

  constexpr double t() const { return c[0]; }
  constexpr double x() const { return c[1]; }
  constexpr double y() const { return c[2]; }
  constexpr double z() const { return c[3]; }

  constexpr FourVector& operator+=(const FourVector& o) {
    for (std::size_t i = 0; i < 4; ++i) c[i] += o.c[i];
    return *this;
  }
  constexpr FourVector& operator-=(const FourVector& o) {
    for (std::size_t i = 0; i < 4; ++i) c[i] -= o.c[i];
    return *this;
  }
  constexpr FourVector& operator*=(double s) {
    for (auto& v : c) v *= s;
    return *this;
  }
  friend constexpr FourVector operator+(FourVector a, const FourVector& b) { return a += b; }
  friend constexpr FourVector operator-(FourVector a, const FourVector& b) { return a -= b; }
  friend constexpr FourVector operator*(double s, FourVector a) { return a *= s; }
  friend constexpr FourVector operator*(FourVector a, double s) { return a *= s; }
  friend constexpr FourVector operator-(FourVector a) { return a *= -1.0; }
  friend constexpr bool operator==(const FourVector&, const FourVector&) = default;
};

/// g(a, b) with signature (-,+,+,+).
constexpr double minkowski(const FourVector& a, const FourVector& b) {
  return -a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}

constexpr double spatial_dot(const FourVector& a, const FourVector& b) {
  return a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}

inline double spatial_norm(const FourVector& a) { return std::sqrt(spatial_dot(a, a)); }

inline double euclidean_norm(const FourVector& a) {
  return std::sqrt(a[0] * a[0] + spatial_dot(a, a));
}

inline bool is_finite(const FourVector& a) {
  for (double v : a.c)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace wlf
