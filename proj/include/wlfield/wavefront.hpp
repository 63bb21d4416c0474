#pragma once

#include <array>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "wlfield/jet.hpp"

namespace wlf {

using Covector = std::array<double, 4>;
/// Transform evaluated at the covector (rho, xi).
using TransformFn = std::function<cplx(double rho, const std::array<double, 3>& xi)>;

struct DirectionSample {
  Covector n{};
  std::vector<double> radii;
  std::vector<double> magnitudes;
  double slope = 0.0;
  bool singular = false;
  /// Too few samples above the noise floor to fit; reported as regular.
  bool noise = false;
  std::size_t points_used = 0;
};

struct ScanOptions {
  double r_min = 1.0;
  double decades = 3.0;
  int per_decade = 8;
  int n_max = 6;
  double noise_rel = 1e-13;
};

std::vector<double> geometric_radii(const ScanOptions& opt);

std::vector<DirectionSample> wavefront_scan(const TransformFn& f, const std::vector<Covector>& directions,
                                            const ScanOptions& opt = {});
/// Requires an inertial curve at rest.
std::vector<DirectionSample> wavefront_scan(const JetDistribution& T, const std::vector<Covector>& directions,
                                            const ScanOptions& opt = {});

/// Unit covectors with zero time component and no spatial component below `min_component`.
std::vector<Covector> spatial_directions(std::size_t n, std::mt19937_64& rng, double min_component = 0.05);
/// Unit covectors with |n0| >= min_time.
std::vector<Covector> timelike_directions(std::size_t n, std::mt19937_64& rng, double min_time = 0.1);

/// Transform of the product function a0(t) a1(x) a2(y) a3(z) against exp(i (rho t - xi.x)).
TransformFn product_function_transform(const std::array<CoefficientFunction, 4>& factors);

std::string scan_csv(const std::vector<DirectionSample>& samples);
void write_scan_csv(const std::string& path, const std::vector<DirectionSample>& samples);

}  // namespace wlf
