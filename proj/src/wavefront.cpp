#include "wlfield/wavefront.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <fmt/format.h>

#include "wlfield/parallel.hpp"
#include "wlfield/quadrature.hpp"

namespace wlf {

std::vector<double> geometric_radii(const ScanOptions& opt) {
  if (!(opt.r_min > 0.0) || opt.decades < 3.0 || opt.per_decade < 8)
    throw DomainError("wavefront scan: radii must span at least 3 decades with 8 points per decade");
  const int n = static_cast<int>(std::lround(opt.decades * opt.per_decade));
  std::vector<double> r(n + 1);
  for (int k = 0; k <= n; ++k) r[k] = opt.r_min * std::pow(10.0, double(k) / opt.per_decade);
  return r;
}

std::vector<DirectionSample> wavefront_scan(const TransformFn& f, const std::vector<Covector>& directions,
                                            const ScanOptions& opt) {
  const auto radii = geometric_radii(opt);
  std::vector<DirectionSample> out(directions.size());
  parallel_for(directions.size(), [&](std::size_t d) {
    Covector n = directions[d];
    double norm = 0.0;
    for (double c : n) norm += c * c;
    norm = std::sqrt(norm);
    if (!(norm > 0.0)) throw DomainError("wavefront scan: zero direction");
    for (double& c : n) c /= norm;
    auto& s = out[d];
    s.n = n;
    s.radii = radii;
    s.magnitudes.resize(radii.size());
    for (std::size_t k = 0; k < radii.size(); ++k) {
      const double R = radii[k];
      s.magnitudes[k] = std::abs(f(R * n[0], {R * n[1], R * n[2], R * n[3]}));
    }
  });

  const double origin = std::abs(f(0.0, {0.0, 0.0, 0.0}));
  const double r_window = radii.back() / 10.0 * (1.0 - 1e-12);
  for (auto& s : out) {
    const double peak = std::max(origin, *std::max_element(s.magnitudes.begin(), s.magnitudes.end()));
    const double floor = opt.noise_rel * peak;
    std::vector<double> x, y;
    for (std::size_t k = 0; k < s.radii.size(); ++k)
      if (s.radii[k] >= r_window && s.magnitudes[k] > floor) {
        x.push_back(std::log(s.radii[k]));
        y.push_back(std::log(s.magnitudes[k]));
      }
    if (x.size() < 3) {
      s.noise = true;
      s.slope = -std::numeric_limits<double>::infinity();
      s.singular = false;
      continue;
    }
    const auto fit = quad::fit_line(x, y);
    s.slope = fit.slope;
    s.points_used = x.size();
    s.singular = s.slope >= -opt.n_max;
  }
  return out;
}

std::vector<DirectionSample> wavefront_scan(const JetDistribution& T, const std::vector<Covector>& directions,
                                            const ScanOptions& opt) {
  if (!T.worldline().is_at_rest()) throw DomainError("wavefront scan: requires an inertial curve at rest");
  return wavefront_scan([&T](double rho, const std::array<double, 3>& xi) { return fourier_transform(T, rho, xi); },
                        directions, opt);
}

std::vector<Covector> spatial_directions(std::size_t n, std::mt19937_64& rng, double min_component) {
  std::normal_distribution<double> g;
  std::vector<Covector> out;
  while (out.size() < n) {
    Covector c{0.0, g(rng), g(rng), g(rng)};
    const double r = std::sqrt(c[1] * c[1] + c[2] * c[2] + c[3] * c[3]);
    for (int i = 1; i < 4; ++i) c[i] /= r;
    if (std::min({std::abs(c[1]), std::abs(c[2]), std::abs(c[3])}) < min_component) continue;
    out.push_back(c);
  }
  return out;
}

std::vector<Covector> timelike_directions(std::size_t n, std::mt19937_64& rng, double min_time) {
  std::normal_distribution<double> g;
  std::vector<Covector> out;
  while (out.size() < n) {
    Covector c{g(rng), g(rng), g(rng), g(rng)};
    const double r = std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2] + c[3] * c[3]);
    for (double& v : c) v /= r;
    if (std::abs(c[0]) < min_time) continue;
    out.push_back(c);
  }
  return out;
}

TransformFn product_function_transform(const std::array<CoefficientFunction, 4>& factors) {
  return [factors](double rho, const std::array<double, 3>& xi) {
    return factors[0].transform(rho) * factors[1].transform(-xi[0]) * factors[2].transform(-xi[1]) *
           factors[3].transform(-xi[2]);
  };
}

std::string scan_csv(const std::vector<DirectionSample>& samples) {
  std::string os = "n0,n1,n2,n3,slope,class\n";
  for (const auto& s : samples)
    os += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{}\n", s.n[0], s.n[1], s.n[2], s.n[3], s.slope,
                      s.noise ? "regular-noise" : (s.singular ? "singular" : "regular"));
  return os;
}

void write_scan_csv(const std::string& path, const std::vector<DirectionSample>& samples) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path);
  os << scan_csv(samples);
}

}  // namespace wlf
