#pragma once

#include <array>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wlfield/jet.hpp"

namespace wlf {

using Vec3 = std::array<double, 3>;

struct GridOptions {
  double mass = 0.0;
  double r_max = 0.0;     // <= 0: chosen from the distributions
  int radial_panels = 0;  // <= 0: chosen from the distributions
  int l_max = -1;         // < 0: chosen from the distributions
  /// Event the mode phases are referred to.
  FourVector origin{};
  /// b1, b2 and the polar axis of the angular grid.
  std::array<Vec3, 3> axes{{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}};
  int points_per_panel = 16;
  /// When resolving automatic fields, turn the polar axis onto the line through the
  /// origin that carries all curves, if they share one.
  bool align_axes = true;

  nlohmann::json to_json() const;
  static GridOptions from_json(const nlohmann::json& j);
};

/// Momentum-space grid: Gauss-Legendre radial panels on [0, r_max] times a product
/// angular rule (Gauss-Legendre in cos(theta), uniform in phi) exact to degree 2 l_max.
class ModeGrid {
 public:
  explicit ModeGrid(const GridOptions& opt);

  const GridOptions& options() const { return opt_; }
  double mass() const { return opt_.mass; }
  double r_max() const { return opt_.r_max; }
  int l_max() const { return opt_.l_max; }
  const FourVector& origin() const { return opt_.origin; }

  std::size_t n_radial() const { return r_.size(); }
  double r(std::size_t i) const { return r_[i]; }
  double radial_weight(std::size_t i) const { return wr_[i]; }
  double lambda(std::size_t i) const { return lam_[i]; }

  int n_theta() const { return nth_; }
  int n_phi() const { return nph_; }
  double cos_theta(int j) const { return x_[j]; }
  /// Unit momentum direction at angular node (j, k).
  Vec3 direction(int j, int k) const;

  std::size_t n_harmonics() const { return std::size_t(opt_.l_max + 1) * (opt_.l_max + 1); }
  static std::size_t index(int l, int m) { return std::size_t(l) * l + l + m; }

  /// Coefficients of f on the orthonormal harmonics Y_lm, l <= l_max. `values` holds
  /// f at the angular nodes, row-major in (theta, phi).
  void project(std::span<const cplx> values, std::span<cplx> coeffs) const;
  /// Y_lm at the angular direction with polar cosine x and azimuth phi.
  cplx harmonic(int l, int m, double x, double phi) const;

  bool compatible(const ModeGrid& o) const;

 private:
  GridOptions opt_;
  std::vector<double> r_, wr_, lam_;
  int nth_ = 0, nph_ = 0;
  std::vector<double> x_, wx_;
  // Normalized associated Legendre values per theta node, m >= 0, packed by (l, m).
  std::vector<double> plm_;
  std::vector<Vec3> dirs_;
};

using ModeGridPtr = std::shared_ptr<const ModeGrid>;

/// Fills the automatic fields of `opt` so the grid resolves every distribution given.
GridOptions resolve_grid_options(GridOptions opt, const std::vector<const JetDistribution*>& dists);
ModeGridPtr make_grid(const GridOptions& opt, const std::vector<const JetDistribution*>& dists = {});

/// KT(xi) stored as c[r][l][m] with KT(r n) = sum c Y_lm(n).
class OneParticleVector {
 public:
  explicit OneParticleVector(ModeGridPtr grid);

  const ModeGrid& grid() const { return *grid_; }
  const ModeGridPtr& grid_ptr() const { return grid_; }
  cplx& at(std::size_t ir, int l, int m) { return c_[ir * stride_ + ModeGrid::index(l, m)]; }
  cplx at(std::size_t ir, int l, int m) const { return c_[ir * stride_ + ModeGrid::index(l, m)]; }
  std::span<cplx> radial_slice(std::size_t ir) { return {c_.data() + ir * stride_, stride_}; }
  std::span<const cplx> radial_slice(std::size_t ir) const { return {c_.data() + ir * stride_, stride_}; }
  /// Value at radial node ir in direction (x = cos theta, phi).
  cplx value(std::size_t ir, double x, double phi) const;
  double norm2() const;

  OneParticleVector& operator+=(const OneParticleVector& o);
  friend OneParticleVector operator+(OneParticleVector a, const OneParticleVector& b) { return a += b; }
  friend OneParticleVector operator*(cplx s, OneParticleVector a);

 private:
  ModeGridPtr grid_;
  std::size_t stride_;
  std::vector<cplx> c_;
};

/// Closed-form K map for any inertial curve.
OneParticleVector k_map_inertial(const JetDistribution& T, const ModeGridPtr& grid);
/// K map by quadrature along the curve. Order <= 1 unless the curve is inertial.
OneParticleVector k_map_general(const JetDistribution& T, const ModeGridPtr& grid);
/// Closed form on inertial curves, quadrature otherwise.
OneParticleVector k_map(const JetDistribution& T, const ModeGridPtr& grid);
OneParticleVector k_map(const MollifiedJet& T, const ModeGridPtr& grid);
/// KT at a single momentum, without harmonic projection.
cplx k_map_point(const JetDistribution& T, double mass, const FourVector& origin, const Vec3& xi);

/// Multiplies by the mollifier profile at |(lambda, xi)| / k.
OneParticleVector apply_mollifier(const OneParticleVector& u, double k);

cplx inner_product(const OneParticleVector& u, const OneParticleVector& v);
/// <K conj(T), K S>.
cplx two_point(const JetDistribution& T, const JetDistribution& S, const ModeGridPtr& grid);
/// Im two_point(T, S) for real T, S.
double commutator(const JetDistribution& T, const JetDistribution& S, const ModeGridPtr& grid);
/// Massless commutator of order-0 distributions on two distinct rest curves, from the
/// light-cone reduction (1 / (4 pi d)) int a(t) [b(t + dt + d) - b(t + dt - d)] dt.
double commutator_light_cone(const JetDistribution& T, const JetDistribution& S);
/// ||P_l u||^2 for l = 0..l_max.
std::vector<double> angular_spectrum(const OneParticleVector& u);
/// ||K conj(T)||^2, the vacuum expectation of Phi(T)* Phi(T).
double detector_norm(const JetDistribution& T, const ModeGridPtr& grid);

void write_vector_csv(const std::string& path, const OneParticleVector& u);

}  // namespace wlf
