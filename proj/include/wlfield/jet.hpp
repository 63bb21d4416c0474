#pragma once

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <vector>

#include <nlohmann/json.hpp>

#include "wlfield/coefficient.hpp"
#include "wlfield/test_function.hpp"
#include "wlfield/worldline.hpp"

namespace wlf {

struct MultiIndex {
  std::array<int, 3> a{0, 0, 0};

  constexpr MultiIndex() = default;
  constexpr MultiIndex(int a1, int a2, int a3) : a{a1, a2, a3} {}
  constexpr int order() const { return a[0] + a[1] + a[2]; }
  constexpr int operator[](std::size_t i) const { return a[i]; }
  friend constexpr auto operator<=>(const MultiIndex&, const MultiIndex&) = default;
};

/// All spatial multi-indices with |alpha| <= l, ordered by degree.
std::vector<MultiIndex> multi_indices(int l);

using WorldlinePtr = std::shared_ptr<const Worldline>;

/// Distribution of order l on a worldline in canonical form:
/// T(f) = sum_alpha int a_alpha(t) (e_1.d)^a1 (e_2.d)^a2 (e_3.d)^a3 f(gamma(t)) dt,
/// with e_i the spatial legs of the adapted frame chosen by `frame`.
class JetDistribution {
 public:
  using Terms = std::map<MultiIndex, CoefficientFunction>;

  JetDistribution(WorldlinePtr w, int order, Terms terms = {},
                  TransportRule frame = TransportRule::FermiWalker);

  const Worldline& worldline() const { return *w_; }
  const WorldlinePtr& worldline_ptr() const { return w_; }
  int order() const { return l_; }
  TransportRule frame() const { return frame_; }
  const Terms& terms() const { return terms_; }
  CoefficientFunction coeff(const MultiIndex& alpha) const;
  bool is_real() const;
  /// Hull of the coefficient supports.
  std::pair<double, double> support() const;

  JetDistribution with_term(const MultiIndex& alpha, const CoefficientFunction& c) const;
  JetDistribution conj() const;
  friend JetDistribution operator+(const JetDistribution& a, const JetDistribution& b);
  friend JetDistribution operator*(cplx c, const JetDistribution& a);

  nlohmann::json to_json() const;
  /// Reads {order, worldline, frame, terms, real}; `w` overrides the embedded worldline.
  static JetDistribution from_json(const nlohmann::json& j, WorldlinePtr w = nullptr);

 private:
  WorldlinePtr w_;
  int l_;
  Terms terms_;
  TransportRule frame_;
};

/// Pre-canonical first-order form: sum of c(t) times either evaluation at gamma(t)
/// (derivatives = 0) or the derivative along a direction field v(t) (derivatives = 1).
struct GeneralTerm {
  CoefficientFunction coeff;
  std::function<FourVector(double)> direction;
  int derivatives = 0;
  /// Scale on which the direction field varies.
  double direction_feature = 1.0;
};

class GeneralJet {
 public:
  GeneralJet(WorldlinePtr w, TransportRule frame = TransportRule::FermiWalker) : w_(std::move(w)), frame_(frame) {}

  GeneralJet& add(const CoefficientFunction& c);
  GeneralJet& add(const CoefficientFunction& c, std::function<FourVector(double)> direction,
                  double direction_feature = 1.0);
  GeneralJet& add(GeneralTerm term);

  const Worldline& worldline() const { return *w_; }
  const WorldlinePtr& worldline_ptr() const { return w_; }
  TransportRule frame() const { return frame_; }
  const std::vector<GeneralTerm>& terms() const { return terms_; }

 private:
  WorldlinePtr w_;
  TransportRule frame_;
  std::vector<GeneralTerm> terms_;
};

cplx evaluate_against(const JetDistribution& T, const TestFunction& f);
cplx evaluate_against(const GeneralJet& G, const TestFunction& f);

/// Folds derivatives along e0 into the order-0 coefficient by partial integration.
JetDistribution canonicalize(const GeneralJet& G);

/// sum_alpha (-i)^|alpha| xi^alpha a^_alpha(rho), times the plane-wave phase at the
/// curve's offset. Requires an inertial curve at rest.
cplx fourier_transform(const JetDistribution& T, double rho, const std::array<double, 3>& xi);
/// T applied to exp(i (rho t - xi.x)) by quadrature along the curve.
cplx fourier_transform_numeric(const JetDistribution& T, const FourVector& k);
cplx fourier_transform_numeric(const GeneralJet& G, const FourVector& k);

/// Flat-top radial profile: 1 on [0, 1/2], 0 on [1, inf), smooth in between.
double mollifier_profile(double s);

/// T convolved with a fixed unit-mass mollifier at scale 1/k, represented in transform space.
class MollifiedJet {
 public:
  MollifiedJet(JetDistribution T, double k);
  const JetDistribution& base() const { return T_; }
  double scale() const { return k_; }
  /// Transform-space multiplier at covector (rho, xi).
  double multiplier(double rho, const std::array<double, 3>& xi) const;
  /// Requires an inertial curve at rest.
  cplx fourier_transform(double rho, const std::array<double, 3>& xi) const;

 private:
  JetDistribution T_;
  double k_;
};

MollifiedJet mollify(const JetDistribution& T, double k);

/// Transports T by parameter shift t along its curve. Order-1 legs are carried by
/// `rule` and re-expressed in T's frame at the new point.
JetDistribution pushforward(const JetDistribution& T, double t, TransportRule rule);

/// Transport of a vector along the curve from tau1 to tau2.
FourVector transport(const Worldline& w, TransportRule rule, const FourVector& v, double tau1, double tau2);

}  // namespace wlf
