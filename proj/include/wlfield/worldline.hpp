#pragma once

#include <array>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wlfield/common.hpp"

namespace wlf {

enum class Parametrization { ProperTime, CoordinateTime };
enum class TransportRule { FermiWalker, ParallelLab };

std::string to_string(TransportRule rule);
TransportRule transport_rule_from_string(const std::string& s);

struct CurvePoint {
  FourVector event;
  FourVector velocity;  // d(event)/d(parameter)
};

/// Orthonormal frame e[0..3] with e[0] the four-velocity.
struct Frame {
  std::array<FourVector, 4> e;
};

/// Pure boost taking (1,0,0,0) to u, applied to the standard basis.
Frame boost_frame(const FourVector& u);

/// Max deviation of g(e_a, e_b) from diag(-1,1,1,1).
double frame_orthonormality_error(const Frame& f);

/// Sampled curve for tabulated worldlines. Velocities are d(event)/d(param).
struct CurveSamples {
  std::vector<double> param;
  std::vector<FourVector> events;
  std::vector<FourVector> velocities;
};

CurveSamples read_curve_csv(const std::string& path);
void write_curve_csv(const std::string& path, const CurveSamples& samples);

class Worldline {
 public:
  enum class Kind { Inertial, Rindler, Circular, Tabulated };

  /// Inertial motion with rapidity eta along unit direction n through `offset` at tau = 0.
  static Worldline inertial(double rapidity = 0.0, std::array<double, 3> direction = {1.0, 0.0, 0.0},
                            FourVector offset = {},
                            Parametrization param = Parametrization::ProperTime);
  /// Uniform acceleration a along x: (sinh(a tau)/a, cosh(a tau)/a, 0, 0).
  static Worldline rindler(double acceleration, Parametrization param = Parametrization::ProperTime);
  /// Circular motion in the x-y plane with radius R and lab angular velocity omega.
  static Worldline circular(double radius, double omega,
                            Parametrization param = Parametrization::ProperTime);
  static Worldline tabulated(CurveSamples samples,
                             Parametrization param = Parametrization::ProperTime);
  static Worldline from_csv(const std::string& path);

  Kind kind() const { return kind_; }
  Parametrization parametrization() const { return param_; }
  bool is_inertial() const { return kind_ == Kind::Inertial; }
  /// Inertial at rest (zero rapidity) in the lab frame.
  bool is_at_rest() const;
  std::string id() const;

  double domain_lo() const { return lo_; }
  double domain_hi() const { return hi_; }
  Worldline with_domain(double lo, double hi) const;
  bool in_domain(double s) const { return s >= lo_ && s <= hi_; }

  double rapidity() const { return eta_; }
  std::array<double, 3> direction() const { return n_; }
  FourVector offset() const { return offset_; }
  double acceleration_parameter() const { return a_; }
  double radius() const { return radius_; }
  double omega() const { return omega_; }

  /// Event and tangent at parameter s.
  CurvePoint evaluate(double s) const;
  FourVector four_velocity(double s) const;
  /// Proper acceleration du/dtau (proper-time parametrization only).
  FourVector acceleration(double tau) const;
  /// Adapted orthonormal frame at proper time tau.
  Frame tetrad(TransportRule rule, double tau) const;

  /// Proper time elapsed from the reference parameter (0, or the domain start) to s.
  double proper_time(double s) const;
  Worldline reparametrize_proper_time() const;

  /// Largest u^0 + |u| over [lo, hi]; bounds the Doppler factor of plane-wave phases.
  double max_doppler(double lo, double hi) const;

  nlohmann::json to_json() const;
  static Worldline from_json(const nlohmann::json& j);

 private:
  struct Table;

  Worldline() = default;
  void check_domain(double s) const;
  void check_proper(const char* what) const;
  double coordinate_to_proper(double s) const;
  Frame transported_frame(double tau) const;
  CurvePoint evaluate_impl(double s, bool check_gaps) const;
  FourVector velocity_impl(double s, bool check_gaps) const;
  FourVector acceleration_impl(double tau, bool check_gaps) const;

  Kind kind_ = Kind::Inertial;
  Parametrization param_ = Parametrization::ProperTime;
  double lo_ = -std::numeric_limits<double>::infinity();
  double hi_ = std::numeric_limits<double>::infinity();
  double eta_ = 0.0;
  std::array<double, 3> n_{1.0, 0.0, 0.0};
  FourVector offset_{};
  double a_ = 0.0;
  double radius_ = 0.0;
  double omega_ = 0.0;
  std::shared_ptr<const Table> table_;
};

}  // namespace wlf
