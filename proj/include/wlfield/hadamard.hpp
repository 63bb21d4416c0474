#pragma once

#include <memory>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <nlohmann/json.hpp>

#include "wlfield/coefficient.hpp"
#include "wlfield/worldline.hpp"

namespace wlf {

using Rational = boost::multiprecision::cpp_rational;

enum class KernelBackend { ClosedMasslessInertial, ClosedMasslessRindler, ModeIntegral };

std::string to_string(KernelBackend b);
KernelBackend kernel_backend_from_string(const std::string& s);

/// Geometric regulator schedule 1e-2, 5e-3, ... down to 1e-4.
std::vector<double> default_eps_schedule();

/// Vacuum two-point function pulled back to a worldline, W(tau, tau') with the
/// positive-frequency regulator exp(-eps lambda).
struct PulledBackKernel {
  std::shared_ptr<const Worldline> worldline;
  KernelBackend backend = KernelBackend::ClosedMasslessInertial;
  double mass = 0.0;
  std::vector<double> eps_schedule = default_eps_schedule();

  PulledBackKernel(std::shared_ptr<const Worldline> w, KernelBackend b, double m = 0.0);
  /// Closed form where available, mode integral for massive inertial curves.
  static PulledBackKernel for_worldline(std::shared_ptr<const Worldline> w, double m = 0.0);
};

/// W at curve parameters s, s'. eps = 0 is allowed away from coincidence.
cplx kernel_value(const PulledBackKernel& K, double s1, double s2, double eps);
/// eps -> 0 by polynomial extrapolation over the kernel's schedule.
cplx kernel_limit(const PulledBackKernel& K, double s1, double s2);
/// Same as kernel_value but as a function of proper-time separation u.
cplx kernel_at_separation(const PulledBackKernel& K, double u, double eps);

/// Massive vacuum kernel at timelike separation u, eps -> 0, from Bessel functions.
cplx massive_kernel_bessel(double m, double u);

/// F(omega) = int int f(t) conj(f(t')) exp(-i omega (t - t')) W(t, t') dt dt' in the
/// eps -> 0 limit. The curve must be proper-time parametrized.
double detector_response(const PulledBackKernel& K, const CoefficientFunction& window, double omega);
std::vector<double> detector_spectrum(const PulledBackKernel& K, const CoefficientFunction& window,
                                      const std::vector<double>& omegas);

struct KmsFit {
  double beta = 0.0;
  double stderr_beta = 0.0;
  double residual = 0.0;
  std::vector<double> omegas_used;
  std::vector<double> omegas_dropped;
  std::vector<double> f_plus, f_minus;

  nlohmann::json to_json() const;
};

/// Detailed-balance fit ln(F(w)/F(-w)) = -beta w over positive frequencies.
/// Points whose F(+-w) sit below noise_rel * max F are dropped; throws NumericalError
/// when fewer than two survive.
KmsFit kms_fit(const PulledBackKernel& K, const CoefficientFunction& window,
               const std::vector<double>& positive_omegas, double noise_rel = 1e-11);

struct SpectrumRow {
  double omega, f, ratio, ln_ratio;
};
/// Rows for omega and -omega over the given positive frequencies.
std::vector<SpectrumRow> spectrum_table(const PulledBackKernel& K, const CoefficientFunction& window,
                                        const std::vector<double>& positive_omegas);
std::string spectrum_csv(const std::vector<SpectrumRow>& rows);
void write_spectrum_csv(const std::string& path, const std::vector<SpectrumRow>& rows);

/// Coefficients V_j of the logarithmic part sum_j V_j Gamma^j / j! for a flat background.
struct HadamardCoefficients {
  double mass = 0.0;
  std::vector<Rational> exact;
  std::vector<double> values;
  /// Ratio between the Bessel series coefficients and V_j / j!, measured at j = 0.
  double bessel_constant = 0.0;

  nlohmann::json to_json() const;
};

/// Runs the transport-integral recursion with unit determinant and constant V_j.
HadamardCoefficients hadamard_recursion(double mass, int n);
/// Taylor coefficients in Gamma of J1(m sqrt(-Gamma)) / sqrt(-Gamma), the tail of the
/// massive retarded fundamental solution.
std::vector<Rational> bessel_tail_coefficients(double mass, int n);

struct ShortDistanceRow {
  double dtau;
  cplx leading;         // W * (dtau - i eps)^2 at eps -> 0
  double leading_abs;
  cplx leading_half;    // same with the schedule halved
  cplx residual;        // W + 1 / (4 pi^2 dtau^2)
};

struct ShortDistanceReport {
  double mass = 0.0;
  std::vector<ShortDistanceRow> rows;
  double limit_abs = 0.0;    // |leading| at the smallest dtau
  double log_slope = 0.0;    // fitted d Re(residual) / d ln(dtau^2)
  double log_intercept = 0.0;
  double predicted_slope = 0.0;  // V_0 / (4 pi^2)
  bool ill_conditioned = false;

  nlohmann::json to_json() const;
};

ShortDistanceReport short_distance_check(const PulledBackKernel& K, const std::vector<double>& dtau);

}  // namespace wlf
