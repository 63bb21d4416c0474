#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "wlfield/jet.hpp"
#include "wlfield/one_particle.hpp"

namespace wlf {

/// Template T pushed forward to T_j = Xi_{j step} T, j = 0..n-1.
struct LatticeInfo {
  JetDistribution tmpl;
  double step = 0.0;
  TransportRule rule = TransportRule::FermiWalker;
};

/// Real distributions T_1..T_n with Gram data M_jk = <K T_j, K T_k>.
struct GeneratorFamily {
  std::vector<JetDistribution> generators;
  ModeGridPtr grid;
  Eigen::MatrixXcd gram;
  Eigen::MatrixXd covariance;  // Re M
  Eigen::MatrixXd symplectic;  // Im M
  std::vector<OneParticleVector> images;
  std::optional<LatticeInfo> lattice;
  /// min eigenvalue of M, and whether S is numerically singular.
  double min_eigenvalue = 0.0;
  bool degenerate = false;

  std::size_t size() const { return generators.size(); }
  nlohmann::json to_json() const;
};

/// Computes K T_j on `grid` and the Gram matrix. Throws ValidationError when M fails to be
/// hermitian (1e-10) or positive semidefinite (min eig < -1e-8 trace).
GeneratorFamily gram_assemble(std::vector<JetDistribution> dists, ModeGridPtr grid);
/// Shift lattice of a template along its worldline.
GeneratorFamily shift_lattice(const JetDistribution& tmpl, double step, int n, TransportRule rule,
                              const GridOptions& opt = {});

/// W(c) times a phase, c the coefficients on the family's generators.
struct WeylWord {
  Eigen::VectorXd c;
  cplx phase{1.0, 0.0};

  static WeylWord identity(std::size_t n) { return {Eigen::VectorXd::Zero(Eigen::Index(n)), 1.0}; }
  static WeylWord generator(Eigen::VectorXd c) { return {std::move(c), 1.0}; }
};

/// W(c1) W(c2) = exp(-i/2 c1^T S c2) W(c1 + c2).
WeylWord weyl_multiply(const WeylWord& a, const WeylWord& b, const Eigen::MatrixXd& S);
WeylWord weyl_multiply(const WeylWord& a, const WeylWord& b, const GeneratorFamily& fam);
WeylWord weyl_adjoint(const WeylWord& w);

/// omega(W(c)) = exp(-1/4 c^T Q c).
struct QuasifreeState {
  Eigen::MatrixXd Q;

  static QuasifreeState vacuum(const GeneratorFamily& fam) { return {fam.covariance}; }
};

cplx state_evaluate(const QuasifreeState& s, const WeylWord& w);
/// Minimum eigenvalue of G_ij = omega(w_i^* w_j) with products taken in CCR(., S).
double gns_gram_check(const QuasifreeState& s, const Eigen::MatrixXd& S, const std::vector<WeylWord>& words);
double gns_gram_check(const QuasifreeState& s, const GeneratorFamily& fam, const std::vector<WeylWord>& words);

/// Random words with N(0, scale^2) coefficients, from a seeded generator.
std::vector<WeylWord> random_words(std::size_t n_words, std::size_t dim, double scale, std::uint64_t seed);

/// alpha(W(x)) = rho(W(x)) W(L x) on the span of the lattice indices that stay inside
/// the lattice under the shift.
struct GaussianCPMap {
  int shift = 0;               // lattice steps
  double time = 0.0;           // shift * step
  std::vector<int> domain;     // family indices j with j + shift in range
  std::vector<int> dropped;    // the remaining indices
  Eigen::MatrixXd L;           // n x |domain|
  Eigen::MatrixXd s_domain;    // S restricted to the domain
  Eigen::MatrixXd s_L;         // s_domain - L^T S L
  Eigen::MatrixXd Q_rho;       // noise covariance on the domain
  double mu = 0.0;
  int escalations = 0;
  double noise_min_eigenvalue = 0.0;
  /// max_j ||K Xi_t T_j - K T_{j+shift}|| / ||K T_j||
  double flow_defect = 0.0;
  /// max |Im <K Xi_t T_i, K Xi_t T_j> - (L^T S L)_ij|
  double representation_error = 0.0;

  nlohmann::json to_json() const;
};

struct TranslationOptions {
  /// ||s_L|| (max abs entry) at or below snap_rel * ||S|| gives Q_rho = 0.
  double snap_rel = 1e-9;
  std::size_t check_words = 12;
  double check_tol = 1e-9;
  std::uint64_t seed = 1;
  int max_escalations = 3;
};

GaussianCPMap translation_map_build(const GeneratorFamily& lattice, int shift, const TranslationOptions& opt = {});

struct CpResult {
  WeylWord word;  // phase includes the damping
  double damping = 1.0;
};

/// Word given on the full family; coefficients outside the domain must vanish.
CpResult cp_apply(const GaussianCPMap& map, const WeylWord& w);
/// omega o alpha as a quasifree state on the domain, covariance Q_rho + L^T Q L.
QuasifreeState compose(const QuasifreeState& s, const GaussianCPMap& map);
/// Word on the domain coordinates embedded into the family.
WeylWord embed_domain(const GaussianCPMap& map, const WeylWord& w, std::size_t n);

}  // namespace wlf
