#include "wlfield/ccr.hpp"

#include <algorithm>
#include <random>

#include <fmt/format.h>

namespace wlf {

namespace {

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> r(std::size_t(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) r[std::size_t(j)] = m(i, j);
    rows.push_back(r);
  }
  return rows;
}

double max_abs(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

double min_hermitian_eigenvalue(const Eigen::MatrixXcd& g) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

GeneratorFamily gram_assemble(std::vector<JetDistribution> dists, ModeGridPtr grid) {
  if (dists.empty()) throw DomainError("empty generator family");
  if (!grid) throw DomainError("gram_assemble needs a grid");
  for (const auto& T : dists)
    if (!T.is_real()) throw DomainError("generators must be real distributions");
  GeneratorFamily fam;
  fam.grid = grid;
  const auto n = Eigen::Index(dists.size());
  for (const auto& T : dists) fam.images.push_back(k_map(T, grid));
  fam.generators = std::move(dists);

  fam.gram.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      const cplx v = inner_product(fam.images[std::size_t(i)], fam.images[std::size_t(j)]);
      fam.gram(i, j) = v;
      fam.gram(j, i) = std::conj(v);
    }
  for (Eigen::Index i = 0; i < n; ++i) fam.gram(i, i) = fam.gram(i, i).real();
  fam.covariance = fam.gram.real();
  fam.symplectic = fam.gram.imag();

  const double trace = fam.covariance.trace();
  fam.min_eigenvalue = min_hermitian_eigenvalue(fam.gram);
  if (fam.min_eigenvalue < -1e-8 * trace)
    throw ValidationError(fmt::format("Gram matrix not positive semidefinite: min eigenvalue {:.3e}, trace {:.3e}",
                                      fam.min_eigenvalue, trace));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(fam.symplectic);
  const auto& sv = svd.singularValues();
  fam.degenerate = sv.size() == 0 || sv(sv.size() - 1) <= 1e-10 * std::max(sv(0), 1e-300);
  return fam;
}

GeneratorFamily shift_lattice(const JetDistribution& tmpl, double step, int n, TransportRule rule,
                              const GridOptions& opt) {
  if (n < 1) throw DomainError("lattice needs at least one site");
  if (!(step > 0.0)) throw DomainError("lattice step must be positive");
  std::vector<JetDistribution> sites;
  sites.push_back(tmpl);
  for (int j = 1; j < n; ++j) sites.push_back(pushforward(tmpl, j * step, rule));
  std::vector<const JetDistribution*> ptrs;
  for (const auto& s : sites) ptrs.push_back(&s);
  auto grid = make_grid(opt, ptrs);
  GeneratorFamily fam = gram_assemble(std::move(sites), grid);
  fam.lattice = LatticeInfo{tmpl, step, rule};
  return fam;
}

nlohmann::json GeneratorFamily::to_json() const {
  nlohmann::json gens = nlohmann::json::array();
  for (const auto& g : generators) gens.push_back(g.to_json());
  nlohmann::json j{{"n", size()},
                   {"gram_re", matrix_json(covariance)},
                   {"gram_im", matrix_json(symplectic)},
                   {"min_eigenvalue", min_eigenvalue},
                   {"degenerate", degenerate},
                   {"grid", grid->options().to_json()},
                   {"generators", gens}};
  if (lattice)
    j["lattice"] = {{"step", lattice->step}, {"rule", to_string(lattice->rule)}, {"template", lattice->tmpl.to_json()}};
  return j;
}

WeylWord weyl_multiply(const WeylWord& a, const WeylWord& b, const Eigen::MatrixXd& S) {
  if (a.c.size() != b.c.size() || a.c.size() != S.rows()) throw DomainError("Weyl words from different families");
  const double cross = a.c.dot(S * b.c);
  return {a.c + b.c, a.phase * b.phase * std::polar(1.0, -0.5 * cross)};
}

WeylWord weyl_multiply(const WeylWord& a, const WeylWord& b, const GeneratorFamily& fam) {
  return weyl_multiply(a, b, fam.symplectic);
}

WeylWord weyl_adjoint(const WeylWord& w) { return {-w.c, std::conj(w.phase)}; }

cplx state_evaluate(const QuasifreeState& s, const WeylWord& w) {
  if (w.c.size() != s.Q.rows()) throw DomainError("word and state dimensions differ");
  return w.phase * std::exp(-0.25 * w.c.dot(s.Q * w.c));
}

double gns_gram_check(const QuasifreeState& s, const Eigen::MatrixXd& S, const std::vector<WeylWord>& words) {
  if (words.empty()) throw DomainError("GNS check needs words");
  const auto k = Eigen::Index(words.size());
  Eigen::MatrixXcd G(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const WeylWord adj = weyl_adjoint(words[std::size_t(i)]);
    for (Eigen::Index j = 0; j < k; ++j) G(i, j) = state_evaluate(s, weyl_multiply(adj, words[std::size_t(j)], S));
  }
  // Exact arithmetic gives a hermitian G; symmetrize the round-off.
  const Eigen::MatrixXcd H = 0.5 * (G + G.adjoint());
  return min_hermitian_eigenvalue(H);
}

double gns_gram_check(const QuasifreeState& s, const GeneratorFamily& fam, const std::vector<WeylWord>& words) {
  return gns_gram_check(s, fam.symplectic, words);
}

std::vector<WeylWord> random_words(std::size_t n_words, std::size_t dim, double scale, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, scale);
  std::vector<WeylWord> out;
  for (std::size_t k = 0; k < n_words; ++k) {
    Eigen::VectorXd c(Eigen::Index(dim), 1);
    for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = nd(rng);
    out.push_back(WeylWord::generator(c));
  }
  return out;
}

GaussianCPMap translation_map_build(const GeneratorFamily& fam, int shift, const TranslationOptions& opt) {
  if (!fam.lattice) throw DomainError("translation map needs a shift-lattice family");
  const auto& lat = *fam.lattice;
  if (lat.tmpl.order() > 1) throw DomainError("translation maps are implemented for order <= 1");
  const int n = int(fam.size());
  GaussianCPMap map;
  map.shift = shift;
  map.time = shift * lat.step;
  for (int j = 0; j < n; ++j) (j + shift >= 0 && j + shift < n ? map.domain : map.dropped).push_back(j);
  if (map.domain.empty()) throw DomainError("shift moves every lattice site outside the family");
  const auto d = Eigen::Index(map.domain.size());

  map.L = Eigen::MatrixXd::Zero(n, d);
  map.s_domain.resize(d, d);
  for (Eigen::Index a = 0; a < d; ++a) {
    map.L(map.domain[std::size_t(a)] + shift, a) = 1.0;
    for (Eigen::Index b = 0; b < d; ++b)
      map.s_domain(a, b) = fam.symplectic(map.domain[std::size_t(a)], map.domain[std::size_t(b)]);
  }
  const Eigen::MatrixXd LSL = map.L.transpose() * fam.symplectic * map.L;
  map.s_L = map.s_domain - LSL;

  // Compare the index shift with the actual push-forward of each domain generator.
  std::vector<OneParticleVector> pushed;
  for (int j : map.domain) {
    const auto P = pushforward(fam.generators[std::size_t(j)], map.time, lat.rule);
    pushed.push_back(k_map(P, fam.grid));
    const auto diff = pushed.back() + cplx(-1.0) * fam.images[std::size_t(j + shift)];
    map.flow_defect =
        std::max(map.flow_defect, std::sqrt(diff.norm2() / fam.images[std::size_t(j)].norm2()));
  }
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b)
      map.representation_error =
          std::max(map.representation_error,
                   std::abs(inner_product(pushed[std::size_t(a)], pushed[std::size_t(b)]).imag() - LSL(a, b)));

  const double sl = max_abs(map.s_L);
  if (sl <= opt.snap_rel * std::max(max_abs(fam.symplectic), 1e-300)) {
    map.Q_rho = Eigen::MatrixXd::Zero(d, d);
    map.mu = 0.0;
    map.noise_min_eigenvalue = 1.0;
    return map;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(map.s_L);
  map.mu = 2.0 * svd.singularValues()(0);
  // Words scaled so the exponents are of order one.
  const auto words = random_words(opt.check_words, std::size_t(d), 1.0 / std::sqrt(map.mu), opt.seed);
  for (;;) {
    map.Q_rho = map.mu * Eigen::MatrixXd::Identity(d, d);
    map.noise_min_eigenvalue = gns_gram_check(QuasifreeState{map.Q_rho}, map.s_L, words);
    if (map.noise_min_eigenvalue >= -opt.check_tol) break;
    if (map.escalations == opt.max_escalations)
      throw ValidationError(fmt::format("noise state failed positivity after {} escalations (min eig {:.3e})",
                                        map.escalations, map.noise_min_eigenvalue));
    map.mu *= 2.0;
    ++map.escalations;
  }
  return map;
}

CpResult cp_apply(const GaussianCPMap& map, const WeylWord& w) {
  const auto n = map.L.rows();
  if (w.c.size() != n) throw DomainError("word does not belong to the map's family");
  for (int j : map.dropped)
    if (w.c(j) != 0.0) throw DomainError(fmt::format("word has weight on generator {} outside the shift domain", j));
  Eigen::VectorXd x(Eigen::Index(map.domain.size()));
  for (std::size_t a = 0; a < map.domain.size(); ++a) x(Eigen::Index(a)) = w.c(map.domain[a]);
  const double damping = std::exp(-0.25 * x.dot(map.Q_rho * x));
  return {{map.L * x, w.phase * damping}, damping};
}

QuasifreeState compose(const QuasifreeState& s, const GaussianCPMap& map) {
  return {map.Q_rho + map.L.transpose() * s.Q * map.L};
}

WeylWord embed_domain(const GaussianCPMap& map, const WeylWord& w, std::size_t n) {
  if (std::size_t(w.c.size()) != map.domain.size()) throw DomainError("word is not on the map's domain");
  Eigen::VectorXd c = Eigen::VectorXd::Zero(Eigen::Index(n));
  for (std::size_t a = 0; a < map.domain.size(); ++a) c(map.domain[a]) = w.c(Eigen::Index(a));
  return {c, w.phase};
}

nlohmann::json GaussianCPMap::to_json() const {
  return {{"shift", shift},
          {"time", time},
          {"domain", domain},
          {"dropped", dropped},
          {"L", matrix_json(L)},
          {"s_L", matrix_json(s_L)},
          {"s_L_norm", max_abs(s_L)},
          {"Q_rho", matrix_json(Q_rho)},
          {"mu", mu},
          {"escalations", escalations},
          {"noise_min_eigenvalue", noise_min_eigenvalue},
          {"flow_defect", flow_defect},
          {"representation_error", representation_error}};
}

}  // namespace wlf
