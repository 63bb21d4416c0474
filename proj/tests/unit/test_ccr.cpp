#include <doctest.h>

#include <random>

#include "wlfield/ccr.hpp"

using namespace wlf;

namespace {

WorldlinePtr at_rest() { return std::make_shared<const Worldline>(Worldline::inertial()); }
WorldlinePtr rindler(double a) { return std::make_shared<const Worldline>(Worldline::rindler(a)); }

JetDistribution order0(WorldlinePtr w, const CoefficientFunction& a) { return JetDistribution(w, 0, {{{}, a}}); }

GridOptions small_rindler_grid() {
  GridOptions g;
  g.r_max = 20.0;
  g.radial_panels = 10;
  g.l_max = 20;
  return g;
}

JetDistribution rindler_template(TransportRule rule) {
  const double s = 0.5;
  return JetDistribution(rindler(1.0), 1,
                         {{{0, 0, 0}, CoefficientFunction::gaussian(0.0, s)},
                          {{1, 0, 0}, CoefficientFunction::gaussian(0.0, s, 0.5)},
                          {{0, 1, 0}, CoefficientFunction::gaussian(0.0, s, 0.3)}},
                         rule);
}

const GeneratorFamily& inertial_lattice() {
  static const GeneratorFamily fam =
      shift_lattice(order0(at_rest(), CoefficientFunction::gaussian(0.0, 0.6)), 0.7, 6, TransportRule::FermiWalker);
  return fam;
}

const GeneratorFamily& rindler_lattice() {
  static const GeneratorFamily fam =
      shift_lattice(rindler_template(TransportRule::ParallelLab), 0.5, 4, TransportRule::ParallelLab, small_rindler_grid());
  return fam;
}

Eigen::VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = nd(rng);
  return v;
}

}  // namespace

TEST_CASE("single-generator Gram matrix is a squared norm") {
  const auto T = order0(at_rest(), CoefficientFunction::gaussian(0.3, 0.8));
  const auto fam = gram_assemble({T}, make_grid({}, {&T}));
  CHECK(fam.gram(0, 0).real() > 0.0);
  CHECK(fam.gram(0, 0).imag() == 0.0);
  CHECK(fam.gram(0, 0).real() == doctest::Approx(k_map(T, fam.grid).norm2()));
  CHECK(fam.degenerate);
  CHECK_THROWS_AS(gram_assemble({order0(at_rest(), CoefficientFunction::gaussian(0.0, 1.0, I))}, fam.grid), DomainError);
}

TEST_CASE("monopole and dipole generators are orthogonal") {
  const auto a = CoefficientFunction::gaussian(0.0, 0.7);
  const auto T0 = order0(at_rest(), a);
  const JetDistribution T1(at_rest(), 1, {{{1, 0, 0}, a}});
  const auto fam = gram_assemble({T0, T1}, make_grid({}, {&T0, &T1}));
  CHECK(std::abs(fam.gram(0, 1)) <= 1e-10 * std::sqrt(fam.gram(0, 0).real() * fam.gram(1, 1).real()));
}

TEST_CASE("inertial shift lattice is stationary") {
  const auto& fam = inertial_lattice();
  const auto n = Eigen::Index(fam.size());
  CHECK((fam.gram - fam.gram.adjoint()).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(fam.min_eigenvalue >= -1e-8 * fam.covariance.trace());
  CHECK((fam.symplectic + fam.symplectic.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
  for (Eigen::Index i = 0; i + 1 < n; ++i)
    for (Eigen::Index j = 0; j + 1 < n; ++j) CHECK(std::abs(fam.gram(i + 1, j + 1) - fam.gram(i, j)) <= 1e-8);
  // Neighbouring sites on one timelike curve do not commute.
  CHECK(std::abs(fam.symplectic(0, 1)) > 1e-4);
}

TEST_CASE("Weyl products") {
  std::mt19937_64 rng(3);
  const auto& fam = inertial_lattice();
  const auto n = Eigen::Index(fam.size());
  const auto c = random_vector(rng, n);
  const auto id = weyl_multiply(WeylWord::generator(c), WeylWord::generator(-c), fam);
  CHECK(id.c.norm() == 0.0);
  CHECK(std::abs(id.phase - 1.0) <= 1e-15);
  for (int k = 0; k < 20; ++k) {
    const WeylWord a{random_vector(rng, n), std::polar(1.0, 0.3 * k)}, b = WeylWord::generator(random_vector(rng, n)),
                   d = WeylWord::generator(random_vector(rng, n));
    const auto left = weyl_multiply(weyl_multiply(a, b, fam), d, fam);
    const auto right = weyl_multiply(a, weyl_multiply(b, d, fam), fam);
    CHECK(std::abs(left.phase - right.phase) <= 1e-12);
    CHECK((left.c - right.c).norm() <= 1e-14);
  }
  const auto c1 = random_vector(rng, n), c2 = random_vector(rng, n);
  const auto ab = weyl_multiply(WeylWord::generator(c1), WeylWord::generator(c2), fam);
  const auto ba = weyl_multiply(WeylWord::generator(c2), WeylWord::generator(c1), fam);
  CHECK(std::abs(ab.phase - std::polar(1.0, -c1.dot(fam.symplectic * c2)) * ba.phase) <= 1e-12);
  const auto adj = weyl_adjoint(WeylWord{c1, std::polar(1.0, 0.4)});
  CHECK(adj.c == -c1);
  CHECK(std::arg(adj.phase) == doctest::Approx(-0.4));
}

TEST_CASE("vacuum state on Weyl words") {
  std::mt19937_64 rng(4);
  const auto& fam = inertial_lattice();
  const auto n = Eigen::Index(fam.size());
  const auto vac = QuasifreeState::vacuum(fam);
  CHECK(state_evaluate(vac, WeylWord::identity(fam.size())) == cplx(1.0));
  for (int k = 0; k < 5; ++k) {
    const auto c = random_vector(rng, n);
    const cplx v = state_evaluate(vac, WeylWord::generator(c));
    CHECK(std::abs(v) <= 1.0);
    // Recompute ||K(sum c_j T_j)||^2 from the summed distribution.
    JetDistribution sum = cplx(c(0)) * fam.generators[0];
    for (Eigen::Index j = 1; j < n; ++j) sum = sum + cplx(c(j)) * fam.generators[std::size_t(j)];
    const double direct = std::exp(-0.25 * k_map(sum, fam.grid).norm2());
    CHECK(std::abs(v.real() - direct) <= 1e-8);
  }
}

TEST_CASE("GNS Gram positivity detects bad covariances") {
  const auto& fam = inertial_lattice();
  const auto vac = QuasifreeState::vacuum(fam);
  CHECK(gns_gram_check(vac, fam, {WeylWord::identity(fam.size())}) == doctest::Approx(1.0));
  CHECK(gns_gram_check(vac, fam, random_words(5, fam.size(), 2.0, 9)) >= -1e-10);
  // Shrinking the covariance below the symplectic bound breaks positivity.
  const QuasifreeState bad{0.1 * fam.covariance};
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed)
    worst = std::min(worst, gns_gram_check(bad, fam, random_words(8, fam.size(), 6.0, seed)));
  CHECK(worst < -1e-3);
}

TEST_CASE("inertial translations act as automorphisms") {
  const auto& fam = inertial_lattice();
  const auto m1 = translation_map_build(fam, 1);
  CHECK(m1.s_L.cwiseAbs().maxCoeff() <= 1e-8);
  CHECK(m1.Q_rho.cwiseAbs().maxCoeff() == 0.0);
  CHECK(m1.flow_defect <= 1e-10);
  CHECK(m1.representation_error <= 1e-10);
  CHECK(m1.dropped == std::vector<int>{5});
  const auto m2 = translation_map_build(fam, 2);
  const auto m3 = translation_map_build(fam, 3);

  std::mt19937_64 rng(8);
  for (int k = 0; k < 10; ++k) {
    // Words supported on sites 0..2 stay inside the lattice under a total shift of 3.
    Eigen::VectorXd c = Eigen::VectorXd::Zero(6);
    c.head(3) = random_vector(rng, 3);
    const WeylWord w{c, std::polar(1.0, 0.1 * k)};
    const auto once = cp_apply(m1, w);
    CHECK(std::abs(once.damping - 1.0) == 0.0);
    const auto twice = cp_apply(m2, once.word);
    const auto direct = cp_apply(m3, w);
    CHECK((twice.word.c - direct.word.c).norm() == 0.0);
    CHECK(std::abs(twice.word.phase - direct.word.phase) <= 1e-10);
    // Symplectic form is preserved on the shifted coefficients.
    const Eigen::VectorXd d = random_vector(rng, 6).cwiseProduct((c.array() != 0.0).cast<double>().matrix());
    const auto dm = cp_apply(m1, WeylWord::generator(d));
    CHECK(std::abs(c.dot(fam.symplectic * d) - once.word.c.dot(fam.symplectic * dm.word.c)) <=
          1e-7 * fam.symplectic.cwiseAbs().maxCoeff());
  }
  const auto id = cp_apply(m1, WeylWord::identity(6));
  CHECK(id.word.c.norm() == 0.0);
  CHECK(id.word.phase == cplx(1.0));
  Eigen::VectorXd edge = Eigen::VectorXd::Zero(6);
  edge(5) = 1.0;
  CHECK_THROWS_AS(cp_apply(m1, WeylWord::generator(edge)), DomainError);
}

TEST_CASE("order-0 Rindler translations do not depend on the transport rule") {
  const auto T = order0(rindler(1.0), CoefficientFunction::gaussian(0.0, 0.5));
  const auto fw = shift_lattice(T, 0.5, 4, TransportRule::FermiWalker, small_rindler_grid());
  const auto pl = shift_lattice(T, 0.5, 4, TransportRule::ParallelLab, small_rindler_grid());
  const auto a = translation_map_build(fw, 1), b = translation_map_build(pl, 1);
  CHECK(a.L == b.L);
  CHECK((a.s_L - b.s_L).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("parallel-lab Rindler channel is completely positive") {
  const auto& fam = rindler_lattice();
  const auto map = translation_map_build(fam, 1);
  CHECK(map.s_L.cwiseAbs().maxCoeff() > 1e-3);
  CHECK(map.mu > 0.0);
  CHECK(map.noise_min_eigenvalue >= -1e-9);
  CHECK(map.dropped == std::vector<int>{3});
  const auto d = map.domain.size();
  const QuasifreeState noise{map.Q_rho};
  const auto composed = compose(QuasifreeState::vacuum(fam), map);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto words = random_words(6, d, 1.5, seed);
    CHECK(gns_gram_check(noise, map.s_L, words) >= -1e-9);
    CHECK(gns_gram_check(composed, map.s_domain, words) >= -1e-9);
  }
  // cp_apply agrees with the composed state.
  std::mt19937_64 rng(2);
  const WeylWord w = embed_domain(map, WeylWord::generator(random_vector(rng, Eigen::Index(d))), fam.size());
  const auto out = cp_apply(map, w);
  Eigen::VectorXd x{Eigen::Index(d)};
  for (std::size_t a = 0; a < d; ++a) x(Eigen::Index(a)) = w.c(map.domain[a]);
  CHECK(std::abs(state_evaluate(QuasifreeState::vacuum(fam), out.word) -
                 state_evaluate(composed, WeylWord::generator(x))) <= 1e-12);
  const auto j = map.to_json();
  CHECK(j.at("dropped") == std::vector<int>{3});
  CHECK(j.at("s_L").size() == d);
  CHECK(fam.to_json().at("lattice").at("rule") == "parallel-lab");
}
