#include <doctest.h>

#include <fstream>
#include <random>

#include "wlfield/one_particle.hpp"

using namespace wlf;

namespace {

WorldlinePtr at_rest(FourVector offset = {}) {
  return std::make_shared<const Worldline>(Worldline::inertial(0.0, {1.0, 0.0, 0.0}, offset));
}
WorldlinePtr rindler(double a) { return std::make_shared<const Worldline>(Worldline::rindler(a)); }

JetDistribution order0(WorldlinePtr w, const CoefficientFunction& a) { return JetDistribution(w, 0, {{{}, a}}); }

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

ModeGridPtr grid_for(std::initializer_list<const JetDistribution*> ds, GridOptions opt = {}) {
  return make_grid(opt, std::vector<const JetDistribution*>(ds));
}

}  // namespace

TEST_CASE("harmonic projection recovers single harmonics") {
  GridOptions opt;
  opt.r_max = 1.0;
  opt.radial_panels = 1;
  opt.l_max = 6;
  const ModeGrid g(opt);
  std::vector<cplx> vals(std::size_t(g.n_theta()) * g.n_phi()), coeffs(g.n_harmonics());
  for (auto [l, m] : std::vector<std::pair<int, int>>{{0, 0}, {1, -1}, {3, 2}, {6, -5}, {6, 6}}) {
    for (int j = 0; j < g.n_theta(); ++j)
      for (int k = 0; k < g.n_phi(); ++k)
        vals[std::size_t(j) * g.n_phi() + k] = g.harmonic(l, m, g.cos_theta(j), 2.0 * pi * k / g.n_phi());
    g.project(vals, coeffs);
    for (int ll = 0; ll <= 6; ++ll)
      for (int mm = -ll; mm <= ll; ++mm)
        CHECK(std::abs(coeffs[ModeGrid::index(ll, mm)] - (ll == l && mm == m ? 1.0 : 0.0)) < 1e-13);
  }
}

TEST_CASE("order-0 rest-frame map is a pure monopole with the closed-form profile") {
  const auto a = CoefficientFunction::gaussian(0.0, 1.0);
  const auto T = order0(at_rest(), a);
  const auto g = grid_for({&T});
  const auto u = k_map_inertial(T, g);
  const auto spec = angular_spectrum(u);
  for (std::size_t l = 1; l < spec.size(); ++l) CHECK(spec[l] <= 1e-28 * spec[0]);
  for (std::size_t i = 0; i < g->n_radial(); i += 17) {
    const double lam = g->lambda(i);
    const cplx expect = std::pow(2.0 * pi, -1.5) * a.transform(lam) / std::sqrt(lam) * std::sqrt(4.0 * pi);
    CHECK(std::abs(u.at(i, 0, 0) - expect) < 1e-14);
  }
}

TEST_CASE("real even coefficient gives a real map") {
  const auto T = order0(at_rest(), CoefficientFunction::cosine_power(0.0, 1.0));
  const auto u = k_map_inertial(T, grid_for({&T}));
  for (std::size_t i = 0; i < u.grid().n_radial(); ++i) CHECK(std::abs(u.at(i, 0, 0).imag()) < 1e-15);
}

TEST_CASE("first spatial derivative is pure dipole") {
  const JetDistribution T(at_rest(), 1, {{{1, 0, 0}, CoefficientFunction::gaussian(0.0, 1.0)}});
  const auto spec = angular_spectrum(k_map_inertial(T, grid_for({&T})));
  CHECK(spec[1] > 0.0);
  for (std::size_t l = 0; l < spec.size(); ++l)
    if (l != 1) CHECK(spec[l] <= 1e-26 * spec[1]);
}

TEST_CASE("second derivative along e1 has monopole and quadrupole only") {
  const JetDistribution T(at_rest(), 2, {{{2, 0, 0}, CoefficientFunction::gaussian(0.0, 1.0)}});
  const auto spec = angular_spectrum(k_map_inertial(T, grid_for({&T})));
  CHECK(spec[0] > 0.0);
  CHECK(spec[2] > 0.0);
  for (std::size_t l = 0; l < spec.size(); ++l)
    if (l != 0 && l != 2) CHECK(spec[l] <= 1e-26 * spec[2]);
}

TEST_CASE("quadrature map agrees with the closed form on inertial curves") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int l = 0; l <= 3; ++l) {
    JetDistribution::Terms terms;
    for (const auto& a : multi_indices(l)) terms.emplace(a, CoefficientFunction::gaussian(0.2 * u(rng), 0.8, cplx(u(rng), u(rng))));
    const JetDistribution T(at_rest(), l, terms);
    const auto g = grid_for({&T});
    const auto exact = k_map_inertial(T, g), num = k_map_general(T, g);
    CHECK(std::sqrt((num + cplx(-1.0) * exact).norm2() / exact.norm2()) < 1e-8);
    const auto spec = angular_spectrum(num);
    double total = 0.0;
    for (double s : spec) total += s;
    for (std::size_t k = l + 1; k < spec.size(); ++k) CHECK(spec[k] <= 1e-16 * total);
    CHECK(spec[l] > 1e-6 * total);
  }
}

TEST_CASE("moving inertial curve: closed form, quadrature and point values agree") {
  const auto w = std::make_shared<const Worldline>(Worldline::inertial(0.4, {0.0, 0.0, 1.0}, {0.0, 0.0, 0.0, 0.3}));
  const JetDistribution T(w, 1, {{{0, 0, 0}, CoefficientFunction::gaussian(0.0, 0.7)},
                                 {{0, 1, 0}, CoefficientFunction::gaussian(0.1, 0.6, 0.5)}});
  GridOptions opt;
  opt.origin = {0.0, 0.0, 0.0, 0.3};
  const auto g = grid_for({&T}, opt);
  const auto exact = k_map_inertial(T, g), num = k_map_general(T, g);
  CHECK(std::sqrt((num + cplx(-1.0) * exact).norm2() / exact.norm2()) < 1e-8);
  const std::size_t ir = g->n_radial() / 8;
  const Vec3 n = g->direction(2, 3);
  const double r = g->r(ir);
  const cplx point = k_map_point(T, 0.0, opt.origin, {r * n[0], r * n[1], r * n[2]});
  CHECK(std::abs(exact.value(ir, g->cos_theta(2), 2.0 * pi * 3 / g->n_phi()) - point) < 1e-9 * std::abs(point));
}

TEST_CASE("rindler map is stable under grid refinement") {
  const auto T = order0(rindler(1.0), CoefficientFunction::gaussian(0.0, 0.3));
  GridOptions base;
  base.origin = {0.0, 1.0, 0.0, 0.0};
  base.axes = {{{0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}, {1.0, 0.0, 0.0}}};
  base.r_max = 40.0;
  base.radial_panels = 16;
  base.l_max = 40;
  GridOptions fine = base;
  fine.r_max *= 2.0;
  fine.radial_panels *= 2;
  const double n1 = k_map_general(T, make_grid(base)).norm2();
  const double n2 = k_map_general(T, make_grid(fine)).norm2();
  CHECK(n1 > 0.0);
  CHECK(rel(n1, n2) < 1e-6);
}

TEST_CASE("ring fast path matches per-direction quadrature off axis") {
  const JetDistribution T(rindler(1.0), 1, {{{0, 0, 0}, CoefficientFunction::gaussian(0.0, 0.25)},
                                            {{1, 0, 0}, CoefficientFunction::gaussian(0.1, 0.2, 0.7)},
                                            {{0, 0, 1}, CoefficientFunction::gaussian(-0.1, 0.2, 0.4)}});
  GridOptions opt;
  opt.origin = {0.0, 1.0, 0.0, 0.0};
  opt.axes = {{{0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}, {1.0, 0.0, 0.0}}};
  opt.r_max = 20.0;
  opt.radial_panels = 8;
  opt.l_max = 30;
  const auto g = make_grid(opt);
  const auto u = k_map_general(T, g);
  for (std::size_t ir : {std::size_t(5), std::size_t(60), std::size_t(120)})
    for (auto [j, k] : std::vector<std::pair<int, int>>{{0, 0}, {7, 11}, {20, 40}}) {
      const Vec3 n = g->direction(j, k);
      const double r = g->r(ir);
      const cplx p = k_map_point(T, 0.0, opt.origin, {r * n[0], r * n[1], r * n[2]});
      CHECK(std::abs(u.value(ir, g->cos_theta(j), 2.0 * pi * k / g->n_phi()) - p) < 1e-8 * (std::abs(p) + 1e-3));
    }
}

TEST_CASE("zero distribution maps to zero") {
  const JetDistribution Z(rindler(1.0), 0, {});
  GridOptions opt;
  opt.r_max = 5.0;
  opt.radial_panels = 2;
  opt.l_max = 2;
  CHECK(k_map_general(Z, make_grid(opt)).norm2() == 0.0);
  CHECK(detector_norm(Z, make_grid(opt)) == 0.0);
}

TEST_CASE("inner product is hermitian and separates degrees") {
  const auto T = order0(at_rest(), CoefficientFunction::gaussian(0.3, 0.9, cplx(1.0, 0.4)));
  const JetDistribution S(at_rest(), 1, {{{0, 1, 0}, CoefficientFunction::gaussian(-0.2, 0.7)}});
  const JetDistribution R(at_rest(), 1, {{{0, 0, 0}, CoefficientFunction::cosine_power(0.1, 1.0)},
                                         {{0, 1, 0}, CoefficientFunction::gaussian(0.0, 0.5)}});
  const auto g = grid_for({&T, &S, &R});
  const auto u = k_map(T, g), v = k_map(S, g), x = k_map(R, g);
  CHECK(std::abs(inner_product(u, v)) < 1e-15 * std::sqrt(u.norm2() * v.norm2()));
  OneParticleVector p(g), q(g);
  for (std::size_t i = 0; i < g->n_radial(); ++i) {
    p.at(i, 0, 0) = u.at(i, 0, 0);
    q.at(i, 1, -1) = v.at(i, 1, -1);
    q.at(i, 1, 1) = v.at(i, 1, 1);
  }
  CHECK(inner_product(p, q) == cplx(0.0));
  CHECK(std::abs(inner_product(u, x) - std::conj(inner_product(x, u))) < 1e-14 * std::sqrt(u.norm2() * x.norm2()));
  CHECK(inner_product(u, u).real() >= 0.0);
  CHECK(inner_product(u, u).imag() == 0.0);
}

TEST_CASE("two-point function of real distributions") {
  const auto T = order0(at_rest(), CoefficientFunction::gaussian(0.3, 0.9));
  const auto S = order0(at_rest({0.0, 1.0, 0.0, 0.0}), CoefficientFunction::gaussian(1.0, 0.8));
  GridOptions opt;
  opt.origin = {0.5, 0.5, 0.0, 0.0};
  const auto g = grid_for({&T, &S}, opt);
  const cplx tt = two_point(T, T, g);
  CHECK(tt.real() > 0.0);
  CHECK(std::abs(tt.imag()) < 1e-14 * tt.real());
  const cplx ts = two_point(T, S, g), st = two_point(S, T, g);
  CHECK(std::abs(ts - std::conj(st)) < 1e-12 * std::abs(ts));
  CHECK(std::abs(commutator(T, T, g)) < 1e-12 * tt.real());
  CHECK(commutator(T, S, g) == doctest::Approx(-commutator(S, T, g)));
  CHECK_THROWS_AS(commutator(order0(at_rest(), CoefficientFunction::gaussian(0.0, 1.0, I)), S, g), DomainError);
}

TEST_CASE("commutator vanishes at spacelike separation") {
  const auto T = order0(at_rest({0.0, -5.0, 0.0, 0.0}), CoefficientFunction::gaussian(0.0, 1.0));
  const auto S = order0(at_rest({0.0, 5.0, 0.0, 0.0}), CoefficientFunction::gaussian(0.2, 1.0));
  const auto g = grid_for({&T, &S});
  const double G = commutator(T, S, g);
  CHECK(std::abs(G) <= 1e-6 * std::sqrt(k_map(T, g).norm2() * k_map(S, g).norm2()));
}

TEST_CASE("commutator of parallel rest curves matches the light-cone integral") {
  // Massless Pauli-Jordan kernel on two rest curves at distance d collapses onto the light cone:
  // G = (1 / (4 pi d)) int a(t) [b(t + d) - b(t - d)] dt.
  const double d = 2.0;
  const auto a = CoefficientFunction::gaussian(0.0, 1.0);
  const auto b = CoefficientFunction::gaussian(5.0, 1.0);
  const auto T = order0(at_rest({0.0, -d / 2, 0.0, 0.0}), a);
  const auto S = order0(at_rest({0.0, d / 2, 0.0, 0.0}), b);
  GridOptions opt;
  opt.origin = {2.5, 0.0, 0.0, 0.0};
  const auto g = grid_for({&T, &S}, opt);
  const double oracle = a.integrate([&](double t) { return b(t + d) - b(t - d); }).real() / (4.0 * pi * d);
  CHECK(std::abs(oracle) > 1e-5);
  CHECK(rel(commutator(T, S, g), oracle) < 1e-4);
  CHECK(commutator_light_cone(T, S) == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(commutator_light_cone(S, T) == doctest::Approx(-oracle).epsilon(1e-12));
  CHECK_THROWS_AS(commutator_light_cone(T, T), DomainError);
}

TEST_CASE("mollified two-point function converges to the unmollified value") {
  const JetDistribution T(at_rest(), 1, {{{0, 0, 0}, CoefficientFunction::gaussian(0.0, 1.0)},
                                         {{1, 0, 0}, CoefficientFunction::gaussian(0.2, 0.8)}});
  const auto g = grid_for({&T});
  const auto u = k_map(T, g);
  double prev = std::numeric_limits<double>::infinity();
  for (double k : {4.0, 8.0, 16.0, 32.0}) {
    const auto uk = k_map(mollify(T, k), g);
    const double gap = std::sqrt((uk + cplx(-1.0) * u).norm2());
    CHECK(gap <= prev);
    prev = gap;
  }
  const double w32 = inner_product(k_map(mollify(T, 32.0), g), k_map(mollify(T, 32.0), g)).real();
  CHECK(rel(w32, u.norm2()) < 1e-3);
}

TEST_CASE("detector norm is quadratic and sees no excitation above the gap") {
  GridOptions opt;
  opt.mass = 1.0;
  const auto win = [](double omega) {
    return order0(at_rest(), CoefficientFunction::gaussian(0.0, 4.0, 1.0, omega));
  };
  const auto Tp = win(3.0), Tm = win(-3.0);
  const auto g = grid_for({&Tp, &Tm}, opt);
  const double up = detector_norm(Tp, g), down = detector_norm(Tm, g);
  CHECK(up <= 1e-6 * down);
  CHECK(detector_norm(2.5 * Tm, g) == doctest::Approx(6.25 * down).epsilon(1e-12));
}

TEST_CASE("vacuum detector norm is boost invariant") {
  const auto a = CoefficientFunction::gaussian(0.0, 0.6);
  const auto T0 = order0(at_rest(), a);
  const auto T1 = order0(std::make_shared<const Worldline>(Worldline::inertial(0.5, {0.6, 0.8, 0.0})), a);
  GridOptions opt;
  opt.mass = 0.5;
  const auto g = grid_for({&T0, &T1}, opt);
  CHECK(rel(detector_norm(T0, g), detector_norm(T1, g)) < 1e-5);
}

TEST_CASE("grid validation and CSV dump") {
  GridOptions opt;
  CHECK_THROWS_AS(ModeGrid{opt}, DomainError);
  opt.r_max = 2.0;
  opt.radial_panels = 1;
  opt.l_max = 1;
  const auto g = make_grid(opt);
  const auto T = order0(at_rest(), CoefficientFunction::gaussian(0.0, 1.0));
  const auto u = k_map(T, g);
  const JetDistribution T2(at_rest(), 2, {{{2, 0, 0}, CoefficientFunction::gaussian(0.0, 1.0)}});
  CHECK_THROWS_AS(k_map(T2, g), DomainError);
  GridOptions other = opt;
  other.l_max = 2;
  CHECK_THROWS_AS(inner_product(u, k_map(T, make_grid(other))), DomainError);
  const auto path = std::string("/tmp/wlf_vec.csv");
  write_vector_csv(path, u);
  std::ifstream is(path);
  std::string header;
  std::getline(is, header);
  CHECK(header == "r,l,m,re,im");
}
