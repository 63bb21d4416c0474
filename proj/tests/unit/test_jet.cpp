#include <doctest.h>

#include <random>

#include "wlfield/jet.hpp"

using namespace wlf;

namespace {

WorldlinePtr at_rest() { return std::make_shared<const Worldline>(Worldline::inertial()); }
WorldlinePtr rindler(double a) { return std::make_shared<const Worldline>(Worldline::rindler(a)); }

TestFunctionPtr random_poly_gaussian(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> e(0, 2);
  std::vector<Monomial> terms;
  for (int k = 0; k < 4; ++k) terms.push_back({cplx(u(rng), u(rng)), {e(rng), e(rng), e(rng), e(rng)}});
  return product(polynomial(terms), gaussian_function({u(rng), 1.0 + u(rng), u(rng), u(rng)}, 2.0));
}

}  // namespace

TEST_CASE("multi-index enumeration counts (l+1)(l+2)(l+3)/6 entries") {
  for (int l = 0; l <= 4; ++l) CHECK(multi_indices(l).size() == std::size_t((l + 1) * (l + 2) * (l + 3) / 6));
}

TEST_CASE("coefficient transforms agree with high-precision quadrature") {
  const auto bump = CoefficientFunction::smooth_bump(0.5, 0.8);
  const cplx b = bump.transform(3.7);
  CHECK(b.real() == doctest::Approx(-0.0447213338041037308).epsilon(1e-12));
  CHECK(b.imag() == doctest::Approx(0.155990677192724870892).epsilon(1e-12));
  const auto cp = CoefficientFunction::cosine_power(-0.2, 0.7);
  const cplx c = cp.transform(25.0);
  CHECK(std::abs(c - cplx(-0.0000129751136066243408, -0.0000438625662549478417)) < 1e-15);
  for (double rho : {0.0, 1.3, 7.0, 40.0}) {
    CHECK(std::abs(cp.transform(rho) - cp.transform_numeric(rho)) < 1e-13);
    const auto g = CoefficientFunction::gaussian(0.4, 0.6, cplx(1.0, 0.5), 2.0);
    CHECK(std::abs(g.transform(rho) - g.transform_numeric(rho)) < 1e-12);
  }
}

TEST_CASE("derived coefficients keep exact transforms") {
  const auto g = CoefficientFunction::gaussian(0.2, 0.5);
  for (double rho : {0.0, 2.0, 9.0}) {
    CHECK(std::abs(g.neg_derivative().transform(rho) - g.neg_derivative().transform_numeric(rho)) < 1e-11);
    CHECK(std::abs(g.shifted(1.5).transform(rho) - g.shifted(1.5).transform_numeric(rho)) < 1e-12);
    CHECK(std::abs(g.modulated(3.0).conj().transform(rho) - g.modulated(3.0).conj().transform_numeric(rho)) <
          1e-12);
  }
}

TEST_CASE("tabulated coefficient tracks its source and serializes") {
  const auto src = CoefficientFunction::cosine_power(0.0, 1.0);
  const auto tab = CoefficientFunction::sample([&](double t) { return src(t); }, -1.0, 1.0, 1.0 / 256);
  for (double t : {-0.9, -0.3, 0.0, 0.55}) CHECK(std::abs(tab(t) - src(t)) < 1e-8);
  CHECK(std::abs(tab.transform(3.0) - src.transform(3.0)) < 1e-8);
  const auto back = CoefficientFunction::from_json(tab.to_json());
  CHECK(back(0.3) == tab(0.3));
  CHECK_THROWS_AS(CoefficientFunction::tabulated(0.0, 0.1, {1.0, 1.0, 1.0, 1.0, 1.0}, 0.0, 0.4), DomainError);
}

TEST_CASE("constant test function sees only the order-0 coefficient") {
  const auto a0 = CoefficientFunction::cosine_power(0.0, 1.0);
  const auto a1 = CoefficientFunction::gaussian(0.0, 0.3);
  const JetDistribution T(rindler(1.0), 1, {{{0, 0, 0}, a0}, {{1, 0, 0}, a1}});
  const cplx v = evaluate_against(T, *constant_function(2.5));
  CHECK(v.real() == doctest::Approx(2.5 * a0.transform(0.0).real()).epsilon(1e-12));
  CHECK(std::abs(v.imag()) < 1e-15);
}

TEST_CASE("order-0 bump against f = t gives the first moment") {
  const auto a0 = CoefficientFunction::cosine_power(0.3, 1.2);
  const JetDistribution T(at_rest(), 0, {{{0, 0, 0}, a0}});
  const cplx v = evaluate_against(T, *polynomial({{1.0, {1, 0, 0, 0}}}));
  CHECK(v.real() == doctest::Approx(0.196875).epsilon(1e-12));
}

TEST_CASE("second spatial derivative of x^2 is 2") {
  const auto a = CoefficientFunction::smooth_bump(0.0, 1.0);
  const JetDistribution T(at_rest(), 2, {{{2, 0, 0}, a}});
  const cplx v = evaluate_against(T, *polynomial({{1.0, {0, 2, 0, 0}}}));
  CHECK(v.real() == doctest::Approx(2.0 * a.transform(0.0).real()).epsilon(1e-12));
}

TEST_CASE("evaluation is linear") {
  std::mt19937_64 rng(3);
  const auto w = rindler(0.8);
  const JetDistribution T(w, 1, {{{0, 0, 0}, CoefficientFunction::gaussian(0.1, 0.3)},
                                 {{0, 1, 0}, CoefficientFunction::cosine_power(0.0, 0.9)}});
  const JetDistribution S(w, 1, {{{1, 0, 0}, CoefficientFunction::smooth_bump(0.2, 0.7, cplx(0.3, 1.0))}});
  const cplx a(1.5, -0.5), b(-0.7, 2.0);
  for (int k = 0; k < 5; ++k) {
    const auto f = random_poly_gaussian(rng);
    const cplx lhs = evaluate_against(a * T + b * S, *f);
    const cplx rhs = a * evaluate_against(T, *f) + b * evaluate_against(S, *f);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
  }
}

TEST_CASE("derivative along e0 canonicalizes to minus the derivative") {
  const auto w = rindler(1.0);
  const auto a = CoefficientFunction::gaussian(0.2, 0.4);
  GeneralJet G(w);
  G.add(a, [w](double tau) { return w->four_velocity(tau); });
  const auto T = canonicalize(G);
  CHECK(T.terms().size() == 1);
  const auto a0 = T.coeff({0, 0, 0});
  for (double t : {-0.3, 0.2, 0.9}) CHECK(std::abs(a0(t) + a.derivative(t)) < 1e-9);
}

TEST_CASE("purely spatial frame directions canonicalize to themselves") {
  const auto w = rindler(1.0);
  const auto a = CoefficientFunction::cosine_power(0.0, 0.8);
  GeneralJet G(w);
  G.add(a, [w](double tau) { return w->tetrad(TransportRule::FermiWalker, tau).e[2]; });
  const auto T = canonicalize(G);
  CHECK(T.terms().size() == 1);
  CHECK(T.coeff({0, 1, 0})(0.3) == a(0.3));
}

TEST_CASE("lab-constant direction on a rindler curve decomposes by a boost") {
  const auto w = rindler(1.0);
  const auto a = CoefficientFunction::gaussian(0.3, 0.3);
  GeneralJet G(w);
  G.add(a, [](double) { return FourVector(0.0, 1.0, 0.0, 0.0); });
  const auto T = canonicalize(G);
  // v = -sinh(tau) e0 + cosh(tau) e1
  for (double t : {-0.2, 0.3, 0.8}) {
    CHECK(std::abs(T.coeff({1, 0, 0})(t) - std::cosh(t) * a(t)) < 1e-12);
    const cplx expect = std::cosh(t) * a(t) + std::sinh(t) * a.derivative(t);
    CHECK(std::abs(T.coeff({0, 0, 0})(t) - expect) < 1e-8);
  }
  std::mt19937_64 rng(11);
  for (int k = 0; k < 5; ++k) {
    const auto f = random_poly_gaussian(rng);
    const cplx g = evaluate_against(G, *f), c = evaluate_against(T, *f);
    CHECK(std::abs(g - c) <= 1e-9 * std::max(1.0, std::abs(g)));
  }
}

TEST_CASE("canonicalization preserves evaluation on random jets and test functions") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto w = rindler(0.7);
  for (int j = 0; j < 20; ++j) {
    GeneralJet G(w, j % 2 ? TransportRule::ParallelLab : TransportRule::FermiWalker);
    G.add(CoefficientFunction::gaussian(0.3 * u(rng), 0.3 + 0.1 * u(rng)));
    const std::array<double, 4> c0{u(rng), u(rng), u(rng), u(rng)}, c1{u(rng), u(rng), u(rng), u(rng)};
    G.add(CoefficientFunction::cosine_power(0.3 * u(rng), 0.8, cplx(u(rng), u(rng))), [c0, c1](double tau) {
      return FourVector(c0[0] + c1[0] * std::sin(tau), c0[1] + c1[1] * tau, c0[2], c0[3] + c1[3] * tau * tau);
    });
    const auto T = canonicalize(G);
    for (int k = 0; k < 20; ++k) {
      const auto f = random_poly_gaussian(rng);
      const cplx g = evaluate_against(G, *f), c = evaluate_against(T, *f);
      CHECK(std::abs(g - c) <= 1e-9 * std::max(1.0, std::abs(g)));
    }
  }
}

TEST_CASE("second-order general terms are rejected") {
  GeneralJet G(at_rest());
  CHECK_THROWS_AS(G.add(GeneralTerm{CoefficientFunction::gaussian(0, 1), [](double) { return FourVector(); }, 2}),
                  DomainError);
}

TEST_CASE("closed-form transform identities on the rest frame") {
  const auto a = CoefficientFunction::gaussian(0.5, 0.7);
  const JetDistribution T0(at_rest(), 0, {{{0, 0, 0}, a}});
  CHECK(std::abs(fourier_transform(T0, 1.3, {0.0, 0.0, 0.0}) - a.transform(1.3)) < 1e-15);
  const JetDistribution T1(at_rest(), 1, {{{1, 0, 0}, a}});
  CHECK(std::abs(fourier_transform(T1, 1.3, {2.0, 5.0, -1.0}) - (-I * 2.0 * a.transform(1.3))) < 1e-14);
  CHECK_THROWS_AS(fourier_transform(JetDistribution(rindler(1.0), 0, {{{0, 0, 0}, a}}), 1.0, {0, 0, 0}),
                  DomainError);
}

TEST_CASE("closed-form and quadrature transforms agree on inertial curves") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto w = std::make_shared<const Worldline>(Worldline::inertial(0.0, {1, 0, 0}, {0.5, 1.0, -2.0, 0.3}));
  const JetDistribution T(w, 2,
                          {{{0, 0, 0}, CoefficientFunction::gaussian(0.1, 0.5, cplx(1.0, 0.2))},
                           {{1, 0, 0}, CoefficientFunction::cosine_power(-0.2, 1.0)},
                           {{0, 1, 1}, CoefficientFunction::smooth_bump(0.3, 1.1, 0.7)},
                           {{0, 0, 2}, CoefficientFunction::gaussian(0.0, 0.4, 1.0, 1.5)}});
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double scale = 6.0 * std::abs(u(rng));
    const FourVector kv(scale * u(rng), scale * u(rng), scale * u(rng), scale * u(rng));
    const cplx exact = fourier_transform(T, kv[0], {kv[1], kv[2], kv[3]});
    const cplx num = fourier_transform_numeric(T, kv);
    worst = std::max(worst, std::abs(exact - num) / std::max(1e-3, std::abs(exact)));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("plane wave at zero momentum integrates the order-0 coefficient") {
  const auto a = CoefficientFunction::smooth_bump(0.0, 1.0);
  const JetDistribution T(rindler(1.0), 1, {{{0, 0, 0}, a}, {{0, 0, 1}, a}});
  CHECK(std::abs(fourier_transform_numeric(T, {}) - a.transform(0.0)) < 1e-13);
}

TEST_CASE("rindler bump transform decays at large timelike momentum") {
  const auto a = CoefficientFunction::gaussian(0.0, 0.25);
  const JetDistribution T(rindler(1.0), 0, {{{0, 0, 0}, a}});
  const double ref = std::abs(fourier_transform_numeric(T, {}));
  CHECK(std::abs(fourier_transform_numeric(T, {60.0, 10.0, 0.0, 0.0})) < 1e-8 * ref);
}

TEST_CASE("transform grows at most polynomially along spatial rays") {
  const JetDistribution T(at_rest(), 2,
                          {{{0, 0, 0}, CoefficientFunction::gaussian(0.0, 1.0)},
                           {{1, 1, 0}, CoefficientFunction::gaussian(0.0, 1.0)}});
  std::vector<double> x, y;
  for (double lam = 10.0; lam <= 1e4; lam *= 1.5) {
    x.push_back(std::log(lam));
    y.push_back(std::log(std::abs(fourier_transform(T, 0.0, {lam, lam, 0.0}))));
  }
  double slope = (y.back() - y[y.size() - 4]) / (x.back() - x[x.size() - 4]);
  CHECK(slope <= 2.0 + 1e-6);
  CHECK(slope >= 1.9);
}

TEST_CASE("mollifier multiplier tends to one and preserves total mass") {
  const JetDistribution T(at_rest(), 1, {{{0, 0, 0}, CoefficientFunction::gaussian(0.0, 1.0)},
                                         {{0, 1, 0}, CoefficientFunction::gaussian(0.0, 0.5)}});
  for (double k : {4.0, 8.0, 16.0, 1e6}) {
    const auto Tk = mollify(T, k);
    CHECK(Tk.fourier_transform(0.0, {0, 0, 0}) == fourier_transform(T, 0.0, {0, 0, 0}));
  }
  CHECK(mollify(T, 1e9).multiplier(3.0, {100.0, -2.0, 5.0}) == 1.0);
  CHECK(mollify(T, 4.0).multiplier(3.0, {100.0, -2.0, 5.0}) == 0.0);
  CHECK_THROWS_AS(mollify(T, 0.0), DomainError);
}

TEST_CASE("order-0 pushforward shifts the support and ignores the transport rule") {
  const auto w = rindler(1.0);
  const auto a = CoefficientFunction::cosine_power(0.0, 0.5);
  const JetDistribution T(w, 0, {{{0, 0, 0}, a}});
  const auto P = pushforward(T, 0.7, TransportRule::FermiWalker);
  const auto Q = pushforward(T, 0.7, TransportRule::ParallelLab);
  CHECK(P.support().first == doctest::Approx(0.2));
  for (double t : {0.3, 0.7, 1.1}) {
    CHECK(P.coeff({0, 0, 0})(t) == a(t - 0.7));
    CHECK(Q.coeff({0, 0, 0})(t) == a(t - 0.7));
  }
}

TEST_CASE("pushforward composes as a flow where transport commutes with the frame") {
  std::mt19937_64 rng(5);
  const auto f = random_poly_gaussian(rng);
  const auto a = CoefficientFunction::gaussian(0.0, 0.3);
  const auto b = CoefficientFunction::cosine_power(0.1, 0.6);
  for (auto wp : {rindler(1.0), at_rest()}) {
    const JetDistribution T(wp, 1, {{{0, 0, 0}, a}, {{1, 0, 0}, b}, {{0, 0, 1}, a}});
    const auto two = pushforward(pushforward(T, 0.4, TransportRule::FermiWalker), 0.3, TransportRule::FermiWalker);
    const auto one = pushforward(T, 0.7, TransportRule::FermiWalker);
    const cplx x = evaluate_against(two, *f), y = evaluate_against(one, *f);
    CHECK(std::abs(x - y) <= 1e-10 * std::max(1.0, std::abs(y)));
  }
}

TEST_CASE("parallel-lab pushforward of an e1 leg on a rindler curve mixes into order 0") {
  const double acc = 1.0, shift = 0.6;
  const auto w = rindler(acc);
  const auto a = CoefficientFunction::gaussian(0.0, 0.3);
  const JetDistribution T(w, 1, {{{1, 0, 0}, a}});
  const auto P = pushforward(T, shift, TransportRule::ParallelLab);
  for (double t : {0.3, 0.6, 0.9}) {
    CHECK(std::abs(P.coeff({1, 0, 0})(t) - std::cosh(acc * shift) * a(t - shift)) < 1e-12);
    CHECK(std::abs(P.coeff({0, 0, 0})(t) - std::sinh(acc * shift) * a.derivative(t - shift)) < 1e-9);
  }
  // Direct definition: the shifted coefficient differentiating along the lab-constant leg.
  GeneralJet G(w);
  G.add(a.shifted(shift), [w, shift](double tau) { return w->tetrad(TransportRule::FermiWalker, tau - shift).e[1]; });
  std::mt19937_64 rng(8);
  for (int k = 0; k < 5; ++k) {
    const auto f = random_poly_gaussian(rng);
    const cplx x = evaluate_against(G, *f), y = evaluate_against(P, *f);
    CHECK(std::abs(x - y) <= 1e-9 * std::max(1.0, std::abs(x)));
  }
}

TEST_CASE("pushforward rejects leaving the domain and high order on curved paths") {
  const auto w = std::make_shared<const Worldline>(Worldline::rindler(1.0).with_domain(-2.0, 2.0));
  const JetDistribution T(w, 0, {{{0, 0, 0}, CoefficientFunction::cosine_power(0.0, 1.0)}});
  CHECK_THROWS_AS(pushforward(T, 1.5, TransportRule::FermiWalker), DomainError);
  const JetDistribution T2(w, 2, {{{2, 0, 0}, CoefficientFunction::cosine_power(0.0, 1.0)}});
  CHECK_THROWS_AS(pushforward(T2, 0.1, TransportRule::FermiWalker), DomainError);
}

TEST_CASE("jet distribution JSON round trip") {
  const JetDistribution T(rindler(1.0), 1,
                          {{{0, 0, 0}, CoefficientFunction::gaussian(0.1, 0.5)},
                           {{0, 1, 0}, CoefficientFunction::cosine_power(0.0, 1.0, 2.0, 0.0, 6)},
                           {{1, 0, 0}, CoefficientFunction::gaussian(0.0, 0.4).neg_derivative()}});
  const auto back = JetDistribution::from_json(T.to_json());
  CHECK(back.order() == 1);
  CHECK(back.is_real());
  CHECK(back.worldline().id() == T.worldline().id());
  for (double t : {-0.4, 0.0, 0.33}) {
    CHECK(back.coeff({0, 0, 0})(t) == T.coeff({0, 0, 0})(t));
    CHECK(std::abs(back.coeff({1, 0, 0})(t) - T.coeff({1, 0, 0})(t)) < 1e-8);
  }
  auto bad = T.to_json();
  bad["terms"][0]["coeff"]["family"] = "nonsense";
  CHECK_THROWS_AS(JetDistribution::from_json(bad), ConfigError);
}
