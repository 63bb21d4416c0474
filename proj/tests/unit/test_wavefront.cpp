#include <doctest.h>

#include "wlfield/wavefront.hpp"

using namespace wlf;

namespace {
WorldlinePtr at_rest() { return std::make_shared<const Worldline>(Worldline::inertial()); }
}  // namespace

TEST_CASE("order-1 jet grows linearly along spatial covectors and decays along time") {
  const JetDistribution T(at_rest(), 1, {{{0, 0, 0}, CoefficientFunction::gaussian(0.0, 1.0)},
                                         {{1, 0, 0}, CoefficientFunction::gaussian(0.0, 1.0)}});
  const auto spatial = wavefront_scan(T, {{0.0, 1.0, 0.0, 0.0}});
  CHECK(spatial[0].singular);
  CHECK(spatial[0].slope == doctest::Approx(1.0).epsilon(1e-3));
  const auto timelike = wavefront_scan(T, {{1.0, 0.0, 0.0, 0.0}});
  CHECK_FALSE(timelike[0].singular);
}

TEST_CASE("spatial directions are singular with slope equal to the order") {
  std::mt19937_64 rng(1);
  const auto dirs = spatial_directions(40, rng);
  for (int l = 0; l <= 3; ++l) {
    JetDistribution::Terms terms{{{0, 0, 0}, CoefficientFunction::gaussian(0.0, 0.5)}};
    for (const auto& a : multi_indices(l))
      if (a.order() == l) terms.emplace(a, CoefficientFunction::gaussian(0.2, 0.7));
    const JetDistribution T(at_rest(), l, terms);
    for (const auto& s : wavefront_scan(T, dirs)) {
      CHECK(s.singular);
      CHECK(std::abs(s.slope - l) < 0.3);
    }
    for (const auto& s : wavefront_scan(T, timelike_directions(40, rng))) CHECK_FALSE(s.singular);
  }
}

TEST_CASE("smooth product function has no singular directions") {
  const auto g = CoefficientFunction::gaussian(0.0, 0.6);
  const auto f = product_function_transform({g, g, g, CoefficientFunction::gaussian(0.3, 0.4)});
  std::mt19937_64 rng(2);
  auto dirs = spatial_directions(20, rng);
  const auto t = timelike_directions(20, rng);
  dirs.insert(dirs.end(), t.begin(), t.end());
  for (const auto& s : wavefront_scan(f, dirs)) CHECK_FALSE(s.singular);
}

TEST_CASE("scan rejects radii spanning fewer than three decades") {
  ScanOptions opt;
  opt.decades = 2.0;
  CHECK_THROWS_AS(geometric_radii(opt), DomainError);
  opt.decades = 3.0;
  opt.per_decade = 4;
  CHECK_THROWS_AS(geometric_radii(opt), DomainError);
}

TEST_CASE("samples below the noise floor are flagged") {
  const JetDistribution T(at_rest(), 0, {{{0, 0, 0}, CoefficientFunction::gaussian(0.0, 1.0)}});
  const auto s = wavefront_scan(T, {{1.0, 0.0, 0.0, 0.0}, {0.0, 1.0, 0.0, 0.0}});
  CHECK(s[0].noise);
  CHECK(std::isinf(s[0].slope));
  CHECK_FALSE(s[1].noise);
  CHECK_FALSE(s[0].singular);
}
