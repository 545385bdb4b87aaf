#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "lmeasure/curvature.hpp"
#include "lmeasure/errors.hpp"

using namespace lmeasure;
using doctest::Approx;

TEST_CASE("comparison functions") {
  CHECK(sK(0.0, 0.7) == 0.7);
  CHECK(sK(4.0, std::numbers::pi / 4.0) == Approx(0.5).epsilon(1e-15));
  CHECK(sK(-1.0, 1.0) == Approx(std::sinh(1.0)).epsilon(1e-15));
  CHECK(sKPrime(1.0, 0.3) == Approx(std::cos(0.3)));
  CHECK(sKPrime(-4.0, 0.3) == Approx(std::cosh(0.6)));
}

TEST_CASE("Bishop-Gromov ratios against closed forms") {
  CHECK(bgRatioBound(0.0, 3.0, 1.0, 2.0) == Approx(1.0 / 16.0).epsilon(1e-12));
  // K/N = -1: the antiderivative of sinh^3 is cosh^3/3 - cosh
  const auto Fh = [](double x) { return std::pow(std::cosh(x), 3) / 3.0 - std::cosh(x); };
  CHECK(bgRatioBound(-3.0, 3.0, 1.0, 2.0) == Approx((Fh(1) - Fh(0)) / (Fh(2) - Fh(0))).epsilon(1e-10));
  CHECK(bgRatioBound(-3.0, 3.0, 1.0, 2.0) == Approx(0.02376910231036199).epsilon(1e-10));
  const auto Fs = [](double x) { return std::pow(std::cos(x), 3) / 3.0 - std::cos(x); };
  CHECK(bgRatioBound(3.0, 3.0, 1.0, 2.0) == Approx((Fs(1) - Fs(0)) / (Fs(2) - Fs(0))).epsilon(1e-10));
  CHECK(bgRatioBound(1.0, 2.0, 0.5, 0.5) == 1.0);
  CHECK_THROWS_AS((void)bgRatioBound(0.0, 3.0, 2.0, 1.0), DomainError);
  CHECK_THROWS_AS((void)bgRatioBound(0.0, 0.5, 1.0, 2.0), DomainError);
  CHECK_THROWS_AS((void)comparisonVolume(1.0, 1.0, 4.0), DomainError);  // beyond pi
}

TEST_CASE("doubling constants") {
  for (double N : {1.0, 2.0, 3.0}) CHECK(tcdDoublingConstant(0.0, N, 1.0) == std::pow(2.0, N + 1.0));
  CHECK(tcdDoublingConstant(2.0, 3.0, std::numeric_limits<double>::infinity()) == 16.0);
  CHECK(tcdDoublingConstant(-3.0, 3.0, 1.0) == Approx(16.0 * std::pow(std::cosh(1.0), 3)).epsilon(1e-14));
  CHECK(tcdDoublingConstant(-3.0, 3.0, 1.0) == Approx(58.78761560089398).epsilon(1e-14));
  CHECK_THROWS_AS((void)tcdDoublingConstant(-1.0, 2.0, std::numeric_limits<double>::infinity()), DomainError);
  CHECK_THROWS_AS((void)tcdDoublingConstant(0.0, 2.0, 0.0), DomainError);
  CHECK(CurvatureParams{4.0, 2.0, 1.0}.radiusCap() == Approx(std::numbers::pi / std::sqrt(2.0)));
}

TEST_CASE("lattice rows and csv") {
  const auto row = curvatureRow(0.0, 2.0, 1.0, 0.5);
  CHECK(row.L == 8.0);
  CHECK(row.ratio == Approx(0.125).epsilon(1e-12));
  CHECK(row.holds);
  std::ostringstream out;
  const std::vector<CurvatureRow> rows{row};
  writeCurvatureCsv(out, rows);
  CHECK(out.str().rfind("K,N,Rstar,r,L,ratio,holds\n", 0) == 0);
}

TEST_CASE("monotonicity probe of solid cones") {
  const std::vector<double> radii{0.25, 0.5, 1.0, 2.0};
  const auto equal = bgMonotonicityProbe(3, 2.0, radii);
  CHECK(equal.exponent == 0.0);
  CHECK(equal.nonincreasing);
  CHECK(equal.rows.front().profile == Approx(equal.rows.back().profile).epsilon(1e-9));
  CHECK(bgMonotonicityProbe(3, 1.0, radii).nonincreasing == false);
  CHECK(bgMonotonicityProbe(3, 4.0, radii).nonincreasing);
}

TEST_CASE("dimension consistency") {
  CHECK((parseSyntheticBound("wTCD") == SyntheticBound::wTCD));
  CHECK((parseSyntheticBound("TMCP") == SyntheticBound::TMCP));
  CHECK_THROWS((void)parseSyntheticBound("CD"));
  CHECK(dimensionConsistencyAssert(4, 3, SyntheticBound::wTCD));
  CHECK_FALSE(dimensionConsistencyAssert(4, 3, SyntheticBound::TMCP));
  CHECK(dimensionConsistencyAssert(3, 3, SyntheticBound::TMCP));
}
