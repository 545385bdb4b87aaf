#include <doctest.h>

#include <cmath>
#include <numbers>

#include "lmeasure/causal_core.hpp"
#include "lmeasure/errors.hpp"
#include "lmeasure/model_spaces.hpp"

using namespace lmeasure;
using doctest::Approx;

TEST_CASE("omega normalization") {
  CHECK(omega(1.0) == 1.0);
  CHECK(omega(2.0) == Approx(0.5).epsilon(1e-12));
  CHECK(omega(3.0) == Approx(std::numbers::pi / 12.0).epsilon(1e-12));
  CHECK(omega(4.0) == Approx(std::numbers::pi / 24.0).epsilon(1e-12));
  // non-integer N goes through the Gamma function: pi^{1/4} / (1.5 Gamma(5/4) 2^{1/2})
  const double expected = std::pow(std::numbers::pi, 0.25) / (1.5 * std::tgamma(1.25) * std::sqrt(2.0));
  CHECK(omega(1.5) == Approx(expected).epsilon(1e-12));
  CHECK_THROWS_AS((void)omega(0.0), DomainError);
  CHECK_THROWS_AS((void)omega(-1.0), DomainError);
}

TEST_CASE("rho conventions") {
  const MinkowskiSpace space(2);
  const auto unit = makeDiamond(space, {0, 0}, {1, 0});
  CHECK(unit.tau() == 1.0);
  CHECK(rho(2.0, unit) == Approx(0.5).epsilon(1e-12));
  CHECK(rho(0.0, unit) == 1.0);

  const auto empty = makeDiamond(space, {0, 0}, {0, 1});  // spacelike
  CHECK(empty.empty());
  CHECK(rho(0.0, empty) == 0.0);
  CHECK(rho(2.0, empty) == 0.0);

  const auto degenerate = makeDiamond(space, {0, 0}, {1, 1});  // null
  CHECK_FALSE(degenerate.empty());
  CHECK(rho(1.0, degenerate) == 0.0);
  CHECK(rho(0.0, degenerate) == 1.0);
  CHECK(logRho(1.0, 0.0) == -kInfinity);

  const CausalDiamond infinite({0, 0}, {1, 0}, kInfinity, 1.0);
  CHECK(rho(1.0, infinite) == kInfinity);
  CHECK_THROWS_AS((void)rho(-0.5, unit), DomainError);
}

TEST_CASE("dilated diamonds scale tau and diameter") {
  const MinkowskiSpace space(3);
  const auto J = makeDiamond(space, {0, 0, 0}, {2, 0.5, 0});
  const auto D = J.dilated(3.0);
  CHECK(D.tau() == Approx(3.0 * J.tau()).epsilon(1e-14));
  CHECK(D.diamBound() == Approx(3.0 * J.diamBound()).epsilon(1e-14));
  CHECK(D.q()[0] == 6.0);
  CHECK(std::exp(logRho(3.0, J.tau())) == Approx(rho(3.0, J)).epsilon(1e-12));
}

TEST_CASE("diamond constructor validates") {
  CHECK_THROWS_AS(CausalDiamond({0, 0}, {1, 0}, -1.0, 1.0), DomainError);
  const MinkowskiSpace space(2);
  CHECK_THROWS_AS((void)makeDiamond(space, {0, 0, 0}, {1, 0}), DomainError);
  CHECK(euclideanDistance({0, 0}, {3, 4}) == 5.0);
}
