#include <doctest.h>

#include <cmath>
#include <sstream>

#include "lmeasure/errors.hpp"
#include "lmeasure/measure.hpp"

using namespace lmeasure;
using doctest::Approx;

namespace {

SubspaceCube spatialCube(const MinkowskiSpace& space, std::size_t k) {
  std::vector<Point> basis;
  for (std::size_t j = 0; j < k; ++j) {
    Point e(space.dimension(), 0.0);
    e[j + 1] = 1.0;
    basis.push_back(e);
  }
  return {LinearSubspace(space, basis), Point(space.dimension(), 0.0), 1.0};
}

}  // namespace

TEST_CASE("generator parsing") {
  CHECK((parseGenerator("grid").kind == GeneratorKind::grid));
  CHECK(parseGenerator("null").epsilon == 0.5);
  CHECK(parseGenerator("null:0.125").epsilon == 0.125);
  CHECK(parseGenerator("null:0.25").id() == "null:0.25");
  CHECK_THROWS_AS((void)parseGenerator("hexagon"), ConfigError);
  CHECK_THROWS_AS((void)parseGenerator("null:abc"), ConfigError);
  CHECK_THROWS_AS((void)parseGenerator("null:1.5"), DomainError);
}

TEST_CASE("applicability and wrong generators") {
  const MinkowskiSpace space(3);
  const RegionSpec box = BoxRegion{{0, 0, 0}, {1, 1, 1}};
  CHECK(isApplicable(parseGenerator("box"), box));
  CHECK_FALSE(isApplicable(parseGenerator("grid"), box));
  CHECK_THROWS_AS((void)buildCover(space, box, parseGenerator("chain"), 0.25), WrongGeneratorError);
  const RegionSpec nullCube = SubspaceCube{LinearSubspace(space, {{1, 1, 0}, {0, 0, 1}}), {0, 0, 0}, 1.0};
  CHECK_THROWS_AS((void)buildCover(space, nullCube, parseGenerator("grid"), 0.25), WrongGeneratorError);
}

TEST_CASE("unverified covers are refused") {
  const MinkowskiSpace space(2);
  const Cover partial("grid", 1.0, {{makeDiamond(space, {0, 0}, {1, 0}), 1.0}}, 0.5);
  CHECK_FALSE(partial.verified());
  CHECK_THROWS_AS((void)coverCost(partial, 1.0), RefusalError);
  const Cover full("grid", 1.0, {{makeDiamond(space, {0, 0}, {1, 0}), 3.0}}, 1.0);
  CHECK(coverCost(full, 2.0) == Approx(1.5));
  CHECK(full.diamondCount() == 3.0);
}

TEST_CASE("point clouds have counting measure at N = 0") {
  const MinkowskiSpace space(2);
  PointCloudRegion cloud{{{0, 0}, {0.5, 0.1}, {1, 2}, {0.5, 0.1}}};
  const auto cover = pointCloudCover(space, cloud, 0.1);
  CHECK(coverCost(cover, 0.0) == 3.0);
  CHECK(coverCost(cover, 1.0) == 0.0);
}

TEST_CASE("grid cover of a spacelike cube") {
  const MinkowskiSpace space(3);
  const auto cube = spatialCube(space, 2);
  const Cover c = gridCoverCells(space, cube, 4);
  CHECK(c.verified());
  CHECK(c.diamondCount() == 16.0);
  // each cell of side 1/2 sits in a diamond of height sqrt(2)/2; rho_2 = 0.5 tau^2
  CHECK(coverCost(c, 2.0) == Approx(16.0 * 0.5 * 0.5).epsilon(1e-12));
}

TEST_CASE("null cover plan") {
  const MinkowskiSpace space(3);
  const SubspaceCube cube{LinearSubspace(space, {{1, 1, 0}, {0, 0, 1}}), {0, 0, 0}, 1.0};
  const auto plan = planNullCover(space, cube, 0.125, 0.5);
  CHECK(plan.t == Approx(std::pow(0.125, 3.0)).epsilon(1e-12));  // delta^{-1 + 2/eps}
  CHECK(plan.diameter <= 0.125 * (1.0 + 1e-12));
  CHECK(plan.tau == Approx(std::sqrt(plan.t * (2.0 * plan.a * plan.sigma + plan.t))).epsilon(1e-12));
}

TEST_CASE("geometric grids") {
  const auto g = geometricGrid(0.125, 0.5, 6);
  REQUIRE(g.size() == 6);
  CHECK(g.front() == 0.125);
  CHECK(g.back() == std::ldexp(1.0, -8));
  CHECK_THROWS_AS((void)geometricGrid(0.1, 1.5, 3), DomainError);
}

TEST_CASE("envelope is a running minimum toward coarse scales") {
  ScalingSeries s;
  s.entries = {{"a", 0.5, 1.0, 4.0, true}, {"a", 0.25, 1.0, 3.0, true}, {"a", 0.125, 1.0, 5.0, true},
               {"b", 0.25, 1.0, 2.5, false}};
  const auto env = monotoneEnvelope(s);
  REQUIRE(env.entries.size() == 3);
  CHECK(env.entries[0].delta == 0.5);
  CHECK(env.entries[0].cost == 3.0);
  CHECK(env.entries[1].cost == 3.0);
  CHECK(env.entries[2].cost == 5.0);
  std::ostringstream csv;
  env.writeCsv(csv);
  CHECK(csv.str().find("envelope") != std::string::npos);
}

TEST_CASE("dimension estimates") {
  const MinkowskiSpace space(3);
  const auto grid = geometricGrid(0.125, 0.5, 5);
  const std::vector<double> Ns{0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
  const std::vector<GeneratorSpec> gens{parseGenerator("grid")};
  const RegionSpec cube = spatialCube(space, 2);
  const auto est = estimateDimension(space, cube, gens, grid, Ns);
  CHECK(est.value == Approx(2.0).epsilon(0.075));
  CHECK(est.bracketLo <= est.value);
  CHECK(est.value <= est.bracketHi);
  const std::vector<double> tooShort{0.5, 0.25};
  CHECK_THROWS_AS((void)estimateDimension(space, cube, gens, tooShort, Ns), DomainError);
}

TEST_CASE("Frostman lower bound on a unit segment") {
  const MinkowskiSpace space(2);
  const RegionSpec seg = CurveRegion{PiecewiseLinearCurve(space, {{0, 0}, {1, 0}})};
  const auto mass = naturalMassDistribution(space, seg, 0.1);
  CHECK(mass->totalMass() == Approx(1.0));
  const double lo = lowerMeasure(space, seg, 1.0, *mass, 2000, 1);
  CHECK(lo == Approx(1.0).epsilon(0.05));
  CHECK(lowerMeasure(space, seg, 1.0, *mass, 2000, 1) == lo);  // seeded
}

TEST_CASE("ball helpers") {
  CHECK(unitBallVolume(2.0) == Approx(M_PI));
  CHECK(unitBallVolume(3.0) == Approx(4.0 * M_PI / 3.0));
  CHECK(ballLensVolume(2, 1.0, 1.0, 0.0) == Approx(M_PI));
  CHECK(ballLensVolume(2, 1.0, 1.0, 2.5) == 0.0);
  // two unit disks at distance 1: 2 pi/3 - sqrt(3)/2
  CHECK(ballLensVolume(2, 1.0, 1.0, 1.0) == Approx(2.0 * M_PI / 3.0 - std::sqrt(3.0) / 2.0).epsilon(1e-9));
}
