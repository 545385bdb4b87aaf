// Randomized invariant checks shared by the property tests and the acceptance binary.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "lmeasure/chart.hpp"
#include "lmeasure/curvature.hpp"
#include "lmeasure/curve_length.hpp"
#include "lmeasure/measure.hpp"
#include "lmeasure/model_spaces.hpp"
#include "lmeasure/regions.hpp"

namespace lmeasure::props {

inline constexpr std::size_t kCases = 1000;

struct PropertyResult {
  std::string name;
  std::size_t cases = 0;
  std::size_t violations = 0;
  double worst = 0.0;  // largest excess over the tolerance, 0 if none
  std::string firstFailure;

  [[nodiscard]] bool pass() const { return cases > 0 && violations == 0; }
};

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  std::size_t index(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
  }
  bool coin(double p = 0.5) { return uniform(0.0, 1.0) < p; }

  Point point(std::size_t n, double half) {
    Point p(n);
    for (auto& x : p) x = uniform(-half, half);
    return p;
  }

  // unit vector in R^d
  std::vector<double> direction(std::size_t d) {
    std::normal_distribution<double> normal;
    std::vector<double> u(d);
    double len = 0.0;
    while (len < 1e-6) {
      len = 0.0;
      for (auto& x : u) {
        x = normal(rng_);
        len += x * x;
      }
      len = std::sqrt(len);
    }
    for (auto& x : u) x /= len;
    return u;
  }

  // future-directed eta_C vector with time component in [tMin, tMax]; speed fraction in [0, maxSpeed]
  Point causalVector(std::size_t n, double C, double tMin, double tMax, double maxSpeed = 1.0) {
    const double t = uniform(tMin, tMax);
    const double s = C * t * uniform(0.0, maxSpeed);
    Point v(n);
    v[0] = t;
    const auto u = direction(n - 1);
    for (std::size_t i = 1; i < n; ++i) v[i] = s * u[i - 1];
    return v;
  }

 private:
  std::mt19937_64 rng_;
};

inline Point add(const Point& a, const Point& b) {
  Point c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
  return c;
}

inline double norm(const Point& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Runs `check` on kCases generated cases; check returns the excess over tolerance (<= 0 is a pass).
inline PropertyResult runProperty(const std::string& name, std::uint64_t seed, std::size_t cases,
                                  const std::function<double(Gen&, std::string&)>& check) {
  PropertyResult res{name, cases};
  Gen gen(seed);
  for (std::size_t i = 0; i < cases; ++i) {
    std::string what;
    double excess = 0.0;
    try {
      excess = check(gen, what);
    } catch (const std::exception& e) {
      what += std::string(" threw: ") + e.what();
      excess = kInfinity;
    }
    if (excess > 0.0 || std::isnan(excess)) {
      if (res.violations == 0) res.firstFailure = "case " + std::to_string(i) + ": " + what;
      ++res.violations;
      res.worst = std::max(res.worst, std::isnan(excess) ? kInfinity : excess);
    }
  }
  return res;
}

// Spacelike cube through a random point, boosted along a random axis.
inline SubspaceCube randomSpacelikeCube(Gen& g, const MinkowskiSpace& space, std::size_t k, double half) {
  const std::size_t n = space.dimension();
  const auto boost = lorentzBoost(n, g.uniform(-0.6, 0.6), g.index(1, n - 1), space.coneScale());
  std::vector<Point> basis;
  for (std::size_t j = 0; j < k; ++j) {
    Point e(n, 0.0);
    e[j + 1] = 1.0;
    basis.push_back(applyLinear(boost, e));
  }
  return {LinearSubspace(space, basis), g.point(n, 1.0), half};
}

// tau(x,z) >= tau(x,y) + tau(y,z) for x <= y <= z.
inline PropertyResult reverseTriangle(std::uint64_t seed, std::size_t cases = kCases) {
  return runProperty("reverse triangle", seed, cases, [](Gen& g, std::string& what) {
    const std::size_t n = g.index(2, 4);
    const MinkowskiSpace space(n, g.uniform(1.0, 2.0));
    const Point x = g.point(n, 2.0);
    const Point v1 = g.causalVector(n, space.coneScale(), 0.0, 1.5, g.coin(0.2) ? 1.0 : 0.999);
    const Point v2 = g.causalVector(n, space.coneScale(), 0.0, 1.5);
    const Point y = add(x, v1);
    const Point z = add(y, v2);
    const double lhs = space.timeSep(x, z);
    const double rhs = space.timeSep(x, y) + space.timeSep(y, z);
    what = "n=" + std::to_string(n) + " lhs=" + std::to_string(lhs) + " rhs=" + std::to_string(rhs);
    return rhs - lhs - 1e-9 * (norm(v1) + norm(v2) + 1.0);
  });
}

// Random future polygon; timelike legs unless `allowNull`.
inline PiecewiseLinearCurve randomPolygon(Gen& g, std::size_t n, bool allowNull) {
  const MinkowskiSpace space(n);
  std::vector<Point> vs{g.point(n, 1.0)};
  const std::size_t legs = g.index(1, 7);
  for (std::size_t i = 0; i < legs; ++i) {
    Point v;
    if (allowNull && g.coin(0.3)) {
      // axis-aligned null leg, exact in floating point
      const double t = g.uniform(0.05, 0.5);
      v.assign(n, 0.0);
      v[0] = t;
      v[g.index(1, n - 1)] = g.coin() ? t : -t;
    } else {
      v = g.causalVector(n, 1.0, 0.05, 0.5, 0.95);
    }
    vs.push_back(add(vs.back(), v));
  }
  return {space, vs};
}

// Dyadic refinement never increases the partition sum.
inline PropertyResult partitionMonotonicity(std::uint64_t seed, std::size_t cases = kCases) {
  return runProperty("partition refinement monotonicity", seed, cases, [](Gen& g, std::string& what) {
    const auto curve = randomPolygon(g, g.index(2, 3), true);
    const auto trace = tauLengthTrace(curve, {1e-6, 12});
    double excess = -1.0;
    for (std::size_t i = 1; i < trace.levels.size(); ++i) {
      const double prev = trace.levels[i - 1].sum;
      const double d = trace.levels[i].sum - prev - 1e-12 * std::max(1.0, prev);
      if (d > excess) {
        excess = d;
        what = "level " + std::to_string(i) + " sum " + std::to_string(trace.levels[i].sum) + " > " +
               std::to_string(prev);
      }
    }
    return excess;
  });
}

// cost(a J) = a^N cost(J) for covers of point clouds, spacelike cubes and boxes.
inline PropertyResult dilationHomogeneity(std::uint64_t seed, std::size_t cases = kCases) {
  return runProperty("cover-cost dilation homogeneity", seed, cases, [](Gen& g, std::string& what) {
    const double a = std::exp(g.uniform(std::log(0.1), std::log(10.0)));
    const double N = g.uniform(0.0, 4.0);
    const CoverageOptions cov{256};
    const std::size_t kind = g.index(0, 2);
    const std::size_t n = g.index(2, 3);
    const MinkowskiSpace space(n);
    Cover cover = [&] {
      if (kind == 0) {
        PointCloudRegion cloud;
        const std::size_t m = g.index(1, 20);
        for (std::size_t i = 0; i < m; ++i) cloud.points.push_back(g.point(n, 1.0));
        return pointCloudCover(space, cloud, g.uniform(0.01, 0.5));
      }
      if (kind == 1) {
        const auto cube = randomSpacelikeCube(g, space, g.index(1, n - 1), g.uniform(0.2, 1.0));
        return gridCoverCells(space, cube, g.index(1, 6), cov);
      }
      BoxRegion box{g.point(n, 1.0), {}};
      for (double x : box.lower) box.upper.push_back(x + g.uniform(0.2, 1.0));
      return boxCover(space, box, g.uniform(0.2, 0.6), cov);
    }();
    const double base = coverCost(cover, N);
    const double scaled = coverCost(cover.dilated(a), N);
    const double expected = std::pow(a, N) * base;
    what = "kind=" + std::to_string(kind) + " a=" + std::to_string(a) + " N=" + std::to_string(N);
    return std::abs(scaled - expected) - 1e-12 * std::max(1e-300, std::abs(expected)) * 10.0;
  });
}

// A subset never has larger estimated dimension, up to the estimator tolerance.
inline PropertyResult subsetMonotonicDimension(std::uint64_t seed, std::size_t cases = kCases,
                                               double tol = 0.15) {
  return runProperty("subset-monotonic dimension", seed, cases, [tol](Gen& g, std::string& what) {
    const MinkowskiSpace space(3);
    const std::vector<double> deltas = geometricGrid(0.25, 0.5, 5);
    const std::vector<double> NGrid{0.0, 0.5, 1.0, 1.5, 2.0, 2.5};
    EstimateOptions opts;
    opts.coverage.samples = 256;
    const std::vector<GeneratorSpec> grid{parseGenerator("grid")};
    const std::vector<GeneratorSpec> points{parseGenerator("points")};
    const std::size_t kBig = g.index(1, 2);
    const SubspaceCube big = randomSpacelikeCube(g, space, kBig, g.uniform(0.5, 1.0));
    const std::size_t kind = g.index(0, 2);
    RegionSpec small = PointCloudRegion{};
    std::vector<GeneratorSpec> smallGens = grid;
    if (kind == 0) {
      // finite subset
      PointCloudRegion cloud;
      const std::size_t m = g.index(1, 8);
      for (std::size_t i = 0; i < m; ++i) {
        std::vector<double> y(kBig);
        for (auto& c : y) c = g.uniform(-big.halfSide, big.halfSide);
        cloud.points.push_back(big.pointAt(y));
      }
      small = cloud;
      smallGens = points;
    } else if (kind == 1) {
      // concentric subcube
      small = SubspaceCube{big.subspace, big.center, big.halfSide * g.uniform(0.3, 1.0)};
    } else {
      // lower-dimensional face direction through the centre
      const std::size_t keep = g.index(0, kBig - 1);
      small = SubspaceCube{LinearSubspace(space, {big.subspace.basis()[keep]}), big.center,
                           big.halfSide * g.uniform(0.3, 1.0)};
    }
    const double dSmall = estimateDimension(space, small, smallGens, deltas, NGrid, opts).value;
    const double dBig = estimateDimension(space, big, grid, deltas, NGrid, opts).value;
    what = "kind=" + std::to_string(kind) + " small=" + std::to_string(dSmall) + " big=" + std::to_string(dBig);
    return dSmall - dBig - tol;
  });
}

// Frostman lower bound never exceeds the cover upper bound at scales below the sampler's.
inline PropertyResult lowerBelowUpper(std::uint64_t seed, std::size_t cases = kCases, double slack = 0.1) {
  return runProperty("lower <= upper", seed, cases, [slack](Gen& g, std::string& what) {
    const std::size_t n = g.index(2, 3);
    const MinkowskiSpace space(n);
    const double maxScale = 0.25;
    const double delta = maxScale * g.uniform(0.3, 1.0);
    const CoverageOptions cov{256};
    RegionSpec region = PointCloudRegion{};
    double N = 1.0;
    std::vector<GeneratorSpec> gens;
    if (n == 3 && g.coin(0.7)) {
      const std::size_t k = g.index(1, 2);
      region = randomSpacelikeCube(g, space, k, g.uniform(0.3, 1.0));
      N = static_cast<double>(k);
      gens = {parseGenerator("grid")};
    } else {
      const Point a = g.point(n, 1.0);
      const Point b = add(a, g.causalVector(n, 1.0, 0.3, 1.0, 0.8));
      region = CurveRegion{PiecewiseLinearCurve(space, {a, b})};
      gens = {parseGenerator("chain")};
    }
    const auto mass = naturalMassDistribution(space, region, maxScale);
    const double lo = lowerMeasure(space, region, N, *mass, 256, g.index(1, 1u << 30));
    const double hi = upperMeasure(space, region, N, delta, gens, cov);
    what = std::string(regionKind(region)) + " N=" + std::to_string(N) + " lower=" + std::to_string(lo) +
           " upper=" + std::to_string(hi);
    return lo - hi * (1.0 + slack);
  });
}

inline std::vector<PropertyResult> acceptanceProperties(std::uint64_t seed) {
  return {reverseTriangle(seed), partitionMonotonicity(seed + 1), dilationHomogeneity(seed + 2),
          subsetMonotonicDimension(seed + 3), lowerBelowUpper(seed + 4)};
}

}  // namespace lmeasure::props
