#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "properties.hpp"

using namespace lmeasure;
using namespace lmeasure::props;

namespace {

void require(const PropertyResult& r) {
  INFO(r.name << ": " << r.violations << "/" << r.cases << " violations, worst excess " << r.worst
               << "; first " << r.firstFailure);
  CHECK(r.cases == kCases);
  CHECK(r.pass());
}

}  // namespace

TEST_CASE("reverse triangle in scaled Minkowski spaces") { require(reverseTriangle(101)); }

TEST_CASE("dyadic partition sums are nonincreasing") { require(partitionMonotonicity(102)); }

TEST_CASE("cover cost scales as a^N under dilation") { require(dilationHomogeneity(103)); }

TEST_CASE("dimension is monotone under inclusion") { require(subsetMonotonicDimension(104)); }

TEST_CASE("Frostman lower bound stays below the cover upper bound") { require(lowerBelowUpper(105)); }

TEST_CASE("rho is homogeneous under dilation of diamonds") {
  require(runProperty("rho dilation", 106, kCases, [](Gen& g, std::string& what) {
    const std::size_t n = g.index(2, 4);
    const MinkowskiSpace space(n);
    const Point p = g.point(n, 1.0);
    const Point q = add(p, g.causalVector(n, 1.0, 0.01, 2.0, 0.99));
    const double a = g.uniform(0.1, 10.0);
    const double N = g.uniform(0.0, 4.0);
    const auto J = makeDiamond(space, p, q);
    const double expected = std::pow(a, N) * rho(N, J);
    const double got = rho(N, J.dilated(a));
    what = "a=" + std::to_string(a) + " N=" + std::to_string(N);
    return std::abs(got - expected) - 1e-12 * expected;
  }));
}

TEST_CASE("boosts preserve tau") {
  require(runProperty("boost invariance", 107, kCases, [](Gen& g, std::string& what) {
    const std::size_t n = g.index(2, 4);
    const double C = g.uniform(1.0, 2.0);
    const MinkowskiSpace space(n, C);
    const Point p = g.point(n, 1.0);
    const Point q = add(p, g.causalVector(n, C, 0.01, 2.0, 0.9));
    const auto L = lorentzBoost(n, g.uniform(-0.9, 0.9), g.index(1, n - 1), C);
    const double t0 = space.timeSep(p, q);
    const double t1 = space.timeSep(applyLinear(L, p), applyLinear(L, q));
    what = "tau " + std::to_string(t0) + " -> " + std::to_string(t1);
    return std::abs(t1 - t0) - 1e-9 * (1.0 + t0);
  }));
}

TEST_CASE("wider cones keep causal pairs causal") {
  require(runProperty("cone widening", 108, kCases, [](Gen& g, std::string& what) {
    const std::size_t n = g.index(2, 4);
    const double C = g.uniform(1.0, 2.0);
    const MinkowskiSpace narrow(n, C);
    const MinkowskiSpace wide(n, C * g.uniform(1.0, 2.0));
    const Point p = g.point(n, 1.0);
    const Point q = add(p, g.causalVector(n, C, 0.0, 1.0));
    what = "C=" + std::to_string(C);
    if (!narrow.causal(p, q)) return -1.0;
    return wide.causal(p, q) && wide.timeSep(p, q) >= narrow.timeSep(p, q) ? -1.0 : 1.0;
  }));
}

TEST_CASE("longest path is superadditive at every node") {
  require(runProperty("graph superadditivity", 109, kCases, [](Gen& g, std::string& what) {
    const ChartMetric metric = g.coin() ? ChartMetric::minkowski(2) : ChartMetric::conformalBump(2, 0.2);
    const ChartBox domain{{0.0, -1.0}, {2.0, 1.0}};
    const double h = g.uniform(0.2, 1.5);
    const Point p{g.uniform(0.0, 2.0 - h), g.uniform(-0.2, 0.2)};
    const Point q{p[0] + h, p[1] + g.uniform(-0.3, 0.3) * h};
    const CausalGraph graph(metric, domain, p, q, 1.5, {6, 3, 1});
    what = metric.name() + " h=" + std::to_string(h);
    if (!graph.connected()) return -1.0;
    double excess = -1.0;
    for (std::size_t i = 0; i < graph.nodeCount(); ++i) {
      const double through = graph.forwardValue(i) + graph.backwardValue(i);
      if (through > -kInfinity) excess = std::max(excess, through - graph.longestPath() - 1e-12);
    }
    return excess;
  }));
}

TEST_CASE("flat time separation lies inside the dp interval") {
  require(runProperty("flat dp bracket", 110, kCases, [](Gen& g, std::string& what) {
    const ChartMetric metric = ChartMetric::minkowski(2);
    const ChartBox domain{{0.0, -1.0}, {2.0, 1.0}};
    const double h = g.uniform(0.2, 1.5);
    const Point p{g.uniform(0.0, 2.0 - h), g.uniform(-0.2, 0.2)};
    const Point q{p[0] + h, p[1] + g.uniform(-0.5, 0.5) * h};
    const auto iv = dpTimeSeparation(metric, domain, p, q, 1.5, {6, 3, 1});
    const double tau = std::sqrt(h * h - (q[1] - p[1]) * (q[1] - p[1]));
    what = "lo=" + std::to_string(iv.lo) + " tau=" + std::to_string(tau) + " hi=" + std::to_string(iv.hi);
    return std::max(iv.lo - tau, tau - iv.hi) - 1e-9;
  }));
}

TEST_CASE("verified sandwich bounds the metric on sampled vectors") {
  // for eta_{1/C} < g < eta_C: g(v,v) < 0 inside the narrow cone and > 0 outside the wide one
  const ChartMetric metric = ChartMetric::conformalBump(2, 0.2);
  const ChartBox domain{{0.0, -1.0}, {2.0, 1.0}};
  const double C = 1.5;
  REQUIRE(verifyConeSandwich(metric, domain, C, 21).verified);
  require(runProperty("chart sandwich", 111, kCases, [&](Gen& g, std::string& what) {
    const Point x{g.uniform(0.0, 2.0), g.uniform(-1.0, 1.0)};
    const double t = 1.0;
    const double inside = g.uniform(0.0, 0.999) / C;
    const double outside = C * g.uniform(1.001, 3.0);
    const Point vin{t, g.coin() ? inside : -inside};
    const Point vout{t, g.coin() ? outside : -outside};
    what = "x=(" + std::to_string(x[0]) + "," + std::to_string(x[1]) + ")";
    return metric.quad(x, vin) < 0.0 && metric.quad(x, vout) > 0.0 ? -1.0 : 1.0;
  }));
}

TEST_CASE("enlarged diamonds contain the original one") {
  require(runProperty("enlargement containment", 112, kCases, [](Gen& g, std::string& what) {
    const double C = g.uniform(1.0, 2.0);
    const std::size_t n = g.index(2, 4);
    const MinkowskiSpace space(n, C);
    const double t = g.uniform(0.0, 1.0);
    Point p = g.point(n, 1.0);
    p[0] = t;
    Point q = p;
    q[0] = t + g.uniform(0.01, 1.0);
    const auto e = enlargeDiamond(p, q, enlargementFactor(C));
    what = "C=" + std::to_string(C);
    const bool ok = space.causal(e.pHat, p) && space.causal(q, e.qHat) &&
                    space.timeSep(e.pHat, e.qHat) >= space.timeSep(p, q);
    return ok ? -1.0 : 1.0;
  }));
}

TEST_CASE("sK satisfies the double-angle identity") {
  require(runProperty("sK double angle", 113, kCases, [](Gen& g, std::string& what) {
    const double K = g.uniform(-4.0, 4.0);
    const double cap = K > 0.0 ? 3.14159 / (2.0 * std::sqrt(K)) : 2.0;
    const double t = g.uniform(0.0, cap);
    const double lhs = sK(K, 2.0 * t);
    const double rhs = 2.0 * sK(K, t) * sKPrime(K, t);
    what = "K=" + std::to_string(K) + " t=" + std::to_string(t);
    return std::abs(lhs - rhs) - 1e-12 * (1.0 + std::abs(lhs));
  }));
}

TEST_CASE("doubling constant is continuous at K = 0 and monotone in K") {
  require(runProperty("tcd continuity", 114, kCases, [](Gen& g, std::string& what) {
    const double N = g.uniform(1.0, 4.0);
    const double R = g.uniform(0.1, 3.0);
    const double K1 = -g.uniform(0.0, 3.0);
    const double K2 = K1 * g.uniform(0.0, 1.0);
    const double flat = std::pow(2.0, N + 1.0);
    const double tiny = tcdDoublingConstant(-1e-12, N, R);
    what = "N=" + std::to_string(N) + " K1=" + std::to_string(K1) + " K2=" + std::to_string(K2);
    const double jump = std::abs(tiny / flat - 1.0) - 1e-9;
    const double order = tcdDoublingConstant(K2, N, R) - tcdDoublingConstant(K1, N, R) - 1e-12 * flat;
    return std::max(jump, order);
  }));
}

TEST_CASE("Bishop-Gromov ratio is a monotone fraction") {
  require(runProperty("bg ratio", 115, kCases, [](Gen& g, std::string& what) {
    const double K = g.uniform(-3.0, 3.0);
    const double N = g.uniform(1.0, 4.0);
    const double Rmax = K > 0.0 ? 0.9 * 3.14159 * std::sqrt(N / K) : 2.0;
    const double R = g.uniform(0.05, std::min(Rmax, 2.0));
    const double r2 = R * g.uniform(0.01, 1.0);
    const double r1 = r2 * g.uniform(0.01, 1.0);
    const double b1 = bgRatioBound(K, N, r1, R);
    const double b2 = bgRatioBound(K, N, r2, R);
    what = "K=" + std::to_string(K) + " N=" + std::to_string(N) + " r1=" + std::to_string(r1) +
           " r2=" + std::to_string(r2) + " R=" + std::to_string(R);
    return std::max({-b1, b1 - b2 - 1e-10, b2 - 1.0 - 1e-10});
  }));
}
