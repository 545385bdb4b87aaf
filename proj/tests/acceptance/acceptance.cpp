// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "lmeasure/chart.hpp"
#include "lmeasure/curvature.hpp"
#include "lmeasure/curve_length.hpp"
#include "lmeasure/experiment.hpp"
#include "lmeasure/measure.hpp"
#include "properties.hpp"

using namespace lmeasure;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Report {
 public:
  void add(int id, const std::string& title, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ostringstream line;
    line.precision(4);
    line << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << title << ": " << o.detail << " (" << secs
         << " s)";
    std::cout << line.str() << std::endl;
    failures_ += o.pass ? 0 : 1;
  }

  [[nodiscard]] int failures() const { return failures_; }

 private:
  int failures_ = 0;
};

std::string num(double x) {
  std::ostringstream s;
  s.precision(6);
  s << x;
  return s.str();
}

bool relClose(double a, double b, double tol) { return std::abs(a - b) <= tol * std::abs(b); }

Point onAxis(std::size_t n, double t) {
  Point p(n, 0.0);
  p[0] = t;
  return p;
}

SubspaceCube spatialCube(const MinkowskiSpace& space, std::size_t k) {
  std::vector<Point> basis;
  for (std::size_t j = 0; j < k; ++j) {
    Point e(space.dimension(), 0.0);
    e[j + 1] = 1.0;
    basis.push_back(e);
  }
  return {LinearSubspace(space, basis), Point(space.dimension(), 0.0), 1.0};
}

// Runs a shipped suite config and returns its record.
ResultRecord suiteRecord(const std::string& suite, const std::string& file) {
  return runExperiment(loadConfig(std::filesystem::path(LMEASURE_SUITE_DIR) / suite / file));
}

std::string criteriaSummary(const ResultRecord& rec) {
  std::string s;
  for (const auto& c : rec.criteria) {
    if (!s.empty()) s += ", ";
    s += c.name + "=" + num(c.value) + (c.pass ? "" : " (fail)");
  }
  return s;
}

const std::vector<double> kDeltas = geometricGrid(0.125, 0.5, 6);  // 2^-3 .. 2^-8

std::vector<double> NGrid(double hi) {
  std::vector<double> g;
  for (double N = 0.0; N <= hi + 1e-9; N += 0.25) g.push_back(N);
  return g;
}

}  // namespace

int main() {
  Report report;

  report.add(1, "omega normalization", [] {
    const bool ok = omega(1.0) == 1.0 && relClose(omega(2.0), 0.5, 1e-12) &&
                    relClose(omega(4.0), std::numbers::pi / 24.0, 1e-12);
    return Outcome{ok, "omega1=" + num(omega(1.0)) + " omega2=" + num(omega(2.0)) + " omega4=" + num(omega(4.0))};
  });

  report.add(2, "Minkowski diamond volume law", [] {
    double worst = 0.0;
    for (std::size_t n : {2U, 3U, 4U}) {
      const MinkowskiSpace space(n);
      for (double tau : {0.5, 1.0, 2.0}) {
        const double v = sampledDiamondVolume(space, onAxis(n, 0.0), onAxis(n, tau), 1000000, 11 + n);
        worst = std::max(worst, std::abs(v / (omega(static_cast<double>(n)) * std::pow(tau, n)) - 1.0));
      }
    }
    return Outcome{worst < 0.01, "worst relative error " + num(worst) + " over n=2,3,4 and 3 heights"};
  });

  report.add(3, "Lorentz invariance under a v=0.6 boost", [] {
    double worst = 0.0;
    for (std::size_t n : {2U, 3U, 4U}) {
      const MinkowskiSpace space(n);
      const auto L = lorentzBoost(n, 0.6, 1);
      Point q = onAxis(n, 1.3);
      q[1] = 0.4;
      const auto J = makeDiamond(space, onAxis(n, 0.0), q);
      const auto B = makeDiamond(space, applyLinear(L, J.p()), applyLinear(L, J.q()));
      worst = std::max(worst, std::abs(B.tau() / J.tau() - 1.0));
      for (double N : {1.0, 2.0, 3.0, 4.0}) worst = std::max(worst, std::abs(rho(N, B) / rho(N, J) - 1.0));
    }
    return Outcome{worst <= 1e-12, "max relative change " + num(worst)};
  });

  report.add(4, "dimension of Minkowski boxes", [] {
    const std::vector<GeneratorSpec> box{parseGenerator("box")};
    const MinkowskiSpace m2(2);
    const MinkowskiSpace m3(3);
    const double d2 = estimateDimension(m2, BoxRegion{{0, 0}, {1, 1}}, box, kDeltas, NGrid(3.0)).value;
    const double d3 = estimateDimension(m3, BoxRegion{{0, 0, 0}, {1, 1, 1}}, box, kDeltas, NGrid(4.0)).value;
    const bool ok = std::abs(d2 - 2.0) <= 0.15 && std::abs(d3 - 3.0) <= 0.15;
    return Outcome{ok, "n=2 -> " + num(d2) + ", n=3 -> " + num(d3)};
  });

  report.add(5, "spacelike cubes: dimension and measure bounds", [] {
    const MinkowskiSpace space(3);
    const std::vector<GeneratorSpec> grid{parseGenerator("grid")};
    bool ok = true;
    std::string detail;
    for (std::size_t k : {1U, 2U}) {
      const auto cube = spatialCube(space, k);
      const double kd = static_cast<double>(k);
      const double dim = estimateDimension(space, cube, grid, kDeltas, NGrid(3.0)).value;
      const double upper = upperMeasure(space, cube, kd, 0.03125, grid);
      const auto mass = naturalMassDistribution(space, cube, 0.25);
      const double lower = lowerMeasure(space, cube, kd, *mass, 4096, 3);
      // c_- 2^k and 2^k (omega_k / alpha_k) H^k of the ball circumscribing [-1,1]^k
      const double lowerBound = std::pow(2.0, kd) / (kd * std::pow(2.0, kd - 1.0));
      const double ballMeasure = unitBallVolume(kd) * std::pow(std::sqrt(kd), kd);
      const double upperBound = std::pow(2.0, kd) * omega(kd) / unitBallVolume(kd) * ballMeasure;
      ok = ok && std::abs(dim - kd) <= 0.15 && lower >= 0.9 * lowerBound && upper <= 1.1 * upperBound &&
           lower <= upper * 1.1;
      detail += "k=" + std::to_string(k) + ": dim " + num(dim) + ", lower " + num(lower) + " >= " +
                num(lowerBound) + ", upper " + num(upper) + " <= " + num(upperBound) + "; ";
    }
    return Outcome{ok, detail};
  });

  report.add(6, "null plane in R^3_1", [] {
    const MinkowskiSpace space(3);
    const SubspaceCube cube{LinearSubspace(space, {{1, 1, 0}, {0, 0, 1}}), {0, 0, 0}, 1.0};
    std::vector<GeneratorSpec> gens;
    for (const char* g : {"null:0.5", "null:0.25", "null:0.125", "null:0.0625"}) gens.push_back(parseGenerator(g));
    const std::vector<double> Ns{0.5, 1.0, 1.5, 2.0};
    const double dim = estimateDimension(space, cube, gens, kDeltas, Ns).value;
    double lo = kInfinity;
    double hi = 0.0;
    for (double d : kDeltas) {
      const double s = coverCost(nullCover(space, cube, d, 0.5), 1.5);
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
    const bool ok = std::abs(dim - 1.0) <= 0.2 && hi / lo < 3.0;
    return Outcome{ok, "dim " + num(dim) + ", S_1.5 spread " + num(hi / lo)};
  });

  report.add(7, "curves: length, null and zig-zag", [] {
    const MinkowskiSpace space(2);
    const PiecewiseLinearCurve unit(space, {{0, 0}, {1, 0}});
    const auto cmp = compareLengthMeasure(unit, geometricGrid(0.25, 0.5, 5));
    double worstV1 = 0.0;
    for (double v : cmp.upperV1) worstV1 = std::max(worstV1, std::abs(v - 1.0));
    const double lengthErr = std::abs(tauLength(unit) - 1.0);
    const double nullLen = tauLength(PiecewiseLinearCurve(space, {{0, 0}, {1, 1}}));
    std::vector<Point> zig;
    for (int i = 0; i <= 8; ++i) zig.push_back({0.125 * i, i % 2 == 0 ? 0.0 : 0.125});
    const auto trace = tauLengthTrace(PiecewiseLinearCurve(space, zig), {1e-6, 24});
    const double finalSum = trace.levels.back().sum;
    const bool ok = lengthErr <= 1e-6 && worstV1 <= 1e-6 && nullLen == 0.0 && finalSum < 1e-3 &&
                    trace.levels.front().sum > finalSum;
    return Outcome{ok, "|L-1| " + num(lengthErr) + ", max |V1-1| " + num(worstV1) + ", null " + num(nullLen) +
                           ", zig-zag " + num(trace.levels.front().sum) + " -> " + num(finalSum)};
  });

  report.add(8, "cardinality of point clouds", [] {
    const MinkowskiSpace space(3);
    props::Gen g(8);
    const std::vector<GeneratorSpec> points{parseGenerator("points")};
    bool ok = true;
    std::string detail;
    for (std::size_t m : {1U, 5U, 50U}) {
      PointCloudRegion cloud;
      for (std::size_t i = 0; i < m; ++i) cloud.points.push_back(g.point(3, 1.0));
      for (double d : kDeltas) ok = ok && upperMeasure(space, cloud, 0.0, d, points) == static_cast<double>(m);
      detail += "V0=" + num(upperMeasure(space, cloud, 0.0, kDeltas.back(), points)) + " ";
    }
    return Outcome{ok, detail + "for m = 1, 5, 50"};
  });

  report.add(9, "cone-sandwich tau factors", [] {
    const auto rec = suiteRecord("doubling", "02_sandwich_bump.json");
    return Outcome{rec.pass() && !rec.criteria.empty(), criteriaSummary(rec)};
  });

  report.add(10, "doubling bounds the dimension; volume density", [] {
    std::vector<ResultRecord> recs{suiteRecord("doubling", "01_flat_doubling.json"),
                                   suiteRecord("volume-consistency", "02_density_flat.json"),
                                   suiteRecord("volume-consistency", "03_density_bump.json"),
                                   suiteRecord("volume-consistency", "04_density_scaled.json")};
    bool ok = true;
    std::string detail;
    for (const auto& r : recs) {
      ok = ok && r.pass() && !r.criteria.empty();
      detail += r.id + " {" + criteriaSummary(r) + "} ";
    }
    return Outcome{ok, detail};
  });

  report.add(11, "Bishop-Gromov and TCD doubling", [] {
    bool ok = true;
    for (double N : {1.0, 2.0, 3.0}) ok = ok && tcdDoublingConstant(0.0, N, 1.0) == std::pow(2.0, N + 1.0);
    const double bg = bgRatioBound(0.0, 3.0, 1.0, 2.0);
    ok = ok && std::abs(bg - 1.0 / 16.0) <= 1e-10;
    std::size_t held = 0;
    std::size_t total = 0;
    for (double K : {-3.0, -1.0, 0.0, 1.0, 2.0}) {
      for (double N : {2.0, 3.0}) {
        for (double r : {0.2, 0.5}) {
          ++total;
          held += curvatureRow(K, N, 1.0, r).holds ? 1 : 0;
        }
      }
    }
    ok = ok && total == 20 && held == total;
    return Outcome{ok, "bg(0,3,1,2)=" + num(bg) + ", lattice " + std::to_string(held) + "/" + std::to_string(total)};
  });

  report.add(12, "property suites", [] {
    bool ok = true;
    std::string detail;
    for (const auto& r : props::acceptanceProperties(1200)) {
      ok = ok && r.pass() && r.cases == props::kCases;
      detail += r.name + " " + std::to_string(r.violations) + "/" + std::to_string(r.cases) + "; ";
      if (!r.pass()) detail += "(" + r.firstFailure + ") ";
    }
    return Outcome{ok, detail};
  });

  std::cout << (report.failures() == 0 ? "all criteria passed" : std::to_string(report.failures()) + " failed")
            << std::endl;
  return report.failures() == 0 ? 0 : 1;
}
