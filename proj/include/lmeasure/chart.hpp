/// @file chart.hpp
/// Continuous chart metrics: cone sandwich checks, a longest-path surrogate for
/// tau, cylindrical neighborhoods and Monte Carlo diamond volumes.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lmeasure/causal_core.hpp"

namespace lmeasure {

/// Metric components at a point; charts have n <= 4.
using Tensor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4>;

/// Axis-aligned chart region [lower, upper].
struct ChartBox {
  Point lower;
  Point upper;

  [[nodiscard]] std::size_t dimension() const noexcept { return lower.size(); }
  [[nodiscard]] bool contains(std::span<const double> x) const;
  /// Regular grid with `resolution` points per axis.
  [[nodiscard]] std::vector<Point> grid(std::size_t resolution) const;
  [[nodiscard]] double volume() const;
};

/// Continuous symmetric 2-tensor field on R^n, index 0 is time.
class ChartMetric {
 public:
  using Field = std::function<Tensor(std::span<const double>)>;

  ChartMetric(std::string name, std::size_t n, Field field);

  /// eta = -dt^2 + |dx|^2.
  [[nodiscard]] static ChartMetric minkowski(std::size_t n);
  /// -(1 + a|x|) dt^2 + |dx|^2.
  [[nodiscard]] static ChartMetric conformalBump(std::size_t n, double a);
  /// -dt^2 + s^2 dx_1^2 + dx_2^2 + ...
  [[nodiscard]] static ChartMetric anisotropicStretch(std::size_t n, double s);
  /// a^2 eta.
  [[nodiscard]] static ChartMetric scaled(std::size_t n, double a);
  /// eta_C = -C^2 dt^2 + |dx|^2.
  [[nodiscard]] static ChartMetric coneScaled(std::size_t n, double C);

  [[nodiscard]] const std::string& name() const noexcept { return name_; }
  [[nodiscard]] std::size_t dimension() const noexcept { return n_; }
  [[nodiscard]] Tensor at(std::span<const double> x) const;
  /// g_x(v, v).
  [[nodiscard]] double quad(std::span<const double> x, std::span<const double> v) const;
  /// Chord weight sqrt(-g_mid(b-a, b-a)) when b-a is future causal at the midpoint, else -inf.
  [[nodiscard]] double chordWeight(const Point& a, const Point& b) const;

 private:
  std::string name_;
  std::size_t n_;
  Field field_;
};

struct DetBounds {
  double min = 0.0;
  double max = 0.0;
};

/// Sampled bounds of |det g| on a box; throws InvalidMetricError if det vanishes.
[[nodiscard]] DetBounds detBounds(const ChartMetric& metric, const ChartBox& box,
                                  std::size_t resolution);

/// Sampled sup of the spectral norm of g - eta.
[[nodiscard]] double supDeviation(const ChartMetric& metric, const ChartBox& box,
                                  std::size_t resolution);

/// Sampled sup of |g(x) - g(y)| over neighbouring grid points.
[[nodiscard]] double continuityModulus(const ChartMetric& metric, const ChartBox& box,
                                       std::size_t resolution);

struct ConeSandwich {
  double C = 0.0;
  bool verified = false;
  std::size_t resolution = 0;
  std::size_t directions = 0;
  double innerMargin = 0.0;  // min of -g(v,v)/|v|^2 on the eta_{1/C} cone boundary
  double outerMargin = 0.0;  // min of g(v,v)/|v|^2 on the eta_C cone boundary
  double timeMargin = 0.0;   // min of -g(e0,e0)
  Point worstPoint;
};

/// Checks eta_{1/C} < g < eta_C on a sample grid. Throws InvalidMetricError on a
/// non-Lorentzian sample.
[[nodiscard]] ConeSandwich verifyConeSandwich(const ChartMetric& metric, const ChartBox& box,
                                              double C, std::size_t resolution,
                                              std::size_t directions = 32);

/// 3 C^2 + 2.
[[nodiscard]] double enlargementFactor(double C);

/// (0,B) x Z with the inner box W' = (a,b) x V centred on the chart.
class CylindricalNeighborhood {
 public:
  /// widthFraction sets b - a = widthFraction * B / (4 lambda); must be < 1.
  CylindricalNeighborhood(std::size_t n, double B, double C, Point spatialCenter, double zHalf,
                          double vHalf, double widthFraction = 0.9);

  [[nodiscard]] std::size_t dimension() const noexcept { return n_; }
  [[nodiscard]] double C() const noexcept { return C_; }
  [[nodiscard]] double lambda() const noexcept { return lambda_; }
  [[nodiscard]] double a() const noexcept { return a_; }
  [[nodiscard]] double b() const noexcept { return b_; }
  [[nodiscard]] const ChartBox& outer() const noexcept { return W_; }
  [[nodiscard]] const ChartBox& inner() const noexcept { return Wprime_; }

 private:
  std::size_t n_;
  double C_;
  double lambda_;
  double a_;
  double b_;
  ChartBox W_;
  ChartBox Wprime_;
};

struct Enlargement {
  Point pHat;
  Point qHat;
  bool insideOuter = true;
};

/// pHat = (t - lambda (s-t), x), qHat = (s + lambda (s-t), x). Requires an on-axis pair with t < s.
[[nodiscard]] Enlargement enlargeDiamond(const Point& p, const Point& q, double lambda,
                                         const ChartBox* outer = nullptr);

struct GraphOptions {
  std::size_t steps = 24;   // time cells between p and q
  std::size_t stencil = 4;  // max time offset of an edge, in cells
  std::size_t refine = 2;   // spatial cells per null step
};

/// Lattice DAG between p and q with midpoint-chord edges, restricted to a chart box.
/// The lattice is anchored at p; its spatial pitch is aligned to the null slope of g
/// at the diamond centre.
class CausalGraph {
 public:
  CausalGraph(const ChartMetric& metric, const ChartBox& domain, const Point& p, const Point& q,
              double C, const GraphOptions& opts = {});

  /// Longest path p -> q; -inf when q is not reached.
  [[nodiscard]] double longestPath() const noexcept { return longest_; }
  [[nodiscard]] bool connected() const noexcept { return longest_ > -kInfinity; }

  /// Approximate membership in J(p, q, domain).
  [[nodiscard]] bool contains(const Point& z) const;

  [[nodiscard]] std::size_t nodeCount() const noexcept { return forward_.size(); }
  [[nodiscard]] Point nodePoint(std::size_t node) const;
  /// Longest path p -> node and node -> q (-inf if none).
  [[nodiscard]] double forwardValue(std::size_t node) const { return forward_[node]; }
  [[nodiscard]] double backwardValue(std::size_t node) const { return backward_[node]; }
  /// Lattice nodes of one optimal path, in time order, starting at p. The last
  /// node reaches q by a direct chord.
  [[nodiscard]] std::vector<std::size_t> optimalPath() const;
  [[nodiscard]] std::size_t edgeCount() const noexcept { return edges_; }

 private:
  struct Offset {
    long di;
    std::vector<long> dj;
  };

  [[nodiscard]] long spatialIndex(std::span<const long> j) const;
  [[nodiscard]] bool inRange(std::span<const long> j) const;
  [[nodiscard]] bool inFuture(const Point& z) const;
  [[nodiscard]] bool inPast(const Point& z) const;
  [[nodiscard]] bool withinCone(const Point& a, const Point& b) const;
  void fillPoint(std::size_t node, Point& x) const;
  template <class Fn>
  void forEachNear(const Point& z, const Point& anchor, long iFirst, long iLast, Fn&& fn) const;

  const ChartMetric* metric_;
  ChartBox domain_;
  Point p_;
  Point q_;
  double C_;
  std::size_t d_;  // spatial dimensions
  long steps_;
  long stencil_;
  double hT_;
  std::vector<double> hX_;
  std::vector<long> jLo_;
  std::vector<long> jHi_;
  std::vector<long> stride_;
  long spatialCount_ = 1;
  std::vector<Offset> offsets_;
  std::vector<double> forward_;
  std::vector<double> backward_;
  double longest_ = -kInfinity;
  std::size_t edges_ = 0;
};

struct TimeSeparationInterval {
  double lo = 0.0;
  double hi = 0.0;
  double quadratureError = 0.0;  // |lo - lo at half resolution|
  bool causal = true;            // q - p inside the eta_C cone
  bool connected = true;         // the graph reaches q
};

/// Lower bound from the lattice longest path, upper bound from the sampled
/// deviation of g from eta and from its value at the midpoint.
[[nodiscard]] TimeSeparationInterval dpTimeSeparation(const ChartMetric& metric,
                                                      const ChartBox& domain, const Point& p,
                                                      const Point& q, double C,
                                                      const GraphOptions& opts = {});

/// Upper bound on tau(p,q) valid for every causal curve inside the eta_C diamond of p, q.
[[nodiscard]] double tauUpperBound(const ChartMetric& metric, const ChartBox& domain,
                                   const Point& p, const Point& q, double C,
                                   std::size_t resolution = 9);

struct VolumeOptions {
  std::size_t samples = 200000;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  GraphOptions graph;
};

/// Monte Carlo vol^g(J(p,q,domain)) with sqrt|det g| weights, stratified over the
/// eta_C bounding box of the diamond.
[[nodiscard]] double diamondVolume(const ChartMetric& metric, const ChartBox& domain,
                                   const Point& p, const Point& q, double C,
                                   const VolumeOptions& opts = {});

/// log(L) / log(1 + 2 lambda).
[[nodiscard]] double dimensionBoundFromDoubling(double L, double lambda);

struct DoublingPair {
  Point p;
  Point q;
  double small = 0.0;     // vol J(p,q)
  double enlarged = 0.0;  // vol J(pHat, qHat, W)
  double ratio = 0.0;
};

struct DoublingReport {
  double empirical = 0.0;
  double analytic = 0.0;
  DetBounds det;
  std::vector<DoublingPair> pairs;
  bool withinAnalytic = false;
};

/// Max over sampled on-axis pairs of vol(J(pHat,qHat,W)) / vol(J(p,q)).
[[nodiscard]] DoublingReport doublingConstant(const ChartMetric& metric,
                                              const CylindricalNeighborhood& nbhd,
                                              std::size_t pairCount, const VolumeOptions& opts,
                                              double tolerance = 0.05);

struct RatioCase {
  Point p;
  Point q;
  Point p0;
  Point q0;
};

struct RatioCheckRow {
  bool skipped = false;
  std::string reason;
  double volumeRatio = 0.0;
  double heightRatio = 0.0;
  double tauRatio = 0.0;
  double bound = 0.0;  // (1/K) heightRatio^kappa
  double margin = 0.0;
  bool holds = false;
};

struct RatioCheckReport {
  double kappa = 0.0;
  double K = 0.0;
  std::vector<RatioCheckRow> rows;
  bool allHold = true;
};

[[nodiscard]] RatioCheckReport measureRatioCheck(const ChartMetric& metric,
                                                 const CylindricalNeighborhood& nbhd,
                                                 std::span<const RatioCase> cases, double L,
                                                 const VolumeOptions& opts);

struct DensityRow {
  double height = 0.0;
  double tau = 0.0;
  double volume = 0.0;
  double ratio = 0.0;  // vol / (omega_n tau^n)
};

struct VolumeDensityReport {
  std::vector<DensityRow> rows;
  bool converging = false;
};

/// On-axis pairs centred at `base` with the given heights (largest first).
[[nodiscard]] VolumeDensityReport volumeDensityCheck(const ChartMetric& metric,
                                                     const ChartBox& domain, const Point& base,
                                                     std::span<const double> heights, double C,
                                                     const VolumeOptions& opts);

}  // namespace lmeasure
