/// @file measure.hpp
/// Diamond covers, cover-cost upper bounds, mass-distribution lower bounds and
/// the dimension estimator.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lmeasure/causal_core.hpp"
#include "lmeasure/model_spaces.hpp"
#include "lmeasure/regions.hpp"

namespace lmeasure {

/// `multiplicity` translates of one diamond; all share tau and diameter.
struct DiamondBlock {
  CausalDiamond prototype;
  double multiplicity = 1.0;
};

/// Finite family of closed diamonds covering a region at scale delta.
class Cover {
 public:
  static constexpr double kCoverageThreshold = 0.999;

  Cover(std::string generator, double scale, std::vector<DiamondBlock> blocks,
        double coverageFraction, std::vector<std::pair<std::string, double>> details = {});

  [[nodiscard]] const std::string& generator() const noexcept { return generator_; }
  [[nodiscard]] double scale() const noexcept { return scale_; }
  [[nodiscard]] const std::vector<DiamondBlock>& blocks() const noexcept { return blocks_; }
  [[nodiscard]] double coverageFraction() const noexcept { return coverage_; }
  [[nodiscard]] bool verified() const noexcept { return coverage_ >= kCoverageThreshold; }
  [[nodiscard]] double diamondCount() const;
  /// Generator-specific parameters (grid size, null-cover t, ...).
  [[nodiscard]] const std::vector<std::pair<std::string, double>>& details() const noexcept {
    return details_;
  }

  /// Cover of the dilated region a * A.
  [[nodiscard]] Cover dilated(double a) const;

  /// Union of covers of two disjoint regions.
  [[nodiscard]] static Cover disjointUnion(const Cover& a, const Cover& b);

 private:
  std::string generator_;
  double scale_;
  std::vector<DiamondBlock> blocks_;
  double coverage_;
  std::vector<std::pair<std::string, double>> details_;
};

/// sum_i rho_N(J_i). Refuses unverified covers.
[[nodiscard]] double coverCost(const Cover& cover, double N);

struct CoverageOptions {
  std::size_t samples = 4096;
};

enum class GeneratorKind { grid, box, null, chain, points };

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::grid;
  double epsilon = 0.5;  // null covers only

  [[nodiscard]] std::string id() const;
};

/// Parses "grid", "box", "chain", "points" or "null:<eps>".
[[nodiscard]] GeneratorSpec parseGenerator(const std::string& text);

[[nodiscard]] bool isApplicable(const GeneratorSpec& spec, const RegionSpec& region);

/// j^k on-axis diamonds circumscribed around the subcubes of a spacelike cube.
[[nodiscard]] Cover gridCover(const MinkowskiSpace& space, const SubspaceCube& cube, double delta,
                              const CoverageOptions& opts = {});

/// gridCover with an explicit number of subcubes per side.
[[nodiscard]] Cover gridCoverCells(const MinkowskiSpace& space, const SubspaceCube& cube,
                                   std::size_t cellsPerSide, const CoverageOptions& opts = {});

/// On-axis diamonds for a full-dimensional box: an exact tiling in null
/// coordinates for n = 2, a lattice of inscribed cells for n >= 3.
[[nodiscard]] Cover boxCover(const MinkowskiSpace& space, const BoxRegion& box, double delta,
                             const CoverageOptions& opts = {});

/// Geometry of the thin diamonds used on null cubes.
struct NullCoverPlan {
  double t = 0.0;         // timelike offset delta^{-1+2/eps}
  double a = 0.0;         // null extent, chosen so the diameter is <= delta
  double tau = 0.0;       // sqrt(t (2 a sigma + t))
  double sigma = 0.0;     // -eta(nu, e)
  double alphaWidth = 0.0;
  double betaWidth = 0.0;
  double cellsAlpha = 0.0;
  double cellsBeta = 0.0;  // per spacelike direction
  double count = 0.0;
  double diameter = 0.0;
};

[[nodiscard]] NullCoverPlan planNullCover(const MinkowskiSpace& space, const SubspaceCube& cube,
                                          double delta, double eps);

/// Translates of J(-(a nu + t e)/2, (a nu + t e)/2) over a null cube. The cube
/// basis must be adapted: a null vector first, then eta-orthonormal spacelike vectors.
[[nodiscard]] Cover nullCover(const MinkowskiSpace& space, const SubspaceCube& cube, double delta,
                              double eps, const CoverageOptions& opts = {});

/// Consecutive diamonds along the legs of a polygonal causal curve.
[[nodiscard]] Cover curveChainCover(const PiecewiseLinearCurve& curve, double delta,
                                    const CoverageOptions& opts = {});

/// One null diamond around each distinct point.
[[nodiscard]] Cover pointCloudCover(const MinkowskiSpace& space, const PointCloudRegion& cloud,
                                    double delta);

[[nodiscard]] Cover buildCover(const MinkowskiSpace& space, const RegionSpec& region,
                               const GeneratorSpec& spec, double delta,
                               const CoverageOptions& opts = {});

/// Min over applicable generators of the cover cost: an upper bound on V^N_delta.
[[nodiscard]] double upperMeasure(const MinkowskiSpace& space, const RegionSpec& region, double N,
                                  double delta, std::span<const GeneratorSpec> generators,
                                  const CoverageOptions& opts = {});

struct ScalingEntry {
  std::string generator;
  double delta = 0.0;
  double N = 0.0;
  double cost = 0.0;
  bool verified = false;
};

struct ScalingSeries {
  std::vector<ScalingEntry> entries;

  void writeCsv(std::ostream& out) const;
};

struct DimensionEstimate {
  double value = 0.0;
  double bracketLo = 0.0;
  double bracketHi = 0.0;
  std::vector<double> NGrid;
  std::vector<double> slopes;  // d log S_N / d log delta at each NGrid node
  std::string method;          // "bisection", "grid-node" or "degenerate"
  std::size_t fitScales = 0;
  ScalingSeries series;
};

struct EstimateOptions {
  CoverageOptions coverage;
  unsigned workers = 1;
  std::size_t fitScales = 4;
  double bisectionTol = 1e-6;
  double nodeTol = 1e-3;
};

/// delta_j = start * factor^j, j < count.
[[nodiscard]] std::vector<double> geometricGrid(double start, double factor, std::size_t count);

/// Zero crossing of the fitted scaling slope s(N).
[[nodiscard]] DimensionEstimate estimateDimension(const MinkowskiSpace& space,
                                                  const RegionSpec& region,
                                                  std::span<const GeneratorSpec> generators,
                                                  std::span<const double> deltaGrid,
                                                  std::span<const double> NGrid,
                                                  const EstimateOptions& opts = {});

/// Running minimum over finer scales of the best cost per N: the tightest bound
/// on V^N_delta implied by the series (a cover at scale delta' <= delta is also
/// admissible at delta). Entries use generator id "envelope".
[[nodiscard]] ScalingSeries monotoneEnvelope(const ScalingSeries& series);

/// Finite measure on a region that can evaluate mu(J) for diamonds.
class MassDistribution {
 public:
  virtual ~MassDistribution() = default;

  [[nodiscard]] virtual double totalMass() const = 0;
  [[nodiscard]] virtual double mass(const CausalDiamond& diamond) const = 0;
  /// Point of the support for u in [0,1]^d.
  [[nodiscard]] virtual Point samplePoint(std::span<const double> u) const = 0;
  [[nodiscard]] virtual std::size_t sampleDimension() const = 0;
  /// Small diamond meeting the support; index lets samplers interleave families.
  [[nodiscard]] virtual CausalDiamond sampleDiamond(std::mt19937_64& rng, std::size_t index) const = 0;

  /// Sup over sampled diamonds of mu(J) / rho_N(J).
  [[nodiscard]] double frostmanConstant(double N, std::size_t budget, std::uint64_t seed) const;
};

/// Coordinate-Euclidean Hausdorff measure on a cube in a spacelike subspace.
class UniformCubeMeasure final : public MassDistribution {
 public:
  UniformCubeMeasure(MinkowskiSpace space, SubspaceCube cube, double maxScale);

  [[nodiscard]] double totalMass() const override;
  [[nodiscard]] double mass(const CausalDiamond& diamond) const override;
  [[nodiscard]] Point samplePoint(std::span<const double> u) const override;
  [[nodiscard]] std::size_t sampleDimension() const override { return cube_.subspace.dimension(); }
  [[nodiscard]] CausalDiamond sampleDiamond(std::mt19937_64& rng, std::size_t index) const override;

 private:
  MinkowskiSpace space_;
  SubspaceCube cube_;
  double maxScale_;
  Eigen::MatrixXd B_;
  Eigen::MatrixXd G_;
  Eigen::MatrixXd Ginv_;
  Eigen::MatrixXd cholU_;  // G = U^T U
  double areaFactor_;      // sqrt(det B^T B / det G)
  Eigen::VectorXd normal_;
  std::vector<Eigen::VectorXd> spacelikeComplement_;
};

/// tau-length measure on a straight timelike segment.
class SegmentLengthMeasure final : public MassDistribution {
 public:
  SegmentLengthMeasure(MinkowskiSpace space, Point a, Point b, double maxScale);

  [[nodiscard]] double totalMass() const override { return length_; }
  [[nodiscard]] double mass(const CausalDiamond& diamond) const override;
  [[nodiscard]] Point samplePoint(std::span<const double> u) const override;
  [[nodiscard]] std::size_t sampleDimension() const override { return 1; }
  [[nodiscard]] CausalDiamond sampleDiamond(std::mt19937_64& rng, std::size_t index) const override;

 private:
  MinkowskiSpace space_;
  Point a_;
  Point b_;
  double maxScale_;
  double length_;
  std::vector<Eigen::VectorXd> orthogonal_;
};

/// Natural measure for regions with one: H^k on spacelike cubes, length on timelike segments.
[[nodiscard]] std::unique_ptr<MassDistribution> naturalMassDistribution(
    const MinkowskiSpace& space, const RegionSpec& region, double maxScale);

/// mu(region) / frostmanConstant: a statistical lower bound on V^N(region).
[[nodiscard]] double lowerMeasure(const MinkowskiSpace& space, const RegionSpec& region, double N,
                                  const MassDistribution& massDist, std::size_t sampleBudget,
                                  std::uint64_t seed);

/// Volume of the intersection of two balls in R^k at center distance d.
[[nodiscard]] double ballLensVolume(std::size_t k, double r1, double r2, double d);

/// Volume of the unit ball in R^k.
[[nodiscard]] double unitBallVolume(double k);

/// Unit future timelike vector and spacelike completion, eta-orthogonal to span(B).
struct EtaComplement {
  Eigen::VectorXd normal;
  std::vector<Eigen::VectorXd> spacelike;
};

[[nodiscard]] EtaComplement etaComplement(const MinkowskiSpace& space, const Eigen::MatrixXd& B);

}  // namespace lmeasure
