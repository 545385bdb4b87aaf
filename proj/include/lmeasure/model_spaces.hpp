/// @file model_spaces.hpp
/// Scaled Minkowski spaces, linear subspaces, finite point clouds and polygonal causal curves.
#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "lmeasure/causal_core.hpp"

namespace lmeasure {

/// R^n with eta_C = -C^2 dt^2 + sum dx_i^2, future = increasing coordinate 0.
class MinkowskiSpace final : public CausalSpace {
 public:
  explicit MinkowskiSpace(std::size_t n, double C = 1.0);

  [[nodiscard]] std::size_t dimension() const override { return n_; }
  [[nodiscard]] double coneScale() const noexcept { return C_; }

  [[nodiscard]] bool causal(const Point& p, const Point& q) const override;
  [[nodiscard]] bool chron(const Point& p, const Point& q) const override;
  [[nodiscard]] double timeSep(const Point& p, const Point& q) const override;

  /// Exact Euclidean diameter of J(p,q).
  [[nodiscard]] double diameterBound(const Point& p, const Point& q) const override;

  /// Causality up to a relative tolerance on the interval; used where rounding
  /// of interpolated points would otherwise flip null relations.
  [[nodiscard]] bool causalWithin(const Point& p, const Point& q, double relTol) const;
  /// Chronology that ignores tau below relTol times the Euclidean length of q - p.
  [[nodiscard]] bool chronWithin(const Point& p, const Point& q, double relTol) const;

  /// eta_C(u, v).
  [[nodiscard]] double eta(const Point& u, const Point& v) const;
  [[nodiscard]] double eta(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;
  [[nodiscard]] Eigen::MatrixXd metricMatrix() const;

  /// Diameter of J(0, v) for a future causal vector v.
  [[nodiscard]] double diamondDiameter(const Point& v) const;

 private:
  std::size_t n_;
  double C_;
};

enum class SignatureClass { spacelike, timelike, nullDegenerate };

[[nodiscard]] std::string_view toString(SignatureClass c);

/// Classifies span(basis) by the eigenvalues of its eta Gram matrix.
[[nodiscard]] SignatureClass classifySubspace(const std::vector<Point>& basis,
                                              const MinkowskiSpace& ambient);

/// Linear subspace of a Minkowski space with its signature class.
class LinearSubspace {
 public:
  LinearSubspace(MinkowskiSpace ambient, std::vector<Point> basis);

  [[nodiscard]] const MinkowskiSpace& ambient() const noexcept { return ambient_; }
  [[nodiscard]] const std::vector<Point>& basis() const noexcept { return basis_; }
  [[nodiscard]] std::size_t dimension() const noexcept { return basis_.size(); }
  [[nodiscard]] SignatureClass signature() const noexcept { return signature_; }

  /// n x k matrix with the basis as columns.
  [[nodiscard]] Eigen::MatrixXd basisMatrix() const;
  /// k x k matrix of eta inner products.
  [[nodiscard]] Eigen::MatrixXd gram() const;

  /// Residual distance of v from the span.
  [[nodiscard]] double distanceFromSpan(const Point& v) const;

 private:
  MinkowskiSpace ambient_;
  std::vector<Point> basis_;
  SignatureClass signature_;
};

/// Ambient relations restricted to points of origin + span(basis).
class SubspaceSpace final : public CausalSpace {
 public:
  explicit SubspaceSpace(LinearSubspace sub, Point origin = {});

  [[nodiscard]] std::size_t dimension() const override { return sub_.ambient().dimension(); }
  [[nodiscard]] const LinearSubspace& subspace() const noexcept { return sub_; }

  [[nodiscard]] bool causal(const Point& p, const Point& q) const override;
  [[nodiscard]] bool chron(const Point& p, const Point& q) const override;
  [[nodiscard]] double timeSep(const Point& p, const Point& q) const override;
  [[nodiscard]] double diameterBound(const Point& p, const Point& q) const override;

 private:
  void requireMember(const Point& p) const;

  LinearSubspace sub_;
  Point origin_;
};

[[nodiscard]] SubspaceSpace restrictToSubspace(const LinearSubspace& sub);

/// Finite subset of a Minkowski space with the induced relations.
class PointCloud final : public CausalSpace {
 public:
  PointCloud(MinkowskiSpace ambient, std::vector<Point> points);

  [[nodiscard]] std::size_t dimension() const override { return ambient_.dimension(); }
  [[nodiscard]] const std::vector<Point>& points() const noexcept { return points_; }
  [[nodiscard]] std::size_t cardinality() const noexcept { return points_.size(); }

  [[nodiscard]] bool causal(const Point& p, const Point& q) const override;
  [[nodiscard]] bool chron(const Point& p, const Point& q) const override;
  [[nodiscard]] double timeSep(const Point& p, const Point& q) const override;
  [[nodiscard]] double diameterBound(const Point& p, const Point& q) const override;

 private:
  void requireMember(const Point& p) const;

  MinkowskiSpace ambient_;
  std::vector<Point> points_;  // distinct, sorted
};

/// Active boost t' = g(t + v x_a), x_a' = g(x_a + v t) in units where the cone speed is 1,
/// conjugated to eta_C coordinates.
[[nodiscard]] Eigen::MatrixXd lorentzBoost(std::size_t n, double v, std::size_t axis,
                                           double C = 1.0);

[[nodiscard]] Point applyLinear(const Eigen::MatrixXd& map, const Point& p);

/// Monte Carlo Lebesgue volume of J(p,q), sampled uniformly in the bounding box
/// of the diamond with per-shard seeds.
[[nodiscard]] double sampledDiamondVolume(const MinkowskiSpace& space, const Point& p,
                                          const Point& q, std::size_t samples,
                                          std::uint64_t seed, unsigned workers = 1);

enum class CurveClass { timelike, null, causalMixed };

[[nodiscard]] std::string_view toString(CurveClass c);

/// Polygon with future-directed causal legs, parametrized on [0,1] with equal
/// parameter length per leg.
class PiecewiseLinearCurve {
 public:
  PiecewiseLinearCurve(MinkowskiSpace space, std::vector<Point> vertices);

  [[nodiscard]] const MinkowskiSpace& space() const noexcept { return space_; }
  [[nodiscard]] const std::vector<Point>& vertices() const noexcept { return vertices_; }
  [[nodiscard]] std::size_t legCount() const noexcept { return vertices_.size() - 1; }
  [[nodiscard]] CurveClass causalityClass() const noexcept { return class_; }

  [[nodiscard]] Point at(double s) const;

 private:
  MinkowskiSpace space_;
  std::vector<Point> vertices_;
  CurveClass class_;
};

/// Relative tolerance used when rounding can perturb null relations.
inline constexpr double kNullRelTol = 1e-12;

}  // namespace lmeasure
