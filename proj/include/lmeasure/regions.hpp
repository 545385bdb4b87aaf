/// @file regions.hpp
/// Bounded subsets of a Minkowski space that the measure engine can cover.
#pragma once

#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "lmeasure/model_spaces.hpp"

namespace lmeasure {

/// Axis-aligned coordinate box [lower, upper].
struct BoxRegion {
  Point lower;
  Point upper;
};

/// center + sum_i y_i basis_i with |y_i| <= halfSide.
struct SubspaceCube {
  LinearSubspace subspace;
  Point center;
  double halfSide = 1.0;

  [[nodiscard]] Point pointAt(std::span<const double> y) const;
};

struct CurveRegion {
  PiecewiseLinearCurve curve;
};

struct PointCloudRegion {
  std::vector<Point> points;
};

using RegionSpec = std::variant<BoxRegion, SubspaceCube, CurveRegion, PointCloudRegion>;

[[nodiscard]] std::string_view regionKind(const RegionSpec& region);

/// Number of unit-cube parameters used to sample the region.
[[nodiscard]] std::size_t parameterDimension(const RegionSpec& region);

/// Point of the region for parameters u in [0,1]^d.
[[nodiscard]] Point regionPoint(const RegionSpec& region, std::span<const double> u);

[[nodiscard]] bool regionContains(const RegionSpec& region, const Point& p, double tol = 1e-9);

/// Throws DomainError when the region does not fit the ambient space.
void validateRegion(const RegionSpec& region, const MinkowskiSpace& space);

}  // namespace lmeasure
