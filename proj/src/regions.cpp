#include "lmeasure/regions.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lmeasure/errors.hpp"

namespace lmeasure {

Point SubspaceCube::pointAt(std::span<const double> y) const {
  Point p = center;
  const auto& basis = subspace.basis();
  for (std::size_t j = 0; j < basis.size(); ++j) {
    for (std::size_t i = 0; i < p.size(); ++i) p[i] += y[j] * basis[j][i];
  }
  return p;
}

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double segmentDistance(const Point& a, const Point& b, const Point& p) {
  double ab2 = 0.0;
  double ap_ab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab2 += (b[i] - a[i]) * (b[i] - a[i]);
    ap_ab += (p[i] - a[i]) * (b[i] - a[i]);
  }
  const double s = ab2 > 0.0 ? std::clamp(ap_ab / ab2, 0.0, 1.0) : 0.0;
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i] + s * (b[i] - a[i]) - p[i];
    d2 += x * x;
  }
  return std::sqrt(d2);
}

}  // namespace

std::string_view regionKind(const RegionSpec& region) {
  return std::visit(Overloaded{[](const BoxRegion&) { return std::string_view("box"); },
                               [](const SubspaceCube&) { return std::string_view("subspaceCube"); },
                               [](const CurveRegion&) { return std::string_view("curveImage"); },
                               [](const PointCloudRegion&) { return std::string_view("pointCloud"); }},
                    region);
}

std::size_t parameterDimension(const RegionSpec& region) {
  return std::visit(
      Overloaded{[](const BoxRegion& b) { return b.lower.size(); },
                 [](const SubspaceCube& c) { return c.subspace.dimension(); },
                 [](const CurveRegion&) { return std::size_t{1}; },
                 [](const PointCloudRegion&) { return std::size_t{1}; }},
      region);
}

Point regionPoint(const RegionSpec& region, std::span<const double> u) {
  return std::visit(
      Overloaded{[&](const BoxRegion& b) {
                   Point p(b.lower.size());
                   for (std::size_t i = 0; i < p.size(); ++i) {
                     p[i] = b.lower[i] + u[i] * (b.upper[i] - b.lower[i]);
                   }
                   return p;
                 },
                 [&](const SubspaceCube& c) {
                   std::vector<double> y(u.size());
                   for (std::size_t i = 0; i < y.size(); ++i) y[i] = (2.0 * u[i] - 1.0) * c.halfSide;
                   return c.pointAt(y);
                 },
                 [&](const CurveRegion& c) { return c.curve.at(u[0]); },
                 [&](const PointCloudRegion& c) {
                   if (c.points.empty()) throw DomainError("cannot sample an empty point cloud");
                   const auto m = c.points.size();
                   const auto i = std::min(static_cast<std::size_t>(u[0] * static_cast<double>(m)), m - 1);
                   return c.points[i];
                 }},
      region);
}

bool regionContains(const RegionSpec& region, const Point& p, double tol) {
  return std::visit(
      Overloaded{[&](const BoxRegion& b) {
                   for (std::size_t i = 0; i < p.size(); ++i) {
                     if (p[i] < b.lower[i] - tol || p[i] > b.upper[i] + tol) return false;
                   }
                   return true;
                 },
                 [&](const SubspaceCube& c) {
                   const Eigen::MatrixXd B = c.subspace.basisMatrix();
                   Eigen::VectorXd x(static_cast<Eigen::Index>(p.size()));
                   for (std::size_t i = 0; i < p.size(); ++i) {
                     x(static_cast<Eigen::Index>(i)) = p[i] - c.center[i];
                   }
                   const Eigen::VectorXd y = B.colPivHouseholderQr().solve(x);
                   if ((B * y - x).norm() > tol) return false;
                   return y.cwiseAbs().maxCoeff() <= c.halfSide + tol;
                 },
                 [&](const CurveRegion& c) {
                   const auto& v = c.curve.vertices();
                   for (std::size_t i = 0; i + 1 < v.size(); ++i) {
                     if (segmentDistance(v[i], v[i + 1], p) <= tol) return true;
                   }
                   return false;
                 },
                 [&](const PointCloudRegion& c) {
                   return std::any_of(c.points.begin(), c.points.end(),
                                      [&](const Point& q) { return euclideanDistance(p, q) <= tol; });
                 }},
      region);
}

void validateRegion(const RegionSpec& region, const MinkowskiSpace& space) {
  const auto n = space.dimension();
  auto check = [n](const Point& p, const char* what) {
    if (p.size() != n) {
      throw DomainError(std::string(what) + " has " + std::to_string(p.size()) +
                        " coordinates, space has " + std::to_string(n));
    }
  };
  std::visit(Overloaded{[&](const BoxRegion& b) {
                          check(b.lower, "box lower corner");
                          check(b.upper, "box upper corner");
                          for (std::size_t i = 0; i < n; ++i) {
                            if (!(b.lower[i] < b.upper[i])) throw DomainError("box must have lower < upper");
                          }
                        },
                        [&](const SubspaceCube& c) {
                          check(c.center, "cube center");
                          if (c.subspace.ambient().dimension() != n ||
                              c.subspace.ambient().coneScale() != space.coneScale()) {
                            throw DomainError("cube subspace lives in a different space");
                          }
                          if (!(c.halfSide > 0.0)) throw DomainError("cube half side must be positive");
                        },
                        [&](const CurveRegion& c) {
                          if (c.curve.space().dimension() != n ||
                              c.curve.space().coneScale() != space.coneScale()) {
                            throw DomainError("curve lives in a different space");
                          }
                        },
                        [&](const PointCloudRegion& c) {
                          for (const auto& p : c.points) check(p, "cloud point");
                        }},
             region);
}

}  // namespace lmeasure
