#include "lmeasure/model_spaces.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>

#include "lmeasure/errors.hpp"
#include "lmeasure/sampling.hpp"

namespace lmeasure {
namespace {

struct Split {
  double dt;
  double dx;  // Euclidean norm of the spatial part
};

Split split(const Point& p, const Point& q) {
  double s = 0.0;
  for (std::size_t i = 1; i < p.size(); ++i) {
    const double d = q[i] - p[i];
    s += d * d;
  }
  return {q[0] - p[0], std::sqrt(s)};
}

void requireDim(const Point& p, std::size_t n) {
  if (p.size() != n) {
    throw DomainError("point has " + std::to_string(p.size()) + " coordinates, space has " +
                      std::to_string(n));
  }
  for (double x : p) {
    if (!std::isfinite(x)) throw DomainError("point has a non-finite coordinate");
  }
}

}  // namespace

MinkowskiSpace::MinkowskiSpace(std::size_t n, double C) : n_(n), C_(C) {
  if (n < 1) throw DomainError("Minkowski dimension must be positive");
  if (!(C >= 1.0) || !std::isfinite(C)) throw DomainError("cone scale C must be >= 1");
}

bool MinkowskiSpace::causal(const Point& p, const Point& q) const {
  requireDim(p, n_);
  requireDim(q, n_);
  const auto [dt, dx] = split(p, q);
  return dt >= 0.0 && C_ * dt >= dx;
}

bool MinkowskiSpace::chron(const Point& p, const Point& q) const { return timeSep(p, q) > 0.0; }

double MinkowskiSpace::timeSep(const Point& p, const Point& q) const {
  requireDim(p, n_);
  requireDim(q, n_);
  const auto [dt, dx] = split(p, q);
  if (dt < 0.0) return 0.0;
  const double a = C_ * dt - dx;
  if (a <= 0.0) return 0.0;
  return std::sqrt(a * (C_ * dt + dx));
}

bool MinkowskiSpace::causalWithin(const Point& p, const Point& q, double relTol) const {
  requireDim(p, n_);
  requireDim(q, n_);
  const auto [dt, dx] = split(p, q);
  const double ct = C_ * dt;
  const double scale = std::abs(ct) + dx;
  return ct >= -relTol * scale && ct - dx >= -relTol * scale;
}

bool MinkowskiSpace::chronWithin(const Point& p, const Point& q, double relTol) const {
  const double tau = timeSep(p, q);
  return tau > relTol * euclideanDistance(p, q);
}

double MinkowskiSpace::eta(const Point& u, const Point& v) const {
  double s = -C_ * C_ * u[0] * v[0];
  for (std::size_t i = 1; i < n_; ++i) s += u[i] * v[i];
  return s;
}

double MinkowskiSpace::eta(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
  double s = -C_ * C_ * u(0) * v(0);
  for (std::size_t i = 1; i < n_; ++i) {
    s += u(static_cast<Eigen::Index>(i)) * v(static_cast<Eigen::Index>(i));
  }
  return s;
}

Eigen::MatrixXd MinkowskiSpace::metricMatrix() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n_),
                                                static_cast<Eigen::Index>(n_));
  m(0, 0) = -C_ * C_;
  return m;
}

// J(0,v) is the convex hull of 0, v and the equatorial ellipsoid; the farthest
// pair always lies in the plane spanned by the time axis and the spatial part of v,
// so the diameter is the largest distance among the four vertices of the planar section.
double MinkowskiSpace::diamondDiameter(const Point& v) const {
  const Point zero(n_, 0.0);
  const auto [T, X] = split(zero, v);
  const double ct = C_ * T;
  const double plus = X + ct;
  const double minus = std::max(ct - X, 0.0);
  const std::array<std::array<double, 2>, 4> pts{{{0.0, 0.0},
                                                  {T, X},
                                                  {plus / (2.0 * C_), plus / 2.0},
                                                  {minus / (2.0 * C_), -minus / 2.0}}};
  double best = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      best = std::max(best, std::hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]));
    }
  }
  return best;
}

double MinkowskiSpace::diameterBound(const Point& p, const Point& q) const {
  requireDim(p, n_);
  requireDim(q, n_);
  Point v(n_);
  for (std::size_t i = 0; i < n_; ++i) v[i] = q[i] - p[i];
  return diamondDiameter(v);
}

std::string_view toString(SignatureClass c) {
  switch (c) {
    case SignatureClass::spacelike:
      return "spacelike";
    case SignatureClass::timelike:
      return "timelike";
    case SignatureClass::nullDegenerate:
      return "null-degenerate";
  }
  return "unknown";
}

namespace {

Eigen::MatrixXd toMatrix(const std::vector<Point>& basis, std::size_t n) {
  Eigen::MatrixXd B(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(basis.size()));
  for (std::size_t j = 0; j < basis.size(); ++j) {
    requireDim(basis[j], n);
    for (std::size_t i = 0; i < n; ++i) {
      B(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = basis[j][i];
    }
  }
  return B;
}

}  // namespace

SignatureClass classifySubspace(const std::vector<Point>& basis, const MinkowskiSpace& ambient) {
  const std::size_t n = ambient.dimension();
  if (basis.empty() || basis.size() > n) {
    throw DegenerateInputError("subspace basis must have between 1 and n vectors");
  }
  const Eigen::MatrixXd B = toMatrix(basis, n);
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(B);
  const auto& sv = svd.singularValues();
  if (sv.minCoeff() <= 1e-10 * sv.maxCoeff()) {
    throw DegenerateInputError("subspace basis is rank deficient");
  }
  const Eigen::MatrixXd G = B.transpose() * ambient.metricMatrix() * B;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = eig.eigenvalues();
  const double tol = 1e-10 * std::max(1.0, ev.cwiseAbs().maxCoeff());
  int negative = 0;
  int zero = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < -tol) {
      ++negative;
    } else if (ev(i) <= tol) {
      ++zero;
    }
  }
  if (negative == 0 && zero == 0) return SignatureClass::spacelike;
  if (negative == 1 && zero == 0) return SignatureClass::timelike;
  if (negative == 0) return SignatureClass::nullDegenerate;
  throw DegenerateInputError("Gram matrix has an impossible signature for a Minkowski subspace");
}

LinearSubspace::LinearSubspace(MinkowskiSpace ambient, std::vector<Point> basis)
    : ambient_(ambient),
      basis_(std::move(basis)),
      signature_(classifySubspace(basis_, ambient_)) {}

Eigen::MatrixXd LinearSubspace::basisMatrix() const { return toMatrix(basis_, ambient_.dimension()); }

Eigen::MatrixXd LinearSubspace::gram() const {
  const Eigen::MatrixXd B = basisMatrix();
  return B.transpose() * ambient_.metricMatrix() * B;
}

double LinearSubspace::distanceFromSpan(const Point& v) const {
  const Eigen::MatrixXd B = basisMatrix();
  const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  const Eigen::VectorXd c = B.colPivHouseholderQr().solve(x);
  return (B * c - x).norm();
}

SubspaceSpace::SubspaceSpace(LinearSubspace sub, Point origin)
    : sub_(std::move(sub)), origin_(std::move(origin)) {
  if (origin_.empty()) origin_.assign(sub_.ambient().dimension(), 0.0);
  requireDim(origin_, sub_.ambient().dimension());
}

void SubspaceSpace::requireMember(const Point& p) const {
  requireDim(p, dimension());
  Point v(p.size());
  double scale = 1.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    v[i] = p[i] - origin_[i];
    scale = std::max(scale, std::abs(p[i]));
  }
  if (sub_.distanceFromSpan(v) > 1e-9 * scale) {
    throw DomainError("point does not lie in the subspace");
  }
}

bool SubspaceSpace::causal(const Point& p, const Point& q) const {
  requireMember(p);
  requireMember(q);
  return sub_.ambient().causal(p, q);
}

bool SubspaceSpace::chron(const Point& p, const Point& q) const { return timeSep(p, q) > 0.0; }

double SubspaceSpace::timeSep(const Point& p, const Point& q) const {
  requireMember(p);
  requireMember(q);
  return sub_.ambient().timeSep(p, q);
}

double SubspaceSpace::diameterBound(const Point& p, const Point& q) const {
  return sub_.ambient().diameterBound(p, q);
}

SubspaceSpace restrictToSubspace(const LinearSubspace& sub) { return SubspaceSpace(sub); }

PointCloud::PointCloud(MinkowskiSpace ambient, std::vector<Point> points)
    : ambient_(ambient), points_(std::move(points)) {
  for (const auto& p : points_) requireDim(p, ambient_.dimension());
  std::sort(points_.begin(), points_.end());
  points_.erase(std::unique(points_.begin(), points_.end()), points_.end());
}

void PointCloud::requireMember(const Point& p) const {
  if (!std::binary_search(points_.begin(), points_.end(), p)) {
    throw DomainError("point is not a member of the point cloud");
  }
}

bool PointCloud::causal(const Point& p, const Point& q) const {
  requireMember(p);
  requireMember(q);
  return ambient_.causal(p, q);
}

bool PointCloud::chron(const Point& p, const Point& q) const { return timeSep(p, q) > 0.0; }

double PointCloud::timeSep(const Point& p, const Point& q) const {
  requireMember(p);
  requireMember(q);
  return ambient_.timeSep(p, q);
}

double PointCloud::diameterBound(const Point& p, const Point& q) const {
  return ambient_.diameterBound(p, q);
}

Eigen::MatrixXd lorentzBoost(std::size_t n, double v, std::size_t axis, double C) {
  if (!(std::abs(v) < 1.0)) throw DomainError("boost velocity must satisfy |v| < 1");
  if (axis == 0 || axis >= n) throw DomainError("boost axis must be a spatial coordinate");
  const auto N = static_cast<Eigen::Index>(n);
  const auto a = static_cast<Eigen::Index>(axis);
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(N, N);
  const double g = 1.0 / std::sqrt((1.0 - v) * (1.0 + v));
  m(0, 0) = g;
  m(0, a) = g * v / C;
  m(a, 0) = g * v * C;
  m(a, a) = g;
  return m;
}

Point applyLinear(const Eigen::MatrixXd& map, const Point& p) {
  const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(p.size()));
  const Eigen::VectorXd y = map * x;
  return {y.data(), y.data() + y.size()};
}

std::string_view toString(CurveClass c) {
  switch (c) {
    case CurveClass::timelike:
      return "timelike";
    case CurveClass::null:
      return "null";
    case CurveClass::causalMixed:
      return "causal-mixed";
  }
  return "unknown";
}

PiecewiseLinearCurve::PiecewiseLinearCurve(MinkowskiSpace space, std::vector<Point> vertices)
    : space_(space), vertices_(std::move(vertices)), class_(CurveClass::causalMixed) {
  if (vertices_.size() < 2) throw InvalidCurveError("a curve needs at least two vertices");
  for (const auto& v : vertices_) requireDim(v, space_.dimension());
  bool allTimelike = true;
  for (std::size_t i = 0; i + 1 < vertices_.size(); ++i) {
    const Point& a = vertices_[i];
    const Point& b = vertices_[i + 1];
    if (a == b) throw InvalidCurveError("curve has a zero-length leg at vertex " + std::to_string(i));
    if (!space_.causalWithin(a, b, kNullRelTol)) {
      throw InvalidCurveError("leg " + std::to_string(i) + " is not future-directed causal");
    }
    allTimelike = allTimelike && space_.chronWithin(a, b, 1e-6);
  }
  bool anyChron = false;
  for (std::size_t i = 0; i < vertices_.size() && !anyChron; ++i) {
    for (std::size_t j = i + 1; j < vertices_.size(); ++j) {
      if (space_.chronWithin(vertices_[i], vertices_[j], 1e-6)) {
        anyChron = true;
        break;
      }
    }
  }
  if (allTimelike) {
    class_ = CurveClass::timelike;
  } else if (!anyChron) {
    class_ = CurveClass::null;
  }
}

Point PiecewiseLinearCurve::at(double s) const {
  s = std::clamp(s, 0.0, 1.0);
  const auto legs = static_cast<double>(legCount());
  const double x = s * legs;
  const auto i = std::min(static_cast<std::size_t>(x), legCount() - 1);
  const double f = x - static_cast<double>(i);
  if (f == 0.0) return vertices_[i];
  if (f == 1.0) return vertices_[i + 1];
  const Point& a = vertices_[i];
  const Point& b = vertices_[i + 1];
  Point out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] + f * (b[k] - a[k]);
  return out;
}

}  // namespace lmeasure

namespace lmeasure {

double sampledDiamondVolume(const MinkowskiSpace& space, const Point& p, const Point& q,
                            std::size_t samples, std::uint64_t seed, unsigned workers) {
  if (!space.causal(p, q)) return 0.0;
  if (samples == 0) throw DomainError("need at least one sample");
  const std::size_t n = space.dimension();
  const double T = q[0] - p[0];
  Point lo(n);
  Point width(n);
  lo[0] = p[0];
  width[0] = T;
  for (std::size_t k = 1; k < n; ++k) {
    lo[k] = 0.5 * (p[k] + q[k]) - 0.5 * space.coneScale() * T;
    width[k] = space.coneScale() * T;
  }
  double boxVolume = 1.0;
  for (double w : width) boxVolume *= w;
  if (!(boxVolume > 0.0)) return 0.0;

  constexpr std::size_t shards = 16;
  std::vector<std::size_t> hits(shards, 0);
  parallelFor(shards, workers, [&](std::size_t shard) {
    std::mt19937_64 rng(deriveSeed(seed, shard));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t count = samples / shards + (shard < samples % shards ? 1 : 0);
    Point z(n);
    for (std::size_t i = 0; i < count; ++i) {
      for (std::size_t k = 0; k < n; ++k) z[k] = lo[k] + unit(rng) * width[k];
      if (space.causal(p, z) && space.causal(z, q)) ++hits[shard];
    }
  });
  std::size_t total = 0;
  for (auto h : hits) total += h;
  return boxVolume * static_cast<double>(total) / static_cast<double>(samples);
}

}  // namespace lmeasure
