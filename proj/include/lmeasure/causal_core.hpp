/// @file causal_core.hpp
/// Causal-space capability, causal diamonds and the normalized diamond volume.
#pragma once

#include <cstddef>
#include <limits>
#include <vector>

namespace lmeasure {

/// Chart coordinates; index 0 is time.
using Point = std::vector<double>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// A set with background distance, causal relations and time separation.
class CausalSpace {
 public:
  virtual ~CausalSpace() = default;

  /// Length of coordinate vectors accepted by this space.
  [[nodiscard]] virtual std::size_t dimension() const = 0;

  /// Background distance d. Coordinate Euclidean unless overridden.
  [[nodiscard]] virtual double dist(const Point& p, const Point& q) const;

  [[nodiscard]] virtual bool causal(const Point& p, const Point& q) const = 0;
  [[nodiscard]] virtual bool chron(const Point& p, const Point& q) const = 0;

  /// tau(p,q); 0 when p, q are not causally related, may be kInfinity.
  [[nodiscard]] virtual double timeSep(const Point& p, const Point& q) const = 0;

  /// Upper bound for the d-diameter of J(p,q), assuming p <= q.
  [[nodiscard]] virtual double diameterBound(const Point& p, const Point& q) const = 0;
};

/// J(p,q) with cached tau and diameter bound. Immutable.
class CausalDiamond {
 public:
  /// Diamond with a tau known in closed form by the caller.
  CausalDiamond(Point p, Point q, double tau, double diamBound);

  [[nodiscard]] static CausalDiamond emptyDiamond(Point p, Point q);

  [[nodiscard]] const Point& p() const noexcept { return p_; }
  [[nodiscard]] const Point& q() const noexcept { return q_; }
  [[nodiscard]] double tau() const noexcept { return tau_; }
  [[nodiscard]] double diamBound() const noexcept { return diam_; }
  [[nodiscard]] bool empty() const noexcept { return empty_; }

  /// Image under x -> a x (Minkowski dilation).
  [[nodiscard]] CausalDiamond dilated(double a) const;

 private:
  CausalDiamond() = default;

  Point p_;
  Point q_;
  double tau_ = 0.0;
  double diam_ = 0.0;
  bool empty_ = false;
};

/// omega_N = pi^{(N-1)/2} / (N Gamma((N+1)/2) 2^{N-1}), evaluated through lgamma.
[[nodiscard]] double omega(double N);

/// rho_N(J) = omega_N tau^N with the conventions for empty diamonds, N = 0 and tau = inf.
[[nodiscard]] double rho(double N, const CausalDiamond& diamond);

/// log rho_N for nonempty diamonds with finite tau; -inf when rho is 0.
[[nodiscard]] double logRho(double N, double tau);

[[nodiscard]] CausalDiamond makeDiamond(const CausalSpace& space, const Point& p, const Point& q);

/// Euclidean norm of q - p.
[[nodiscard]] double euclideanDistance(const Point& p, const Point& q);

}  // namespace lmeasure
