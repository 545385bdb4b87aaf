#include "lmeasure/causal_core.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "lmeasure/errors.hpp"

namespace lmeasure {

double CausalSpace::dist(const Point& p, const Point& q) const { return euclideanDistance(p, q); }

double euclideanDistance(const Point& p, const Point& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = q[i] - p[i];
    s += d * d;
  }
  return std::sqrt(s);
}

CausalDiamond::CausalDiamond(Point p, Point q, double tau, double diamBound)
    : p_(std::move(p)), q_(std::move(q)), tau_(tau), diam_(diamBound) {
  if (!(tau >= 0.0) || !(diamBound >= 0.0)) {
    throw DomainError("diamond needs tau >= 0 and diamBound >= 0");
  }
}

CausalDiamond CausalDiamond::emptyDiamond(Point p, Point q) {
  CausalDiamond d;
  d.p_ = std::move(p);
  d.q_ = std::move(q);
  d.empty_ = true;
  return d;
}

CausalDiamond CausalDiamond::dilated(double a) const {
  CausalDiamond d = *this;
  for (auto& x : d.p_) x *= a;
  for (auto& x : d.q_) x *= a;
  d.tau_ *= a;
  d.diam_ *= a;
  return d;
}

double omega(double N) {
  if (!(N > 0.0)) {
    throw DomainError("omega needs N > 0, got " + std::to_string(N));
  }
  if (N == 1.0) return 1.0;
  const double logw = 0.5 * (N - 1.0) * std::log(std::numbers::pi) - std::log(N) -
                      std::lgamma(0.5 * (N + 1.0)) - (N - 1.0) * std::numbers::ln2;
  return std::exp(logw);
}

double logRho(double N, double tau) {
  if (N == 0.0) return 0.0;
  if (tau == 0.0) return -kInfinity;
  return std::log(omega(N)) + N * std::log(tau);
}

double rho(double N, const CausalDiamond& diamond) {
  if (N < 0.0) throw DomainError("rho needs N >= 0");
  if (diamond.empty()) return 0.0;
  if (N == 0.0) return 1.0;
  if (diamond.tau() == kInfinity) return kInfinity;
  return omega(N) * std::pow(diamond.tau(), N);
}

CausalDiamond makeDiamond(const CausalSpace& space, const Point& p, const Point& q) {
  if (p.size() != space.dimension() || q.size() != space.dimension()) {
    throw DomainError("point dimension does not match the space");
  }
  if (p != q && !space.causal(p, q)) return CausalDiamond::emptyDiamond(p, q);
  return CausalDiamond(p, q, space.timeSep(p, q), space.diameterBound(p, q));
}

}  // namespace lmeasure
