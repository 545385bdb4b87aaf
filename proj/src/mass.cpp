#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <numbers>

#include "lmeasure/errors.hpp"
#include "lmeasure/measure.hpp"
#include "lmeasure/sampling.hpp"

namespace lmeasure {
namespace {

using Vec = Eigen::VectorXd;

Point toPoint(const Vec& v) { return {v.data(), v.data() + v.size()}; }

Vec toVec(const Point& p) { return Eigen::Map<const Vec>(p.data(), static_cast<Eigen::Index>(p.size())); }

// volume of the cap {x in B(0,r) : x_1 >= r - h}
double capVolume(std::size_t k, double r, double h) {
  if (h <= 0.0) return 0.0;
  if (h >= 2.0 * r) return unitBallVolume(static_cast<double>(k)) * std::pow(r, static_cast<double>(k));
  if (h > r) {
    return unitBallVolume(static_cast<double>(k)) * std::pow(r, static_cast<double>(k)) -
           capVolume(k, r, 2.0 * r - h);
  }
  const double x = std::clamp((2.0 * r * h - h * h) / (r * r), 0.0, 1.0);
  const double kd = static_cast<double>(k);
  return 0.5 * unitBallVolume(kd) * std::pow(r, kd) * boost::math::ibeta((kd + 1.0) / 2.0, 0.5, x);
}

}  // namespace

double unitBallVolume(double k) {
  if (k < 0.0) throw DomainError("ball dimension must be nonnegative");
  return std::exp(0.5 * k * std::log(std::numbers::pi) - std::lgamma(0.5 * k + 1.0));
}

double ballLensVolume(std::size_t k, double r1, double r2, double d) {
  if (k == 0) throw DomainError("ball dimension must be positive");
  if (r1 <= 0.0 || r2 <= 0.0) return 0.0;
  const double kd = static_cast<double>(k);
  if (d >= r1 + r2) return 0.0;
  if (d <= std::abs(r1 - r2)) return unitBallVolume(kd) * std::pow(std::min(r1, r2), kd);
  const double x1 = (d * d + r1 * r1 - r2 * r2) / (2.0 * d);
  return capVolume(k, r1, r1 - x1) + capVolume(k, r2, r2 - (d - x1));
}

double MassDistribution::frostmanConstant(double N, std::size_t budget, std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  double best = 0.0;
  for (std::size_t i = 0; i < budget; ++i) {
    const CausalDiamond J = sampleDiamond(rng, i);
    const double r = rho(N, J);
    if (!(r > 0.0) || std::isinf(r)) continue;
    best = std::max(best, mass(J) / r);
  }
  if (!(best > 0.0)) throw RefusalError("mass sampler produced no diamond with positive mass");
  return best;
}

// ---------------------------------------------------------------------------

UniformCubeMeasure::UniformCubeMeasure(MinkowskiSpace space, SubspaceCube cube, double maxScale)
    : space_(std::move(space)), cube_(std::move(cube)), maxScale_(maxScale) {
  validateRegion(cube_, space_);
  if (cube_.subspace.signature() != SignatureClass::spacelike) {
    throw WrongGeneratorError("uniform cube measure needs a spacelike cube");
  }
  if (!(maxScale > 0.0)) throw DomainError("maxScale must be positive");
  B_ = cube_.subspace.basisMatrix();
  G_ = cube_.subspace.gram();
  Ginv_ = G_.inverse();
  cholU_ = G_.llt().matrixU();
  areaFactor_ = std::sqrt((B_.transpose() * B_).determinant() / G_.determinant());
  const EtaComplement comp = etaComplement(space_, B_);
  normal_ = comp.normal;
  spacelikeComplement_ = comp.spacelike;
}

double UniformCubeMeasure::totalMass() const {
  const auto k = static_cast<double>(B_.cols());
  return std::sqrt((B_.transpose() * B_).determinant()) * std::pow(2.0 * cube_.halfSide, k);
}

Point UniformCubeMeasure::samplePoint(std::span<const double> u) const {
  std::vector<double> y(u.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = (2.0 * u[i] - 1.0) * cube_.halfSide;
  return cube_.pointAt(y);
}

// J(p,q) meets the subspace in the intersection of two eta-balls around the
// projections of p and q; their radii come from the eta-normal parts.
double UniformCubeMeasure::mass(const CausalDiamond& diamond) const {
  if (diamond.empty()) return 0.0;
  const Vec c0 = toVec(cube_.center);
  auto decompose = [&](const Point& x) {
    const Vec d = toVec(x) - c0;
    const Vec etaD = space_.metricMatrix() * d;
    const Vec y = Ginv_ * (B_.transpose() * etaD);
    const Vec w = d - B_ * y;
    return std::pair<Vec, Vec>{y, w};
  };
  const auto [yp, wp] = decompose(diamond.p());
  const auto [yq, wq] = decompose(diamond.q());
  const double rp2 = -space_.eta(wp, wp);
  const double rq2 = -space_.eta(wq, wq);
  if (!(rp2 > 0.0) || !(rq2 > 0.0) || !(-wp(0) > 0.0) || !(wq(0) > 0.0)) return 0.0;
  const double rp = std::sqrt(rp2);
  const double rq = std::sqrt(rq2);
  const auto k = static_cast<std::size_t>(B_.cols());
  const double d = (cholU_ * (yp - yq)).norm();
  const double lens = ballLensVolume(k, rp, rq, d);
  if (lens == 0.0) return 0.0;

  // the lens lies in the smaller ball; use the closed form when that ball is inside the cube
  const bool pSmaller = rp <= rq;
  const Vec& yc = pSmaller ? yp : yq;
  const double rc = pSmaller ? rp : rq;
  const double h = cube_.halfSide;
  bool inside = true;
  Vec lo(static_cast<Eigen::Index>(k));
  Vec hi(static_cast<Eigen::Index>(k));
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(k); ++i) {
    const double ext = rc * std::sqrt(Ginv_(i, i));
    lo(i) = std::max(-h, yc(i) - ext);
    hi(i) = std::min(h, yc(i) + ext);
    if (yc(i) - ext < -h || yc(i) + ext > h) inside = false;
    if (lo(i) >= hi(i)) return 0.0;
  }
  if (inside) return areaFactor_ * lens;

  QuasiRandom qr(k);
  std::vector<double> u;
  constexpr std::size_t samples = 8192;
  std::size_t hits = 0;
  Vec y(static_cast<Eigen::Index>(k));
  for (std::size_t s = 0; s < samples; ++s) {
    qr.next(u);
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(k); ++i) {
      y(i) = lo(i) + u[static_cast<std::size_t>(i)] * (hi(i) - lo(i));
    }
    if ((cholU_ * (y - yp)).squaredNorm() <= rp2 && (cholU_ * (y - yq)).squaredNorm() <= rq2) ++hits;
  }
  const double boxVolume = (hi - lo).prod();
  return std::sqrt((B_.transpose() * B_).determinant()) * boxVolume * static_cast<double>(hits) /
         static_cast<double>(samples);
}

CausalDiamond UniformCubeMeasure::sampleDiamond(std::mt19937_64& rng, std::size_t index) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto k = static_cast<std::size_t>(B_.cols());
  std::vector<double> u(k);
  for (auto& x : u) x = unit(rng);
  const Vec z = toVec(samplePoint(u));
  const double s = maxScale_ * (0.05 + 0.95 * unit(rng));
  if (index % 4 == 0) {
    return makeDiamond(space_, toPoint(z - s * normal_), toPoint(z + s * normal_));
  }
  // tilted ends: spacelike offsets of eta-length < 0.9 s inside and outside the subspace
  std::vector<Vec> spacelike = spacelikeComplement_;
  for (Eigen::Index j = 0; j < B_.cols(); ++j) {
    Vec b = B_.col(j);
    for (const auto& v : spacelike) b -= space_.eta(b, v) * v;
    const double nrm = space_.eta(b, b);
    if (nrm > 1e-12) spacelike.push_back(b / std::sqrt(nrm));
  }
  auto tilt = [&] {
    Vec v = Vec::Zero(normal_.size());
    std::normal_distribution<double> gauss;
    for (const auto& e : spacelike) v += gauss(rng) * e;
    const double len = std::sqrt(std::max(space_.eta(v, v), 0.0));
    if (len > 0.0) v *= 0.9 * unit(rng) / len;
    return v;
  };
  const Vec a = tilt();
  const Vec b = tilt();
  const double s2 = s * (0.5 + unit(rng));
  return makeDiamond(space_, toPoint(z - s * (normal_ + a)), toPoint(z + s2 * (normal_ + b)));
}

// ---------------------------------------------------------------------------

SegmentLengthMeasure::SegmentLengthMeasure(MinkowskiSpace space, Point a, Point b, double maxScale)
    : space_(std::move(space)), a_(std::move(a)), b_(std::move(b)), maxScale_(maxScale) {
  if (!space_.chronWithin(a_, b_, 1e-6)) throw DomainError("segment measure needs a timelike segment");
  if (!(maxScale > 0.0)) throw DomainError("maxScale must be positive");
  length_ = space_.timeSep(a_, b_);
  const Vec v = toVec(b_) - toVec(a_);
  const auto n = static_cast<Eigen::Index>(space_.dimension());
  std::vector<Vec> basis{v};
  std::vector<double> norms{space_.eta(v, v)};
  for (Eigen::Index c = 1; c < n; ++c) {
    Vec w = Vec::Unit(n, c);
    for (std::size_t i = 0; i < basis.size(); ++i) w -= space_.eta(w, basis[i]) / norms[i] * basis[i];
    const double nrm = space_.eta(w, w);
    if (nrm <= 1e-12) continue;
    w /= std::sqrt(nrm);
    basis.push_back(w);
    norms.push_back(1.0);
    orthogonal_.push_back(w);
  }
}

Point SegmentLengthMeasure::samplePoint(std::span<const double> u) const {
  Point z = a_;
  for (std::size_t i = 0; i < z.size(); ++i) z[i] += u[0] * (b_[i] - a_[i]);
  return z;
}

// On a timelike line J+(p) is a ray [s_p, inf) and J-(q) a ray (-inf, s_q].
double SegmentLengthMeasure::mass(const CausalDiamond& diamond) const {
  if (diamond.empty()) return 0.0;
  const Vec a = toVec(a_);
  const Vec v = toVec(b_) - a;
  const double A = space_.eta(v, v);
  auto roots = [&](const Point& x) {
    const Vec d = a - toVec(x);
    const double B = space_.eta(v, d);
    const double c = space_.eta(d, d);
    const double disc = std::max(B * B - A * c, 0.0);
    const double r = std::sqrt(disc);
    return std::pair<double, double>{(-B + r) / A, (-B - r) / A};  // smaller, larger
  };
  const double start = roots(diamond.p()).second;
  const double end = roots(diamond.q()).first;
  const double lo = std::max(0.0, start);
  const double hi = std::min(1.0, end);
  return hi > lo ? length_ * (hi - lo) : 0.0;
}

CausalDiamond SegmentLengthMeasure::sampleDiamond(std::mt19937_64& rng, std::size_t index) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Vec a = toVec(a_);
  const Vec v = toVec(b_) - a;
  const Vec vhat = v / length_;
  const Vec z = a + unit(rng) * v;
  const double ell = maxScale_ * (0.05 + 0.95 * unit(rng));
  if (index % 4 == 0 || orthogonal_.empty()) {
    return makeDiamond(space_, toPoint(z - 0.5 * ell * vhat), toPoint(z + 0.5 * ell * vhat));
  }
  auto tilt = [&] {
    Vec w = Vec::Zero(v.size());
    std::normal_distribution<double> gauss;
    for (const auto& e : orthogonal_) w += gauss(rng) * e;
    const double len = std::sqrt(std::max(space_.eta(w, w), 0.0));
    if (len > 0.0) w *= 0.9 * unit(rng) / len;
    return w;
  };
  const Vec ta = tilt();
  const Vec tb = tilt();
  return makeDiamond(space_, toPoint(z - 0.5 * ell * (vhat + ta)),
                     toPoint(z + 0.5 * ell * (0.5 + unit(rng)) * (vhat + tb)));
}

// ---------------------------------------------------------------------------

std::unique_ptr<MassDistribution> naturalMassDistribution(const MinkowskiSpace& space,
                                                          const RegionSpec& region, double maxScale) {
  if (const auto* cube = std::get_if<SubspaceCube>(&region)) {
    if (cube->subspace.signature() == SignatureClass::spacelike) {
      return std::make_unique<UniformCubeMeasure>(space, *cube, maxScale);
    }
  }
  if (const auto* curve = std::get_if<CurveRegion>(&region)) {
    const auto& v = curve->curve.vertices();
    if (v.size() == 2 && curve->curve.causalityClass() == CurveClass::timelike) {
      return std::make_unique<SegmentLengthMeasure>(space, v.front(), v.back(), maxScale);
    }
  }
  throw RefusalError("no natural mass distribution for this " + std::string(regionKind(region)) +
                     " region");
}

double lowerMeasure(const MinkowskiSpace& space, const RegionSpec& region, double N,
                    const MassDistribution& massDist, std::size_t sampleBudget, std::uint64_t seed) {
  validateRegion(region, space);
  if (sampleBudget == 0) throw RefusalError("sample budget is zero");
  const double total = massDist.totalMass();
  if (!(total > 0.0)) throw RefusalError("mass distribution has no mass");
  // rejection check: sampled support points must lie in the region
  QuasiRandom qr(massDist.sampleDimension());
  std::vector<double> u;
  for (int i = 0; i < 64; ++i) {
    qr.next(u);
    if (!regionContains(region, massDist.samplePoint(u), 1e-7)) {
      throw RefusalError("mass distribution is not supported on the region");
    }
  }
  return total / massDist.frostmanConstant(N, sampleBudget, seed);
}

}  // namespace lmeasure
