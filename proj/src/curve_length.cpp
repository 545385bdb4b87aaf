#include "lmeasure/curve_length.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "lmeasure/errors.hpp"
#include "lmeasure/measure.hpp"

namespace lmeasure {

void PartitionSumTrace::writeCsv(std::ostream& out) const {
  const auto old = out.precision(17);
  out << "level,mesh,sum\n";
  for (const auto& l : levels) out << l.level << ',' << l.mesh << ',' << l.sum << '\n';
  out.precision(old);
}

namespace {

// Sum over the partition s_i = i / 2^level. Pairs inside one null leg contribute
// exactly 0 instead of the rounding residue of timeSep.
double partitionSum(const PiecewiseLinearCurve& curve, const std::vector<bool>& nullLeg,
                    std::size_t level) {
  const MinkowskiSpace& space = curve.space();
  const auto legs = static_cast<double>(curve.legCount());
  const std::size_t m = std::size_t{1} << level;
  auto legOf = [&](double s, bool upper) {
    const double x = s * legs;
    auto i = static_cast<std::size_t>(x);
    if (upper && static_cast<double>(i) == x && i > 0) --i;
    return std::min(i, curve.legCount() - 1);
  };
  double sum = 0.0;
  Point prev = curve.at(0.0);
  for (std::size_t i = 1; i <= m; ++i) {
    const double s0 = static_cast<double>(i - 1) / static_cast<double>(m);
    const double s1 = static_cast<double>(i) / static_cast<double>(m);
    Point next = curve.at(s1);
    // interpolation rounding scales with the coordinates, not with the step
    double mag = 0.0;
    for (double x : next) mag = std::max(mag, std::abs(x));
    const double step = euclideanDistance(prev, next);
    const double relTol = kNullRelTol + 16.0 * std::numeric_limits<double>::epsilon() * mag / step;
    if (!space.causalWithin(prev, next, relTol)) {
      throw InvalidCurveError("partition points at s = " + std::to_string(s0) + ", " +
                              std::to_string(s1) + " are not causally related");
    }
    const std::size_t l0 = legOf(s0, false);
    const std::size_t l1 = legOf(s1, true);
    if (!(l0 == l1 && nullLeg[l0])) sum += space.timeSep(prev, next);
    prev = std::move(next);
  }
  return sum;
}

}  // namespace

PartitionSumTrace tauLengthTrace(const PiecewiseLinearCurve& curve, const TauLengthOptions& opts) {
  if (!(opts.tol > 0.0)) throw DomainError("tolerance must be positive");
  const auto& v = curve.vertices();
  std::vector<bool> nullLeg(curve.legCount());
  for (std::size_t i = 0; i < nullLeg.size(); ++i) {
    nullLeg[i] = !curve.space().chronWithin(v[i], v[i + 1], 1e-6);
  }
  std::size_t minLevel = 1;
  while ((std::size_t{1} << (minLevel - 1)) < curve.legCount()) ++minLevel;

  PartitionSumTrace trace;
  for (std::size_t level = 0; level <= opts.maxLevel; ++level) {
    const double sum = partitionSum(curve, nullLeg, level);
    trace.levels.push_back({level, std::ldexp(1.0, -static_cast<int>(level)), sum});
    if (level >= minLevel && level > 0 &&
        std::abs(sum - trace.levels[level - 1].sum) < opts.tol) {
      trace.converged = true;
      break;
    }
  }
  return trace;
}

double tauLength(const PiecewiseLinearCurve& curve, double tol) {
  return tauLengthTrace(curve, {tol}).value();
}

bool isNullCurve(const PiecewiseLinearCurve& curve, std::size_t sampleCount) {
  if (sampleCount < 2) throw DomainError("isNullCurve needs at least 2 samples");
  std::vector<Point> pts;
  pts.reserve(sampleCount);
  for (std::size_t i = 0; i < sampleCount; ++i) {
    pts.push_back(curve.at(static_cast<double>(i) / static_cast<double>(sampleCount - 1)));
  }
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      if (curve.space().chronWithin(pts[i], pts[j], 1e-6)) return false;
    }
  }
  return true;
}

LengthComparison compareLengthMeasure(const PiecewiseLinearCurve& curve,
                                      std::span<const double> deltaGrid, double tol) {
  LengthComparison out;
  out.tauLength = tauLength(curve, tol);
  for (double d : deltaGrid) {
    const double v1 = coverCost(curveChainCover(curve, d), 1.0);
    out.deltas.push_back(d);
    out.upperV1.push_back(v1);
    out.upperWithinLength = out.upperWithinLength && v1 <= out.tauLength + tol;
  }
  out.converged = out.upperV1.empty() || std::abs(out.upperV1.back() - out.tauLength) <= tol;
  return out;
}

}  // namespace lmeasure
