/// @file curve_length.hpp
/// tau-length of polygonal causal curves by dyadic partition refinement.
#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "lmeasure/model_spaces.hpp"

namespace lmeasure {

struct PartitionLevel {
  std::size_t level = 0;
  double mesh = 0.0;  // parameter spacing 2^-level
  double sum = 0.0;
};

struct PartitionSumTrace {
  std::vector<PartitionLevel> levels;
  bool converged = false;

  [[nodiscard]] double value() const { return levels.empty() ? 0.0 : levels.back().sum; }
  void writeCsv(std::ostream& out) const;
};

struct TauLengthOptions {
  double tol = 1e-6;
  std::size_t maxLevel = 24;
};

/// Refines until two successive sums differ by less than tol, and at least one
/// level past the first partition that resolves every vertex.
[[nodiscard]] PartitionSumTrace tauLengthTrace(const PiecewiseLinearCurve& curve,
                                               const TauLengthOptions& opts = {});

[[nodiscard]] double tauLength(const PiecewiseLinearCurve& curve, double tol = 1e-6);

/// True iff no pair of the sampleCount equally spaced parameter points is chronologically related.
[[nodiscard]] bool isNullCurve(const PiecewiseLinearCurve& curve, std::size_t sampleCount = 65);

struct LengthComparison {
  double tauLength = 0.0;
  std::vector<double> deltas;
  std::vector<double> upperV1;  // chain-cover cost at N = 1
  bool upperWithinLength = true;  // upperV1 <= tauLength + tol at every delta
  bool converged = true;          // |upperV1 - tauLength| <= tol at the finest delta
};

[[nodiscard]] LengthComparison compareLengthMeasure(const PiecewiseLinearCurve& curve,
                                                    std::span<const double> deltaGrid,
                                                    double tol = 1e-6);

}  // namespace lmeasure
