/// @file curvature.hpp
/// Comparison functions, timelike Bishop-Gromov ratio bounds and the doubling
/// constants they imply.
#pragma once

#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace lmeasure {

struct CurvatureParams {
  double K = 0.0;
  double N = 1.0;
  double Rstar = 0.0;  // +inf allowed only for K >= 0

  /// Throws DomainError when N < 1, Rstar <= 0 or K < 0 with Rstar infinite.
  void validate() const;
  /// pi sqrt(N/K) for K > 0, else +inf.
  [[nodiscard]] double radiusCap() const;
};

/// sin(sqrt(K) t)/sqrt(K), t, or sinh(sqrt(-K) t)/sqrt(-K).
[[nodiscard]] double sK(double K, double t);
/// d/dt sK(K, t).
[[nodiscard]] double sKPrime(double K, double t);

/// int_0^r sK(K/N, t)^N dt / int_0^R sK(K/N, t)^N dt, relative accuracy 1e-8.
[[nodiscard]] double bgRatioBound(double K, double N, double r, double R);

/// int_0^r sK(K/N, t)^N dt.
[[nodiscard]] double comparisonVolume(double K, double N, double r);

/// 2^(N+1), times cosh(sqrt(|K|/N) Rstar)^N when K < 0.
[[nodiscard]] double tcdDoublingConstant(double K, double N, double Rstar);

struct ProfileRow {
  double r = 0.0;
  double volume = 0.0;      // vol(E_r)
  double comparison = 0.0;  // int_0^r t^N dt
  double profile = 0.0;
};

struct MonotonicityReport {
  double exponent = 0.0;  // n - N - 1
  std::vector<ProfileRow> rows;
  bool nonincreasing = false;
};

/// vol(E_r) / int_0^r t^N for E the solid cone |x| <= aperture t in R^n_1 (K = 0).
[[nodiscard]] MonotonicityReport bgMonotonicityProbe(std::size_t n, double N,
                                                     std::span<const double> rGrid,
                                                     double aperture = 0.5);

enum class SyntheticBound { wTCD, TMCP };

[[nodiscard]] SyntheticBound parseSyntheticBound(std::string_view s);

/// n <= N + 1 under wTCD, n <= N under TMCP.
[[nodiscard]] bool dimensionConsistencyAssert(double n, double N, SyntheticBound mode);

struct CurvatureRow {
  double K = 0.0;
  double N = 0.0;
  double Rstar = 0.0;
  double r = 0.0;
  double L = 0.0;
  double ratio = 0.0;  // bgRatioBound(K, N, r, 2r)
  bool holds = false;  // ratio >= 1/L
};

[[nodiscard]] CurvatureRow curvatureRow(double K, double N, double Rstar, double r);
void writeCurvatureCsv(std::ostream& out, std::span<const CurvatureRow> rows);

}  // namespace lmeasure
