#include "lmeasure/curvature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

#include "lmeasure/errors.hpp"

namespace lmeasure {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double integrate(double K, double N, double r) {
  if (r == 0.0) return 0.0;
  const double k = K / N;
  auto f = [k, N](double t) { return std::pow(sK(k, t), N); };
  // tanh-sinh copes with the t^N endpoint behaviour for non-integer N
  boost::math::quadrature::tanh_sinh<double> quad;
  double err = 0.0;
  const double v = quad.integrate(f, 0.0, r, 1e-12, &err);
  if (!(err <= 1e-8 * std::abs(v))) {
    throw ResolutionError("quadrature did not reach 1e-8 relative accuracy");
  }
  return v;
}

}  // namespace

void CurvatureParams::validate() const {
  if (!(N >= 1.0)) throw DomainError("N must be >= 1");
  if (!(Rstar > 0.0)) throw DomainError("Rstar must be positive");
  if (K < 0.0 && std::isinf(Rstar)) throw DomainError("K < 0 needs a finite Rstar");
}

double CurvatureParams::radiusCap() const {
  return K > 0.0 ? std::numbers::pi * std::sqrt(N / K) : kInf;
}

double sK(double K, double t) {
  if (K > 0.0) {
    const double s = std::sqrt(K);
    return std::sin(s * t) / s;
  }
  if (K < 0.0) {
    const double s = std::sqrt(-K);
    return std::sinh(s * t) / s;
  }
  return t;
}

double sKPrime(double K, double t) {
  if (K > 0.0) return std::cos(std::sqrt(K) * t);
  if (K < 0.0) return std::cosh(std::sqrt(-K) * t);
  return 1.0;
}

double comparisonVolume(double K, double N, double r) {
  if (!(N >= 1.0)) throw DomainError("N must be >= 1");
  if (!(r >= 0.0)) throw DomainError("radius must be nonnegative");
  const CurvatureParams cp{K, N, kInf};
  if (r > cp.radiusCap() * (1.0 + 1e-15)) throw DomainError("radius beyond pi sqrt(N/K)");
  return integrate(K, N, r);
}

double bgRatioBound(double K, double N, double r, double R) {
  if (!(r > 0.0) || !(r <= R)) throw DomainError("need 0 < r <= R");
  if (r == R) {
    (void)comparisonVolume(K, N, R);
    return 1.0;
  }
  return comparisonVolume(K, N, r) / comparisonVolume(K, N, R);
}

double tcdDoublingConstant(double K, double N, double Rstar) {
  CurvatureParams{K, N, Rstar}.validate();
  const double base = std::pow(2.0, N + 1.0);
  if (K >= 0.0) return base;
  return base * std::max(1.0, std::pow(std::cosh(std::sqrt(-K / N) * Rstar), N));
}

MonotonicityReport bgMonotonicityProbe(std::size_t n, double N, std::span<const double> rGrid,
                                       double aperture) {
  if (n < 2) throw DomainError("cone probe needs n >= 2");
  if (!(N >= 1.0)) throw DomainError("N must be >= 1");
  if (!(aperture > 0.0 && aperture < 1.0)) throw DomainError("aperture must lie in (0,1)");
  // hyperbolic coordinates: vol = r^n / n * |S^{n-2}| * int_0^{atanh a} sinh^{n-2}
  const double d = static_cast<double>(n) - 2.0;
  const double sphere = 2.0 * std::pow(std::numbers::pi, (d + 1.0) / 2.0) / std::tgamma((d + 1.0) / 2.0);
  const double angular = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      [d](double b) { return std::pow(std::sinh(b), d); }, 0.0, std::atanh(aperture), 15, 1e-14);
  const double c = sphere * angular / static_cast<double>(n);

  MonotonicityReport out;
  out.exponent = static_cast<double>(n) - N - 1.0;
  out.nonincreasing = true;
  for (double r : rGrid) {
    if (!(r > 0.0)) throw DomainError("radii must be positive");
    ProfileRow row{r, c * std::pow(r, static_cast<double>(n)), std::pow(r, N + 1.0) / (N + 1.0), 0.0};
    row.profile = row.volume / row.comparison;
    if (!out.rows.empty()) {
      const auto& prev = out.rows.back();
      if (r > prev.r && row.profile > prev.profile * (1.0 + 1e-12)) out.nonincreasing = false;
    }
    out.rows.push_back(row);
  }
  return out;
}

SyntheticBound parseSyntheticBound(std::string_view s) {
  if (s == "wTCD") return SyntheticBound::wTCD;
  if (s == "TMCP") return SyntheticBound::TMCP;
  throw DomainError("unknown mode '" + std::string(s) + "' (expected wTCD or TMCP)");
}

bool dimensionConsistencyAssert(double n, double N, SyntheticBound mode) {
  return mode == SyntheticBound::wTCD ? n <= N + 1.0 : n <= N;
}

CurvatureRow curvatureRow(double K, double N, double Rstar, double r) {
  CurvatureRow row{K, N, Rstar, r};
  row.L = tcdDoublingConstant(K, N, Rstar);
  row.ratio = bgRatioBound(K, N, r, 2.0 * r);
  row.holds = row.ratio >= 1.0 / row.L;
  return row;
}

void writeCurvatureCsv(std::ostream& out, std::span<const CurvatureRow> rows) {
  const auto old = out.precision(17);
  out << "K,N,Rstar,r,L,ratio,holds\n";
  for (const auto& r : rows) {
    out << r.K << ',' << r.N << ',' << r.Rstar << ',' << r.r << ',' << r.L << ',' << r.ratio << ','
        << (r.holds ? "true" : "false") << '\n';
  }
  out.precision(old);
}

}  // namespace lmeasure
