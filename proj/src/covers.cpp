#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <string>

#include "lmeasure/errors.hpp"
#include "lmeasure/measure.hpp"
#include "lmeasure/sampling.hpp"

namespace lmeasure {
namespace {

using Vec = Eigen::VectorXd;

Point toPoint(const Vec& v) { return {v.data(), v.data() + v.size()}; }

Vec toVec(const Point& p) { return Eigen::Map<const Vec>(p.data(), static_cast<Eigen::Index>(p.size())); }

double ceilCount(double x) {
  // guard against ceil(3.0000000000000004) when x is an exact quotient
  const double r = std::nearbyint(x);
  if (std::abs(x - r) <= 1e-12 * std::max(1.0, r)) return std::max(1.0, r);
  return std::max(1.0, std::ceil(x));
}

std::size_t toIndex(double x, std::size_t count) {
  if (!(x > 0.0)) return 0;
  const auto i = static_cast<std::size_t>(x);
  return std::min(i, count - 1);
}

// z in J(p,q) up to an absolute slack; coverage checks use slack ~ 1e-12 * diameter
// so points on cell boundaries are not lost to rounding in the cell locator.
bool inDiamond(const MinkowskiSpace& space, const Point& p, const Point& q, const Point& z,
               double slack) {
  const double C = space.coneScale();
  auto rel = [&](const Point& a, const Point& b) {
    double dx2 = 0.0;
    for (std::size_t i = 1; i < a.size(); ++i) dx2 += (b[i] - a[i]) * (b[i] - a[i]);
    const double ct = C * (b[0] - a[0]);
    return ct >= -slack && ct - std::sqrt(dx2) >= -slack;
  };
  return rel(p, z) && rel(z, q);
}

constexpr double kSlack = 1e-12;

}  // namespace

// ---------------------------------------------------------------------------

Cover::Cover(std::string generator, double scale, std::vector<DiamondBlock> blocks,
             double coverageFraction, std::vector<std::pair<std::string, double>> details)
    : generator_(std::move(generator)),
      scale_(scale),
      blocks_(std::move(blocks)),
      coverage_(coverageFraction),
      details_(std::move(details)) {
  for (const auto& b : blocks_) {
    if (b.prototype.empty()) throw DomainError("cover contains an empty diamond");
    if (!(b.multiplicity >= 0.0)) throw DomainError("negative block multiplicity");
  }
}

double Cover::diamondCount() const {
  double n = 0.0;
  for (const auto& b : blocks_) n += b.multiplicity;
  return n;
}

Cover Cover::dilated(double a) const {
  if (!(a > 0.0)) throw DomainError("dilation factor must be positive");
  std::vector<DiamondBlock> out;
  out.reserve(blocks_.size());
  for (const auto& b : blocks_) out.push_back({b.prototype.dilated(a), b.multiplicity});
  return {generator_, scale_ * a, std::move(out), coverage_, details_};
}

Cover Cover::disjointUnion(const Cover& a, const Cover& b) {
  std::vector<DiamondBlock> blocks = a.blocks_;
  blocks.insert(blocks.end(), b.blocks_.begin(), b.blocks_.end());
  return {a.generator_ + "+" + b.generator_, std::max(a.scale_, b.scale_), std::move(blocks),
          std::min(a.coverage_, b.coverage_)};
}

double coverCost(const Cover& cover, double N) {
  if (!cover.verified()) {
    throw RefusalError("cover '" + cover.generator() + "' is not verified (coverage " +
                       std::to_string(cover.coverageFraction()) + ")");
  }
  if (!(N >= 0.0)) throw DomainError("N must be nonnegative");
  double total = 0.0;
  for (const auto& b : cover.blocks()) {
    if (b.multiplicity == 0.0) continue;
    total += b.multiplicity * rho(N, b.prototype);
  }
  return total;
}

// ---------------------------------------------------------------------------

std::string GeneratorSpec::id() const {
  switch (kind) {
    case GeneratorKind::grid:
      return "grid";
    case GeneratorKind::box:
      return "box";
    case GeneratorKind::chain:
      return "chain";
    case GeneratorKind::points:
      return "points";
    case GeneratorKind::null: {
      std::ostringstream s;
      s << "null:" << epsilon;
      return s.str();
    }
  }
  return "unknown";
}

GeneratorSpec parseGenerator(const std::string& text) {
  if (text == "grid") return {GeneratorKind::grid};
  if (text == "box") return {GeneratorKind::box};
  if (text == "chain") return {GeneratorKind::chain};
  if (text == "points") return {GeneratorKind::points};
  if (text.rfind("null", 0) == 0) {
    GeneratorSpec spec{GeneratorKind::null, 0.5};
    if (text.size() > 4) {
      if (text[4] != ':') throw ConfigError("bad generator '" + text + "'");
      std::size_t used = 0;
      try {
        spec.epsilon = std::stod(text.substr(5), &used);
      } catch (const std::exception&) {
        throw ConfigError("bad null epsilon in '" + text + "'");
      }
      if (used != text.size() - 5) throw ConfigError("bad null epsilon in '" + text + "'");
    }
    if (!(spec.epsilon > 0.0 && spec.epsilon < 1.0)) {
      throw DomainError("null cover epsilon must lie in (0,1)");
    }
    return spec;
  }
  throw ConfigError("unknown generator '" + text + "'");
}

bool isApplicable(const GeneratorSpec& spec, const RegionSpec& region) {
  switch (spec.kind) {
    case GeneratorKind::grid:
      return std::holds_alternative<SubspaceCube>(region) &&
             std::get<SubspaceCube>(region).subspace.signature() == SignatureClass::spacelike;
    case GeneratorKind::null:
      return std::holds_alternative<SubspaceCube>(region) &&
             std::get<SubspaceCube>(region).subspace.signature() == SignatureClass::nullDegenerate;
    case GeneratorKind::box:
      return std::holds_alternative<BoxRegion>(region);
    case GeneratorKind::chain:
      return std::holds_alternative<CurveRegion>(region);
    case GeneratorKind::points:
      return std::holds_alternative<PointCloudRegion>(region);
  }
  return false;
}

// ---------------------------------------------------------------------------

EtaComplement etaComplement(const MinkowskiSpace& space, const Eigen::MatrixXd& B) {
  const auto n = static_cast<Eigen::Index>(space.dimension());
  std::vector<Vec> done;
  std::vector<double> norms;
  for (Eigen::Index j = 0; j < B.cols(); ++j) {
    Vec v = B.col(j);
    for (std::size_t i = 0; i < done.size(); ++i) v -= space.eta(v, done[i]) / norms[i] * done[i];
    const double nrm = space.eta(v, v);
    if (!(nrm > 1e-12 * v.squaredNorm())) throw DomainError("etaComplement needs a spacelike span");
    done.push_back(v / std::sqrt(nrm));
    norms.push_back(1.0);
  }
  EtaComplement out;
  const Eigen::Index need = n - B.cols();
  for (Eigen::Index c = 0; c < n && static_cast<Eigen::Index>(out.spacelike.size()) +
                                            (out.normal.size() > 0 ? 1 : 0) < need;
       ++c) {
    Vec v = Vec::Unit(n, c);
    for (std::size_t i = 0; i < done.size(); ++i) v -= space.eta(v, done[i]) / norms[i] * done[i];
    const double nrm = space.eta(v, v);
    if (std::abs(nrm) <= 1e-8 * std::max(1.0, v.squaredNorm())) continue;
    v /= std::sqrt(std::abs(nrm));
    if (nrm < 0.0) {
      if (v(0) < 0.0) v = -v;
      out.normal = v;
      norms.push_back(-1.0);
    } else {
      out.spacelike.push_back(v);
      norms.push_back(1.0);
    }
    done.push_back(v);
  }
  if (out.normal.size() == 0) throw DomainError("etaComplement found no timelike direction");
  return out;
}

// ---------------------------------------------------------------------------

Cover gridCoverCells(const MinkowskiSpace& space, const SubspaceCube& cube, std::size_t cellsPerSide,
                     const CoverageOptions& opts) {
  validateRegion(cube, space);
  if (cube.subspace.signature() != SignatureClass::spacelike) {
    throw WrongGeneratorError("grid cover needs a spacelike cube, got " +
                              std::string(toString(cube.subspace.signature())));
  }
  if (cellsPerSide == 0) throw DomainError("grid cover needs at least one cell per side");
  const Eigen::MatrixXd B = cube.subspace.basisMatrix();
  const Eigen::MatrixXd G = cube.subspace.gram();
  const auto k = static_cast<std::size_t>(B.cols());
  if (k > 20) throw DomainError("grid cover supports k <= 20");

  // eta-circumradius of the cube [-1,1]^k in parameter space
  double rUnit = 0.0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
    Vec s(static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < k; ++i) s(static_cast<Eigen::Index>(i)) = (mask >> i) & 1U ? 1.0 : -1.0;
    rUnit = std::max(rUnit, std::sqrt(s.dot(G * s)));
  }
  const Vec nu = etaComplement(space, B).normal;
  const auto j = static_cast<double>(cellsPerSide);
  const double h = cube.halfSide;
  const double w = 2.0 * h / j;
  const double r = rUnit * h / j;

  const Vec half = r * nu;
  const double diam = space.diamondDiameter(toPoint(2.0 * half));
  std::vector<double> y0(k, -h + 0.5 * w);
  const Vec m0 = toVec(cube.pointAt(y0));
  CausalDiamond proto(toPoint(m0 - half), toPoint(m0 + half), 2.0 * r, diam);

  const Vec c = toVec(cube.center);
  QuasiRandom qr(k);
  std::vector<double> u;
  std::size_t hits = 0;
  for (std::size_t s = 0; s < opts.samples; ++s) {
    qr.next(u);
    Vec y(static_cast<Eigen::Index>(k));
    Vec mid(static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < k; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      y(ii) = (2.0 * u[i] - 1.0) * h;
      const auto idx = toIndex((y(ii) + h) / w, cellsPerSide);
      mid(ii) = -h + (static_cast<double>(idx) + 0.5) * w;
    }
    const Point z = toPoint(c + B * y);
    const Vec m = c + B * mid;
    if (inDiamond(space, toPoint(m - half), toPoint(m + half), z, kSlack * diam)) ++hits;
  }
  const double coverage = opts.samples == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(opts.samples);
  return {"grid", diam, {{proto, std::pow(j, static_cast<double>(k))}}, coverage,
          {{"cellsPerSide", j}, {"radius", r}}};
}

Cover gridCover(const MinkowskiSpace& space, const SubspaceCube& cube, double delta,
                const CoverageOptions& opts) {
  if (!(delta > 0.0)) throw DomainError("delta must be positive");
  if (cube.subspace.signature() != SignatureClass::spacelike) {
    throw WrongGeneratorError("grid cover needs a spacelike cube, got " +
                              std::string(toString(cube.subspace.signature())));
  }
  const Cover one = gridCoverCells(space, cube, 1, {0});
  const double d1 = one.blocks().front().prototype.diamBound();
  // diameter is linear in 1/j
  auto j = static_cast<std::size_t>(ceilCount(d1 / delta));
  while (d1 / static_cast<double>(j) > delta) ++j;
  Cover out = gridCoverCells(space, cube, j, opts);
  if (out.scale() > delta) {
    out = gridCoverCells(space, cube, j + 1, opts);
  }
  return {out.generator(), delta, out.blocks(), out.coverageFraction(), out.details()};
}

// ---------------------------------------------------------------------------

namespace {

using P2 = std::array<double, 2>;

// Sutherland-Hodgman clip of a convex polygon against coord[axis] >= lo (sign = 1)
// or coord[axis] <= lo (sign = -1).
std::vector<P2> clip(const std::vector<P2>& poly, int axis, double bound, double sign) {
  std::vector<P2> out;
  const auto inside = [&](const P2& p) { return sign * (p[axis] - bound) >= 0.0; };
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const P2& a = poly[i];
    const P2& b = poly[(i + 1) % poly.size()];
    const bool ia = inside(a);
    const bool ib = inside(b);
    if (ia) out.push_back(a);
    if (ia != ib) {
      const double f = (bound - a[axis]) / (b[axis] - a[axis]);
      out.push_back({a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1])});
    }
  }
  return out;
}

Cover boxCover2(const MinkowskiSpace& space, const BoxRegion& box, double delta,
                const CoverageOptions& opts) {
  const double C = space.coneScale();
  const double d1 = space.diamondDiameter({1.0 / C, 0.0});
  double h = delta / d1;
  while (space.diamondDiameter({h / C, 0.0}) > delta) h *= 1.0 - 1e-15;

  // null coordinates u = C t + x, v = C t - x; cells are [ih,(i+1)h] x [jh,(j+1)h]
  const double t0 = box.lower[0], t1 = box.upper[0], x0 = box.lower[1], x1 = box.upper[1];
  const std::vector<P2> poly{{C * t0 + x0, C * t0 - x0},
                             {C * t0 + x1, C * t0 - x1},
                             {C * t1 + x1, C * t1 - x1},
                             {C * t1 + x0, C * t1 - x0}};
  const double uMin = C * t0 + x0;
  const double uMax = C * t1 + x1;
  const auto iMin = static_cast<long long>(std::floor(uMin / h));
  const auto iMax = static_cast<long long>(std::ceil(uMax / h)) - 1;
  double count = 0.0;
  for (long long i = iMin; i <= iMax; ++i) {
    auto strip = clip(poly, 0, static_cast<double>(i) * h, 1.0);
    strip = clip(strip, 0, static_cast<double>(i + 1) * h, -1.0);
    if (strip.empty()) continue;
    double vMin = kInfinity;
    double vMax = -kInfinity;
    for (const auto& p : strip) {
      vMin = std::min(vMin, p[1]);
      vMax = std::max(vMax, p[1]);
    }
    const auto jMin = static_cast<long long>(std::floor(vMin / h));
    const auto jMax = std::max(jMin, static_cast<long long>(std::ceil(vMax / h)) - 1);
    count += static_cast<double>(jMax - jMin + 1);
  }

  auto cellDiamond = [&](double i, double j) {
    const double tb = (i + j) * h / (2.0 * C);
    const double xb = (i - j) * h / 2.0;
    return std::pair<Point, Point>{{tb, xb}, {tb + h / C, xb}};
  };

  QuasiRandom qr(2);
  std::vector<double> u;
  std::size_t hits = 0;
  for (std::size_t s = 0; s < opts.samples; ++s) {
    qr.next(u);
    const Point z{t0 + u[0] * (t1 - t0), x0 + u[1] * (x1 - x0)};
    const double uu = C * z[0] + z[1];
    const double vv = C * z[0] - z[1];
    const auto [p, q] = cellDiamond(std::floor(uu / h), std::floor(vv / h));
    if (inDiamond(space, p, q, z, kSlack * delta)) ++hits;
  }
  const auto [p, q] = cellDiamond(std::floor(uMin / h), std::floor((C * t0 - x0) / h));
  CausalDiamond proto(p, q, h, space.diamondDiameter({h / C, 0.0}));
  const double coverage = opts.samples == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(opts.samples);
  return {"box", delta, {{proto, count}}, coverage, {{"cellSide", h}}};
}

Cover boxCoverN(const MinkowskiSpace& space, const BoxRegion& box, double delta,
                const CoverageOptions& opts) {
  const std::size_t n = space.dimension();
  const double C = space.coneScale();
  Point e0(n, 0.0);
  e0[0] = 1.0;
  double T = delta / space.diamondDiameter(e0);
  auto axisDiam = [&](double height) {
    Point v(n, 0.0);
    v[0] = height;
    return space.diamondDiameter(v);
  };
  while (axisDiam(T) > delta) T *= 1.0 - 1e-15;

  // the cell [-at,at] x [-b,b]^{n-1} is inscribed in the on-axis diamond of height T
  const auto nd = static_cast<double>(n);
  const double at = T / (2.0 * nd);
  const double b = C * T * std::sqrt(nd - 1.0) / (2.0 * nd);
  std::vector<double> half(n, b);
  half[0] = at;
  std::vector<std::size_t> counts(n);
  double total = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double m = ceilCount((box.upper[i] - box.lower[i]) / (2.0 * half[i]));
    counts[i] = static_cast<std::size_t>(m);
    total *= m;
  }
  auto cellCenter = [&](const std::vector<double>& z) {
    Point c(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto idx = toIndex((z[i] - box.lower[i]) / (2.0 * half[i]), counts[i]);
      c[i] = box.lower[i] + (2.0 * static_cast<double>(idx) + 1.0) * half[i];
    }
    return c;
  };
  auto diamondAt = [&](Point c) {
    Point p = c;
    Point q = std::move(c);
    p[0] -= T / 2.0;
    q[0] += T / 2.0;
    return std::pair<Point, Point>{std::move(p), std::move(q)};
  };

  QuasiRandom qr(n);
  std::vector<double> u;
  std::size_t hits = 0;
  for (std::size_t s = 0; s < opts.samples; ++s) {
    qr.next(u);
    Point z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = box.lower[i] + u[i] * (box.upper[i] - box.lower[i]);
    const auto [p, q] = diamondAt(cellCenter(z));
    if (inDiamond(space, p, q, z, kSlack * delta)) ++hits;
  }
  auto [p, q] = diamondAt(cellCenter(box.lower));
  CausalDiamond proto(std::move(p), std::move(q), C * T, axisDiam(T));
  const double coverage = opts.samples == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(opts.samples);
  return {"box", delta, {{proto, total}}, coverage, {{"height", T}}};
}

}  // namespace

Cover boxCover(const MinkowskiSpace& space, const BoxRegion& box, double delta,
               const CoverageOptions& opts) {
  validateRegion(box, space);
  if (!(delta > 0.0)) throw DomainError("delta must be positive");
  if (space.dimension() < 2) throw DomainError("box cover needs n >= 2");
  if (space.dimension() == 2) return boxCover2(space, box, delta, opts);
  return boxCoverN(space, box, delta, opts);
}

// ---------------------------------------------------------------------------

namespace {

struct NullFrame {
  Vec nu;                      // future null direction, coefficient of basis[0] up to sign
  std::vector<Vec> spacelike;  // basis[1..]
  Vec e;                       // unit future timelike, eta-orthogonal to the spacelike part
  double sigma;
};

NullFrame nullFrame(const MinkowskiSpace& space, const SubspaceCube& cube) {
  if (cube.subspace.signature() != SignatureClass::nullDegenerate) {
    throw WrongGeneratorError("null cover needs a null-degenerate cube, got " +
                              std::string(toString(cube.subspace.signature())));
  }
  const Eigen::MatrixXd B = cube.subspace.basisMatrix();
  const Eigen::MatrixXd G = cube.subspace.gram();
  const Eigen::Index k = B.cols();
  const double scale = B.col(0).squaredNorm();
  bool adapted = std::abs(G(0, 0)) <= 1e-10 * scale;
  for (Eigen::Index i = 1; i < k && adapted; ++i) {
    for (Eigen::Index j = 1; j < k; ++j) {
      if (std::abs(G(i, j) - (i == j ? 1.0 : 0.0)) > 1e-9) adapted = false;
    }
  }
  if (!adapted) {
    throw DomainError(
        "null cover needs an adapted basis: a null vector, then eta-orthonormal spacelike vectors");
  }
  NullFrame f;
  f.nu = B.col(0);
  if (f.nu(0) < 0.0) f.nu = -f.nu;
  for (Eigen::Index j = 1; j < k; ++j) f.spacelike.push_back(B.col(j));
  f.e = etaComplement(space, B.rightCols(k - 1)).normal;
  f.sigma = -space.eta(f.nu, f.e);
  if (!(f.sigma > 0.0)) throw DomainError("null direction is not future causal");
  return f;
}

}  // namespace

NullCoverPlan planNullCover(const MinkowskiSpace& space, const SubspaceCube& cube, double delta,
                            double eps) {
  validateRegion(cube, space);
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("null cover epsilon must lie in (0,1)");
  if (!(delta > 0.0)) throw DomainError("delta must be positive");
  const NullFrame f = nullFrame(space, cube);
  const auto k = static_cast<double>(cube.subspace.dimension());

  NullCoverPlan plan;
  plan.sigma = f.sigma;
  plan.t = std::pow(delta, -1.0 + 2.0 / eps);
  if (!(plan.t > 0.0)) throw ResolutionError("null cover offset t underflows at this delta");
  auto diamOf = [&](double a) { return space.diamondDiameter(toPoint(a * f.nu + plan.t * f.e)); };
  if (diamOf(0.0) >= delta) {
    throw DomainError("null cover offset t exceeds delta; use delta < 1");
  }
  double a = delta / f.nu.norm();
  for (int it = 0; it < 8; ++it) a *= delta / diamOf(a);
  while (diamOf(a) > delta) a *= 1.0 - 1e-12;
  plan.a = a;
  plan.diameter = diamOf(a);
  plan.tau = std::sqrt(plan.t * (2.0 * a * plan.sigma + plan.t));
  plan.alphaWidth = k >= 2.0 ? a / 2.0 : a;
  plan.betaWidth = k >= 2.0 ? 2.0 * std::sqrt((plan.sigma * plan.t * a + plan.t * plan.t) / (4.0 * (k - 1.0)))
                            : 0.0;
  const double side = 2.0 * cube.halfSide;
  plan.cellsAlpha = ceilCount(side / plan.alphaWidth);
  plan.cellsBeta = k >= 2.0 ? ceilCount(side / plan.betaWidth) : 1.0;
  plan.count = plan.cellsAlpha * std::pow(plan.cellsBeta, k - 1.0);
  return plan;
}

Cover nullCover(const MinkowskiSpace& space, const SubspaceCube& cube, double delta, double eps,
                const CoverageOptions& opts) {
  const NullCoverPlan plan = planNullCover(space, cube, delta, eps);
  const NullFrame f = nullFrame(space, cube);
  const std::size_t k = cube.subspace.dimension();
  const Vec half = 0.5 * (plan.a * f.nu + plan.t * f.e);

  // Cells are [alpha +- alphaWidth/2] x [beta_i +- betaWidth/2]; membership in the
  // diamond around the cell center reads |beta|^2 <= sigma t (a/2 -+ alpha) + t^2/4.
  const bool ambientCheck = plan.t >= 1e-6 * plan.a;
  QuasiRandom qr(k);
  std::vector<double> u;
  std::size_t hits = 0;
  for (std::size_t s = 0; s < opts.samples; ++s) {
    qr.next(u);
    const double alpha = (u[0] - 0.5) * plan.alphaWidth;
    double beta2 = 0.0;
    Vec z = alpha * f.nu;
    for (std::size_t i = 1; i < k; ++i) {
      const double b = (u[i] - 0.5) * plan.betaWidth;
      beta2 += b * b;
      z += b * f.spacelike[i - 1];
    }
    const double st = plan.sigma * plan.t;
    const double quarter = plan.t * plan.t / 4.0;
    bool in = beta2 <= st * (plan.a / 2.0 - alpha) + quarter && beta2 <= st * (plan.a / 2.0 + alpha) + quarter;
    if (in && ambientCheck) {
      in = inDiamond(space, toPoint(-half), toPoint(half), toPoint(z), kSlack * plan.diameter);
    }
    if (in) ++hits;
  }

  std::vector<double> y0(k, -cube.halfSide + 0.5 * plan.betaWidth);
  y0[0] = -cube.halfSide + 0.5 * plan.alphaWidth;
  Vec c0 = toVec(cube.center) + y0[0] * cube.subspace.basisMatrix().col(0);
  for (std::size_t i = 1; i < k; ++i) c0 += y0[i] * f.spacelike[i - 1];
  CausalDiamond proto(toPoint(c0 - half), toPoint(c0 + half), plan.tau, plan.diameter);
  const double coverage = opts.samples == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(opts.samples);
  std::ostringstream id;
  id << "null:" << eps;
  return {id.str(), delta, {{proto, plan.count}}, coverage,
          {{"t", plan.t}, {"a", plan.a}, {"tau", plan.tau}, {"cellsAlpha", plan.cellsAlpha},
           {"cellsBeta", plan.cellsBeta}}};
}

// ---------------------------------------------------------------------------

Cover curveChainCover(const PiecewiseLinearCurve& curve, double delta, const CoverageOptions& opts) {
  if (!(delta > 0.0)) throw DomainError("delta must be positive");
  const MinkowskiSpace& space = curve.space();
  const auto& v = curve.vertices();
  const std::size_t n = space.dimension();
  std::vector<DiamondBlock> blocks;
  std::vector<std::size_t> pieces;
  std::vector<Point> steps;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    Point leg(n);
    for (std::size_t c = 0; c < n; ++c) leg[c] = v[i + 1][c] - v[i][c];
    if (!space.causalWithin(v[i], v[i + 1], kNullRelTol)) {
      throw InvalidCurveError("leg " + std::to_string(i) + " is not causal");
    }
    auto m = static_cast<std::size_t>(ceilCount(space.diamondDiameter(leg) / delta));
    Point step(n);
    auto fill = [&] {
      for (std::size_t c = 0; c < n; ++c) step[c] = leg[c] / static_cast<double>(m);
    };
    fill();
    while (space.diamondDiameter(step) > delta) {
      ++m;
      fill();
    }
    // legs whose tau is below rounding resolution are null
    const Point zero(n, 0.0);
    const double tau = space.chronWithin(v[i], v[i + 1], 1e-6) ? space.timeSep(zero, step) : 0.0;
    Point q = v[i];
    for (std::size_t c = 0; c < n; ++c) q[c] += step[c];
    blocks.push_back({CausalDiamond(v[i], q, tau, space.diamondDiameter(step)), static_cast<double>(m)});
    pieces.push_back(m);
    steps.push_back(step);
  }

  const std::size_t legs = v.size() - 1;
  QuasiRandom qr(1);
  std::vector<double> u;
  std::size_t hits = 0;
  for (std::size_t s = 0; s < opts.samples; ++s) {
    qr.next(u);
    const Point z = curve.at(u[0]);
    const double x = u[0] * static_cast<double>(legs);
    const auto i = toIndex(x, legs);
    const double f = x - static_cast<double>(i);
    const auto idx = toIndex(f * static_cast<double>(pieces[i]), pieces[i]);
    Point p(n);
    Point q(n);
    for (std::size_t c = 0; c < n; ++c) {
      p[c] = v[i][c] + static_cast<double>(idx) * steps[i][c];
      q[c] = idx + 1 == pieces[i] ? v[i + 1][c] : p[c] + steps[i][c];
    }
    if (inDiamond(space, p, q, z, kSlack * delta)) ++hits;
  }
  const double coverage = opts.samples == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(opts.samples);
  return {"chain", delta, std::move(blocks), coverage};
}

Cover pointCloudCover(const MinkowskiSpace& space, const PointCloudRegion& cloud, double delta) {
  validateRegion(cloud, space);
  if (!(delta > 0.0)) throw DomainError("delta must be positive");
  std::vector<Point> pts = cloud.points;
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.empty()) return {"points", delta, {}, 1.0};

  const std::size_t n = space.dimension();
  const double C = space.coneScale();
  // null direction (1/C, 1, 0, ...); on-axis when there is no spatial coordinate
  Point dir(n, 0.0);
  dir[0] = 1.0 / C;
  if (n >= 2) dir[1] = 1.0;
  Point full(n);
  for (std::size_t i = 0; i < n; ++i) full[i] = dir[i];
  double s = 0.5 * delta / space.diamondDiameter(full);
  auto stepOf = [&](double scale) {
    Point v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = 2.0 * scale * dir[i];
    return v;
  };
  while (space.diamondDiameter(stepOf(s)) > delta) s *= 1.0 - 1e-15;

  std::size_t hits = 0;
  for (const auto& x : pts) {
    Point p = x;
    Point q = x;
    for (std::size_t i = 0; i < n; ++i) {
      p[i] -= s * dir[i];
      q[i] += s * dir[i];
    }
    if (inDiamond(space, p, q, x, kSlack * delta)) ++hits;
  }
  Point p = pts.front();
  Point q = pts.front();
  for (std::size_t i = 0; i < n; ++i) {
    p[i] -= s * dir[i];
    q[i] += s * dir[i];
  }
  const double tau = n >= 2 ? 0.0 : 2.0 * C * s;
  const double diam = space.diamondDiameter(stepOf(s));
  return {"points", delta, {{CausalDiamond(std::move(p), std::move(q), tau, diam),
                             static_cast<double>(pts.size())}},
          static_cast<double>(hits) / static_cast<double>(pts.size())};
}

Cover buildCover(const MinkowskiSpace& space, const RegionSpec& region, const GeneratorSpec& spec,
                 double delta, const CoverageOptions& opts) {
  validateRegion(region, space);
  if (!isApplicable(spec, region)) {
    throw WrongGeneratorError("generator '" + spec.id() + "' does not apply to a " +
                              std::string(regionKind(region)) + " region");
  }
  switch (spec.kind) {
    case GeneratorKind::grid:
      return gridCover(space, std::get<SubspaceCube>(region), delta, opts);
    case GeneratorKind::null:
      return nullCover(space, std::get<SubspaceCube>(region), delta, spec.epsilon, opts);
    case GeneratorKind::box:
      return boxCover(space, std::get<BoxRegion>(region), delta, opts);
    case GeneratorKind::chain:
      return curveChainCover(std::get<CurveRegion>(region).curve, delta, opts);
    case GeneratorKind::points:
      return pointCloudCover(space, std::get<PointCloudRegion>(region), delta);
  }
  throw WrongGeneratorError("unknown generator");
}

double upperMeasure(const MinkowskiSpace& space, const RegionSpec& region, double N, double delta,
                    std::span<const GeneratorSpec> generators, const CoverageOptions& opts) {
  double best = kInfinity;
  bool applicable = false;
  bool verified = false;
  for (const auto& g : generators) {
    if (!isApplicable(g, region)) continue;
    applicable = true;
    const Cover c = buildCover(space, region, g, delta, opts);
    if (!c.verified()) continue;
    verified = true;
    best = std::min(best, coverCost(c, N));
  }
  if (!applicable) {
    throw RefusalError("no applicable generator for a " + std::string(regionKind(region)) + " region");
  }
  if (!verified) throw RefusalError("no generator produced a verified cover");
  return best;
}

}  // namespace lmeasure
