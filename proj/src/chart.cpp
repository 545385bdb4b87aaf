#include "lmeasure/chart.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "lmeasure/errors.hpp"
#include "lmeasure/sampling.hpp"

namespace lmeasure {
namespace {

Tensor etaTensor(std::size_t n, double C = 1.0) {
  Tensor g = Tensor::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  g(0, 0) = -C * C;
  return g;
}

double spectralNorm(const Tensor& m) {
  const Eigen::SelfAdjointEigenSolver<Tensor> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

std::string describe(std::span<const double> x) {
  std::ostringstream s;
  s << '(';
  for (std::size_t i = 0; i < x.size(); ++i) s << (i ? ", " : "") << x[i];
  s << ')';
  return s.str();
}

// Number of negative eigenvalues; throws when one is (numerically) zero.
int negativeCount(const Tensor& g, std::span<const double> x) {
  const Eigen::SelfAdjointEigenSolver<Tensor> es(g, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  int neg = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev(i)) <= 1e-12 * scale) {
      throw InvalidMetricError("degenerate metric at " + describe(x));
    }
    if (ev(i) < 0.0) ++neg;
  }
  return neg;
}

// Unit spatial directions used to probe cone boundaries.
std::vector<std::vector<double>> spatialDirections(std::size_t d, std::size_t count) {
  std::vector<std::vector<double>> out;
  if (d == 1) return {{1.0}, {-1.0}};
  if (d == 2) {
    for (std::size_t k = 0; k < count; ++k) {
      const double a = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(count);
      out.push_back({std::cos(a), std::sin(a)});
    }
    return out;
  }
  // Fibonacci points on S^2
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (std::size_t k = 0; k < count; ++k) {
    const double z = 1.0 - 2.0 * (static_cast<double>(k) + 0.5) / static_cast<double>(count);
    const double r = std::sqrt(1.0 - z * z);
    const double a = golden * static_cast<double>(k);
    out.push_back({r * std::cos(a), r * std::sin(a), z});
  }
  return out;
}

double spatialNorm(std::span<const double> v) {
  double s = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i) s += v[i] * v[i];
  return std::sqrt(s);
}

// Bounding box of the eta_C diamond of p, q, clipped to the domain.
ChartBox diamondBox(const ChartBox& domain, const Point& p, const Point& q, double C) {
  const std::size_t n = p.size();
  const double T = q[0] - p[0];
  ChartBox box{Point(n), Point(n)};
  box.lower[0] = std::max(p[0], domain.lower[0]);
  box.upper[0] = std::min(q[0], domain.upper[0]);
  for (std::size_t k = 1; k < n; ++k) {
    const double mid = 0.5 * (p[k] + q[k]);
    box.lower[k] = std::max(mid - 0.5 * C * T, domain.lower[k]);
    box.upper[k] = std::min(mid + 0.5 * C * T, domain.upper[k]);
  }
  return box;
}

}  // namespace

// ---------------------------------------------------------------------------

bool ChartBox::contains(std::span<const double> x) const {
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (x[i] < lower[i] || x[i] > upper[i]) return false;
  }
  return true;
}

std::vector<Point> ChartBox::grid(std::size_t resolution) const {
  if (resolution < 2) throw DomainError("grid resolution must be >= 2");
  const std::size_t n = lower.size();
  std::vector<Point> out;
  std::vector<std::size_t> idx(n, 0);
  for (;;) {
    Point x(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = lower[i] + (upper[i] - lower[i]) * static_cast<double>(idx[i]) /
                            static_cast<double>(resolution - 1);
    }
    out.push_back(std::move(x));
    std::size_t k = 0;
    while (k < n && ++idx[k] == resolution) idx[k++] = 0;
    if (k == n) break;
  }
  return out;
}

double ChartBox::volume() const {
  double v = 1.0;
  for (std::size_t i = 0; i < lower.size(); ++i) v *= upper[i] - lower[i];
  return v;
}

ChartMetric::ChartMetric(std::string name, std::size_t n, Field field)
    : name_(std::move(name)), n_(n), field_(std::move(field)) {
  if (n < 2 || n > 4) throw DomainError("chart metrics support 2 <= n <= 4");
  if (!field_) throw DomainError("chart metric needs a field");
}

ChartMetric ChartMetric::minkowski(std::size_t n) {
  return {"minkowski", n, [n](std::span<const double>) { return etaTensor(n); }};
}

ChartMetric ChartMetric::conformalBump(std::size_t n, double a) {
  if (!(a >= 0.0)) throw DomainError("bump amplitude must be nonnegative");
  return {"conformal-bump", n, [n, a](std::span<const double> x) {
            Tensor g = etaTensor(n);
            g(0, 0) = -(1.0 + a * spatialNorm(x));
            return g;
          }};
}

ChartMetric ChartMetric::anisotropicStretch(std::size_t n, double s) {
  if (!(s > 0.0)) throw DomainError("stretch must be positive");
  return {"anisotropic-stretch", n, [n, s](std::span<const double>) {
            Tensor g = etaTensor(n);
            g(1, 1) = s * s;
            return g;
          }};
}

ChartMetric ChartMetric::scaled(std::size_t n, double a) {
  if (!(a > 0.0)) throw DomainError("scale must be positive");
  return {"scaled", n, [n, a](std::span<const double>) { return Tensor(a * a * etaTensor(n)); }};
}

ChartMetric ChartMetric::coneScaled(std::size_t n, double C) {
  if (!(C > 0.0)) throw DomainError("cone scale must be positive");
  return {"cone-scaled", n, [n, C](std::span<const double>) { return etaTensor(n, C); }};
}

Tensor ChartMetric::at(std::span<const double> x) const {
  if (x.size() != n_) throw DomainError("point dimension does not match the chart");
  return field_(x);
}

double ChartMetric::quad(std::span<const double> x, std::span<const double> v) const {
  const Tensor g = at(x);
  double s = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      s += g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * v[i] * v[j];
    }
  }
  return s;
}

double ChartMetric::chordWeight(const Point& a, const Point& b) const {
  std::array<double, 4> v{};
  std::array<double, 4> mid{};
  bool zero = true;
  for (std::size_t i = 0; i < n_; ++i) {
    v[i] = b[i] - a[i];
    mid[i] = 0.5 * (a[i] + b[i]);
    zero = zero && v[i] == 0.0;
  }
  if (zero) return 0.0;
  if (!(v[0] > 0.0)) return -kInfinity;
  const Tensor g = at(std::span<const double>(mid.data(), n_));
  double gv = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      const double t = g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * v[i] * v[j];
      gv += t;
      scale += std::abs(t);
    }
  }
  // null chords on the lattice must survive rounding
  if (gv > 1e-12 * scale) return -kInfinity;
  return std::sqrt(std::max(0.0, -gv));
}

DetBounds detBounds(const ChartMetric& metric, const ChartBox& box, std::size_t resolution) {
  DetBounds out{kInfinity, 0.0};
  for (const auto& x : box.grid(resolution)) {
    const double d = std::abs(metric.at(x).determinant());
    out.min = std::min(out.min, d);
    out.max = std::max(out.max, d);
  }
  if (!(out.min > 0.0)) throw InvalidMetricError("metric determinant vanishes on the sample grid");
  return out;
}

double supDeviation(const ChartMetric& metric, const ChartBox& box, std::size_t resolution) {
  const Tensor eta = etaTensor(metric.dimension());
  double out = 0.0;
  for (const auto& x : box.grid(resolution)) out = std::max(out, spectralNorm(metric.at(x) - eta));
  return out;
}

double continuityModulus(const ChartMetric& metric, const ChartBox& box, std::size_t resolution) {
  const auto pts = box.grid(resolution);
  const std::size_t n = box.dimension();
  double out = 0.0;
  std::size_t stride = 1;
  for (std::size_t axis = 0; axis < n; ++axis) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if ((i / stride) % resolution == resolution - 1) continue;
      out = std::max(out, spectralNorm(metric.at(pts[i]) - metric.at(pts[i + stride])));
    }
    stride *= resolution;
  }
  return out;
}

ConeSandwich verifyConeSandwich(const ChartMetric& metric, const ChartBox& box, double C,
                                std::size_t resolution, std::size_t directions) {
  if (!(C > 1.0)) throw DomainError("cone sandwich needs C > 1");
  const std::size_t n = metric.dimension();
  if (box.dimension() != n) throw DomainError("box dimension does not match the chart");
  const auto dirs = spatialDirections(n - 1, directions);
  ConeSandwich out;
  out.C = C;
  out.resolution = resolution;
  out.directions = dirs.size();
  out.innerMargin = out.outerMargin = out.timeMargin = kInfinity;
  double worst = kInfinity;
  std::vector<double> v1(n);
  std::vector<double> v2(n);
  for (const auto& x : box.grid(resolution)) {
    const Tensor g = metric.at(x);
    if (negativeCount(g, x) != 1) {
      throw InvalidMetricError("metric is not Lorentzian at " + describe(x));
    }
    const double gtt = -g(0, 0);
    out.timeMargin = std::min(out.timeMargin, gtt);
    double local = gtt;
    for (const auto& u : dirs) {
      v1[0] = v2[0] = 1.0;
      for (std::size_t k = 0; k + 1 < n; ++k) {
        v1[k + 1] = u[k] / C;
        v2[k + 1] = u[k] * C;
      }
      const double m1 = -metric.quad(x, v1) / (1.0 + 1.0 / (C * C));
      const double m2 = metric.quad(x, v2) / (1.0 + C * C);
      out.innerMargin = std::min(out.innerMargin, m1);
      out.outerMargin = std::min(out.outerMargin, m2);
      local = std::min({local, m1, m2});
    }
    if (local < worst) {
      worst = local;
      out.worstPoint = x;
    }
  }
  out.verified = out.innerMargin > 0.0 && out.outerMargin > 0.0 && out.timeMargin > 0.0;
  return out;
}

double enlargementFactor(double C) { return 3.0 * C * C + 2.0; }

CylindricalNeighborhood::CylindricalNeighborhood(std::size_t n, double B, double C,
                                                 Point spatialCenter, double zHalf, double vHalf,
                                                 double widthFraction)
    : n_(n), C_(C), lambda_(enlargementFactor(C)) {
  if (n < 2 || n > 4) throw DomainError("cylindrical neighborhoods need 2 <= n <= 4");
  if (!(B > 0.0) || !(C >= 1.0)) throw DomainError("need B > 0 and C >= 1");
  if (spatialCenter.size() != n - 1) throw DomainError("spatial center has the wrong dimension");
  if (!(vHalf > 0.0) || !(zHalf >= vHalf)) throw DomainError("need 0 < vHalf <= zHalf");
  if (!(widthFraction > 0.0 && widthFraction < 1.0)) {
    throw DomainError("inner width fraction must lie in (0,1)");
  }
  const double width = widthFraction * B / (4.0 * lambda_);
  a_ = 0.5 * B - 0.5 * width;
  b_ = 0.5 * B + 0.5 * width;
  W_ = {Point(n), Point(n)};
  Wprime_ = {Point(n), Point(n)};
  W_.lower[0] = 0.0;
  W_.upper[0] = B;
  Wprime_.lower[0] = a_;
  Wprime_.upper[0] = b_;
  for (std::size_t k = 1; k < n; ++k) {
    W_.lower[k] = spatialCenter[k - 1] - zHalf;
    W_.upper[k] = spatialCenter[k - 1] + zHalf;
    Wprime_.lower[k] = spatialCenter[k - 1] - vHalf;
    Wprime_.upper[k] = spatialCenter[k - 1] + vHalf;
  }
  // extreme pair p = (a, x), q = (b, x)
  const Enlargement e = enlargeDiamond(Wprime_.lower, [&] {
    Point q = Wprime_.lower;
    q[0] = b_;
    return q;
  }(), lambda_, &W_);
  if (!e.insideOuter) throw DomainError("enlarged inner pairs leave the outer box");
}

Enlargement enlargeDiamond(const Point& p, const Point& q, double lambda, const ChartBox* outer) {
  if (p.size() != q.size() || p.empty()) throw DomainError("points of different dimension");
  for (std::size_t k = 1; k < p.size(); ++k) {
    if (p[k] != q[k]) throw DomainError("enlargement needs an on-axis pair");
  }
  if (!(p[0] < q[0])) throw DomainError("enlargement needs t < s");
  const double h = q[0] - p[0];
  Enlargement e{p, q, true};
  e.pHat[0] = p[0] - lambda * h;
  e.qHat[0] = q[0] + lambda * h;
  if (outer != nullptr) {
    // the outer box is open in time: (0, B)
    e.insideOuter = e.pHat[0] > outer->lower[0] && e.qHat[0] < outer->upper[0];
    for (std::size_t k = 1; k < p.size(); ++k) {
      e.insideOuter = e.insideOuter && p[k] >= outer->lower[k] && p[k] <= outer->upper[k];
    }
  }
  return e;
}

// ---------------------------------------------------------------------------

CausalGraph::CausalGraph(const ChartMetric& metric, const ChartBox& domain, const Point& p,
                         const Point& q, double C, const GraphOptions& opts)
    : metric_(&metric), domain_(domain), p_(p), q_(q), C_(C) {
  const std::size_t n = metric.dimension();
  if (p.size() != n || q.size() != n || domain.dimension() != n) {
    throw DomainError("graph points do not match the chart dimension");
  }
  if (!(q[0] > p[0])) throw DomainError("graph needs q later than p");
  if (!domain.contains(p) || !domain.contains(q)) throw DomainError("graph endpoints leave the domain");
  if (opts.steps < 1 || opts.stencil < 1 || opts.refine < 1) throw DomainError("bad graph options");
  d_ = n - 1;
  steps_ = static_cast<long>(opts.steps);
  stencil_ = static_cast<long>(opts.stencil);
  const double T = q[0] - p[0];
  hT_ = T / static_cast<double>(steps_);

  // spatial pitch: null speed of g along each axis at the diamond centre
  Point mid(n);
  for (std::size_t i = 0; i < n; ++i) mid[i] = 0.5 * (p[i] + q[i]);
  const Tensor gm = metric.at(mid);
  hX_.resize(d_);
  jLo_.resize(d_);
  jHi_.resize(d_);
  stride_.resize(d_);
  for (std::size_t k = 0; k < d_; ++k) {
    const auto kk = static_cast<Eigen::Index>(k + 1);
    const double a = gm(kk, kk);
    const double b = gm(0, kk);
    const double c = gm(0, 0);
    const double disc = b * b - a * c;
    double u = 1.0;
    if (a > 0.0 && disc > 0.0) u = (-b + std::sqrt(disc)) / a;
    if (!(u > 0.0)) u = 1.0;
    hX_[k] = u * hT_ / static_cast<double>(opts.refine);
    const double lo = std::max(mid[k + 1] - 0.5 * C * T, domain.lower[k + 1]);
    const double hi = std::min(mid[k + 1] + 0.5 * C * T, domain.upper[k + 1]);
    jLo_[k] = static_cast<long>(std::ceil((lo - p[k + 1]) / hX_[k] - 1e-9));
    jHi_[k] = static_cast<long>(std::floor((hi - p[k + 1]) / hX_[k] + 1e-9));
    jLo_[k] = std::min(jLo_[k], 0L);
    jHi_[k] = std::max(jHi_[k], 0L);
    stride_[k] = spatialCount_;
    spatialCount_ *= jHi_[k] - jLo_[k] + 1;
  }

  for (long di = 1; di <= stencil_; ++di) {
    std::vector<long> bound(d_);
    for (std::size_t k = 0; k < d_; ++k) {
      bound[k] = static_cast<long>(std::ceil(C * static_cast<double>(di) * hT_ / hX_[k] + 1e-9));
    }
    std::vector<long> dj(d_);
    for (std::size_t k = 0; k < d_; ++k) dj[k] = -bound[k];
    for (;;) {
      double r2 = 0.0;
      for (std::size_t k = 0; k < d_; ++k) {
        const double x = static_cast<double>(dj[k]) * hX_[k];
        r2 += x * x;
      }
      const double reach = C * static_cast<double>(di) * hT_;
      if (r2 <= reach * reach * (1.0 + 1e-12)) offsets_.push_back({di, dj});
      std::size_t k = 0;
      while (k < d_ && ++dj[k] > bound[k]) {
        dj[k] = -bound[k];
        ++k;
      }
      if (k == d_) break;
    }
  }

  const auto total = static_cast<std::size_t>((steps_ + 1) * spatialCount_);
  forward_.assign(total, -kInfinity);
  backward_.assign(total, -kInfinity);
  std::vector<char> inside(total);
  std::vector<Point> pts(total);
  for (std::size_t node = 0; node < total; ++node) {
    pts[node] = nodePoint(node);
    inside[node] = domain_.contains(pts[node]) ? 1 : 0;
  }

  std::vector<long> j(d_);
  auto decode = [&](long s) {
    for (std::size_t k = 0; k < d_; ++k) {
      j[k] = jLo_[k] + (s / stride_[k]) % (jHi_[k] - jLo_[k] + 1);
    }
  };
  std::vector<long> j2(d_);

  std::vector<long> zero(d_, 0);
  forward_[static_cast<std::size_t>(spatialIndex(zero))] = 0.0;
  for (long i = 0; i < steps_; ++i) {
    for (long s = 0; s < spatialCount_; ++s) {
      const auto node = static_cast<std::size_t>(i * spatialCount_ + s);
      if (forward_[node] == -kInfinity) continue;
      decode(s);
      for (const auto& off : offsets_) {
        const long i2 = i + off.di;
        if (i2 > steps_) continue;
        for (std::size_t k = 0; k < d_; ++k) j2[k] = j[k] + off.dj[k];
        if (!inRange(j2)) continue;
        const auto node2 = static_cast<std::size_t>(i2 * spatialCount_ + spatialIndex(j2));
        if (!inside[node2]) continue;
        ++edges_;
        const double w = metric.chordWeight(pts[node], pts[node2]);
        if (w == -kInfinity) continue;
        forward_[node2] = std::max(forward_[node2], forward_[node] + w);
      }
    }
  }

  // q is a virtual sink reached by chords from the last stencil_ slabs
  for (long i = std::max(0L, steps_ - stencil_); i <= steps_; ++i) {
    for (long s = 0; s < spatialCount_; ++s) {
      const auto node = static_cast<std::size_t>(i * spatialCount_ + s);
      if (!inside[node] || !withinCone(pts[node], q_)) continue;
      backward_[node] = metric.chordWeight(pts[node], q_);
    }
  }
  for (long i = steps_; i >= 1; --i) {
    for (long s = 0; s < spatialCount_; ++s) {
      const auto node = static_cast<std::size_t>(i * spatialCount_ + s);
      if (backward_[node] == -kInfinity) continue;
      decode(s);
      for (const auto& off : offsets_) {
        const long i0 = i - off.di;
        if (i0 < 0) continue;
        for (std::size_t k = 0; k < d_; ++k) j2[k] = j[k] - off.dj[k];
        if (!inRange(j2)) continue;
        const auto node0 = static_cast<std::size_t>(i0 * spatialCount_ + spatialIndex(j2));
        if (!inside[node0]) continue;
        const double w = metric.chordWeight(pts[node0], pts[node]);
        if (w == -kInfinity) continue;
        backward_[node0] = std::max(backward_[node0], w + backward_[node]);
      }
    }
  }
  longest_ = backward_[static_cast<std::size_t>(spatialIndex(zero))];
}

long CausalGraph::spatialIndex(std::span<const long> j) const {
  long s = 0;
  for (std::size_t k = 0; k < d_; ++k) s += (j[k] - jLo_[k]) * stride_[k];
  return s;
}

bool CausalGraph::inRange(std::span<const long> j) const {
  for (std::size_t k = 0; k < d_; ++k) {
    if (j[k] < jLo_[k] || j[k] > jHi_[k]) return false;
  }
  return true;
}

Point CausalGraph::nodePoint(std::size_t node) const {
  Point x;
  fillPoint(node, x);
  return x;
}

std::vector<std::size_t> CausalGraph::optimalPath() const {
  std::vector<std::size_t> path;
  if (!connected()) return path;
  std::vector<long> zero(d_, 0);
  auto node = static_cast<std::size_t>(spatialIndex(zero));
  path.push_back(node);
  std::vector<long> j(d_);
  std::vector<long> j2(d_);
  for (;;) {
    const Point x = nodePoint(node);
    const double here = backward_[node];
    const double tol = 1e-12 * std::max(1.0, std::abs(longest_));
    if (std::abs(metric_->chordWeight(x, q_) - here) <= tol) break;
    const auto i = static_cast<long>(node) / spatialCount_;
    const auto s = static_cast<long>(node) % spatialCount_;
    for (std::size_t k = 0; k < d_; ++k) j[k] = jLo_[k] + (s / stride_[k]) % (jHi_[k] - jLo_[k] + 1);
    bool moved = false;
    for (const auto& off : offsets_) {
      const long i2 = i + off.di;
      if (i2 > steps_) continue;
      for (std::size_t k = 0; k < d_; ++k) j2[k] = j[k] + off.dj[k];
      if (!inRange(j2)) continue;
      const auto node2 = static_cast<std::size_t>(i2 * spatialCount_ + spatialIndex(j2));
      if (backward_[node2] == -kInfinity) continue;
      const Point y = nodePoint(node2);
      if (!domain_.contains(y)) continue;
      const double w = metric_->chordWeight(x, y);
      if (w != -kInfinity && std::abs(w + backward_[node2] - here) <= tol) {
        node = node2;
        path.push_back(node);
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  return path;
}

template <class Fn>
void CausalGraph::forEachNear(const Point& z, const Point& anchor, long iFirst, long iLast,
                              Fn&& fn) const {
  const long iStep = iFirst <= iLast ? 1 : -1;
  std::vector<long> lo(d_);
  std::vector<long> hi(d_);
  std::vector<long> j(d_);
  for (long i = iFirst;; i += iStep) {
    const double ti = i == steps_ ? q_[0] : p_[0] + static_cast<double>(i) * hT_;
    // candidates lie in the eta_C cones of both z and the anchor
    const double reach = C_ * std::abs(z[0] - ti) * (1.0 + 1e-12);
    const double anchorReach = C_ * std::abs(anchor[0] - ti) * (1.0 + 1e-12);
    bool empty = false;
    for (std::size_t k = 0; k < d_; ++k) {
      const double xlo = std::max(z[k + 1] - reach, anchor[k + 1] - anchorReach) - p_[k + 1];
      const double xhi = std::min(z[k + 1] + reach, anchor[k + 1] + anchorReach) - p_[k + 1];
      lo[k] = std::max(jLo_[k], static_cast<long>(std::ceil(xlo / hX_[k])));
      hi[k] = std::min(jHi_[k], static_cast<long>(std::floor(xhi / hX_[k])));
      empty = empty || lo[k] > hi[k];
    }
    if (!empty) {
      j = lo;
      for (;;) {
        if (fn(static_cast<std::size_t>(i * spatialCount_ + spatialIndex(j)))) return;
        std::size_t k = 0;
        while (k < d_ && ++j[k] > hi[k]) {
          j[k] = lo[k];
          ++k;
        }
        if (k == d_) break;
      }
    }
    if (i == iLast) break;
  }
}

void CausalGraph::fillPoint(std::size_t node, Point& x) const {
  const auto i = static_cast<long>(node) / spatialCount_;
  const auto s = static_cast<long>(node) % spatialCount_;
  x.resize(d_ + 1);
  x[0] = i == steps_ ? q_[0] : p_[0] + static_cast<double>(i) * hT_;
  for (std::size_t k = 0; k < d_; ++k) {
    const long j = jLo_[k] + (s / stride_[k]) % (jHi_[k] - jLo_[k] + 1);
    x[k + 1] = p_[k + 1] + static_cast<double>(j) * hX_[k];
  }
}

bool CausalGraph::inFuture(const Point& z) const {
  if (z == p_) return true;
  const long iLast = std::min(steps_, static_cast<long>(std::floor((z[0] - p_[0]) / hT_)));
  if (iLast < 0) return false;
  bool found = false;
  Point y;
  forEachNear(z, p_, iLast, 0, [&](std::size_t node) {
    if (forward_[node] == -kInfinity) return false;
    fillPoint(node, y);
    found = metric_->chordWeight(y, z) != -kInfinity;
    return found;
  });
  return found;
}

bool CausalGraph::inPast(const Point& z) const {
  if (z == q_) return true;
  if (withinCone(z, q_) && metric_->chordWeight(z, q_) != -kInfinity) return true;
  const long iFirst = std::max(0L, static_cast<long>(std::ceil((z[0] - p_[0]) / hT_)));
  if (iFirst > steps_) return false;
  bool found = false;
  Point y;
  forEachNear(z, q_, iFirst, steps_, [&](std::size_t node) {
    if (backward_[node] == -kInfinity) return false;
    fillPoint(node, y);
    found = metric_->chordWeight(z, y) != -kInfinity;
    return found;
  });
  return found;
}

bool CausalGraph::withinCone(const Point& a, const Point& b) const {
  const double dt = b[0] - a[0];
  if (dt < 0.0) return false;
  double r2 = 0.0;
  for (std::size_t k = 1; k <= d_; ++k) r2 += (b[k] - a[k]) * (b[k] - a[k]);
  return r2 <= C_ * C_ * dt * dt * (1.0 + 1e-12);
}

bool CausalGraph::contains(const Point& z) const {
  if (z.size() != d_ + 1 || !domain_.contains(z)) return false;
  if (!withinCone(p_, z) || !withinCone(z, q_)) return false;
  return inFuture(z) && inPast(z);
}

// ---------------------------------------------------------------------------

double tauUpperBound(const ChartMetric& metric, const ChartBox& domain, const Point& p,
                     const Point& q, double C, std::size_t resolution) {
  const std::size_t n = metric.dimension();
  const double dt = q[0] - p[0];
  double dx2 = 0.0;
  for (std::size_t k = 1; k < n; ++k) dx2 += (q[k] - p[k]) * (q[k] - p[k]);
  if (!(dt > 0.0) || dx2 > C * C * dt * dt) return 0.0;
  const ChartBox box = diamondBox(domain, p, q, C);
  const auto pts = box.grid(resolution);

  // Jensen along t-parametrized causal curves: -g(v,v) <= 1 - |x'|^2 + dev (1 + |x'|^2)
  const Tensor eta = etaTensor(n);
  double dev = 0.0;
  for (const auto& x : pts) dev = std::max(dev, spectralNorm(metric.at(x) - eta));
  double best = dev < 1.0 ? std::sqrt(std::max(0.0, (1.0 + dev) * dt * dt - (1.0 - dev) * dx2))
                          : dt * std::sqrt(1.0 + dev + (dev - 1.0) * C * C);

  // frozen metric: -g(v,v) <= -(g_c - omega I)(v,v), and straight chords maximize for constant metrics
  Point mid(n);
  for (std::size_t i = 0; i < n; ++i) mid[i] = 0.5 * (p[i] + q[i]);
  const Tensor gc = metric.at(mid);
  double omega = 0.0;
  for (const auto& x : pts) omega = std::max(omega, spectralNorm(metric.at(x) - gc));
  const Tensor h = gc - omega * Tensor::Identity(gc.rows(), gc.cols());
  bool frozenValid = h(0, 0) < 0.0;
  if (frozenValid) {
    try {
      frozenValid = negativeCount(h, mid) == 1;
    } catch (const InvalidMetricError&) {
      frozenValid = false;
    }
  }
  if (frozenValid) {
    // every direction of the eta_C future cone that is h-causal must be h-future
    const auto dirs = spatialDirections(n - 1, 32);
    std::vector<double> v(n);
    for (const auto& u : dirs) {
      v[0] = 1.0;
      for (std::size_t k = 0; k + 1 < n; ++k) v[k + 1] = C * u[k];
      double hvv = 0.0;
      double hve = 0.0;
      for (std::size_t a = 0; a < n; ++a) {
        hve += h(static_cast<Eigen::Index>(a), 0) * v[a];
        for (std::size_t b = 0; b < n; ++b) {
          hvv += h(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) * v[a] * v[b];
        }
      }
      if (hvv <= 0.0 && hve >= 0.0) frozenValid = false;
    }
  }
  if (frozenValid) {
    Point d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = q[i] - p[i];
    double hdd = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        hdd += h(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) * d[a] * d[b];
      }
    }
    best = std::min(best, std::sqrt(std::max(0.0, -hdd)));
  }

  // eta_C itself when its cones are at least as long as g's everywhere sampled
  const Tensor etaC = etaTensor(n, C);
  bool dominated = true;
  for (const auto& x : pts) {
    const Eigen::SelfAdjointEigenSolver<Tensor> es(metric.at(x) - etaC, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-12) {
      dominated = false;
      break;
    }
  }
  if (dominated) best = std::min(best, std::sqrt(std::max(0.0, C * C * dt * dt - dx2)));
  return best;
}

TimeSeparationInterval dpTimeSeparation(const ChartMetric& metric, const ChartBox& domain,
                                        const Point& p, const Point& q, double C,
                                        const GraphOptions& opts) {
  TimeSeparationInterval out;
  const std::size_t n = metric.dimension();
  const double dt = q[0] - p[0];
  double dx2 = 0.0;
  for (std::size_t k = 1; k < n; ++k) dx2 += (q[k] - p[k]) * (q[k] - p[k]);
  if (!(dt > 0.0) || dx2 > C * C * dt * dt) {
    out.causal = false;
    out.connected = false;
    return out;
  }
  out.hi = tauUpperBound(metric, domain, p, q, C);
  const CausalGraph full(metric, domain, p, q, C, opts);
  if (!full.connected()) {
    out.connected = false;
    return out;
  }
  out.lo = full.longestPath();
  GraphOptions half = opts;
  half.steps = std::max<std::size_t>(1, opts.steps / 2);
  const CausalGraph coarse(metric, domain, p, q, C, half);
  out.quadratureError = coarse.connected() ? std::abs(out.lo - coarse.longestPath()) : out.lo;
  return out;
}

// ---------------------------------------------------------------------------

double diamondVolume(const ChartMetric& metric, const ChartBox& domain, const Point& p,
                     const Point& q, double C, const VolumeOptions& opts) {
  const std::size_t n = metric.dimension();
  const CausalGraph graph(metric, domain, p, q, C, opts.graph);
  const ChartBox box = diamondBox(domain, p, q, C);
  if (!(box.volume() > 0.0)) return 0.0;

  // m^n strata, equal samples each, grouped into shards with their own seeds
  auto m = static_cast<std::size_t>(std::floor(
      std::pow(static_cast<double>(std::max<std::size_t>(opts.samples, 1)) / 8.0, 1.0 / static_cast<double>(n))));
  m = std::max<std::size_t>(m, 1);
  std::size_t strata = 1;
  for (std::size_t i = 0; i < n; ++i) strata *= m;
  const std::size_t perStratum = std::max<std::size_t>(1, opts.samples / strata);
  constexpr std::size_t shards = 16;
  std::vector<double> partial(shards, 0.0);
  const double cellVolume = box.volume() / static_cast<double>(strata);

  parallelFor(shards, opts.workers, [&](std::size_t shard) {
    std::mt19937_64 rng(deriveSeed(opts.seed, shard));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Point z(n);
    std::vector<std::size_t> idx(n);
    double sum = 0.0;
    for (std::size_t cell = shard; cell < strata; cell += shards) {
      std::size_t c = cell;
      for (std::size_t i = 0; i < n; ++i) {
        idx[i] = c % m;
        c /= m;
      }
      double cellSum = 0.0;
      for (std::size_t s = 0; s < perStratum; ++s) {
        for (std::size_t i = 0; i < n; ++i) {
          const double w = (box.upper[i] - box.lower[i]) / static_cast<double>(m);
          z[i] = box.lower[i] + (static_cast<double>(idx[i]) + unit(rng)) * w;
        }
        if (graph.contains(z)) cellSum += std::sqrt(std::abs(metric.at(z).determinant()));
      }
      sum += cellSum * cellVolume / static_cast<double>(perStratum);
    }
    partial[shard] = sum;
  });
  double total = 0.0;
  for (double x : partial) total += x;
  return total;
}

double dimensionBoundFromDoubling(double L, double lambda) {
  if (!(L >= 1.0)) throw DomainError("doubling constant must be >= 1");
  if (!(lambda >= 5.0)) throw DomainError("enlargement factor must be >= 5");
  return std::log(L) / std::log(1.0 + 2.0 * lambda);
}

DoublingReport doublingConstant(const ChartMetric& metric, const CylindricalNeighborhood& nbhd,
                                std::size_t pairCount, const VolumeOptions& opts, double tolerance) {
  const std::size_t n = metric.dimension();
  if (nbhd.dimension() != n) throw DomainError("neighborhood dimension does not match the chart");
  if (pairCount == 0) throw DomainError("need at least one pair");
  DoublingReport out;
  out.det = detBounds(metric, nbhd.outer(), 17);
  const double lambda = nbhd.lambda();
  const double C = nbhd.C();
  out.analytic = out.det.max / out.det.min * std::pow(2.0 * lambda + 1.0, static_cast<double>(n)) *
                 std::pow(C, 2.0 * static_cast<double>(n - 1));

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const ChartBox& inner = nbhd.inner();
  const double width = nbhd.b() - nbhd.a();
  for (std::size_t i = 0; i < pairCount; ++i) {
    const double h = width * (0.4 + 0.6 * unit(rng));
    const double t = nbhd.a() + unit(rng) * (width - h);
    Point p(n);
    p[0] = t;
    for (std::size_t k = 1; k < n; ++k) p[k] = inner.lower[k] + unit(rng) * (inner.upper[k] - inner.lower[k]);
    Point q = p;
    q[0] = t + h;
    const Enlargement e = enlargeDiamond(p, q, lambda, &nbhd.outer());
    VolumeOptions small = opts;
    small.seed = deriveSeed(opts.seed, 2 * i);
    VolumeOptions big = opts;
    big.seed = deriveSeed(opts.seed, 2 * i + 1);
    DoublingPair row{p, q};
    row.small = diamondVolume(metric, nbhd.outer(), p, q, std::max(C, 1.0), small);
    if (!(row.small > 0.0)) {
      throw ResolutionError("small diamond has zero sampled volume; refine the graph or add samples");
    }
    row.enlarged = diamondVolume(metric, nbhd.outer(), e.pHat, e.qHat, std::max(C, 1.0), big);
    row.ratio = row.enlarged / row.small;
    out.empirical = std::max(out.empirical, row.ratio);
    out.pairs.push_back(std::move(row));
  }
  out.withinAnalytic = out.empirical <= out.analytic * (1.0 + tolerance);
  return out;
}

namespace {

// Largest spatial separation at which the eta_{1/C} diamonds of two on-axis pairs still meet.
double innerReach(double t, double s, double t0, double s0, double C) {
  const double lo = std::max(t, t0);
  const double hi = std::min(s, s0);
  if (lo > hi) return -1.0;
  auto f = [&](double r) { return (std::min(r - t, s - r) + std::min(r - t0, s0 - r)) / C; };
  double best = -1.0;
  for (double r : {lo, hi, 0.5 * (t + s), 0.5 * (t0 + s0), 0.5 * (t + s0), 0.5 * (t0 + s)}) {
    best = std::max(best, f(std::clamp(r, lo, hi)));
  }
  return best;
}

bool onAxis(const Point& a, const Point& b) {
  for (std::size_t k = 1; k < a.size(); ++k) {
    if (a[k] != b[k]) return false;
  }
  return true;
}

double spatialDistance(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t k = 1; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

}  // namespace

RatioCheckReport measureRatioCheck(const ChartMetric& metric, const CylindricalNeighborhood& nbhd,
                                   std::span<const RatioCase> cases, double L,
                                   const VolumeOptions& opts) {
  RatioCheckReport out;
  const double lambda = nbhd.lambda();
  const double growth = 1.0 + 2.0 * lambda;
  out.kappa = dimensionBoundFromDoubling(L, lambda);
  out.K = std::pow(growth / 2.0, out.kappa);
  const double a = nbhd.a();
  const double b = nbhd.b();
  const double C = std::max(nbhd.C(), 1.0);
  std::size_t index = 0;
  for (const auto& c : cases) {
    RatioCheckRow row;
    const double h = c.q[0] - c.p[0];
    const double h0 = c.q0[0] - c.p0[0];
    const double sum = c.q[0] + c.p[0];
    if (!onAxis(c.p, c.q) || !onAxis(c.p0, c.q0)) {
      row.reason = "pairs must be on-axis";
    } else if (!(h > 0.0) || !(h0 > 0.0)) {
      row.reason = "pairs must be chronological";
    } else if (!nbhd.inner().contains(c.p) || !nbhd.inner().contains(c.q) ||
               !nbhd.inner().contains(c.p0) || !nbhd.inner().contains(c.q0)) {
      row.reason = "points must lie in the inner box";
    } else if (!(h0 < 2.0 * (b - a) / growth)) {
      row.reason = "reference height too large";
    } else if (!(sum > 2.0 * a + 0.5 * h0 * growth && sum < 2.0 * b - 0.5 * h0 * growth)) {
      row.reason = "pair centre too close to the inner box ends";
    } else if (spatialDistance(c.p, c.p0) > innerReach(c.p[0], c.q[0], c.p0[0], c.q0[0], C)) {
      row.reason = "diamonds may be disjoint";
    }
    if (!row.reason.empty()) {
      row.skipped = true;
      out.rows.push_back(std::move(row));
      ++index;
      continue;
    }
    VolumeOptions o1 = opts;
    o1.seed = deriveSeed(opts.seed, 2 * index);
    VolumeOptions o0 = opts;
    o0.seed = deriveSeed(opts.seed, 2 * index + 1);
    const double v = diamondVolume(metric, nbhd.outer(), c.p, c.q, C, o1);
    const double v0 = diamondVolume(metric, nbhd.outer(), c.p0, c.q0, C, o0);
    if (!(v0 > 0.0)) throw ResolutionError("reference diamond has zero sampled volume");
    const CausalGraph g1(metric, nbhd.outer(), c.p, c.q, C, opts.graph);
    const CausalGraph g0(metric, nbhd.outer(), c.p0, c.q0, C, opts.graph);
    row.volumeRatio = v / v0;
    row.heightRatio = h / h0;
    row.tauRatio = g0.connected() && g0.longestPath() > 0.0 ? g1.longestPath() / g0.longestPath() : 0.0;
    row.bound = std::pow(row.heightRatio, out.kappa) / out.K;
    row.margin = row.volumeRatio - row.bound;
    row.holds = row.margin >= 0.0;
    out.allHold = out.allHold && row.holds;
    out.rows.push_back(std::move(row));
    ++index;
  }
  return out;
}

VolumeDensityReport volumeDensityCheck(const ChartMetric& metric, const ChartBox& domain,
                                       const Point& base, std::span<const double> heights, double C,
                                       const VolumeOptions& opts) {
  const std::size_t n = metric.dimension();
  VolumeDensityReport out;
  std::size_t index = 0;
  for (double h : heights) {
    if (!(h > 0.0)) throw DomainError("heights must be positive");
    Point p = base;
    Point q = base;
    p[0] -= 0.5 * h;
    q[0] += 0.5 * h;
    const CausalGraph graph(metric, domain, p, q, C, opts.graph);
    VolumeOptions o = opts;
    o.seed = deriveSeed(opts.seed, index++);
    DensityRow row;
    row.height = h;
    row.tau = graph.connected() ? graph.longestPath() : 0.0;
    row.volume = diamondVolume(metric, domain, p, q, C, o);
    const double rhoN = omega(static_cast<double>(n)) * std::pow(row.tau, static_cast<double>(n));
    row.ratio = rhoN > 0.0 ? row.volume / rhoN : kInfinity;
    out.rows.push_back(row);
  }
  if (!out.rows.empty()) {
    const double first = std::abs(out.rows.front().ratio - 1.0);
    const double last = std::abs(out.rows.back().ratio - 1.0);
    out.converging = last < 0.02 && last <= first + 0.01;
  }
  return out;
}

}  // namespace lmeasure
