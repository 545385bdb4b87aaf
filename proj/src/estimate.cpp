#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "lmeasure/errors.hpp"
#include "lmeasure/measure.hpp"
#include "lmeasure/sampling.hpp"

namespace lmeasure {

void ScalingSeries::writeCsv(std::ostream& out) const {
  const auto old = out.precision(17);
  out << "generator,delta,N,cost,verified\n";
  for (const auto& e : entries) {
    out << e.generator << ',' << e.delta << ',' << e.N << ',' << e.cost << ','
        << (e.verified ? "true" : "false") << '\n';
  }
  out.precision(old);
}

std::vector<double> geometricGrid(double start, double factor, std::size_t count) {
  if (!(start > 0.0) || !(factor > 0.0 && factor < 1.0)) {
    throw DomainError("geometric grid needs start > 0 and factor in (0,1)");
  }
  std::vector<double> out(count);
  for (std::size_t j = 0; j < count; ++j) out[j] = start * std::pow(factor, static_cast<double>(j));
  return out;
}

namespace {

double rawCost(const Cover& c, double N) {
  double total = 0.0;
  for (const auto& b : c.blocks()) {
    if (b.multiplicity != 0.0) total += b.multiplicity * rho(N, b.prototype);
  }
  return total;
}

void checkGrid(std::span<const double> deltaGrid) {
  if (deltaGrid.size() < 5) throw DomainError("delta grid needs at least 5 scales");
  const double ratio = deltaGrid[1] / deltaGrid[0];
  for (std::size_t j = 0; j < deltaGrid.size(); ++j) {
    if (!(deltaGrid[j] > 0.0)) throw DomainError("delta grid must be positive");
    if (j == 0) continue;
    if (!(deltaGrid[j] < deltaGrid[j - 1])) throw DomainError("delta grid must be strictly decreasing");
    if (std::abs(deltaGrid[j] / deltaGrid[j - 1] - ratio) > 1e-9 * ratio) {
      throw DomainError("delta grid must be geometric");
    }
  }
}

// Least-squares slope of log S against log delta.
double fitSlope(std::span<const double> logDelta, std::span<const double> S) {
  bool anyInf = false;
  bool anyZero = false;
  for (double s : S) {
    anyInf = anyInf || std::isinf(s);
    anyZero = anyZero || s == 0.0;
  }
  if (anyInf) return -kInfinity;
  if (anyZero) return kInfinity;
  double mx = 0.0;
  double my = 0.0;
  const auto m = static_cast<double>(S.size());
  for (std::size_t i = 0; i < S.size(); ++i) {
    mx += logDelta[i];
    my += std::log(S[i]);
  }
  mx /= m;
  my /= m;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < S.size(); ++i) {
    const double dx = logDelta[i] - mx;
    sxy += dx * (std::log(S[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

std::string formatSlopes(std::span<const double> Ns, std::span<const double> slopes) {
  std::ostringstream s;
  s << std::setprecision(6);
  for (std::size_t i = 0; i < Ns.size(); ++i) s << (i ? ", " : "") << "s(" << Ns[i] << ")=" << slopes[i];
  return s.str();
}

}  // namespace

DimensionEstimate estimateDimension(const MinkowskiSpace& space, const RegionSpec& region,
                                    std::span<const GeneratorSpec> generators,
                                    std::span<const double> deltaGrid, std::span<const double> NGrid,
                                    const EstimateOptions& opts) {
  validateRegion(region, space);
  checkGrid(deltaGrid);
  if (NGrid.empty()) throw DomainError("N grid is empty");
  if (!std::is_sorted(NGrid.begin(), NGrid.end())) throw DomainError("N grid must be ascending");
  if (opts.fitScales < 2 || opts.fitScales > deltaGrid.size()) {
    throw DomainError("fitScales must lie in [2, number of scales]");
  }

  DimensionEstimate est;
  est.NGrid.assign(NGrid.begin(), NGrid.end());
  est.fitScales = opts.fitScales;

  if (const auto* cloud = std::get_if<PointCloudRegion>(&region)) {
    std::vector<Point> pts = cloud->points;
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() <= 1) {
      est.method = "degenerate";
      for (double d : deltaGrid) {
        est.series.entries.push_back({"points", d, 0.0, static_cast<double>(pts.size()), true});
      }
      return est;
    }
  }

  std::vector<GeneratorSpec> gens;
  for (const auto& g : generators) {
    if (isApplicable(g, region)) gens.push_back(g);
  }
  if (gens.empty()) {
    throw RefusalError("no applicable generator for a " + std::string(regionKind(region)) + " region");
  }

  const std::size_t J = deltaGrid.size();
  const std::size_t Gn = gens.size();
  std::vector<std::optional<Cover>> covers(J * Gn);
  parallelFor(J * Gn, opts.workers, [&](std::size_t cell) {
    const std::size_t j = cell / Gn;
    const std::size_t g = cell % Gn;
    covers[cell] = buildCover(space, region, gens[g], deltaGrid[j], opts.coverage);
  });

  for (std::size_t j = 0; j < J; ++j) {
    bool any = false;
    for (std::size_t g = 0; g < Gn; ++g) any = any || covers[j * Gn + g]->verified();
    if (!any) {
      throw RefusalError("no verified cover at delta = " + std::to_string(deltaGrid[j]));
    }
  }

  auto best = [&](double N, std::size_t j) {
    double s = kInfinity;
    for (std::size_t g = 0; g < Gn; ++g) {
      const Cover& c = *covers[j * Gn + g];
      if (c.verified()) s = std::min(s, coverCost(c, N));
    }
    return s;
  };

  const std::size_t first = J - opts.fitScales;
  std::vector<double> logDelta;
  for (std::size_t j = first; j < J; ++j) logDelta.push_back(std::log(deltaGrid[j]));
  auto slope = [&](double N) {
    std::vector<double> S;
    for (std::size_t j = first; j < J; ++j) S.push_back(best(N, j));
    return fitSlope(logDelta, S);
  };

  for (std::size_t j = 0; j < J; ++j) {
    for (std::size_t g = 0; g < Gn; ++g) {
      const Cover& c = *covers[j * Gn + g];
      for (double N : NGrid) {
        est.series.entries.push_back({c.generator(), deltaGrid[j], N, rawCost(c, N), c.verified()});
      }
    }
  }

  for (double N : NGrid) est.slopes.push_back(slope(N));

  for (std::size_t i = 0; i < NGrid.size(); ++i) {
    if (std::abs(est.slopes[i]) < opts.nodeTol) {
      est.value = est.bracketLo = est.bracketHi = NGrid[i];
      est.method = "grid-node";
      return est;
    }
  }
  for (std::size_t i = 0; i + 1 < NGrid.size(); ++i) {
    if (est.slopes[i] < 0.0 && est.slopes[i + 1] > 0.0) {
      double lo = NGrid[i];
      double hi = NGrid[i + 1];
      est.bracketLo = lo;
      est.bracketHi = hi;
      while (hi - lo > opts.bisectionTol) {
        const double mid = 0.5 * (lo + hi);
        const double s = slope(mid);
        if (std::abs(s) < 1e-12) {
          lo = hi = mid;
          break;
        }
        (s < 0.0 ? lo : hi) = mid;
      }
      est.value = 0.5 * (lo + hi);
      est.method = "bisection";
      return est;
    }
  }
  throw BracketNotFoundError("slope has no sign change over the N grid: " +
                             formatSlopes(NGrid, est.slopes));
}

ScalingSeries monotoneEnvelope(const ScalingSeries& series) {
  // N -> delta -> best verified cost
  std::map<double, std::map<double, double>> best;
  for (const auto& e : series.entries) {
    auto& slot = best[e.N];
    auto it = slot.find(e.delta);
    if (it == slot.end()) it = slot.emplace(e.delta, kInfinity).first;
    if (e.verified) it->second = std::min(it->second, e.cost);
  }
  ScalingSeries out;
  for (const auto& [N, byDelta] : best) {
    // ascending delta: finest first
    double running = kInfinity;
    std::vector<ScalingEntry> rows;
    for (const auto& [delta, cost] : byDelta) {
      running = std::min(running, cost);
      rows.push_back({"envelope", delta, N, running, std::isfinite(running)});
    }
    out.entries.insert(out.entries.end(), rows.rbegin(), rows.rend());
  }
  return out;
}

}  // namespace lmeasure
