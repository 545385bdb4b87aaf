#include "lmeasure/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <random>
#include <set>
#include <sstream>

#include "lmeasure/chart.hpp"
#include "lmeasure/curvature.hpp"
#include "lmeasure/curve_length.hpp"
#include "lmeasure/errors.hpp"
#include "lmeasure/measure.hpp"
#include "lmeasure/sampling.hpp"

namespace lmeasure {
namespace {

// Reads one JSON object, mirrors every resolved value (defaults included) into
// `out`, and rejects keys nobody asked for.
class Reader {
 public:
  Reader(const Json& obj, std::string path, Json* out) : obj_(obj), path_(std::move(path)), out_(out) {
    if (!obj_.is_object()) throw ConfigError(label() + ": expected an object");
  }

  [[nodiscard]] bool has(const std::string& key) const { return obj_.contains(key); }

  template <class T>
  T get(const std::string& key) {
    used_.insert(key);
    if (!obj_.contains(key)) throw ConfigError(field(key) + ": missing required field");
    T v = convert<T>(key);
    if (out_ != nullptr) (*out_)[key] = v;
    return v;
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    if (!obj_.contains(key)) {
      used_.insert(key);
      if (out_ != nullptr) (*out_)[key] = fallback;
      return fallback;
    }
    return get<T>(key);
  }

  /// Read without recording in the normalized output.
  template <class T>
  T unhashed(const std::string& key, T fallback) {
    used_.insert(key);
    return obj_.contains(key) ? convert<T>(key) : fallback;
  }

  Reader child(const std::string& key) {
    used_.insert(key);
    if (!obj_.contains(key)) throw ConfigError(field(key) + ": missing required field");
    Json* slot = nullptr;
    if (out_ != nullptr) {
      (*out_)[key] = Json::object();
      slot = &(*out_)[key];
    }
    return Reader(obj_.at(key), field(key), slot);
  }

  /// Array of objects.
  std::vector<Reader> children(const std::string& key) {
    used_.insert(key);
    if (!obj_.contains(key) || !obj_.at(key).is_array()) throw ConfigError(field(key) + ": expected an array");
    std::vector<Reader> out;
    Json* slot = nullptr;
    if (out_ != nullptr) {
      (*out_)[key] = Json::array();
      slot = &(*out_)[key];
      for (std::size_t i = 0; i < obj_.at(key).size(); ++i) slot->push_back(Json::object());
    }
    for (std::size_t i = 0; i < obj_.at(key).size(); ++i) {
      out.emplace_back(obj_.at(key)[i], field(key) + "[" + std::to_string(i) + "]",
                       slot != nullptr ? &(*slot)[i] : nullptr);
    }
    return out;
  }

  void finish() const {
    for (const auto& item : obj_.items()) {
      if (!used_.count(item.key())) throw ConfigError(field(item.key()) + ": unknown field");
    }
  }

  [[nodiscard]] std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ConfigError(field(key) + ": " + what);
  }

 private:
  [[nodiscard]] std::string label() const { return path_.empty() ? "config" : path_; }

  template <class T>
  T convert(const std::string& key) const {
    const Json& v = obj_.at(key);
    if constexpr (std::is_same_v<T, std::uint64_t> || std::is_same_v<T, unsigned> ||
                  std::is_same_v<T, std::size_t>) {
      if (!v.is_number_unsigned()) fail(key, "expected a nonnegative integer");
      return v.get<T>();
    } else if constexpr (std::is_same_v<T, int>) {
      if (!v.is_number_integer()) fail(key, "expected an integer");
      return v.get<T>();
    } else if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) fail(key, "expected a number");
      return v.get<double>();
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) fail(key, "expected a boolean");
      return v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) fail(key, "expected a string");
      return v.get<std::string>();
    } else {
      try {
        return v.get<T>();
      } catch (const Json::exception&) {
        fail(key, "has the wrong type");
      }
    }
  }

  const Json& obj_;
  std::string path_;
  Json* out_;
  std::set<std::string> used_;
};

std::string csvNumber(double x) {
  std::ostringstream s;
  s << std::setprecision(17) << x;
  return s.str();
}

class Csv {
 public:
  explicit Csv(const std::string& header) { out_ << header << '\n'; }

  template <class... Ts>
  void row(const Ts&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
    out_ << '\n';
  }

  [[nodiscard]] std::string str() const { return out_.str(); }

 private:
  static std::string cell(double x) { return csvNumber(x); }
  static std::string cell(std::size_t x) { return std::to_string(x); }
  static std::string cell(bool x) { return x ? "true" : "false"; }
  static std::string cell(const std::string& x) { return x; }
  static std::string cell(const char* x) { return x; }

  std::ostringstream out_;
};

std::string joinPoint(const Point& p) {
  std::string s;
  for (std::size_t i = 0; i < p.size(); ++i) s += (i ? " " : "") + csvNumber(p[i]);
  return s;
}

// ---------------------------------------------------------------------------
// shared config pieces

MinkowskiSpace readSpace(Reader r) {
  const auto n = r.get<std::size_t>("n");
  const double C = r.get<double>("C", 1.0);
  r.finish();
  if (n < 1 || n > 8) r.fail("n", "must lie in [1, 8]");
  if (!(C >= 1.0)) r.fail("C", "must be >= 1");
  return MinkowskiSpace(n, C);
}

Point readPoint(Reader& r, const std::string& key, std::size_t n) {
  auto p = r.get<std::vector<double>>(key);
  if (p.size() != n) r.fail(key, "expected " + std::to_string(n) + " coordinates");
  return p;
}

std::vector<Point> readPoints(Reader& r, const std::string& key, std::size_t n) {
  auto pts = r.get<std::vector<std::vector<double>>>(key);
  for (const auto& p : pts) {
    if (p.size() != n) r.fail(key, "every point needs " + std::to_string(n) + " coordinates");
  }
  return pts;
}

RegionSpec readRegion(Reader r, const MinkowskiSpace& space) {
  const auto kind = r.get<std::string>("kind");
  const std::size_t n = space.dimension();
  RegionSpec region = PointCloudRegion{};
  try {
    if (kind == "box") {
      region = BoxRegion{readPoint(r, "lower", n), readPoint(r, "upper", n)};
    } else if (kind == "subspaceCube") {
      auto basis = readPoints(r, "basis", n);
      auto center = r.has("center") ? readPoint(r, "center", n) : Point(n, 0.0);
      if (!r.has("center")) (void)r.get<std::vector<double>>("center", center);
      const double half = r.get<double>("halfSide", 1.0);
      region = SubspaceCube{LinearSubspace(space, basis), center, half};
    } else if (kind == "curve") {
      region = CurveRegion{PiecewiseLinearCurve(space, readPoints(r, "vertices", n))};
    } else if (kind == "pointCloud") {
      region = PointCloudRegion{readPoints(r, "points", n)};
    } else {
      r.fail("kind", "unknown region kind '" + kind + "'");
    }
    validateRegion(region, space);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(r.field("kind") + ": " + e.what());
  }
  r.finish();
  return region;
}

std::vector<double> readDeltaGrid(Reader r, std::size_t minCount) {
  const double start = r.get<double>("start");
  const double factor = r.get<double>("factor");
  const auto count = r.get<std::size_t>("count");
  r.finish();
  if (!(start > 0.0)) r.fail("start", "must be positive");
  if (!(factor > 0.0 && factor < 1.0)) r.fail("factor", "must lie in (0,1)");
  if (count < minCount) r.fail("count", "must be at least " + std::to_string(minCount));
  return geometricGrid(start, factor, count);
}

std::vector<double> readNGrid(Reader& r, const std::string& key) {
  auto grid = r.get<std::vector<double>>(key);
  if (grid.empty()) r.fail(key, "must not be empty");
  if (!std::is_sorted(grid.begin(), grid.end())) r.fail(key, "must be ascending");
  for (double N : grid) {
    if (!(N >= 0.0)) r.fail(key, "entries must be >= 0");
  }
  return grid;
}

std::vector<GeneratorSpec> readGenerators(Reader& r, const std::string& key,
                                          std::vector<std::string> fallback) {
  const auto names = r.has(key) ? r.get<std::vector<std::string>>(key)
                                : r.get<std::vector<std::string>>(key, std::move(fallback));
  if (names.empty()) r.fail(key, "must not be empty");
  std::vector<GeneratorSpec> out;
  for (const auto& name : names) {
    try {
      out.push_back(parseGenerator(name));
    } catch (const Error& e) {
      r.fail(key, e.what());
    }
  }
  return out;
}

GraphOptions readGraph(Reader r) {
  GraphOptions g;
  g.steps = r.get<std::size_t>("steps", g.steps);
  g.stencil = r.get<std::size_t>("stencil", g.stencil);
  g.refine = r.get<std::size_t>("refine", g.refine);
  r.finish();
  if (g.steps < 2) r.fail("steps", "must be >= 2");
  if (g.stencil < 1) r.fail("stencil", "must be >= 1");
  if (g.refine < 1) r.fail("refine", "must be >= 1");
  return g;
}

VolumeOptions readVolume(Reader& parent, const std::string& key, const ExperimentConfig& cfg) {
  VolumeOptions v;
  v.seed = cfg.seed;
  v.workers = cfg.workers;
  if (!parent.has(key)) {
    Json defaults = {{"samples", v.samples}};
    (void)parent.get<Json>(key, defaults);
    return v;
  }
  Reader r = parent.child(key);
  v.samples = r.get<std::size_t>("samples", v.samples);
  if (r.has("graph")) {
    v.graph = readGraph(r.child("graph"));
  }
  r.finish();
  if (v.samples == 0) r.fail("samples", "must be positive");
  return v;
}

ChartMetric readMetric(Reader r) {
  const auto name = r.get<std::string>("name");
  const auto n = r.get<std::size_t>("n");
  if (n < 2 || n > 4) r.fail("n", "must lie in [2, 4]");
  std::optional<ChartMetric> m;
  try {
    if (name == "minkowski") {
      m = ChartMetric::minkowski(n);
    } else if (name == "conformal-bump") {
      m = ChartMetric::conformalBump(n, r.get<double>("a"));
    } else if (name == "anisotropic-stretch") {
      m = ChartMetric::anisotropicStretch(n, r.get<double>("s"));
    } else if (name == "scaled") {
      m = ChartMetric::scaled(n, r.get<double>("a"));
    } else if (name == "cone-scaled") {
      m = ChartMetric::coneScaled(n, r.get<double>("C"));
    } else {
      r.fail("name", "unknown metric '" + name + "'");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    r.fail("name", e.what());
  }
  r.finish();
  return *m;
}

ChartBox readBox(Reader r, std::size_t n) {
  ChartBox b{readPoint(r, "lower", n), readPoint(r, "upper", n)};
  r.finish();
  for (std::size_t i = 0; i < n; ++i) {
    if (!(b.lower[i] < b.upper[i])) r.fail("upper", "must exceed lower in every coordinate");
  }
  return b;
}

CylindricalNeighborhood readNeighborhood(Reader r, std::size_t n) {
  const double B = r.get<double>("B");
  const double C = r.get<double>("C", 1.0);
  const auto center = r.get<std::vector<double>>("center", std::vector<double>(n - 1, 0.0));
  const double zHalf = r.get<double>("zHalf");
  const double vHalf = r.get<double>("vHalf");
  const double width = r.get<double>("widthFraction", 0.9);
  r.finish();
  if (center.size() != n - 1) r.fail("center", "expected " + std::to_string(n - 1) + " coordinates");
  try {
    return CylindricalNeighborhood(n, B, C, center, zHalf, vHalf, width);
  } catch (const Error& e) {
    throw ConfigError(r.field("B") + ": " + e.what());
  }
}

struct Expectation {
  Json spec = Json::object();

  [[nodiscard]] bool has(const std::string& k) const { return spec.contains(k); }
  [[nodiscard]] double num(const std::string& k) const { return spec.at(k).get<double>(); }
  [[nodiscard]] bool flag(const std::string& k) const { return spec.at(k).get<bool>(); }
};

// "expect" blocks list acceptance thresholds; keys are checked against `allowed`.
Expectation readExpect(Reader& r, const std::set<std::string>& allowed) {
  Expectation e;
  if (!r.has("expect")) return e;
  e.spec = r.get<Json>("expect");
  if (!e.spec.is_object()) r.fail("expect", "expected an object");
  for (const auto& item : e.spec.items()) {
    if (!allowed.count(item.key())) r.fail("expect." + item.key(), "unknown field");
    if (!item.value().is_number() && !item.value().is_boolean()) {
      r.fail("expect." + item.key(), "expected a number or boolean");
    }
  }
  return e;
}

void addCriterion(ResultRecord& rec, std::string name, double value, double threshold, bool pass) {
  rec.criteria.push_back({std::move(name), value, threshold, pass});
}

// ---------------------------------------------------------------------------
// commands

void runDimension(Reader& r, const ExperimentConfig& cfg, ResultRecord& rec) {
  const MinkowskiSpace space = readSpace(r.child("space"));
  const RegionSpec region = readRegion(r.child("region"), space);
  const auto deltas = readDeltaGrid(r.child("deltaGrid"), 5);
  const auto NGrid = readNGrid(r, "NGrid");
  const auto gens = readGenerators(r, "generators", {"grid", "box", "null:0.5", "chain", "points"});
  EstimateOptions opts;
  opts.workers = cfg.workers;
  opts.coverage.samples = r.get<std::size_t>("coverageSamples", opts.coverage.samples);
  opts.fitScales = r.get<std::size_t>("fitScales", opts.fitScales);
  if (opts.fitScales < 2 || opts.fitScales > deltas.size()) {
    r.fail("fitScales", "must lie in [2, deltaGrid.count]");
  }
  struct CostRatio {
    double N;
    std::string generator;
    double maxRatio;
  };
  std::optional<CostRatio> costRatio;
  if (r.has("costRatio")) {
    Reader c = r.child("costRatio");
    costRatio = CostRatio{c.get<double>("N"), c.get<std::string>("generator"), c.get<double>("maxRatio")};
    c.finish();
    if (std::find(NGrid.begin(), NGrid.end(), costRatio->N) == NGrid.end()) {
      c.fail("N", "must be one of NGrid");
    }
  }
  const Expectation expect = readExpect(r, {"value", "tolerance"});
  if (cfg.normalized.is_null()) return;

  const DimensionEstimate est = estimateDimension(space, region, gens, deltas, NGrid, opts);
  std::ostringstream series;
  est.series.writeCsv(series);
  rec.tables["scaling"] = series.str();
  Csv slopes("N,slope");
  for (std::size_t i = 0; i < est.slopes.size(); ++i) slopes.row(est.NGrid[i], est.slopes[i]);
  rec.tables["slopes"] = slopes.str();
  rec.summary = {{"region", std::string(regionKind(region))},
                 {"value", est.value},
                 {"bracket", {est.bracketLo, est.bracketHi}},
                 {"method", est.method},
                 {"fitScales", est.fitScales},
                 {"background", "coordinate Euclidean"}};
  if (expect.has("value")) {
    const double tol = expect.has("tolerance") ? expect.num("tolerance") : 0.15;
    addCriterion(rec, "dimension", est.value, expect.num("value"),
                 std::abs(est.value - expect.num("value")) <= tol);
  }
  if (costRatio) {
    double lo = kInfinity;
    double hi = 0.0;
    Csv costs("generator,delta,N,cost");
    for (double d : deltas) {
      double best = kInfinity;
      for (const auto& e : est.series.entries) {
        if (e.delta == d && e.N == costRatio->N && e.generator == costRatio->generator && e.verified) {
          best = std::min(best, e.cost);
        }
      }
      costs.row(costRatio->generator, d, costRatio->N, best);
      lo = std::min(lo, best);
      hi = std::max(hi, best);
    }
    rec.tables["cost_ratio"] = costs.str();
    const double ratio = hi / lo;
    rec.summary["costRatio"] = ratio;
    addCriterion(rec, "cost ratio across scales", ratio, costRatio->maxRatio, ratio < costRatio->maxRatio);
  }
}

void runDiamondVolume(Reader& r, const ExperimentConfig& cfg, ResultRecord& rec) {
  const auto dims = r.get<std::vector<std::size_t>>("dimensions", {2, 3, 4});
  const auto taus = r.get<std::vector<double>>("taus", {0.5, 1.0, 2.0});
  const auto samples = r.get<std::size_t>("samples", 1000000);
  const Expectation expect = readExpect(r, {"relTolerance"});
  for (auto n : dims) {
    if (n < 2 || n > 8) r.fail("dimensions", "entries must lie in [2, 8]");
  }
  for (double t : taus) {
    if (!(t > 0.0)) r.fail("taus", "entries must be positive");
  }
  if (cfg.normalized.is_null()) return;

  Csv table("n,tau,volume,exact,relError");
  double worst = 0.0;
  std::uint64_t stream = 0;
  for (auto n : dims) {
    const MinkowskiSpace space(n);
    for (double tau : taus) {
      Point p(n, 0.0);
      Point q(n, 0.0);
      q[0] = tau;
      const double v = sampledDiamondVolume(space, p, q, samples, deriveSeed(cfg.seed, stream++), cfg.workers);
      const double exact = omega(static_cast<double>(n)) * std::pow(tau, static_cast<double>(n));
      const double err = std::abs(v / exact - 1.0);
      worst = std::max(worst, err);
      table.row(n, tau, v, exact, err);
    }
  }
  rec.tables["diamond_volume"] = table.str();
  rec.summary = {{"worstRelError", worst}, {"samples", samples}};
  if (expect.has("relTolerance")) {
    addCriterion(rec, "diamond volume law", worst, expect.num("relTolerance"), worst <= expect.num("relTolerance"));
  }
}

void runMeasure(Reader& r, const ExperimentConfig& cfg, ResultRecord& rec) {
  const auto mode = r.get<std::string>("mode", "bounds");
  if (mode == "diamond-volume") return runDiamondVolume(r, cfg, rec);
  if (mode != "bounds") r.fail("mode", "expected 'bounds' or 'diamond-volume'");

  const MinkowskiSpace space = readSpace(r.child("space"));
  const RegionSpec region = readRegion(r.child("region"), space);
  const double N = r.get<double>("N");
  if (!(N >= 0.0)) r.fail("N", "must be >= 0");
  const auto deltas = readDeltaGrid(r.child("deltaGrid"), 1);
  const auto gens = readGenerators(r, "generators", {"grid", "box", "null:0.5", "chain", "points"});
  CoverageOptions coverage;
  coverage.samples = r.get<std::size_t>("coverageSamples", coverage.samples);
  std::optional<std::pair<std::size_t, double>> lower;  // (samples, maxScale)
  if (r.has("lower")) {
    Reader l = r.child("lower");
    lower = {l.get<std::size_t>("samples", 4096), l.get<double>("maxScale", 0.25)};
    l.finish();
    if (!(lower->second > 0.0)) r.fail("lower.maxScale", "must be positive");
  }
  const Expectation expect = readExpect(r, {"lowerAtLeast", "upperAtMost", "upperEquals", "slack"});
  if (cfg.normalized.is_null()) return;

  Csv table("delta,N,upper");
  double finest = kInfinity;
  std::vector<double> uppers(deltas.size());
  parallelFor(deltas.size(), cfg.workers, [&](std::size_t j) {
    uppers[j] = upperMeasure(space, region, N, deltas[j], gens, coverage);
  });
  for (std::size_t j = 0; j < deltas.size(); ++j) table.row(deltas[j], N, uppers[j]);
  finest = uppers.back();
  rec.tables["upper"] = table.str();
  rec.summary = {{"N", N}, {"upper", finest}, {"background", "coordinate Euclidean"}};
  const double slack = expect.has("slack") ? expect.num("slack") : 0.1;
  if (expect.has("upperAtMost")) {
    const double worst = *std::max_element(uppers.begin(), uppers.end());
    addCriterion(rec, "upper bound", worst, expect.num("upperAtMost"),
                 worst <= expect.num("upperAtMost") * (1.0 + slack));
  }
  if (expect.has("upperEquals")) {
    bool exact = true;
    for (double u : uppers) exact = exact && u == expect.num("upperEquals");
    addCriterion(rec, "upper exact", finest, expect.num("upperEquals"), exact);
  }
  if (lower) {
    const auto mass = naturalMassDistribution(space, region, lower->second);
    const double lo = lowerMeasure(space, region, N, *mass, lower->first, cfg.seed);
    rec.summary["lower"] = lo;
    rec.tables["lower"] = [&] {
      Csv t("N,lower,samples,maxScale");
      t.row(N, lo, lower->first, lower->second);
      return t.str();
    }();
    if (expect.has("lowerAtLeast")) {
      addCriterion(rec, "lower bound", lo, expect.num("lowerAtLeast"),
                   lo >= expect.num("lowerAtLeast") * (1.0 - slack));
    }
    addCriterion(rec, "lower <= upper", lo, finest, lo <= finest * (1.0 + slack));
  }
}

void runCurve(Reader& r, const ExperimentConfig& cfg, ResultRecord& rec) {
  const MinkowskiSpace space = readSpace(r.child("space"));
  const auto vertices = readPoints(r, "vertices", space.dimension());
  const double tol = r.get<double>("tol", 1e-6);
  if (!(tol > 0.0)) r.fail("tol", "must be positive");
  const auto deltas = readDeltaGrid(r.child("deltaGrid"), 5);
  const auto NGrid = readNGrid(r, "NGrid");
  const Expectation expect =
      readExpect(r, {"length", "lengthTolerance", "dimension", "dimensionTolerance", "maxFinalSum"});
  std::optional<PiecewiseLinearCurve> curve;
  try {
    curve.emplace(space, vertices);
  } catch (const Error& e) {
    r.fail("vertices", e.what());
  }
  if (cfg.normalized.is_null()) return;

  const PartitionSumTrace trace = tauLengthTrace(*curve, {tol, 24});
  std::ostringstream traceCsv;
  trace.writeCsv(traceCsv);
  rec.tables["trace"] = traceCsv.str();
  const LengthComparison cmp = compareLengthMeasure(*curve, deltas, tol);
  Csv v1("delta,upperV1,tauLength");
  for (std::size_t i = 0; i < cmp.deltas.size(); ++i) v1.row(cmp.deltas[i], cmp.upperV1[i], cmp.tauLength);
  rec.tables["v1"] = v1.str();

  const RegionSpec region = CurveRegion{*curve};
  const std::vector<GeneratorSpec> chain{parseGenerator("chain")};
  EstimateOptions opts;
  opts.workers = cfg.workers;
  const DimensionEstimate est = estimateDimension(space, region, chain, deltas, NGrid, opts);
  std::ostringstream series;
  est.series.writeCsv(series);
  rec.tables["scaling"] = series.str();

  const double L = trace.value();
  rec.summary = {{"class", std::string(toString(curve->causalityClass()))},
                 {"tauLength", L},
                 {"finalSum", trace.levels.back().sum},
                 {"levels", trace.levels.size()},
                 {"converged", trace.converged},
                 {"isNull", isNullCurve(*curve)},
                 {"upperWithinLength", cmp.upperWithinLength},
                 {"dimension", est.value},
                 {"method", est.method}};
  if (expect.has("length")) {
    const double lt = expect.has("lengthTolerance") ? expect.num("lengthTolerance") : 1e-6;
    addCriterion(rec, "tau length", L, expect.num("length"), std::abs(L - expect.num("length")) <= lt);
    double worst = 0.0;
    for (double u : cmp.upperV1) worst = std::max(worst, std::abs(u - expect.num("length")));
    addCriterion(rec, "V1 chain cost", worst, lt, worst <= lt);
  }
  if (expect.has("dimension")) {
    const double dt = expect.has("dimensionTolerance") ? expect.num("dimensionTolerance") : 0.15;
    addCriterion(rec, "dimension", est.value, expect.num("dimension"),
                 std::abs(est.value - expect.num("dimension")) <= dt);
  }
  if (expect.has("maxFinalSum")) {
    const double last = trace.levels.back().sum;
    addCriterion(rec, "final partition sum", last, expect.num("maxFinalSum"), last < expect.num("maxFinalSum"));
  }
}

void runDoublingPairs(Reader& r, const ExperimentConfig& cfg, ResultRecord& rec, const ChartMetric& metric) {
  const CylindricalNeighborhood nbhd = readNeighborhood(r.child("neighborhood"), metric.dimension());
  const auto pairs = r.get<std::size_t>("pairs", 8);
  if (pairs == 0) r.fail("pairs", "must be positive");
  const VolumeOptions vol = readVolume(r, "volume", cfg);
  const Expectation expect = readExpect(r, {"L", "relTolerance", "maxDimension"});
  if (cfg.normalized.is_null()) return;

  const DoublingReport rep = doublingConstant(metric, nbhd, pairs, vol);
  Csv table("p,q,small,enlarged,ratio");
  for (const auto& p : rep.pairs) table.row(joinPoint(p.p), joinPoint(p.q), p.small, p.enlarged, p.ratio);
  rec.tables["pairs"] = table.str();
  const double bound = dimensionBoundFromDoubling(std::max(rep.empirical, 1.0), nbhd.lambda());
  rec.summary = {{"lambda", nbhd.lambda()},      {"empirical", rep.empirical},
                 {"analytic", rep.analytic},     {"detMin", rep.det.min},
                 {"detMax", rep.det.max},        {"dimensionBound", bound},
                 {"withinAnalytic", rep.withinAnalytic}};
  addCriterion(rec, "empirical <= analytic", rep.empirical, rep.analytic, rep.withinAnalytic);
  if (expect.has("L")) {
    const double tol = expect.has("relTolerance") ? expect.num("relTolerance") : 0.05;
    const double rel = std::abs(rep.empirical / expect.num("L") - 1.0);
    addCriterion(rec, "empirical doubling constant", rep.empirical, expect.num("L"), rel <= tol);
  }
  if (expect.has("maxDimension")) {
    addCriterion(rec, "dimension bound", bound, expect.num("maxDimension"), bound <= expect.num("maxDimension"));
  }
}

void runDensity(Reader& r, const ExperimentConfig& cfg, ResultRecord& rec, const ChartMetric& metric) {
  const std::size_t n = metric.dimension();
  const ChartBox domain = readBox(r.child("domain"), n);
  const Point base = readPoint(r, "base", n);
  const auto heights = r.get<std::vector<double>>("heights");
  const double C = r.get<double>("C", 1.0);
  const VolumeOptions vol = readVolume(r, "volume", cfg);
  const Expectation expect = readExpect(r, {"maxDrift"});
  if (heights.size() < 2) r.fail("heights", "needs at least two heights");
  if (!(C >= 1.0)) r.fail("C", "must be >= 1");
  if (cfg.normalized.is_null()) return;

  const VolumeDensityReport rep = volumeDensityCheck(metric, domain, base, heights, C, vol);
  Csv table("height,tau,volume,ratio");
  for (const auto& row : rep.rows) table.row(row.height, row.tau, row.volume, row.ratio);
  rec.tables["density"] = table.str();
  const double last = std::abs(rep.rows.back().ratio - 1.0);
  rec.summary = {{"firstRatio", rep.rows.front().ratio}, {"lastRatio", rep.rows.back().ratio},
                 {"converging", rep.converging}};
  const double drift = expect.has("maxDrift") ? expect.num("maxDrift") : 0.02;
  addCriterion(rec, "volume density", last, drift, rep.converging && last < drift);
}

void runSandwich(Reader& r, const ExperimentConfig& cfg, ResultRecord& rec, const ChartMetric& metric) {
  const std::size_t n = metric.dimension();
  const ChartBox domain = readBox(r.child("domain"), n);
  const double C = r.get<double>("C");
  const auto resolution = r.get<std::size_t>("resolution", 21);
  const auto pairs = r.get<std::size_t>("pairs", 50);
  GraphOptions graph;
  if (r.has("graph")) graph = readGraph(r.child("graph"));
  const Expectation expect = readExpect(r, {"verified", "slack"});
  if (!(C > 1.0)) r.fail("C", "must be > 1");
  if (resolution < 2) r.fail("resolution", "must be >= 2");
  if (cfg.normalized.is_null()) return;

  const ConeSandwich cs = verifyConeSandwich(metric, domain, C, resolution);
  rec.summary = {{"verified", cs.verified},
                 {"innerMargin", cs.innerMargin},
                 {"outerMargin", cs.outerMargin},
                 {"worstPoint", cs.worstPoint}};
  if (expect.has("verified")) {
    addCriterion(rec, "sandwich verified", cs.verified ? 1.0 : 0.0, expect.flag("verified") ? 1.0 : 0.0,
                 cs.verified == expect.flag("verified"));
  }
  if (!cs.verified || pairs == 0) return;

  const double dev = supDeviation(metric, domain, resolution);
  const double loFactor = std::sqrt(std::max(0.0, 1.0 - dev));
  const double hiFactor = std::sqrt((1.0 + C * C) * dev + 2.0 * C * C - 1.0);
  const double slack = expect.has("slack") ? expect.num("slack") : 0.02;
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Csv table("p,q,lo,hi,quadratureError,loFactor,hiFactor,ok");
  std::size_t violations = 0;
  const double T = domain.upper[0] - domain.lower[0];
  for (std::size_t i = 0; i < pairs; ++i) {
    const double h = T * (0.05 + 0.9 * unit(rng));
    Point p(n);
    p[0] = domain.lower[0] + unit(rng) * (T - h);
    for (std::size_t k = 1; k < n; ++k) p[k] = domain.lower[k] + unit(rng) * (domain.upper[k] - domain.lower[k]);
    Point q = p;
    q[0] += h;
    const auto iv = dpTimeSeparation(metric, domain, p, q, C, graph);
    const double err = std::max(iv.quadratureError, slack * h);
    const bool ok = iv.connected && iv.lo + err >= loFactor * h && iv.hi <= hiFactor * h + err;
    violations += ok ? 0 : 1;
    table.row(joinPoint(p), joinPoint(q), iv.lo, iv.hi, iv.quadratureError, loFactor * h, hiFactor * h, ok);
  }
  rec.tables["sandwich"] = table.str();
  rec.summary["deviation"] = dev;
  rec.summary["violations"] = violations;
  addCriterion(rec, "local tau factors", static_cast<double>(violations), 0.0, violations == 0);
}

void runRatio(Reader& r, const ExperimentConfig& cfg, ResultRecord& rec, const ChartMetric& metric) {
  const std::size_t n = metric.dimension();
  const CylindricalNeighborhood nbhd = readNeighborhood(r.child("neighborhood"), n);
  const double L = r.get<double>("L");
  if (!(L >= 1.0)) r.fail("L", "must be >= 1");
  std::vector<RatioCase> cases;
  for (auto& c : r.children("cases")) {
    cases.push_back({readPoint(c, "p", n), readPoint(c, "q", n), readPoint(c, "p0", n), readPoint(c, "q0", n)});
    c.finish();
  }
  if (cases.empty()) r.fail("cases", "must not be empty");
  const VolumeOptions vol = readVolume(r, "volume", cfg);
  (void)readExpect(r, {});
  if (cfg.normalized.is_null()) return;

  const RatioCheckReport rep = measureRatioCheck(metric, nbhd, cases, L, vol);
  Csv table("case,skipped,reason,volumeRatio,heightRatio,tauRatio,bound,margin,holds");
  std::size_t checked = 0;
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const auto& row = rep.rows[i];
    table.row(i, row.skipped, row.reason, row.volumeRatio, row.heightRatio, row.tauRatio, row.bound,
              row.margin, row.holds);
    checked += row.skipped ? 0 : 1;
  }
  rec.tables["ratio"] = table.str();
  rec.summary = {{"kappa", rep.kappa}, {"K", rep.K}, {"checked", checked}, {"allHold", rep.allHold}};
  addCriterion(rec, "measure ratio inequality", static_cast<double>(checked), 1.0, rep.allHold && checked > 0);
}

void runDoubling(Reader& r, const ExperimentConfig& cfg, ResultRecord& rec) {
  const ChartMetric metric = readMetric(r.child("metric"));
  const auto check = r.get<std::string>("check", "doubling");
  if (check == "doubling") return runDoublingPairs(r, cfg, rec, metric);
  if (check == "density") return runDensity(r, cfg, rec, metric);
  if (check == "sandwich") return runSandwich(r, cfg, rec, metric);
  if (check == "ratio") return runRatio(r, cfg, rec, metric);
  r.fail("check", "expected doubling, density, sandwich or ratio");
}

void runBg(Reader& r, const ExperimentConfig& cfg, ResultRecord& rec) {
  std::vector<CurvatureRow> rows;
  struct Lattice {
    std::vector<double> K, N, radii;
    double Rstar = 1.0;
  };
  std::optional<Lattice> lattice;
  if (r.has("lattice")) {
    Reader l = r.child("lattice");
    lattice = Lattice{l.get<std::vector<double>>("K"), l.get<std::vector<double>>("N"),
                      l.get<std::vector<double>>("r"), l.get<double>("Rstar", 1.0)};
    l.finish();
    for (double N : lattice->N) {
      if (!(N >= 1.0)) r.fail("lattice.N", "entries must be >= 1");
    }
    for (double x : lattice->radii) {
      if (!(x > 0.0 && 2.0 * x <= lattice->Rstar)) r.fail("lattice.r", "entries must lie in (0, Rstar/2]");
    }
    if (!(lattice->Rstar > 0.0) || std::isinf(lattice->Rstar)) r.fail("lattice.Rstar", "must be positive and finite");
  }
  struct Profile {
    std::size_t n;
    double N;
  };
  std::vector<Profile> profiles;
  std::vector<double> radii;
  if (r.has("profiles")) {
    for (auto& p : r.children("profiles")) {
      profiles.push_back({p.get<std::size_t>("n"), p.get<double>("N")});
      p.finish();
      if (profiles.back().n < 2) p.fail("n", "must be >= 2");
      if (!(profiles.back().N >= 1.0)) p.fail("N", "must be >= 1");
    }
    radii = r.get<std::vector<double>>("radii", {0.25, 0.5, 1.0, 2.0});
  }
  struct Consistency {
    double n, N;
    SyntheticBound mode;
    bool expected;
  };
  std::vector<Consistency> consistency;
  if (r.has("consistency")) {
    for (auto& c : r.children("consistency")) {
      const double n = c.get<double>("n");
      const double N = c.get<double>("N");
      const auto mode = c.get<std::string>("mode");
      const bool expected = c.get<bool>("expected");
      c.finish();
      try {
        consistency.push_back({n, N, parseSyntheticBound(mode), expected});
      } catch (const Error& e) {
        c.fail("mode", e.what());
      }
    }
  }
  (void)readExpect(r, {});
  if (cfg.normalized.is_null()) return;

  if (lattice) {
    std::size_t failures = 0;
    for (double K : lattice->K) {
      for (double N : lattice->N) {
        for (double x : lattice->radii) {
          rows.push_back(curvatureRow(K, N, lattice->Rstar, x));
          failures += rows.back().holds ? 0 : 1;
        }
      }
    }
    std::ostringstream csv;
    writeCurvatureCsv(csv, rows);
    rec.tables["lattice"] = csv.str();
    rec.summary["latticePoints"] = rows.size();
    addCriterion(rec, "ratio bound >= 1/L on lattice", static_cast<double>(failures), 0.0, failures == 0);

    Csv flat("N,L,expected");
    bool exact = true;
    for (double N : lattice->N) {
      const double L = tcdDoublingConstant(0.0, N, lattice->Rstar);
      flat.row(N, L, std::pow(2.0, N + 1.0));
      exact = exact && L == std::pow(2.0, N + 1.0);
    }
    rec.tables["flat_doubling"] = flat.str();
    addCriterion(rec, "K = 0 doubling constant", exact ? 1.0 : 0.0, 1.0, exact);
  }
  if (!profiles.empty()) {
    Csv table("n,N,r,volume,comparison,profile,exponent,nonincreasing");
    std::size_t mismatches = 0;
    for (const auto& p : profiles) {
      const MonotonicityReport m = bgMonotonicityProbe(p.n, p.N, radii);
      for (const auto& row : m.rows) {
        table.row(p.n, p.N, row.r, row.volume, row.comparison, row.profile, m.exponent, m.nonincreasing);
      }
      mismatches += m.nonincreasing == (p.N >= static_cast<double>(p.n) - 1.0) ? 0 : 1;
    }
    rec.tables["profile"] = table.str();
    addCriterion(rec, "profile monotone iff N >= n - 1", static_cast<double>(mismatches), 0.0, mismatches == 0);
  }
  if (!consistency.empty()) {
    Csv table("n,N,mode,result,expected");
    std::size_t mismatches = 0;
    for (const auto& c : consistency) {
      const bool got = dimensionConsistencyAssert(c.n, c.N, c.mode);
      table.row(c.n, c.N, std::string(c.mode == SyntheticBound::wTCD ? "wTCD" : "TMCP"), got, c.expected);
      mismatches += got == c.expected ? 0 : 1;
    }
    rec.tables["consistency"] = table.str();
    addCriterion(rec, "dimension consistency", static_cast<double>(mismatches), 0.0, mismatches == 0);
  }
  const double fixture = bgRatioBound(0.0, 3.0, 1.0, 2.0);
  rec.summary["bgRatioFlatN3"] = fixture;
}

// Validates (cfg.normalized null) or runs the command body.
void dispatch(Reader& r, const ExperimentConfig& cfg, ResultRecord& rec) {
  switch (cfg.command) {
    case Command::dimension: runDimension(r, cfg, rec); break;
    case Command::measure: runMeasure(r, cfg, rec); break;
    case Command::curve: runCurve(r, cfg, rec); break;
    case Command::doubling: runDoubling(r, cfg, rec); break;
    case Command::bg: runBg(r, cfg, rec); break;
  }
}

std::string utcTimestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

}  // namespace

std::string toString(Command c) {
  switch (c) {
    case Command::dimension: return "dimension";
    case Command::measure: return "measure";
    case Command::curve: return "curve";
    case Command::doubling: return "doubling";
    case Command::bg: return "bg";
  }
  return "?";
}

Command parseCommand(const std::string& s) {
  for (auto c : {Command::dimension, Command::measure, Command::curve, Command::doubling, Command::bg}) {
    if (toString(c) == s) return c;
  }
  throw ConfigError("command: unknown command '" + s + "'");
}

std::string fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << h;
  return s.str();
}

std::string ExperimentConfig::hash() const { return fnv1a(normalized.dump()); }

ExperimentConfig parseConfig(const Json& doc, const Overrides& overrides) {
  ExperimentConfig cfg;
  Json norm = Json::object();
  Reader r(doc, "", &norm);
  const int version = r.get<int>("version");
  if (version != kConfigVersion) r.fail("version", "unsupported version " + std::to_string(version));
  cfg.id = r.get<std::string>("experiment");
  if (cfg.id.empty() || cfg.id.find_first_of("/\\ ") != std::string::npos) {
    r.fail("experiment", "must be a nonempty name without spaces or slashes");
  }
  cfg.command = parseCommand(r.get<std::string>("command"));
  cfg.seed = r.get<std::uint64_t>("seed", 1);
  cfg.workers = r.unhashed<unsigned>("workers", 1U);
  cfg.output = r.unhashed<std::string>("out", "out");
  if (overrides.seed) {
    cfg.seed = *overrides.seed;
    norm["seed"] = cfg.seed;
  }
  if (overrides.workers) cfg.workers = *overrides.workers;
  if (cfg.workers == 0) r.fail("workers", "must be positive");

  ResultRecord scratch;
  dispatch(r, cfg, scratch);  // normalized still null: validation only
  r.finish();
  cfg.normalized = std::move(norm);
  return cfg;
}

ExperimentConfig loadConfig(const std::filesystem::path& path, const Overrides& overrides) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open config " + path.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parseConfig(doc, overrides);
}

bool ResultRecord::pass() const {
  return std::all_of(criteria.begin(), criteria.end(), [](const auto& c) { return c.pass; });
}

Json ResultRecord::toJson() const {
  Json crit = Json::array();
  for (const auto& c : criteria) {
    crit.push_back({{"name", c.name}, {"value", c.value}, {"threshold", c.threshold}, {"pass", c.pass}});
  }
  Json files = Json::array();
  for (const auto& [stem, text] : tables) files.push_back(id + "_" + stem + ".csv");
  return {{"experiment", id}, {"command", toString(command)}, {"timestamp", timestamp},
          {"configHash", configHash}, {"config", config}, {"outputs", files},
          {"summary", summary}, {"criteria", crit}, {"pass", pass()}};
}

ResultRecord runExperiment(const ExperimentConfig& config) {
  ResultRecord rec;
  rec.id = config.id;
  rec.command = config.command;
  rec.timestamp = utcTimestamp();
  rec.configHash = config.hash();
  rec.config = config.normalized;
  rec.summary = Json::object();
  Reader r(config.normalized, "", nullptr);
  (void)r.get<int>("version");
  (void)r.get<std::string>("experiment");
  (void)r.get<std::string>("command");
  (void)r.get<std::uint64_t>("seed");
  dispatch(r, config, rec);
  return rec;
}

void persist(const ResultRecord& record, const std::filesystem::path& outDir) {
  std::filesystem::create_directories(outDir);
  for (const auto& [stem, text] : record.tables) {
    std::ofstream f(outDir / (record.id + "_" + stem + ".csv"), std::ios::binary);
    f << text;
    if (!f) throw Error("io", "cannot write " + (outDir / (record.id + "_" + stem + ".csv")).string());
  }
  std::ofstream log(outDir / "results.jsonl", std::ios::app | std::ios::binary);
  log << record.toJson().dump() << '\n';
  if (!log) throw Error("io", "cannot append to " + (outDir / "results.jsonl").string());
}

bool SuiteReport::pass() const {
  return std::all_of(records.begin(), records.end(), [](const auto& r) { return r.pass(); });
}

SuiteReport reproduceSuite(const std::string& name, const std::filesystem::path& suiteRoot,
                           const Overrides& overrides) {
  if (std::find(kSuites.begin(), kSuites.end(), name) == kSuites.end()) {
    throw NotFoundError("unknown suite '" + name + "'");
  }
  const auto dir = suiteRoot / name;
  if (!std::filesystem::is_directory(dir)) throw NotFoundError("suite directory missing: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw NotFoundError("suite has no configs: " + dir.string());
  SuiteReport rep{name, {}};
  for (const auto& f : files) rep.records.push_back(runExperiment(loadConfig(f, overrides)));
  return rep;
}

}  // namespace lmeasure
