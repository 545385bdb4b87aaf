#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "lmeasure/errors.hpp"
#include "lmeasure/experiment.hpp"

using namespace lmeasure;

namespace {

Json bgDoc() {
  return Json::parse(R"({
    "version": 1, "experiment": "bg_small", "command": "bg",
    "lattice": {"K": [-1, 0], "N": [2], "r": [0.5], "Rstar": 1}
  })");
}

std::string configErrorFor(Json doc) {
  try {
    (void)parseConfig(doc);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::filesystem::path scratchDir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("lmeasure-unit-" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("fnv1a") {
  CHECK(fnv1a("") == "cbf29ce484222325");
  CHECK(fnv1a("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a("foobar") == "85944171f73967e8");
}

TEST_CASE("command names round-trip") {
  for (auto c : {Command::dimension, Command::measure, Command::curve, Command::doubling, Command::bg}) {
    CHECK((parseCommand(toString(c)) == c));
  }
  CHECK_THROWS_AS((void)parseCommand("plot"), ConfigError);
}

TEST_CASE("config validation names the field") {
  CHECK(configErrorFor(bgDoc()).empty());
  Json doc = bgDoc();
  doc["lattice"]["colour"] = 1;
  CHECK(configErrorFor(doc).find("lattice.colour") != std::string::npos);
  doc = bgDoc();
  doc["version"] = 2;
  CHECK(configErrorFor(doc).find("version") != std::string::npos);
  doc = bgDoc();
  doc.erase("experiment");
  CHECK(configErrorFor(doc).find("experiment") != std::string::npos);
  doc = bgDoc();
  doc["experiment"] = "a b";
  CHECK_FALSE(configErrorFor(doc).empty());
  doc = bgDoc();
  doc["command"] = "plot";
  CHECK_FALSE(configErrorFor(doc).empty());
  CHECK_THROWS_AS((void)loadConfig("/nonexistent/config.json"), NotFoundError);
}

TEST_CASE("hash covers semantic fields only") {
  const auto a = parseConfig(bgDoc());
  const auto b = parseConfig(bgDoc(), {std::nullopt, 4U});
  CHECK(a.hash() == b.hash());
  CHECK(b.workers == 4);
  const auto c = parseConfig(bgDoc(), {99ULL, std::nullopt});
  CHECK(c.seed == 99);
  CHECK(a.hash() != c.hash());
  Json doc = bgDoc();
  doc["out"] = "elsewhere";
  CHECK(parseConfig(doc).hash() == a.hash());
  CHECK(a.normalized.contains("seed"));
}

TEST_CASE("rerun produces identical tables") {
  const auto cfg = parseConfig(bgDoc());
  const auto r1 = runExperiment(cfg);
  const auto r2 = runExperiment(cfg);
  CHECK(r1.pass());
  CHECK(r1.tables == r2.tables);
  CHECK(r1.configHash == cfg.hash());
}

TEST_CASE("persist writes csv tables and appends results") {
  const auto dir = scratchDir("persist");
  const auto rec = runExperiment(parseConfig(bgDoc()));
  persist(rec, dir);
  persist(rec, dir);
  for (const auto& [stem, text] : rec.tables) {
    std::ifstream in(dir / (rec.id + "_" + stem + ".csv"));
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == text);
  }
  std::ifstream log(dir / "results.jsonl");
  std::string line;
  int lines = 0;
  while (std::getline(log, line)) {
    const auto j = Json::parse(line);
    CHECK(j.at("experiment") == "bg_small");
    CHECK(j.at("configHash") == rec.configHash);
    CHECK(j.at("pass") == true);
    ++lines;
  }
  CHECK(lines == 2);
  std::filesystem::remove_all(dir);
}

TEST_CASE("suites") {
  CHECK_THROWS_AS((void)reproduceSuite("no-such-suite", LMEASURE_SUITE_DIR), NotFoundError);
  const auto report = reproduceSuite("bishop-gromov", LMEASURE_SUITE_DIR);
  CHECK_FALSE(report.records.empty());
  CHECK(report.pass());
}
