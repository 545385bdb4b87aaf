// Command-line front end: run one config or a shipped suite.
#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "lmeasure/errors.hpp"
#include "lmeasure/experiment.hpp"

#ifndef LMEASURE_SUITE_DIR
#define LMEASURE_SUITE_DIR "configs/suites"
#endif

namespace {

constexpr int kPass = 0;
constexpr int kCriterionFailure = 1;
constexpr int kUsageError = 2;

void report(const lmeasure::ResultRecord& rec, std::ostream& out) {
  out << rec.id << " [" << lmeasure::toString(rec.command) << "] " << (rec.pass() ? "PASS" : "FAIL")
      << "  hash=" << rec.configHash << '\n';
  for (const auto& c : rec.criteria) {
    out << "  " << (c.pass ? "ok   " : "FAIL ") << c.name << ": " << c.value << " (threshold " << c.threshold
        << ")\n";
  }
  out << "  summary " << rec.summary.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lorentzian measure and dimension experiments"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string configPath;
  std::uint64_t seed = 0;
  unsigned workers = 0;
  std::string outDir;
  std::string suiteDir = LMEASURE_SUITE_DIR;
  auto* seedOpt = app.add_option("--seed", seed, "master seed (overrides the config)");
  auto* workersOpt = app.add_option("--workers", workers, "worker threads (overrides the config)")
                         ->check(CLI::PositiveNumber);
  auto* outOpt = app.add_option("--out", outDir, "output directory");
  app.add_option("--config", configPath, "experiment config (JSON)");
  app.add_option("--suite-dir", suiteDir, "root of the shipped suite configs");

  for (const char* name : {"dimension", "measure", "curve", "doubling", "bg"}) {
    app.add_subcommand(name, std::string("run a ") + name + " config");
  }
  std::string suite;
  auto* reproduce = app.add_subcommand("reproduce", "run a shipped suite");
  reproduce->add_option("suite", suite, "suite name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kPass : kUsageError;
  }

  lmeasure::Overrides overrides;
  if (*seedOpt) overrides.seed = seed;
  if (*workersOpt) overrides.workers = workers;

  try {
    if (reproduce->parsed()) {
      const auto rep = lmeasure::reproduceSuite(suite, suiteDir, overrides);
      const std::filesystem::path out = *outOpt ? outDir : "out/" + suite;
      for (const auto& rec : rep.records) {
        lmeasure::persist(rec, out);
        report(rec, std::cout);
      }
      std::cout << "suite " << suite << ": " << (rep.pass() ? "PASS" : "FAIL") << '\n';
      return rep.pass() ? kPass : kCriterionFailure;
    }
    if (configPath.empty()) {
      std::cerr << "error: --config is required\n";
      return kUsageError;
    }
    const auto cfg = lmeasure::loadConfig(configPath, overrides);
    const std::string command = app.get_subcommands().front()->get_name();
    if (lmeasure::toString(cfg.command) != command) {
      std::cerr << "error: config is a '" << lmeasure::toString(cfg.command) << "' experiment, not '" << command
                << "'\n";
      return kUsageError;
    }
    const auto rec = lmeasure::runExperiment(cfg);
    lmeasure::persist(rec, *outOpt ? std::filesystem::path(outDir) : std::filesystem::path(cfg.output));
    report(rec, std::cout);
    return rec.pass() ? kPass : kCriterionFailure;
  } catch (const lmeasure::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsageError;
  } catch (const lmeasure::NotFoundError& e) {
    std::cerr << "not found: " << e.what() << '\n';
    return kUsageError;
  } catch (const lmeasure::Error& e) {
    std::cerr << e.kind() << " error: " << e.what() << '\n';
    return kCriterionFailure;
  }
}
