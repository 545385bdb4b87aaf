/// @file experiment.hpp
/// JSON experiment configs, dispatch to the library, and result persistence.
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace lmeasure {

using Json = nlohmann::json;

inline constexpr int kConfigVersion = 1;

enum class Command { dimension, measure, curve, doubling, bg };

[[nodiscard]] std::string toString(Command c);
[[nodiscard]] Command parseCommand(const std::string& s);

/// Values given on the command line take precedence over the file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
};

/// Validated config: the normalized JSON (defaults filled in) plus the fields
/// every command shares.
struct ExperimentConfig {
  Command command = Command::dimension;
  std::string id;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::string output = "out";
  Json normalized;  // semantic fields only; hashed

  [[nodiscard]] std::string hash() const;
};

/// Parses and validates; ConfigError names the offending field.
[[nodiscard]] ExperimentConfig parseConfig(const Json& doc, const Overrides& overrides = {});
[[nodiscard]] ExperimentConfig loadConfig(const std::filesystem::path& path,
                                          const Overrides& overrides = {});

struct CriterionResult {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct ResultRecord {
  std::string id;
  Command command = Command::dimension;
  std::string timestamp;
  std::string configHash;
  Json config;
  Json summary;
  std::vector<CriterionResult> criteria;
  std::map<std::string, std::string> tables;  // file stem -> CSV text

  [[nodiscard]] bool pass() const;
  [[nodiscard]] Json toJson() const;
};

[[nodiscard]] ResultRecord runExperiment(const ExperimentConfig& config);

/// Writes <id>_<table>.csv files and appends one line to results.jsonl.
void persist(const ResultRecord& record, const std::filesystem::path& outDir);

struct SuiteReport {
  std::string name;
  std::vector<ResultRecord> records;

  [[nodiscard]] bool pass() const;
};

inline const std::vector<std::string> kSuites = {"minkowski-subspaces", "volume-consistency",
                                                 "doubling", "bishop-gromov"};

/// Runs every *.json under suiteRoot/name in lexical order. NotFoundError for unknown suites.
[[nodiscard]] SuiteReport reproduceSuite(const std::string& name,
                                         const std::filesystem::path& suiteRoot,
                                         const Overrides& overrides = {});

/// FNV-1a 64 of the text, as 16 hex digits.
[[nodiscard]] std::string fnv1a(const std::string& text);

}  // namespace lmeasure
