#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tcsim/sim.hpp"

namespace tcsim {

inline constexpr std::string_view kScriptSchema = "tcsim-script/1";
inline constexpr std::string_view kReportSchema = "tcsim-report/1";

struct ScenarioScript {
  std::string name;
  std::string kind;
  std::string description;
  nlohmann::json doc;  // the full validated script
};

// Throws config-error with a description of the first schema violation.
ScenarioScript parse_script(const nlohmann::json& doc);

const std::vector<std::string>& catalog_names();
bool in_catalog(const std::string& name);
// Throws config-error for an unknown name.
ScenarioScript catalog_script(const std::string& name);

// Every config key with its default; scripts and variants may only override.
const nlohmann::json& default_config();
nlohmann::json merge_config(const nlohmann::json& base, const nlohmann::json& overrides);
// Parses "K=V" using the type of the default for K.
std::pair<std::string, nlohmann::json> parse_variant(const std::string& assignment);

// Generic attacks plus those the script declares.
std::vector<std::string> supported_attacks(const ScenarioScript& script);

struct RunOptions {
  std::uint64_t seed = 42;
  std::vector<std::string> attacks;
  std::vector<std::string> variants;  // K=V
};

struct AssertionResult {
  std::string name;
  std::optional<bool> expected;  // nullopt: not applicable in this run
  bool observed = false;
  std::string detail;

  bool skipped() const { return !expected.has_value(); }
  bool passed() const { return !expected || *expected == observed; }
};

struct Report {
  std::string scenario;
  std::uint64_t seed = 0;
  std::vector<std::string> attacks;
  std::vector<AssertionResult> assertions;
  std::string transcript_sha256;

  bool passed() const;
  nlohmann::json to_json() const;
  static Report from_json(const nlohmann::json& j);
};

struct RunResult {
  sim::Transcript transcript;
  std::string jsonl;
  Report report;
};

// Deterministic in (script, options). Throws config-error before executing
// anything when the script, variants or attacks are invalid.
RunResult run_scenario(const ScenarioScript& script, const RunOptions& options);

// Re-evaluates every assertion named in the transcript header.
Report check_transcript(const sim::Transcript& t, const std::string& jsonl_sha256);

struct AssertionInfo {
  std::string name;
  std::string description;
};
const std::vector<AssertionInfo>& assertion_catalog();

}  // namespace tcsim
