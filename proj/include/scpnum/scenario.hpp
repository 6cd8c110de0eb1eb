#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scpnum/network.hpp"
#include "scpnum/scp_engine.hpp"
#include "scpnum/utility.hpp"

namespace scpnum {

struct SourceDoc {
  int id = 0;
  double r_kbps = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  std::optional<double> m_kbps;
  std::optional<double> big_m_kbps;
  std::vector<int> route;  // link ids
};

/// Scenario file contents before validation.
struct ScenarioDoc {
  std::vector<LinkSpec> links;
  std::vector<SourceDoc> sources;
  SolverConfig solver;
};

/// Validated model ready for the engine, agents or oracle.
struct Scenario {
  std::string name;
  ScenarioDoc doc;
  Network net;
  std::vector<SCurveUtility> utils;  // aligned with net's source indices
  SolverConfig config;
};

struct BuiltinInfo {
  std::string name;
  std::string description;
};

/// Parses a JSON scenario document. Throws ParseError naming line/column or field path.
ScenarioDoc parse_scenario(std::string_view text);

/// Serializes a document to JSON text; parse_scenario(to_json(doc)) reproduces it.
std::string to_json(const ScenarioDoc& doc);

/// Builds network and utilities. Throws ValidationError naming the offending field.
Scenario build_scenario(const ScenarioDoc& doc, std::string name = "");

std::vector<BuiltinInfo> builtin_scenarios();
std::optional<ScenarioDoc> builtin_scenario(std::string_view name);

/// Built-in name or path to a JSON file.
Scenario load_scenario(const std::string& name_or_path);

}  // namespace scpnum
