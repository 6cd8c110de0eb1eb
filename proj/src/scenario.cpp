#include "scpnum/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "scpnum/errors.hpp"

namespace scpnum {

namespace {

using nlohmann::json;

std::string location(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  const std::size_t end = std::min(byte > 0 ? byte - 1 : 0, text.size());
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

[[noreturn]] void field_error(const std::string& path, const std::string& what) {
  throw ParseError(path + ": " + what);
}

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(),
                     [&](const char* k) { return item.key() == k; })) {
      field_error(path + "." + item.key(), "unknown field");
    }
  }
}

const json& require(const json& obj, const std::string& path, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) field_error(path + "." + key, "missing required field");
  return *it;
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) field_error(path, "expected a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) field_error(path, "expected an integer");
  return v.get<int>();
}

std::vector<double> as_numbers(const json& v, const std::string& path) {
  if (!v.is_array()) field_error(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(as_number(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

SolverConfig parse_solver(const json& j) {
  const std::string path = "solver";
  if (!j.is_object()) field_error(path, "expected an object");
  check_keys(j, path, {"gamma", "epsilon", "max_iter", "mu0", "x0", "price_lag"});
  SolverConfig cfg;
  if (j.contains("gamma")) cfg.gamma = as_number(j["gamma"], path + ".gamma");
  if (j.contains("epsilon")) cfg.epsilon = as_number(j["epsilon"], path + ".epsilon");
  if (j.contains("max_iter")) cfg.max_iter = as_int(j["max_iter"], path + ".max_iter");
  if (j.contains("mu0")) {
    const auto& v = j["mu0"];
    if (v.is_string() && v.get<std::string>() == "stationary") {
      cfg.mu0_policy = PriceInit::stationary;
    } else if (v.is_number()) {
      cfg.mu0_policy = PriceInit::scalar;
      cfg.mu0 = v.get<double>();
    } else if (v.is_array()) {
      cfg.mu0_policy = PriceInit::per_link;
      cfg.mu0_per_link = as_numbers(v, path + ".mu0");
    } else {
      field_error(path + ".mu0", "expected \"stationary\", a number or an array of numbers");
    }
  }
  if (j.contains("x0")) {
    const auto& v = j["x0"];
    if (v.is_string() && v.get<std::string>() == "fair_share") {
      cfg.x0_policy = RateInit::fair_share;
    } else if (v.is_string() && v.get<std::string>() == "midpoint") {
      cfg.x0_policy = RateInit::midpoint;
    } else if (v.is_array()) {
      cfg.x0_policy = RateInit::explicit_vector;
      cfg.x0 = as_numbers(v, path + ".x0");
    } else {
      field_error(path + ".x0", "expected \"fair_share\", \"midpoint\" or an array of numbers");
    }
  }
  if (j.contains("price_lag")) {
    const auto& v = j["price_lag"];
    if (v == "fresh") {
      cfg.price_lag = PriceLag::fresh;
    } else if (v == "lagged") {
      cfg.price_lag = PriceLag::lagged;
    } else {
      field_error(path + ".price_lag", "expected \"fresh\" or \"lagged\"");
    }
  }
  return cfg;
}

template <class Fn>
void located(const std::string& path, Fn&& fn) {
  try {
    fn();
  } catch (const ValidationError&) {
    throw;
  } catch (const Error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

ScenarioDoc paper_scenario_1() {
  ScenarioDoc doc;
  doc.links = {{1, 1000.0}};
  const double c2[] = {2, 4, 6, 8, 10};
  for (int s = 0; s < 5; ++s) doc.sources.push_back({s + 1, 256.0, 6.0, c2[s], {}, {}, {1}});
  doc.solver.gamma = 1e-4;
  doc.solver.epsilon = 0.1;
  return doc;
}

ScenarioDoc chain_3() {
  ScenarioDoc doc;
  doc.links = {{1, 380.0}, {2, 420.0}, {3, 460.0}};
  doc.sources.push_back({1, 256.0, 6.0, 8.0, {}, {}, {1, 2, 3}});
  doc.sources.push_back({2, 256.0, 6.0, 2.0, {}, {}, {1}});
  doc.sources.push_back({3, 256.0, 6.0, 4.0, {}, {}, {2}});
  doc.sources.push_back({4, 256.0, 6.0, 6.0, {}, {}, {3}});
  doc.solver.gamma = 1e-4;
  doc.solver.epsilon = 0.1;
  return doc;
}

ScenarioDoc single_source() {
  ScenarioDoc doc;
  doc.links = {{1, 100.0}};
  doc.sources.push_back({1, 256.0, 6.0, 2.0, 1.0, 256.0, {1}});
  return doc;
}

}  // namespace

ScenarioDoc parse_scenario(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::string msg = e.what();
    if (auto pos = msg.find("syntax error"); pos != std::string::npos) msg = msg.substr(pos);
    throw ParseError(location(text, e.byte) + ": " + msg);
  }
  if (!j.is_object()) field_error("$", "expected an object");
  check_keys(j, "$", {"links", "sources", "solver"});

  ScenarioDoc doc;
  const auto& links = require(j, "$", "links");
  if (!links.is_array()) field_error("links", "expected an array");
  for (std::size_t i = 0; i < links.size(); ++i) {
    const std::string path = "links[" + std::to_string(i) + "]";
    const auto& l = links[i];
    if (!l.is_object()) field_error(path, "expected an object");
    check_keys(l, path, {"id", "capacity_kbps"});
    doc.links.push_back({as_int(require(l, path, "id"), path + ".id"),
                         as_number(require(l, path, "capacity_kbps"), path + ".capacity_kbps")});
  }

  const auto& sources = require(j, "$", "sources");
  if (!sources.is_array()) field_error("sources", "expected an array");
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const std::string path = "sources[" + std::to_string(i) + "]";
    const auto& s = sources[i];
    if (!s.is_object()) field_error(path, "expected an object");
    check_keys(s, path, {"id", "r_kbps", "c1", "c2", "m_kbps", "big_m_kbps", "route"});
    SourceDoc src;
    src.id = as_int(require(s, path, "id"), path + ".id");
    src.r_kbps = as_number(require(s, path, "r_kbps"), path + ".r_kbps");
    src.c1 = as_number(require(s, path, "c1"), path + ".c1");
    src.c2 = as_number(require(s, path, "c2"), path + ".c2");
    if (s.contains("m_kbps")) src.m_kbps = as_number(s["m_kbps"], path + ".m_kbps");
    if (s.contains("big_m_kbps")) src.big_m_kbps = as_number(s["big_m_kbps"], path + ".big_m_kbps");
    const auto& route = require(s, path, "route");
    if (!route.is_array()) field_error(path + ".route", "expected an array of link ids");
    for (std::size_t k = 0; k < route.size(); ++k) {
      src.route.push_back(as_int(route[k], path + ".route[" + std::to_string(k) + "]"));
    }
    doc.sources.push_back(std::move(src));
  }

  if (j.contains("solver")) doc.solver = parse_solver(j["solver"]);
  return doc;
}

std::string to_json(const ScenarioDoc& doc) {
  json j;
  j["links"] = json::array();
  for (const auto& l : doc.links) j["links"].push_back({{"id", l.id}, {"capacity_kbps", l.capacity_kbps}});
  j["sources"] = json::array();
  for (const auto& s : doc.sources) {
    json o = {{"id", s.id}, {"r_kbps", s.r_kbps}, {"c1", s.c1}, {"c2", s.c2}, {"route", s.route}};
    if (s.m_kbps) o["m_kbps"] = *s.m_kbps;
    if (s.big_m_kbps) o["big_m_kbps"] = *s.big_m_kbps;
    j["sources"].push_back(std::move(o));
  }
  const auto& c = doc.solver;
  json solver = {{"gamma", c.gamma}, {"epsilon", c.epsilon}, {"max_iter", c.max_iter},
                 {"price_lag", c.price_lag == PriceLag::fresh ? "fresh" : "lagged"}};
  switch (c.mu0_policy) {
    case PriceInit::stationary: solver["mu0"] = "stationary"; break;
    case PriceInit::scalar: solver["mu0"] = c.mu0; break;
    case PriceInit::per_link: solver["mu0"] = c.mu0_per_link; break;
  }
  switch (c.x0_policy) {
    case RateInit::fair_share: solver["x0"] = "fair_share"; break;
    case RateInit::midpoint: solver["x0"] = "midpoint"; break;
    case RateInit::explicit_vector: solver["x0"] = c.x0; break;
  }
  j["solver"] = std::move(solver);
  return j.dump(2) + "\n";
}

Scenario build_scenario(const ScenarioDoc& doc, std::string name) {
  std::map<int, std::size_t> link_pos;
  for (std::size_t i = 0; i < doc.links.size(); ++i) {
    const std::string path = "links[" + std::to_string(i) + "]";
    if (!link_pos.emplace(doc.links[i].id, i).second) {
      throw ValidationError(path + ".id: duplicate link id " + std::to_string(doc.links[i].id));
    }
    if (!(doc.links[i].capacity_kbps > 0.0)) {
      throw ValidationError(path + ".capacity_kbps: capacity must be > 0");
    }
  }

  std::map<int, std::size_t> source_pos;
  std::map<int, SCurveUtility> utility_by_id;
  for (std::size_t i = 0; i < doc.sources.size(); ++i) {
    const auto& s = doc.sources[i];
    const std::string path = "sources[" + std::to_string(i) + "]";
    if (!source_pos.emplace(s.id, i).second) {
      throw ValidationError(path + ".id: duplicate source id " + std::to_string(s.id));
    }
    if (s.route.empty()) throw ValidationError(path + ".route: route is empty");
    std::set<int> seen;
    for (std::size_t k = 0; k < s.route.size(); ++k) {
      const std::string rpath = path + ".route[" + std::to_string(k) + "]";
      if (!link_pos.count(s.route[k])) {
        throw ValidationError(rpath + ": unknown link id " + std::to_string(s.route[k]));
      }
      if (!seen.insert(s.route[k]).second) {
        throw ValidationError(rpath + ": link " + std::to_string(s.route[k]) + " listed twice");
      }
    }
    located(path, [&] {
      utility_by_id.emplace(s.id, SCurveUtility::make(s.r_kbps, s.c1, s.c2, s.m_kbps, s.big_m_kbps));
    });
  }

  std::vector<SourceSpec> specs;
  for (const auto& s : doc.sources) specs.push_back({s.id, s.route});
  Scenario out{std::move(name), doc, Network{}, {}, doc.solver};
  located("$", [&] { out.net = Network::build(doc.links, specs); });
  for (std::size_t s = 0; s < out.net.num_sources(); ++s) {
    out.utils.push_back(utility_by_id.at(out.net.source_id(s)));
  }

  // Per-source and per-link solver vectors follow document order; the model uses id order.
  auto& cfg = out.config;
  if (cfg.x0_policy == RateInit::explicit_vector && cfg.x0.size() == doc.sources.size()) {
    std::vector<double> sorted(cfg.x0.size());
    for (std::size_t s = 0; s < out.net.num_sources(); ++s) {
      sorted[s] = doc.solver.x0[source_pos.at(out.net.source_id(s))];
    }
    cfg.x0 = std::move(sorted);
  }
  if (cfg.mu0_policy == PriceInit::per_link && cfg.mu0_per_link.size() == doc.links.size()) {
    std::vector<double> sorted(cfg.mu0_per_link.size());
    for (std::size_t l = 0; l < out.net.num_links(); ++l) {
      sorted[l] = doc.solver.mu0_per_link[link_pos.at(out.net.link_id(l))];
    }
    cfg.mu0_per_link = std::move(sorted);
  }
  located("solver", [&] { cfg.validate(out.net.num_sources(), out.net.num_links()); });
  located("solver.x0", [&] { initial_rates(out.net, out.utils, cfg); });
  return out;
}

std::vector<BuiltinInfo> builtin_scenarios() {
  return {
      {"paper-scenario-1", "one 1000 Kbps link shared by 5 sources, C2 = 2,4,6,8,10"},
      {"chain-3", "3-link chain, one long flow over all links and one short flow per link"},
      {"single-source", "one source on a 100 Kbps link"},
  };
}

std::optional<ScenarioDoc> builtin_scenario(std::string_view name) {
  if (name == "paper-scenario-1") return paper_scenario_1();
  if (name == "chain-3") return chain_3();
  if (name == "single-source") return single_source();
  return std::nullopt;
}

Scenario load_scenario(const std::string& name_or_path) {
  if (auto doc = builtin_scenario(name_or_path)) return build_scenario(*doc, name_or_path);
  std::ifstream in(name_or_path);
  if (!in) {
    throw ParseError(name_or_path + ": not a built-in scenario and cannot be opened");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return build_scenario(parse_scenario(buf.str()), name_or_path);
  } catch (const ParseError& e) {
    throw ParseError(name_or_path + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(name_or_path + ": " + e.what());
  }
}

}  // namespace scpnum
