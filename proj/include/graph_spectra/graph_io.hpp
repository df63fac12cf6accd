#pragma once

#include <algorithm>
#include <string>
#include <string_view>

#include <json.hpp>

#include "graph.hpp"

namespace graph_spectra {

/// Malformed graph text. `where` is a JSON path such as "bonds[2].length", or
/// "line N, column M" for syntax errors.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string where, const std::string& what)
      : std::runtime_error(where + ": " + what), where_(std::move(where)) {}
  [[nodiscard]] const std::string& where() const { return where_; }

 private:
  std::string where_;
};

namespace detail {

using nlohmann::json;

inline const json& require_field(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw ParseError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(path + "." + key, "missing field");
  return *it;
}

inline double require_number(const json& obj, const char* key, const std::string& path) {
  const auto& v = require_field(obj, key, path);
  if (!v.is_number()) throw ParseError(path + "." + key, "expected a number");
  return v.get<double>();
}

inline double optional_number(const json& obj, const char* key, const std::string& path, double fallback) {
  if (!obj.contains(key)) return fallback;
  return require_number(obj, key, path);
}

inline std::string require_string(const json& obj, const char* key, const std::string& path) {
  const auto& v = require_field(obj, key, path);
  if (!v.is_string()) throw ParseError(path + "." + key, "expected a string");
  return v.get<std::string>();
}

inline VertexCondition parse_condition(const json& c, const std::string& path) {
  const auto type = require_string(c, "type", path);
  if (type == "delta") return Delta{optional_number(c, "lambda", path, 0.0)};
  if (type == "delta_prime") return DeltaPrime{optional_number(c, "mu", path, 0.0)};
  if (type == "dirichlet") return Dirichlet{};
  if (type == "neumann") return Neumann{};
  throw ParseError(path + ".type", "unknown condition type '" + type + "'");
}

inline PotentialSpec parse_potential(const json& p, const std::string& path) {
  const auto type = require_string(p, "type", path);
  if (type == "zero") return ZeroPotential{};
  if (type == "constant") return ConstantPotential{require_number(p, "v0", path)};
  if (type == "sampled") {
    const auto& values = require_field(p, "values", path);
    if (!values.is_array()) throw ParseError(path + ".values", "expected an array");
    SampledPotential s;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!values[i].is_number()) throw ParseError(path + ".values[" + std::to_string(i) + "]", "expected a number");
      s.values.push_back(values[i].get<double>());
    }
    if (s.values.size() < 2) throw ParseError(path + ".values", "need at least 2 samples");
    return s;
  }
  throw ParseError(path + ".type", "unknown potential type '" + type + "'");
}

inline json condition_json(const VertexCondition& c) {
  return std::visit(
      [](const auto& v) -> json {
        using C = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<C, Delta>) return {{"type", "delta"}, {"lambda", v.lambda}};
        if constexpr (std::is_same_v<C, DeltaPrime>) return {{"type", "delta_prime"}, {"mu", v.mu}};
        if constexpr (std::is_same_v<C, Dirichlet>) return {{"type", "dirichlet"}};
        if constexpr (std::is_same_v<C, Neumann>) return {{"type", "neumann"}};
      },
      c);
}

inline json potential_json(const PotentialSpec& p) {
  return std::visit(
      [](const auto& v) -> json {
        using P = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<P, ZeroPotential>) return {{"type", "zero"}};
        if constexpr (std::is_same_v<P, ConstantPotential>) return {{"type", "constant"}, {"v0", v.v0}};
        if constexpr (std::is_same_v<P, SampledPotential>) return {{"type", "sampled"}, {"values", v.values}};
      },
      p);
}

inline std::string line_column(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  const auto head = text.substr(0, byte);
  const auto line = 1 + std::count(head.begin(), head.end(), '\n');
  const auto last_nl = head.rfind('\n');
  const auto col = last_nl == std::string_view::npos ? byte : byte - last_nl - 1;
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace detail

/// Parses the JSON graph schema. Structural problems (missing fields, wrong
/// types, unknown tags, empty vertex list) throw ParseError; semantic checks
/// such as connectivity are left to validate().
inline MetricGraph parse_graph(std::string_view text) {
  using detail::json;
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(detail::line_column(text, e.byte == 0 ? 0 : e.byte - 1), "malformed JSON");
  }
  if (!doc.is_object()) throw ParseError("$", "expected an object");

  MetricGraph g;
  const auto& vertices = detail::require_field(doc, "vertices", "$");
  if (!vertices.is_array()) throw ParseError("vertices", "expected an array");
  if (vertices.empty()) throw ParseError("vertices", "vertex list is empty");
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const std::string path = "vertices[" + std::to_string(i) + "]";
    VertexRecord v;
    v.id = detail::require_string(vertices[i], "id", path);
    v.condition = detail::parse_condition(detail::require_field(vertices[i], "condition", path), path + ".condition");
    g.vertices.push_back(std::move(v));
  }

  const auto& bonds = detail::require_field(doc, "bonds", "$");
  if (!bonds.is_array()) throw ParseError("bonds", "expected an array");
  for (std::size_t i = 0; i < bonds.size(); ++i) {
    const std::string path = "bonds[" + std::to_string(i) + "]";
    const auto& b = bonds[i];
    BondData bond;
    bond.from = detail::require_string(b, "from", path);
    bond.to = detail::require_string(b, "to", path);
    bond.length = detail::require_number(b, "length", path);
    bond.flux = detail::optional_number(b, "flux", path, 0.0);
    if (b.contains("potential")) bond.potential = detail::parse_potential(b["potential"], path + ".potential");
    g.bonds.push_back(std::move(bond));
  }
  return g;
}

/// Canonical text form: every field written, fixed key order, shortest
/// round-trip decimal representation for doubles.
inline std::string serialize_graph(const MetricGraph& g) {
  using detail::json;
  json vertices = json::array();
  for (const auto& v : g.vertices) {
    json jv = json::object();
    jv["id"] = v.id;
    jv["condition"] = detail::condition_json(v.condition);
    vertices.push_back(std::move(jv));
  }
  json bonds = json::array();
  for (const auto& b : g.bonds) {
    json jb = json::object();
    jb["from"] = b.from;
    jb["to"] = b.to;
    jb["length"] = b.length;
    jb["flux"] = b.flux;
    jb["potential"] = detail::potential_json(b.potential);
    bonds.push_back(std::move(jb));
  }
  json doc = json::object();
  doc["vertices"] = std::move(vertices);
  doc["bonds"] = std::move(bonds);
  return doc.dump(2) + "\n";
}

}  // namespace graph_spectra
