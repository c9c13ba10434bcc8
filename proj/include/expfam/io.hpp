#pragma once

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "expfam/catalog.hpp"
#include "expfam/family.hpp"
#include "expfam/mixture.hpp"
#include "json.hpp"

namespace expfam {

/// A distribution read from or written to a JSON file: one family member
/// in a declared parameter space.
struct DistributionFile {
  FamilyPtr family;
  ParamVector params;
};

/// Warnings accumulated while parsing (e.g. weight renormalization).
struct ParseWarnings {
  std::vector<std::string> messages;
};

namespace io_detail {

using nlohmann::json;

// All numbers are emitted with 17 significant digits so that values
// round-trip bit-exactly and files are byte-stable across runs.
inline std::string format_number(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

inline std::string format_array(const std::vector<double>& values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    out += format_number(values[i]);
  }
  return out + "]";
}

inline json parse_json(const std::string& text, const std::string& what) {
  json parsed = json::parse(text, nullptr, false);
  if (parsed.is_discarded()) throw ParseError(what + ": invalid JSON");
  return parsed;
}

inline std::vector<double> number_or_array(const json& node, const std::string& key) {
  if (node.is_number()) return {node.get<double>()};
  if (node.is_array()) {
    std::vector<double> out;
    for (const auto& item : node) {
      if (!item.is_number()) throw ParseError("field '" + key + "' must be numeric");
      out.push_back(item.get<double>());
    }
    return out;
  }
  throw ParseError("field '" + key + "' must be a number or array of numbers");
}

inline Space parse_space(const std::string& text) {
  if (text == "source") return Space::source;
  if (text == "natural") return Space::natural;
  if (text == "expectation") return Space::expectation;
  throw ParseError("unknown parameter space '" + text + "'");
}

inline FamilyPtr family_from_json(const json& root) {
  if (!root.contains("family") || !root.at("family").is_string()) {
    throw ParseError("missing string field 'family'");
  }
  Hyperparams hyper;
  if (root.contains("fixed")) {
    const json& fixed = root.at("fixed");
    if (!fixed.is_object()) throw ParseError("'fixed' must be an object");
    for (const auto& [key, value] : fixed.items()) {
      if (!value.is_number()) throw ParseError("fixed hyperparameter '" + key +
                                               "' must be numeric");
      hyper[key] = value.get<double>();
    }
  }
  return make_family(root.at("family").get<std::string>(), hyper);
}

// Source-space params come as named fields per the family's card; the
// natural/expectation spaces use a single flat "theta"/"eta" array.
inline ParamVector params_from_json(const Family& family, const json& root) {
  if (!root.contains("space") || !root.at("space").is_string()) {
    throw ParseError("missing string field 'space'");
  }
  const Space space = parse_space(root.at("space").get<std::string>());
  if (!root.contains("params") || !root.at("params").is_object()) {
    throw ParseError("missing object field 'params'");
  }
  const json& params = root.at("params");
  std::vector<double> values;
  if (space == Space::source) {
    for (const auto& field : family.source_fields()) {
      if (!params.contains(field.key)) {
        throw ParseError(family.name() + ": missing source field '" + field.key + "'");
      }
      const auto block = number_or_array(params.at(field.key), field.key);
      if (static_cast<int>(block.size()) != field.length) {
        throw ParseError(family.name() + ": field '" + field.key + "' must have " +
                         std::to_string(field.length) + " entries");
      }
      values.insert(values.end(), block.begin(), block.end());
    }
  } else {
    const char* key = space == Space::natural ? "theta" : "eta";
    if (!params.contains(key)) {
      throw ParseError(family.name() + std::string(": missing field '") + key + "'");
    }
    values = number_or_array(params.at(key), key);
  }
  ParamVector out{space, std::move(values)};
  family.check_values(out.values, space);
  return out;
}

inline std::string fixed_block(const Family& family) {
  const auto& hyper = family.descriptor().fixed_hyperparams;
  if (hyper.empty()) return {};
  std::string out = "\"fixed\":{";
  bool first = true;
  for (const auto& [key, value] : hyper) {
    if (!first) out += ",";
    first = false;
    out += "\"" + key + "\":" + format_number(value);
  }
  return out + "},";
}

inline std::string params_block(const Family& family, const ParamVector& params) {
  std::string out = "\"space\":\"" + std::string(to_string(params.space)) +
                    "\",\"params\":{";
  if (params.space == Space::source) {
    std::size_t offset = 0;
    bool first = true;
    for (const auto& field : family.source_fields()) {
      if (!first) out += ",";
      first = false;
      out += "\"" + field.key + "\":";
      if (field.length == 1) {
        out += format_number(params.values[offset]);
      } else {
        out += format_array({params.values.begin() + offset,
                             params.values.begin() + offset + field.length});
      }
      offset += static_cast<std::size_t>(field.length);
    }
  } else {
    out += params.space == Space::natural ? "\"theta\":" : "\"eta\":";
    out += format_array(params.values);
  }
  return out + "}";
}

}  // namespace io_detail

inline DistributionFile parse_distribution(const std::string& text) {
  const auto root = io_detail::parse_json(text, "distribution file");
  DistributionFile out;
  out.family = io_detail::family_from_json(root);
  out.params = io_detail::params_from_json(*out.family, root);
  return out;
}

inline std::string serialize_distribution(const Family& family, const ParamVector& params) {
  family.check_values(params.values, params.space);
  return "{\"family\":\"" + family.name() + "\"," + io_detail::fixed_block(family) +
         io_detail::params_block(family, params) + "}";
}

/// Mixture file: shared family plus components with per-component weight,
/// space and params. Weights off by at most 1e-6 are renormalized with a
/// warning; larger defects are errors.
inline MixtureModel parse_mixture(const std::string& text, ParseWarnings* warnings) {
  const auto root = io_detail::parse_json(text, "mixture file");
  MixtureModel model;
  model.family = io_detail::family_from_json(root);
  if (!root.contains("components") || !root.at("components").is_array() ||
      root.at("components").empty()) {
    throw ParseError("mixture file needs a nonempty 'components' array");
  }
  double total = 0.0;
  for (const auto& item : root.at("components")) {
    if (!item.contains("weight") || !item.at("weight").is_number()) {
      throw ParseError("each component needs a numeric 'weight'");
    }
    const double w = item.at("weight").get<double>();
    if (!(w >= 0.0)) throw DataError("mixture component weights must be nonnegative");
    total += w;
    const ParamVector params = io_detail::params_from_json(*model.family, item);
    model.weights.push_back(w);
    model.components.push_back(expectation_values(*model.family, params));
  }
  const double defect = std::abs(total - 1.0);
  if (defect > 1e-6) {
    throw DataError("mixture weights sum to " + io_detail::format_number(total) +
                    ", too far from 1");
  }
  if (defect > 1e-9) {
    if (warnings) {
      warnings->messages.push_back("mixture weights summed to " +
                                   io_detail::format_number(total) +
                                   "; renormalized");
    }
  }
  for (double& w : model.weights) w /= total;
  validate_mixture(model);
  return model;
}

/// Canonical mixture serialization: components in source space.
inline std::string serialize_mixture(const MixtureModel& model) {
  validate_mixture(model);
  std::string out = "{\"family\":\"" + model.family->name() + "\"," +
                    io_detail::fixed_block(*model.family) + "\"components\":[";
  for (std::size_t j = 0; j < model.size(); ++j) {
    if (j) out += ",";
    const ParamVector lambda =
        source_params(model.family->expectation_to_source(model.components[j]));
    out += "{\"weight\":" + io_detail::format_number(model.weights[j]) + "," +
           io_detail::params_block(*model.family, lambda) + "}";
  }
  return out + "]}";
}

// ----- CSV -----------------------------------------------------------------

/// One observation per row, d columns, header "x1,..,xd".
inline std::string write_csv(const std::vector<Observation>& rows, int columns) {
  std::string out;
  for (int c = 0; c < columns; ++c) {
    if (c) out += ",";
    out += "x" + std::to_string(c + 1);
  }
  out += "\n";
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ",";
      out += io_detail::format_number(row[c]);
    }
    out += "\n";
  }
  return out;
}

/// Parses CSV text; a non-numeric first line is treated as a header.
inline std::vector<Observation> read_csv(const std::string& text) {
  std::vector<Observation> rows;
  std::istringstream stream(text);
  std::string line;
  bool first = true;
  while (std::getline(stream, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    Observation row;
    bool numeric = true;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t comma = line.find(',', pos);
      if (comma == std::string::npos) comma = line.size();
      // Locale-independent decimal parsing; surrounding spaces allowed.
      std::size_t begin = pos, end = comma;
      while (begin < end && std::isspace(static_cast<unsigned char>(line[begin]))) ++begin;
      while (end > begin && std::isspace(static_cast<unsigned char>(line[end - 1]))) --end;
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(line.data() + begin, line.data() + end, value);
      if (ec != std::errc{} || ptr != line.data() + end || begin == end) {
        numeric = false;
        break;
      }
      row.push_back(value);
      pos = comma + 1;
      if (comma == line.size()) break;
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;  // header row
      }
      throw ParseError("csv: non-numeric cell outside the header row");
    }
    first = false;
    if (!rows.empty() && rows.front().size() != row.size()) {
      throw ParseError("csv: rows have inconsistent column counts");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path);
  out << content;
}

}  // namespace expfam
