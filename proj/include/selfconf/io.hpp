#pragma once

// JSON system definitions and small output helpers.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <json.hpp>

#include "selfconf/errors.hpp"
#include "selfconf/ifs.hpp"

namespace selfconf {

using json = nlohmann::json;

namespace detail {

inline double number(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
  const auto& v = j.at(key);
  if (!v.is_number()) throw ConfigError(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

inline DeformationFamily parse_family(const json& g) {
  if (!g.is_object()) throw ConfigError("'g' must be an object");
  const std::string family = g.value("family", "");
  const double s = number(g, "s");
  try {
    if (family == "moebius_s") return {GFamily::moebius_s, s};
    if (family == "exp_s") return {GFamily::exp_s, s};
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  throw ConfigError("unknown deformation family '" + family + "'");
}

inline Map parse_map(const json& j) {
  if (!j.is_object()) throw ConfigError("each map must be an object");
  const std::string type = j.value("type", "");
  if (type == "affine") return Affine{number(j, "a"), number(j, "b")};
  if (type == "moebius") return Moebius{number(j, "a"), number(j, "b"), number(j, "c"), number(j, "d")};
  if (type == "deformed") {
    if (!j.contains("S") || !j.contains("g")) throw ConfigError("deformed map needs 'S' and 'g'");
    const auto& S = j.at("S");
    return DeformedAffine{Affine{number(S, "a"), number(S, "b")}, parse_family(j.at("g"))};
  }
  if (type == "plateau") {
    std::vector<Plateau> plateaus;
    for (const auto& p : j.value("plateaus", json::array()))
      plateaus.push_back({number(p, "lo"), number(p, "hi"), number(p, "left_width"),
                          number(p, "right_width"), number(p, "height")});
    return PlateauMap(number(j, "offset"), number(j, "scale"), number(j, "base"), std::move(plateaus));
  }
  throw ConfigError("unknown map type '" + type + "'");
}

}  // namespace detail

/// Parses a system definition without validating it.
inline IFSystem parse_system(const json& j) {
  if (!j.is_object() || !j.contains("maps") || !j.contains("weights"))
    throw ConfigError("system definition needs 'maps' and 'weights'");
  if (!j.at("maps").is_array() || !j.at("weights").is_array())
    throw ConfigError("'maps' and 'weights' must be arrays");
  std::vector<Map> maps;
  for (const auto& m : j.at("maps")) maps.push_back(detail::parse_map(m));
  std::vector<double> weights;
  for (const auto& w : j.at("weights")) {
    if (!w.is_number()) throw ConfigError("weights must be numbers");
    weights.push_back(w.get<double>());
  }
  return IFSystem(std::move(maps), std::move(weights));
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

/// Loads and validates; throws ConfigError or ValidationError.
inline IFSystem load_system(const std::string& path) {
  IFSystem s = parse_system(read_json_file(path));
  require_valid(s);
  return s;
}

inline json to_json(const Map& m) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Affine>) {
          return {{"type", "affine"}, {"a", v.a}, {"b", v.b}};
        } else if constexpr (std::is_same_v<T, Moebius>) {
          return {{"type", "moebius"}, {"a", v.a}, {"b", v.b}, {"c", v.c}, {"d", v.d}};
        } else if constexpr (std::is_same_v<T, DeformedAffine>) {
          return {{"type", "deformed"},
                  {"g", {{"family", v.g.name()}, {"s", v.g.parameter()}}},
                  {"S", {{"a", v.S.a}, {"b", v.S.b}}}};
        } else {
          json plateaus = json::array();
          for (const auto& p : v.plateaus())
            plateaus.push_back({{"lo", p.lo}, {"hi", p.hi}, {"left_width", p.left_width},
                                {"right_width", p.right_width}, {"height", p.height}});
          return {{"type", "plateau"}, {"offset", v.offset()}, {"scale", v.scale()},
                  {"base", v.base()}, {"plateaus", plateaus}};
        }
      },
      m.variant());
}

inline json to_json(const IFSystem& s) {
  json maps = json::array();
  for (const auto& m : s.maps()) maps.push_back(to_json(m));
  return {{"maps", maps}, {"weights", s.weights()}};
}

/// FNV-1a, 64 bit.
inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Shortest round-trip decimal representation.
inline std::string format_double(double v) {
  char buf[32];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

}  // namespace selfconf
