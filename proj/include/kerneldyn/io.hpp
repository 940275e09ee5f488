#pragma once

// Output plumbing: RFC-4180 CSV writing, JSON serialization of analysis
// reports and run manifests, and a small JSON-Schema-subset validator used
// to keep the shipped schemas honest.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "kerneldyn/kernel.hpp"
#include "kerneldyn/version.hpp"

namespace kerneldyn {

// ---------------------------------------------------------------------------
// CSV (RFC 4180: CRLF record terminators, header row, minimal quoting).
// ---------------------------------------------------------------------------

/// Shortest representation that still round-trips a double exactly.
inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Quote a field only when it contains a comma, quote, or line break.
inline std::string csv_field(const std::string& f) {
  if (f.find_first_of(",\"\r\n") == std::string::npos) return f;
  std::string q = "\"";
  for (char c : f) {
    q += c;
    if (c == '"') q += '"';
  }
  q += '"';
  return q;
}

class csv_writer {
 public:
  explicit csv_writer(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open for writing: " + path);
  }

  void row(const std::vector<std::string>& fields) {
    for (size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << csv_field(fields[i]);
    }
    out_ << "\r\n";
  }

  void row(std::initializer_list<std::string> fields) {
    row(std::vector<std::string>(fields));
  }

 private:
  std::ofstream out_;
};

// ---------------------------------------------------------------------------
// Report and manifest serialization.
// ---------------------------------------------------------------------------

inline nlohmann::json report_to_json(const std::string& name, double C,
                                     const FixedPointReport& rep) {
  nlohmann::json j{
      {"name", name},
      {"C", C},
      {"kappa0", rep.kappa0},
      {"dkappa0", rep.dkappa0},
      {"dkappa1_series", rep.dkappa1_series},
      {"dkappa1_quad", rep.dkappa1_quad},
      {"rho_star", rep.rho_star},
      {"case", to_string(rep.case_label)},
      {"alpha", rep.alpha},
      {"tail_mass", rep.tail_mass},
  };
  j["dkappa_at_star"] = rep.dkappa_at_star;
  j["tail_warning"] = rep.tail_mass > tail_warning_threshold;
  j["dkappa1_discrepancy"] = rep.dkappa1_discrepancy;
  if (rep.alternative) {
    j["alternative"] = {{"case", to_string(rep.alternative->case_label)},
                        {"alpha", rep.alternative->alpha}};
  }
  return j;
}

struct RunManifest {
  std::string command;
  nlohmann::json config;  ///< full resolved configuration
  std::uint64_t seed = 0;
  std::vector<std::string> outputs;
  double duration_seconds = 0.0;

  nlohmann::json to_json() const {
    return nlohmann::json{{"command", command},       {"config", config},
                          {"version", version_string}, {"seed", seed},
                          {"outputs", outputs},       {"duration_seconds", duration_seconds}};
  }
};

/// Serialize with a trailing newline, 2-space indent, keys in insertion order
/// not guaranteed (nlohmann sorts) — stable either way, so reruns are
/// byte-identical apart from fields that genuinely change.
inline void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// JSON-Schema subset validation.
// ---------------------------------------------------------------------------
//
// Supports: type (single or array of alternatives), required, properties,
// additionalProperties (boolean), items, enum, minimum, maximum, minItems.
// Enough to express the shipped schemas without pulling in a full validator.

namespace detail {

inline bool type_matches(const nlohmann::json& v, const std::string& t) {
  if (t == "object") return v.is_object();
  if (t == "array") return v.is_array();
  if (t == "string") return v.is_string();
  if (t == "number") return v.is_number();
  if (t == "integer") return v.is_number_integer() || v.is_number_unsigned();
  if (t == "boolean") return v.is_boolean();
  if (t == "null") return v.is_null();
  return false;
}

inline void validate_json_impl(const nlohmann::json& v, const nlohmann::json& schema,
                               const std::string& where, std::vector<std::string>& errors) {
  if (schema.contains("type")) {
    const auto& t = schema["type"];
    bool ok = false;
    if (t.is_string()) {
      ok = type_matches(v, t.get<std::string>());
    } else {
      for (const auto& alt : t) ok = ok || type_matches(v, alt.get<std::string>());
    }
    if (!ok) {
      errors.push_back(where + ": expected type " + t.dump() + ", got " + v.type_name());
      return;
    }
  }
  if (schema.contains("enum")) {
    bool ok = false;
    for (const auto& e : schema["enum"]) ok = ok || e == v;
    if (!ok) errors.push_back(where + ": value " + v.dump() + " not in enum");
  }
  if (v.is_number()) {
    if (schema.contains("minimum") && v.get<double>() < schema["minimum"].get<double>())
      errors.push_back(where + ": below minimum");
    if (schema.contains("maximum") && v.get<double>() > schema["maximum"].get<double>())
      errors.push_back(where + ": above maximum");
  }
  if (v.is_object()) {
    if (schema.contains("required")) {
      for (const auto& key : schema["required"]) {
        if (!v.contains(key.get<std::string>()))
          errors.push_back(where + ": missing required key " + key.get<std::string>());
      }
    }
    const bool closed =
        schema.contains("additionalProperties") && schema["additionalProperties"].is_boolean() &&
        !schema["additionalProperties"].get<bool>();
    for (auto it = v.begin(); it != v.end(); ++it) {
      const bool declared = schema.contains("properties") && schema["properties"].contains(it.key());
      if (declared) {
        validate_json_impl(it.value(), schema["properties"][it.key()], where + "." + it.key(),
                           errors);
      } else if (closed) {
        errors.push_back(where + ": unexpected key " + it.key());
      }
    }
  }
  if (v.is_array()) {
    if (schema.contains("minItems") && v.size() < schema["minItems"].get<size_t>())
      errors.push_back(where + ": fewer than minItems elements");
    if (schema.contains("items")) {
      for (size_t i = 0; i < v.size(); ++i)
        validate_json_impl(v[i], schema["items"], where + "[" + std::to_string(i) + "]", errors);
    }
  }
}

}  // namespace detail

/// Returns a list of violations; empty means the instance conforms.
inline std::vector<std::string> validate_json(const nlohmann::json& instance,
                                              const nlohmann::json& schema) {
  std::vector<std::string> errors;
  detail::validate_json_impl(instance, schema, "$", errors);
  return errors;
}

}  // namespace kerneldyn
