#pragma once

// Internal: JSON encoding of the configuration records, shared by the artifact
// writers and the run-configuration validator.

#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "koopgen/dynamics.hpp"
#include "koopgen/errors.hpp"
#include "koopgen/kernel_basis.hpp"
#include "koopgen/spectral.hpp"

namespace koopgen::detail {

using json = nlohmann::ordered_json;

/// Reads fields of one JSON object, naming the full key path in every error
/// and rejecting keys that were never read.
class ObjectReader {
 public:
  ObjectReader(const json& object, std::string path) : object_(object), path_(std::move(path)) {
    require(object_.is_object(), ErrorKind::validation,
            (path_.empty() ? std::string("document") : path_) + ": expected an object");
  }

  bool has(const std::string& key) const { return object_.contains(key); }
  std::string key_path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  double number(const std::string& key, double fallback) {
    return has(key) ? number(key) : fallback;
  }
  double number(const std::string& key) {
    const json& v = get(key);
    require(v.is_number(), ErrorKind::validation, key_path(key) + ": expected a number");
    const double x = v.get<double>();
    require(std::isfinite(x), ErrorKind::validation, key_path(key) + ": must be finite");
    return x;
  }
  std::optional<double> optional_number(const std::string& key, std::optional<double> fallback) {
    if (!has(key)) return fallback;
    if (object_.at(key).is_null()) {
      used_.insert(key);
      return std::nullopt;
    }
    return number(key);
  }
  Index integer(const std::string& key, Index fallback) {
    return has(key) ? integer(key) : fallback;
  }
  Index integer(const std::string& key) {
    const json& v = get(key);
    require(v.is_number_integer(), ErrorKind::validation, key_path(key) + ": expected an integer");
    return v.get<Index>();
  }
  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = get(key);
    require(v.is_boolean(), ErrorKind::validation, key_path(key) + ": expected true or false");
    return v.get<bool>();
  }
  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = get(key);
    require(v.is_string(), ErrorKind::validation, key_path(key) + ": expected a string");
    return v.get<std::string>();
  }
  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    if (!has(key)) return fallback;
    const json& v = get(key);
    require(v.is_array(), ErrorKind::validation, key_path(key) + ": expected an array");
    std::vector<double> out;
    for (const auto& x : v) {
      require(x.is_number() && std::isfinite(x.get<double>()), ErrorKind::validation,
              key_path(key) + ": expected finite numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }
  std::vector<std::string> strings(const std::string& key, std::vector<std::string> fallback) {
    if (!has(key)) return fallback;
    const json& v = get(key);
    require(v.is_array(), ErrorKind::validation, key_path(key) + ": expected an array");
    std::vector<std::string> out;
    for (const auto& x : v) {
      require(x.is_string(), ErrorKind::validation, key_path(key) + ": expected strings");
      out.push_back(x.get<std::string>());
    }
    return out;
  }
  ObjectReader object(const std::string& key) { return ObjectReader(get(key), key_path(key)); }
  const json& raw(const std::string& key) { return get(key); }

  /// Unknown keys are errors.
  void finish() const {
    for (const auto& item : object_.items())
      require(used_.count(item.key()) > 0, ErrorKind::validation,
              "unknown key '" + key_path(item.key()) + "'");
  }

 private:
  const json& get(const std::string& key) {
    require(has(key), ErrorKind::validation, key_path(key) + ": required key is missing");
    used_.insert(key);
    return object_.at(key);
  }

  const json& object_;
  std::string path_;
  std::set<std::string> used_;
};

/// Wraps a parse or value error from a sub-decoder as a validation error.
template <typename Fn>
auto as_validation(const std::string& key, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::validation) throw;
    throw Error(ErrorKind::validation, key + ": " + e.what());
  }
}

json encode(const SystemSpec& spec);
SystemSpec decode_system(ObjectReader reader);

json encode(const KernelConfig& config);
KernelConfig decode_kernel(ObjectReader& reader);

/// T_c is not included; it belongs to the analysis section of a run document.
json encode(const SpectralConfig& config);
SpectralConfig decode_spectral(ObjectReader& reader, double T_c);

json encode(const InvariantReport& report);
InvariantReport decode_invariants(ObjectReader reader);

json parse_json(const std::string& text, const std::string& origin);

}  // namespace koopgen::detail
