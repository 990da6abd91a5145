#include "rds/json_config.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "rds/error.hpp"

namespace rds {

namespace {
std::string child(const std::string& path, const char* key) { return path + "." + key; }
}  // namespace

void check_keys(const nlohmann::json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  for (const auto& item : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* a) { return item.key() == a; });
    if (!known) throw ConfigError(path + "." + item.key(), "unknown key");
  }
}

const nlohmann::json& require(const nlohmann::json& j, const std::string& path, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(child(path, key), "missing required key");
  return *it;
}

double get_number(const nlohmann::json& j, const std::string& path, const char* key) {
  const auto& v = require(j, path, key);
  if (!v.is_number()) throw ConfigError(child(path, key), "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(child(path, key), "must be finite");
  return d;
}

std::int64_t get_int(const nlohmann::json& j, const std::string& path, const char* key) {
  const auto& v = require(j, path, key);
  if (!v.is_number_integer()) throw ConfigError(child(path, key), "expected an integer");
  return v.get<std::int64_t>();
}

std::size_t get_size(const nlohmann::json& j, const std::string& path, const char* key) {
  const std::int64_t v = get_int(j, path, key);
  if (v < 0) throw ConfigError(child(path, key), "must be non-negative");
  return static_cast<std::size_t>(v);
}

std::string get_string(const nlohmann::json& j, const std::string& path, const char* key) {
  const auto& v = require(j, path, key);
  if (!v.is_string()) throw ConfigError(child(path, key), "expected a string");
  return v.get<std::string>();
}

bool get_bool(const nlohmann::json& j, const std::string& path, const char* key) {
  const auto& v = require(j, path, key);
  if (!v.is_boolean()) throw ConfigError(child(path, key), "expected true or false");
  return v.get<bool>();
}

std::vector<double> get_vector(const nlohmann::json& j, const std::string& path, const char* key) {
  const auto& v = require(j, path, key);
  if (!v.is_array()) throw ConfigError(child(path, key), "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw ConfigError(child(path, key) + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

Eigen::MatrixXd get_matrix(const nlohmann::json& j, const std::string& path, const char* key) {
  const auto& v = require(j, path, key);
  const std::string where = child(path, key);
  if (!v.is_array() || v.empty()) throw ConfigError(where, "expected a nonempty array of rows");
  const std::size_t rows = v.size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(rows));
  for (std::size_t r = 0; r < rows; ++r) {
    const auto& row = v[r];
    const std::string rw = where + "[" + std::to_string(r) + "]";
    if (!row.is_array() || row.size() != rows) throw ConfigError(rw, "expected " + std::to_string(rows) + " numbers");
    for (std::size_t c = 0; c < rows; ++c) {
      if (!row[c].is_number()) throw ConfigError(rw + "[" + std::to_string(c) + "]", "expected a number");
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c].get<double>();
    }
  }
  return m;
}

}  // namespace rds
