#pragma once

// Typed accessors over nlohmann::json that report failures as ConfigError
// with a JSON-path style location ("$.model.p").

#include <Eigen/Dense>

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "json.hpp"
#include "rds/blockmodel.hpp"

namespace rds {

// Rejects non-objects and keys outside `allowed`.
void check_keys(const nlohmann::json& j, const std::string& path, std::initializer_list<const char*> allowed);

const nlohmann::json& require(const nlohmann::json& j, const std::string& path, const char* key);
double get_number(const nlohmann::json& j, const std::string& path, const char* key);
std::int64_t get_int(const nlohmann::json& j, const std::string& path, const char* key);
std::size_t get_size(const nlohmann::json& j, const std::string& path, const char* key);
std::string get_string(const nlohmann::json& j, const std::string& path, const char* key);
bool get_bool(const nlohmann::json& j, const std::string& path, const char* key);
std::vector<double> get_vector(const nlohmann::json& j, const std::string& path, const char* key);
Eigen::MatrixXd get_matrix(const nlohmann::json& j, const std::string& path, const char* key);

BlockModel blockmodel_from_json(const nlohmann::json& j, const std::string& path);
nlohmann::json blockmodel_to_json_value(const BlockModel& model);

}  // namespace rds
