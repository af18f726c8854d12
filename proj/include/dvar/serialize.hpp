#pragma once

#include "dvar/forecast.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <string_view>

namespace dvar {

using Json = nlohmann::ordered_json;

Json to_json(const MarginalCDFModel& model);
Json to_json(const FactorizedJointModel& model);
Json to_json(const HorizonSuite& suite);

/// Inverses of to_json. Doubles round-trip bit-exactly. Throws ConfigError
/// on malformed documents.
MarginalCDFModel marginal_from_json(const Json& j);
FactorizedJointModel joint_from_json(const Json& j);
HorizonSuite suite_from_json(const Json& j);

void save_suite(const std::string& path, const HorizonSuite& suite);
HorizonSuite load_suite(const std::string& path);

/// Directory layout: suite.json (index), base.json and h<h>.json holding the
/// horizon model and its direct models.
void save_suite_files(const std::string& dir, const HorizonSuite& suite);
HorizonSuite load_suite_files(const std::string& dir);
/// Files written by save_suite_files, index first.
std::vector<std::string> suite_file_names(const HorizonSuite& suite);

/// Convergence per model, variable and location.
Json fit_report(const HorizonSuite& suite);

/// 64-bit FNV-1a as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

/// Writes `<output>.meta.json` with the config hash, seed, version and any
/// extra fields.
void write_sidecar(const std::string& output_path, std::string_view config_hash, std::uint64_t seed,
                   const Json& extra = Json::object());

std::string_view version() noexcept;

}  // namespace dvar
