#pragma once

// On-disk layout: a JSON metadata file plus CMX1 payloads stored next to it
// as <stem>.<part>.cmx and referenced by file name.

#include <filesystem>
#include <string>

#include "json.hpp"
#include "qsl/als.hpp"
#include "qsl/measurement.hpp"
#include "qsl/types.hpp"

namespace qsl {

using Json = nlohmann::json;

/// Pretty-printed with sorted keys; the byte form used for hashing and files.
std::string dump_json(const Json& j);
Json parse_json(const std::string& text, const std::string& where);
Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

/// Lower-case hex SHA-256.
std::string sha256_hex(const std::string& bytes);

/// Sibling payload path <stem>.<part>.cmx.
std::filesystem::path payload_path(const std::filesystem::path& json_path, const std::string& part);

/// One payload per operator (<stem>.plus<k>.cmx, <stem>.minus<k>.cmx) plus the
/// reshaped matrix. `meta` is merged into the JSON.
void save_superoperator(const std::filesystem::path& json_path, const Superoperator& s, const Json& meta = Json::object());
Superoperator load_superoperator(const std::filesystem::path& json_path, Json* meta = nullptr);
/// The reshaped matrix stored with a superoperator.
ReshapedMatrix load_reshaped(const std::filesystem::path& json_path);

/// Observables as an N^2 x M matrix with columns vec(O_m); random-pair states likewise.
void save_design(const std::filesystem::path& json_path, const SensingDesign& d);
SensingDesign load_design(const std::filesystem::path& json_path);

/// Values as M x 1 (random pairs) or M_O x N (blockwise, column l = b_{row,l}).
void save_measurements(const std::filesystem::path& json_path, const MeasurementSet& m);
MeasurementSet load_measurements(const std::filesystem::path& json_path);

Json solver_config_json(const SolverConfig& c);
SolverConfig solver_config_from_json(const Json& j, SolverConfig base = {});
Json report_json(const SolveReport& r);

std::string to_string(LsMethod m);
LsMethod parse_ls_method(const std::string& s);

/// Stacks column blocks side by side / splits an N x N p matrix into N x N blocks.
ComplexMatrix hstack(const std::vector<ComplexMatrix>& blocks);
std::vector<ComplexMatrix> split_blocks(const ComplexMatrix& row);

}  // namespace qsl
