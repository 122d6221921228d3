#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "treeten/approx.hpp"

namespace treeten {

nlohmann::json to_json(const DenseTensor& v);
DenseTensor dense_from_json(const nlohmann::json& j);

nlohmann::json to_json(const RankTuple& r);
RankTuple rank_tuple_from_json(const nlohmann::json& j);

nlohmann::json to_json(const TreeTensor& t);
TreeTensor tree_tensor_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Report& r);
// One JSON object per line, one line per record.
std::string to_json_lines(const Report& r);

enum class FileKind { dense, tree_tensor, rank_tuple };
FileKind detect_kind(const nlohmann::json& j);

nlohmann::json read_json_file(const std::filesystem::path& path);
// Canonical serialization (sorted keys, shortest round-trip doubles) written
// to a temporary file and renamed into place, so readers never see a partial
// file.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace treeten
