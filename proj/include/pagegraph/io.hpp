#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace pagegraph::io {

std::string read_file(const std::filesystem::path& path);

// Writes a sibling temp file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

// One parsed object per non-blank line. Parse failures raise MalformedFile
// with the 1-based line number.
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);

std::string to_jsonl(const std::vector<nlohmann::ordered_json>& rows);

}  // namespace pagegraph::io
