#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

namespace erp::io {

using json = nlohmann::ordered_json;

/// "%.17g" rendering used by every CSV export.
std::string format17(double v);

/// Whole file as a string. Throws DataError if it cannot be read.
std::string read_file(const std::filesystem::path& path);

/// Writes (truncates) a file. Throws DataError on failure.
void write_file(const std::filesystem::path& path, const std::string& contents);

/// Pretty JSON with a trailing newline; number rendering is nlohmann's
/// shortest round-trip form.
std::string dump_json(const json& doc);

json parse_json_file(const std::filesystem::path& path);

/// Creates the directory (and parents) or throws DataError.
void ensure_dir(const std::filesystem::path& dir);

/// Replaces characters that are awkward in file names.
std::string file_safe(std::string_view name);

}  // namespace erp::io
