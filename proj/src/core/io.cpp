#include "io.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "common.hpp"

namespace erp::io {

std::string format17(double v) { return fmt::format("{:.17g}", v); }

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw DataError("I/O error while reading '" + path.string() + "'");
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw DataError("I/O error while writing '" + path.string() + "'");
}

std::string dump_json(const json& doc) { return doc.dump(2) + "\n"; }

json parse_json_file(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw DataError("malformed JSON in '" + path.string() + "': " + e.what());
    }
}

void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw DataError("cannot create output directory '" + dir.string() + "'");
}

std::string file_safe(std::string_view name) {
    std::string out(name);
    for (char& c : out)
        if (c == '/' || c == '\\' || c == ':' || c == ' ') c = '_';
    return out;
}

}  // namespace erp::io
