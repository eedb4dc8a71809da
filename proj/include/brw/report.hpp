#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

namespace brw {

// Filesystem / stream failures; the CLI maps these to its I/O exit code.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// nlohmann's default object backing is std::map, so object keys serialize in
// sorted order — reruns produce byte-identical documents.
using Json = nlohmann::json;

// Shortest round-trip decimal representation (deterministic across runs).
inline std::string fmt_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string csv_escape(const std::string& cell) {
    const bool needs_quoting = cell.find_first_of(",\"\n\r") != std::string::npos;
    if (!needs_quoting) return cell;
    std::string out = "\"";
    for (char c : cell) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

// CSV emitter: header row first, then data rows with the same column count.
class CsvWriter {
  public:
    CsvWriter(std::ostream& os, std::vector<std::string> header)
        : os_(os), columns_(header.size()) {
        if (columns_ == 0) throw std::logic_error("CsvWriter: empty header");
        emit(header);
    }

    void row(const std::vector<std::string>& cells) {
        if (cells.size() != columns_)
            throw std::logic_error("CsvWriter: expected " + std::to_string(columns_) +
                                   " cells, got " + std::to_string(cells.size()));
        emit(cells);
    }

  private:
    std::ostream& os_;
    std::size_t columns_;

    void emit(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) os_ << ',';
            os_ << csv_escape(cells[i]);
        }
        os_ << '\n';
        if (!os_) throw IoError("CsvWriter: stream write failed");
    }
};

inline void ensure_dir(const std::string& path) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) throw IoError("cannot create directory '" + path + "': " + ec.message());
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open output file '" + path + "'");
    return out;
}

inline void write_json_file(const std::string& path, const Json& doc) {
    std::ofstream out = open_output(path);
    out << doc.dump(2) << '\n';
    if (!out) throw IoError("write failed for '" + path + "'");
}

} // namespace brw
