#pragma once

#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "isopurity/errors.hpp"
#include "isopurity/rational.hpp"
#include "isopurity/version.hpp"

namespace tool {

using nlohmann::json;

// shortest round-trip decimal form; '.' separator by construction
inline std::string fmt_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (const unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw isopurity::DomainError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw isopurity::DomainError("cannot write " + path.string());
    out << bytes;
}

inline std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// mu accepted as "p/q", an integer, or a plain decimal (converted exactly)
inline isopurity::Rational parse_rational(const std::string& text) {
    const auto slash = text.find('/');
    if (slash != std::string::npos) {
        const long long num = std::stoll(text.substr(0, slash));
        const long long den = std::stoll(text.substr(slash + 1));
        return isopurity::Rational(num, den);
    }
    const auto dot = text.find('.');
    if (dot == std::string::npos) return isopurity::Rational(std::stoll(text));
    const std::string digits = text.substr(0, dot) + text.substr(dot + 1);
    long long den = 1;
    for (std::size_t i = dot + 1; i < text.size(); ++i) den *= 10;
    return isopurity::Rational(std::stoll(digits), den);
}

// Run manifest: full parameter set plus digests of every data file written,
// so a run can be replayed and checked byte for byte (timestamps excluded
// from the reproducibility contract).
class Manifest {
  public:
    Manifest(std::string command, json parameters)
        : command_(std::move(command)), parameters_(std::move(parameters)),
          started_(utc_now()) {}

    void record(const std::filesystem::path& path, const std::string& bytes) {
        write_file(path, bytes);
        char digest[32];
        std::snprintf(digest, sizeof(digest), "fnv1a64:%016llx",
                      static_cast<unsigned long long>(fnv1a64(bytes)));
        outputs_.push_back({{"file", path.filename().string()},
                            {"digest", digest},
                            {"bytes", bytes.size()}});
    }

    void write(const std::filesystem::path& path) const {
        json m;
        m["tool_version"] = isopurity::kVersion;
        m["command"] = command_;
        m["parameters"] = parameters_;
        m["started_utc"] = started_;
        m["finished_utc"] = utc_now();
        m["outputs"] = outputs_;
        write_file(path, m.dump(2) + "\n");
    }

  private:
    std::string command_;
    json parameters_;
    std::string started_;
    json outputs_ = json::array();
};

struct CsvReader {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

inline CsvReader read_csv(const std::filesystem::path& path) {
    const std::string bytes = read_file(path);
    if (bytes.empty()) throw isopurity::DomainError("empty file: " + path.string());
    CsvReader out;
    std::istringstream in(bytes);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::istringstream ls(line);
        std::string field;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (first) {
            out.header = std::move(fields);
            first = false;
        } else {
            out.rows.push_back(std::move(fields));
        }
    }
    return out;
}

}  // namespace tool
