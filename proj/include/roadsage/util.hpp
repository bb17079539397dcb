#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

namespace roadsage {

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

nlohmann::json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const nlohmann::json& j, int indent = 2);

// FNV-1a over bytes, rendered as 16 hex digits. Used for config hashes.
std::uint64_t fnv1a64(const std::string& bytes);
std::string hash_hex(const std::string& bytes);

// IEEE-754 bit pattern as 16 hex digits; exact round-trip for any double.
std::string double_to_hex(double d);
double hex_to_double(const std::string& hex);

// "a/b" path join that tolerates a trailing slash on a.
std::string path_join(const std::string& a, const std::string& b);
std::string parent_path(const std::string& path);
void ensure_directory(const std::string& dir);

}  // namespace roadsage
