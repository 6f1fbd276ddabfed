#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace physio {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

/// Parses `key=value` lines; blank lines and lines starting with '#' are
/// skipped. Throws ParseError on a line without '='.
KeyValues parse_kv(const std::string& text, const std::string& origin);
KeyValues read_kv(const std::filesystem::path& file);

std::string render_kv(const KeyValues& kv);
void write_text(const std::filesystem::path& file, const std::string& body);
std::string read_text(const std::filesystem::path& file);

}  // namespace physio
