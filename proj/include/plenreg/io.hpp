#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

namespace plenreg {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

json read_json_file(const std::filesystem::path& path);
json parse_json(std::string_view text, const std::string& what);

// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

}  // namespace plenreg
