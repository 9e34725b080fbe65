#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "quasidrive/cli.hpp"

namespace quasidrive::cli::detail {

using Meta = std::vector<std::pair<std::string, std::string>>;

std::string num(double x);

// '#'-prefixed block: tool version, command, config hash, compact config, extra lines
std::string header(const RunConfig& cfg, const Meta& extra);
nlohmann::ordered_json meta_json(const RunConfig& cfg, const Meta& extra);

bool wants(const RunConfig& cfg, const std::string& format);

// serialized writer; creates the directory
void write_file(const std::filesystem::path& path, const std::string& content);

} // namespace quasidrive::cli::detail
