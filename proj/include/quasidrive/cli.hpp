#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "quasidrive/scaling.hpp"

namespace quasidrive::cli {

inline constexpr const char* kToolVersion = "1.0.0";

enum class Command { spectrum, sweep, rabi, semiclassics, escape, distribution };
std::string to_string(Command c);
Command parse_command(const std::string& text);

// Fully resolved configuration. `values` mirrors the JSON layout
// {"model": {...}, "numeric": {...}, "output": {...}}; every documented key is present.
struct RunConfig {
    Command command = Command::spectrum;
    nlohmann::ordered_json values;
    std::map<std::string, std::string> provenance; // "model.N" -> default | file | flag

    const nlohmann::ordered_json& at(const std::string& path) const;
    double number(const std::string& path) const;
    long integer(const std::string& path) const;
    std::string text(const std::string& path) const;
    bool flag(const std::string& path) const;
    bool is_set(const std::string& path) const; // not null
    std::vector<double> list(const std::string& path) const;

    DriveKind kind() const;
};

// Config file + command-line flags; args excludes the program name.
RunConfig parse_config(const std::vector<std::string>& args);
// JSON text as if read from a file named `source`.
RunConfig config_from_json(const std::string& text, const std::string& source = "<string>");

// Canonical form: {"command": ..., "model": ..., "numeric": ..., "output": ...}, two-space indent.
std::string serialize(const RunConfig& cfg);
std::string serialize_provenance(const RunConfig& cfg);
std::uint64_t fnv1a(const std::string& bytes);
std::string config_hash(const RunConfig& cfg); // "fnv1a64:<16 hex digits>" of serialize()

std::string usage();

// Scaled model for single-point commands; N, r, d map through the sweep formulas unless
// lambda and beta are both given.
scaling::ScaledModel resolve_model(const RunConfig& cfg);

enum ExitCode { ok = 0, config_failure = 1, numeric_failure = 2 };

// Writes artifacts into output.dir; never throws.
int run(const RunConfig& cfg);
// Parses, runs and maps every failure class onto the exit-code contract.
int main_entry(const std::vector<std::string>& args);

// Plot script for an existing result file; returns the script path.
std::filesystem::path emit_plotscript(const std::filesystem::path& result, Command kind);

// worker count: hardware concurrency, capped by QUASIDRIVE_THREADS
unsigned worker_threads();

} // namespace quasidrive::cli
