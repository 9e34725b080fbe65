#include "quasidrive/cli.hpp"
#include "quasidrive/errors.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

namespace quasidrive::cli {

using Json = nlohmann::ordered_json;

namespace {

enum class Type { integer, real, optional_real, text, boolean, real_list, range, text_list };

struct Field {
    const char* path;
    Type type;
    Json fallback;
    double lo = -INFINITY; // numeric bounds, inclusive
    double hi = INFINITY;
    std::vector<std::string> choices = {};
    const char* flag = nullptr;
};

const std::vector<Field>& schema()
{
    static const std::vector<Field> fields = {
        {"model.kind", Type::text, "resonant", 0, 0, {"resonant", "parametric"}, "--kind"},
        {"model.N", Type::integer, 5, 1, 40, {}, "--N"},
        {"model.r", Type::real, 0.5, 0, 10, {}, "--r"},
        {"model.d", Type::real, 3.0, 1e-6, 100, {}, "--d"},
        {"model.beta", Type::optional_real, nullptr, 0, 1e3, {}, "--beta"},
        {"model.mu", Type::optional_real, nullptr, -1e3, 1e3, {}, "--mu"},
        {"model.lambda", Type::optional_real, nullptr, 1e-6, 10, {}, "--lambda"},
        {"model.nbar", Type::real, 0.0, 0, 1e3, {}, "--nbar"},
        {"numeric.dim", Type::integer, 0, 0, 8192, {}, "--dim"},
        {"numeric.tol", Type::real, 1e-10, 1e-15, 1e-3, {}, "--tol"},
        {"numeric.grid", Type::integer, 201, 3, 100001, {}, "--grid"},
        {"numeric.d_range", Type::range, Json::array({2.0, 4.0}), 1e-6, 100, {}, "--d-range"},
        {"numeric.r_range", Type::range, Json::array({0.1, 0.3}), 1e-6, 10, {}, "--r-range"},
        {"numeric.r_points", Type::integer, 9, 2, 1000, {}, "--r-points"},
        {"numeric.lambda_list", Type::real_list, Json::array({0.05, 0.033, 0.025}), 1e-4, 1, {}, "--lambda-list"},
        {"numeric.count", Type::integer, 12, 1, 4096, {}, "--count"},
        {"numeric.sheet", Type::text, "auto", 0, 0, {"auto", "dome", "rim", "left-well", "right-well"}, "--sheet"},
        {"numeric.g_points", Type::integer, 41, 2, 100000, {}, "--g-points"},
        {"numeric.kmax", Type::integer, 5, 0, 64, {}, "--kmax"},
        {"numeric.levels", Type::integer, 5, 0, 1000, {}, "--levels"},
        {"output.dir", Type::text, "quasidrive-out", 0, 0, {}, "--out"},
        {"output.formats", Type::text_list, Json::array({"csv", "json"}), 0, 0, {"csv", "json"}, "--formats"},
        {"output.plot", Type::boolean, false, 0, 0, {}, "--plot"},
        {"output.timestamp", Type::boolean, false, 0, 0, {}, "--timestamp"},
        {"output.deterministic", Type::boolean, true, 0, 0, {}, nullptr},
    };
    return fields;
}

std::pair<std::string, std::string> split_path(const std::string& path)
{
    const auto dot = path.find('.');
    return {path.substr(0, dot), path.substr(dot + 1)};
}

Json& slot(Json& root, const std::string& path)
{
    const auto [block, key] = split_path(path);
    return root[block][key];
}

std::string type_name(Type t)
{
    switch (t) {
    case Type::integer: return "an integer";
    case Type::real: return "a number";
    case Type::optional_real: return "a number or null";
    case Type::text: return "a string";
    case Type::boolean: return "a boolean";
    case Type::real_list: return "a list of numbers";
    case Type::range: return "a [lo, hi] pair";
    case Type::text_list: return "a list of strings";
    }
    return "?";
}

std::string fmt(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void check_bounds(const Field& f, double v, const std::string& where)
{
    if (!(v >= f.lo && v <= f.hi))
        throw ConfigError(where + ": " + fmt(v) + " outside [" + fmt(f.lo) + ", " + fmt(f.hi) + "]");
}

void check_choice(const Field& f, const std::string& v, const std::string& where)
{
    if (f.choices.empty())
        return;
    if (std::find(f.choices.begin(), f.choices.end(), v) == f.choices.end()) {
        std::string all;
        for (const auto& c : f.choices)
            all += (all.empty() ? "" : "|") + c;
        throw ConfigError(where + ": '" + v + "' is not one of " + all);
    }
}

// validated copy of a JSON value for the field
Json from_json(const Field& f, const Json& v, const std::string& where)
{
    auto bad = [&] { return ConfigError(where + ": expected " + type_name(f.type) + ", got " + v.dump()); };
    switch (f.type) {
    case Type::integer:
        if (!v.is_number_integer())
            throw bad();
        check_bounds(f, v.get<double>(), where);
        return v.get<long>();
    case Type::optional_real:
        if (v.is_null())
            return nullptr;
        [[fallthrough]];
    case Type::real:
        if (!v.is_number())
            throw bad();
        check_bounds(f, v.get<double>(), where);
        return v.get<double>();
    case Type::text:
        if (!v.is_string())
            throw bad();
        check_choice(f, v.get<std::string>(), where);
        return v;
    case Type::boolean:
        if (!v.is_boolean())
            throw bad();
        return v;
    case Type::range:
    case Type::real_list: {
        if (!v.is_array() || v.empty())
            throw bad();
        Json out = Json::array();
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number())
                throw ConfigError(where + "[" + std::to_string(i) + "]: expected a number, got " + v[i].dump());
            check_bounds(f, v[i].get<double>(), where + "[" + std::to_string(i) + "]");
            out.push_back(v[i].get<double>());
        }
        if (f.type == Type::range && (out.size() != 2 || !(out[0].get<double>() < out[1].get<double>())))
            throw ConfigError(where + ": expected [lo, hi] with lo < hi, got " + v.dump());
        return out;
    }
    case Type::text_list: {
        if (!v.is_array() || v.empty())
            throw bad();
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_string())
                throw ConfigError(where + "[" + std::to_string(i) + "]: expected a string, got " + v[i].dump());
            check_choice(f, v[i].get<std::string>(), where + "[" + std::to_string(i) + "]");
        }
        return v;
    }
    }
    throw bad();
}

// number at character offset `pos` of the flag text
double parse_real(const std::string& s, std::size_t offset, const std::string& where)
{
    double v = 0.0;
    const char* b = s.data();
    const char* e = b + s.size();
    const auto r = std::from_chars(b, e, v);
    if (r.ec != std::errc() || r.ptr != e || s.empty())
        throw ConfigError(where + ": malformed number '" + s + "' at character " +
                          std::to_string(offset + static_cast<std::size_t>(r.ptr - b)));
    return v;
}

long parse_integer(const std::string& s, std::size_t offset, const std::string& where)
{
    long v = 0;
    const char* b = s.data();
    const char* e = b + s.size();
    const auto r = std::from_chars(b, e, v);
    if (r.ec != std::errc() || r.ptr != e || s.empty())
        throw ConfigError(where + ": malformed integer '" + s + "' at character " +
                          std::to_string(offset + static_cast<std::size_t>(r.ptr - b)));
    return v;
}

std::vector<std::pair<std::string, std::size_t>> split(const std::string& s, char sep)
{
    std::vector<std::pair<std::string, std::size_t>> out;
    std::size_t start = 0;
    while (true) {
        const auto p = s.find(sep, start);
        out.emplace_back(s.substr(start, p == std::string::npos ? std::string::npos : p - start), start);
        if (p == std::string::npos)
            return out;
        start = p + 1;
    }
}

Json from_flag(const Field& f, const std::string& text)
{
    const std::string where = std::string("flag ") + f.flag;
    Json v;
    switch (f.type) {
    case Type::integer: v = parse_integer(text, 0, where); break;
    case Type::real:
    case Type::optional_real: v = parse_real(text, 0, where); break;
    case Type::text: v = text; break;
    case Type::boolean: v = true; break;
    case Type::range: {
        const auto parts = split(text, ':');
        if (parts.size() != 2)
            throw ConfigError(where + ": expected LO:HI, got '" + text + "'");
        v = Json::array();
        for (const auto& [p, off] : parts)
            v.push_back(parse_real(p, off, where));
        break;
    }
    case Type::real_list:
        v = Json::array();
        for (const auto& [p, off] : split(text, ','))
            v.push_back(parse_real(p, off, where));
        break;
    case Type::text_list:
        v = Json::array();
        for (const auto& [p, off] : split(text, ','))
            v.push_back(p);
        break;
    }
    return from_json(f, v, where);
}

RunConfig defaults()
{
    RunConfig cfg;
    cfg.values = Json::object();
    for (const auto& f : schema()) {
        slot(cfg.values, f.path) = f.fallback;
        cfg.provenance[f.path] = "default";
    }
    return cfg;
}

void apply_json(RunConfig& cfg, const std::string& text, const std::string& source, bool& has_command)
{
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config " + source + ": syntax error at byte " + std::to_string(e.byte));
    }
    if (!doc.is_object())
        throw ConfigError("config " + source + ": top level must be an object");
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        const std::string& block = it.key();
        if (block == "command") {
            if (!it.value().is_string())
                throw ConfigError("config " + source + ": key command: expected a string");
            cfg.command = parse_command(it.value().get<std::string>());
            cfg.provenance["command"] = "file";
            has_command = true;
            continue;
        }
        if (block != "model" && block != "numeric" && block != "output")
            throw ConfigError("config " + source + ": unknown key '" + block + "'");
        if (!it.value().is_object())
            throw ConfigError("config " + source + ": key " + block + ": expected an object");
        for (auto kv = it.value().begin(); kv != it.value().end(); ++kv) {
            const std::string path = block + "." + kv.key();
            const auto f = std::find_if(schema().begin(), schema().end(),
                                        [&](const Field& x) { return path == x.path; });
            if (f == schema().end())
                throw ConfigError("config " + source + ": unknown key '" + path + "'");
            slot(cfg.values, path) = from_json(*f, kv.value(), "config " + source + ": key " + path);
            cfg.provenance[path] = "file";
        }
    }
}

const Json& slot_default(const std::string& path)
{
    return std::find_if(schema().begin(), schema().end(), [&](const Field& f) { return path == f.path; })->fallback;
}

// value-based so that a serialized config re-parses
void check_consistency(const RunConfig& cfg)
{
    const bool resonant = cfg.kind() == DriveKind::resonant;
    if (resonant && cfg.is_set("model.mu"))
        throw ConfigError("conflicting model blocks: model.mu given for a resonant drive");
    if (!resonant && cfg.is_set("model.beta"))
        throw ConfigError("conflicting model blocks: model.beta given for a parametric drive");
    if (resonant && cfg.is_set("model.beta") && cfg.is_set("model.lambda") &&
        cfg.at("model.d") != slot_default("model.d"))
        throw ConfigError("conflicting model blocks: model.d given together with model.lambda and model.beta");
    if (cfg.flag("output.timestamp") && cfg.flag("output.deterministic"))
        throw ConfigError("output.timestamp needs output.deterministic = false");
    if (cfg.command == Command::escape && cfg.list("numeric.lambda_list").size() < 3)
        throw ConfigError("numeric.lambda_list: escape needs at least 3 values");
}

} // namespace

std::string to_string(Command c)
{
    switch (c) {
    case Command::spectrum: return "spectrum";
    case Command::sweep: return "sweep";
    case Command::rabi: return "rabi";
    case Command::semiclassics: return "semiclassics";
    case Command::escape: return "escape";
    case Command::distribution: return "distribution";
    }
    return "?";
}

Command parse_command(const std::string& text)
{
    for (Command c : {Command::spectrum, Command::sweep, Command::rabi, Command::semiclassics, Command::escape,
                      Command::distribution})
        if (text == to_string(c))
            return c;
    throw ConfigError("unknown command '" + text + "'");
}

const Json& RunConfig::at(const std::string& path) const
{
    const auto [block, key] = split_path(path);
    return values.at(block).at(key);
}

double RunConfig::number(const std::string& path) const
{
    const Json& v = at(path);
    if (!v.is_number())
        throw ConfigError(path + " is not set");
    return v.get<double>();
}

long RunConfig::integer(const std::string& path) const { return at(path).get<long>(); }
std::string RunConfig::text(const std::string& path) const { return at(path).get<std::string>(); }
bool RunConfig::flag(const std::string& path) const { return at(path).get<bool>(); }
bool RunConfig::is_set(const std::string& path) const { return !at(path).is_null(); }

std::vector<double> RunConfig::list(const std::string& path) const
{
    return at(path).get<std::vector<double>>();
}

DriveKind RunConfig::kind() const { return parse_drive_kind(text("model.kind")); }

RunConfig config_from_json(const std::string& text, const std::string& source)
{
    RunConfig cfg = defaults();
    bool has_command = false;
    apply_json(cfg, text, source, has_command);
    if (!has_command)
        throw ConfigError("config " + source + ": no command");
    check_consistency(cfg);
    return cfg;
}

RunConfig parse_config(const std::vector<std::string>& args)
{
    CLI::App app{"quasidrive"};
    std::string command, config_path;
    app.add_option("command", command, "spectrum|sweep|rabi|semiclassics|escape|distribution");
    app.add_option("--config", config_path, "JSON config file");
    std::map<std::string, std::string> raw;
    std::map<std::string, CLI::Option*> opts;
    for (const auto& f : schema()) {
        if (!f.flag)
            continue;
        if (f.type == Type::boolean)
            opts[f.path] = app.add_flag(f.flag);
        else
            opts[f.path] = app.add_option(f.flag, raw[f.path]);
    }
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        throw ConfigError(std::string("command line: ") + e.what());
    }

    RunConfig cfg = defaults();
    bool has_command = false;
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in)
            throw ConfigError("config file '" + config_path + "' not found");
        std::stringstream buf;
        buf << in.rdbuf();
        apply_json(cfg, buf.str(), "'" + config_path + "'", has_command);
    }
    if (!command.empty()) {
        cfg.command = parse_command(command);
        cfg.provenance["command"] = "flag";
        has_command = true;
    }
    if (!has_command)
        throw ConfigError("no command given\n" + usage());
    for (const auto& f : schema()) {
        if (!f.flag || opts[f.path]->count() == 0)
            continue;
        slot(cfg.values, f.path) = from_flag(f, raw[f.path]);
        cfg.provenance[f.path] = "flag";
    }
    check_consistency(cfg);
    return cfg;
}

std::string serialize(const RunConfig& cfg)
{
    Json doc = Json::object();
    doc["command"] = to_string(cfg.command);
    for (const char* block : {"model", "numeric", "output"})
        doc[block] = cfg.values.at(block);
    return doc.dump(2) + "\n";
}

std::string serialize_provenance(const RunConfig& cfg)
{
    Json doc = Json::object();
    doc["command"] = cfg.provenance.count("command") ? cfg.provenance.at("command") : "flag";
    for (const auto& f : schema())
        doc[f.path] = cfg.provenance.at(f.path);
    return doc.dump(2) + "\n";
}

std::uint64_t fnv1a(const std::string& bytes)
{
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string config_hash(const RunConfig& cfg)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(fnv1a(serialize(cfg))));
    return buf;
}

std::string usage()
{
    std::string s = "usage: quasidrive <spectrum|sweep|rabi|semiclassics|escape|distribution> [--config PATH]";
    for (const auto& f : schema())
        if (f.flag)
            s += std::string(" [") + f.flag + (f.type == Type::boolean ? "]" : " V]");
    return s;
}

scaling::ScaledModel resolve_model(const RunConfig& cfg)
{
    if (cfg.kind() == DriveKind::parametric) {
        if (!cfg.is_set("model.lambda") || !cfg.is_set("model.mu"))
            throw ConfigError("parametric model needs model.lambda and model.mu");
        return scaling::parametric_model(cfg.number("model.lambda"), cfg.number("model.mu"));
    }
    if (cfg.is_set("model.lambda") && cfg.is_set("model.beta"))
        return scaling::resonant_model(cfg.number("model.lambda"), cfg.number("model.beta"));
    if (cfg.is_set("model.lambda"))
        throw ConfigError("model.lambda needs model.beta (or give N, r, d instead)");
    return scaling::resonant_sweep_map(
        {static_cast<int>(cfg.integer("model.N")), 1.0, cfg.number("model.d"), cfg.number("model.r")});
}

} // namespace quasidrive::cli
