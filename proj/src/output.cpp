#include "output.hpp"
#include "quasidrive/errors.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <mutex>
#include <sstream>

namespace quasidrive::cli {

namespace detail {

std::string num(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

std::string timestamp()
{
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

std::string compact(const RunConfig& cfg)
{
    return nlohmann::ordered_json::parse(serialize(cfg)).dump();
}

} // namespace

std::string header(const RunConfig& cfg, const Meta& extra)
{
    std::ostringstream os;
    os << "# quasidrive " << kToolVersion << "\n";
    os << "# command: " << to_string(cfg.command) << "\n";
    os << "# config_hash: " << config_hash(cfg) << "\n";
    os << "# config: " << compact(cfg) << "\n";
    for (const auto& [k, v] : extra)
        os << "# " << k << ": " << v << "\n";
    if (cfg.flag("output.timestamp"))
        os << "# timestamp: " << timestamp() << "\n";
    return os.str();
}

nlohmann::ordered_json meta_json(const RunConfig& cfg, const Meta& extra)
{
    nlohmann::ordered_json m;
    m["tool"] = "quasidrive";
    m["version"] = kToolVersion;
    m["command"] = to_string(cfg.command);
    m["config_hash"] = config_hash(cfg);
    m["config"] = nlohmann::ordered_json::parse(serialize(cfg));
    for (const auto& [k, v] : extra)
        m[k] = v;
    if (cfg.flag("output.timestamp"))
        m["timestamp"] = timestamp();
    return m;
}

bool wants(const RunConfig& cfg, const std::string& format)
{
    for (const auto& f : cfg.at("output.formats"))
        if (f.get<std::string>() == format)
            return true;
    return false;
}

void write_file(const std::filesystem::path& path, const std::string& content)
{
    static std::mutex m;
    std::lock_guard<std::mutex> lock(m);
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
}

} // namespace detail

namespace {

const char* kPreamble = "set datafile separator comma\n"
                        "set datafile commentschars '#'\n"
                        "set datafile columnheaders\n"
                        "set terminal pngcairo size 900,900\n";

std::string script_for(const std::string& file, Command kind)
{
    std::ostringstream s;
    s << kPreamble;
    const std::string stem = std::filesystem::path(file).stem().string();
    s << "set output '" << stem << ".png'\n";
    switch (kind) {
    case Command::sweep:
        s << "set multiplot layout 2,1\n"
             "set xlabel 'detuning d'\nset ylabel 'g_n'\n"
             "plot for [n=0:40] '" << file << "' using 1:($2==n ? $3 : 1/0) with lines title sprintf('n=%d', n)\n"
             "set ylabel 'chi_n'\nset yrange [-3:3]\n"
             "plot for [n=0:40] '" << file << "' using 1:($2==n ? $4 : 1/0) with lines title sprintf('n=%d', n)\n"
             "unset multiplot\n";
        break;
    case Command::semiclassics:
        s << "set multiplot layout 3,1\nset xlabel 'g'\n"
             "set ylabel 'S'\nplot '" << file << "' using 1:3 with lines notitle\n"
             "set ylabel 'tau'\nplot '" << file << "' using 1:4 with lines notitle\n"
             "set ylabel 'mean Q'\nplot '" << file << "' using 1:5 with lines notitle\n"
             "unset multiplot\n";
        break;
    case Command::distribution:
        s << "set xlabel 'g_n'\nset ylabel 'ln rho_n'\n"
             "plot '" << file << "' using 2:($3 > 0 ? log($3) : 1/0) with linespoints notitle\n";
        break;
    case Command::rabi:
        s << "set logscale xy\nset xlabel 'r'\nset ylabel 'gap / V'\n"
             "plot '" << file << "' using 1:4 with linespoints title 'numerical', '" << file
          << "' using 1:5 with lines title 'formula'\n";
        break;
    case Command::spectrum:
        s << "set xlabel 'index'\nset ylabel 'g'\n"
             "plot '" << file << "' using 1:2 with points notitle\n";
        break;
    case Command::escape:
        throw DomainError("no plot script for escape reports");
    }
    return s.str();
}

} // namespace

std::filesystem::path emit_plotscript(const std::filesystem::path& result, Command kind)
{
    if (!std::filesystem::exists(result))
        throw DomainError("missing result file " + result.string());
    const auto script = result.parent_path() / (result.stem().string() + ".gp");
    detail::write_file(script, script_for(result.filename().string(), kind));
    return script;
}

} // namespace quasidrive::cli
