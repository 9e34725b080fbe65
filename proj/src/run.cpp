#include "output.hpp"

#include "quasidrive/cli.hpp"
#include "quasidrive/errors.hpp"
#include "quasidrive/fockspace.hpp"
#include "quasidrive/kinetics.hpp"
#include "quasidrive/semiclassics.hpp"
#include "quasidrive/spectroscopy.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

namespace quasidrive::cli {

using Json = nlohmann::ordered_json;
using detail::Meta;
using detail::num;

unsigned worker_threads()
{
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("QUASIDRIVE_THREADS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end != env && cap >= 1)
            n = std::min(n, static_cast<unsigned>(cap));
    }
    return n;
}

namespace {

namespace fs = std::filesystem;

struct Context {
    const RunConfig& cfg;
    fs::path dir;
    std::vector<fs::path> written;

    void put(const std::string& name, const std::string& body)
    {
        detail::write_file(dir / name, body);
        written.push_back(dir / name);
    }
    void csv(const std::string& name, const Meta& meta, const std::string& body)
    {
        if (detail::wants(cfg, "csv"))
            put(name, detail::header(cfg, meta) + body);
    }
    void json(const std::string& name, const Meta& meta, Json payload)
    {
        if (!detail::wants(cfg, "json"))
            return;
        Json doc;
        doc["meta"] = detail::meta_json(cfg, meta);
        for (auto it = payload.begin(); it != payload.end(); ++it)
            doc[it.key()] = it.value();
        put(name, doc.dump(2) + "\n");
    }
    void plot(const std::string& name)
    {
        if (cfg.flag("output.plot") && detail::wants(cfg, "csv"))
            written.push_back(emit_plotscript(dir / name, cfg.command));
    }
};

// work items in parallel, results in input order
template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& f)
{
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex m;
    auto worker = [&] {
        for (std::size_t i; (i = next++) < n;) {
            try {
                f(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(m);
                if (!err)
                    err = std::current_exception();
                next = n;
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < std::min<std::size_t>(threads, n); ++t)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();
    if (err)
        std::rethrow_exception(err);
}

double field_of(const RunConfig& cfg)
{
    if (cfg.kind() == DriveKind::parametric) {
        if (!cfg.is_set("model.mu"))
            throw ConfigError("parametric drive needs model.mu");
        return cfg.number("model.mu");
    }
    if (cfg.is_set("model.beta"))
        return cfg.number("model.beta");
    return scaling::sweep_beta(static_cast<int>(cfg.integer("model.N")), cfg.number("model.d"), cfg.number("model.r"));
}

std::size_t certified_dim(const RunConfig& cfg, const scaling::ScaledModel& model, std::size_t count)
{
    const long dim = cfg.integer("numeric.dim");
    if (dim > 0) {
        if (static_cast<std::size_t>(dim) < count)
            throw ConfigError("numeric.dim must be at least numeric.count");
        return static_cast<std::size_t>(dim);
    }
    return fock::truncation_check(model, count, {cfg.number("numeric.tol")});
}

Meta model_meta(const scaling::ScaledModel& model, std::size_t dim, double tol)
{
    return {{"kind", to_string(model.kind)},
            {"lambda", num(model.lambda)},
            {model.kind == DriveKind::resonant ? "beta" : "mu", num(model.field())},
            {"dim", std::to_string(dim)},
            {"tol", num(tol)}};
}

void cmd_spectrum(Context& ctx)
{
    const auto& cfg = ctx.cfg;
    const auto model = resolve_model(cfg);
    const auto count = static_cast<std::size_t>(cfg.integer("numeric.count"));
    const std::size_t dim = certified_dim(cfg, model, count);
    const auto s = fock::solve(model, dim, count);
    const Meta meta = model_meta(model, dim, cfg.number("numeric.tol"));

    std::ostringstream os;
    os << "index,g,q,r2,parity,dominant_fock\n";
    Json rows = Json::array();
    for (std::size_t i = 0; i < s.size(); ++i) {
        Eigen::Index dominant = 0;
        s.vectors.col(static_cast<Eigen::Index>(i)).cwiseAbs().maxCoeff(&dominant);
        const auto& o = s.observables[i];
        os << i << "," << num(s.values[static_cast<Eigen::Index>(i)]) << "," << num(o.q) << "," << num(o.r2)
           << "," << o.parity << "," << dominant << "\n";
        rows.push_back({{"index", i},
                        {"g", s.values[static_cast<Eigen::Index>(i)]},
                        {"q", o.q},
                        {"r2", o.r2},
                        {"parity", o.parity},
                        {"dominant_fock", dominant}});
    }
    ctx.csv("spectrum.csv", meta, os.str());
    ctx.json("spectrum.json", meta, {{"states", rows}});
    ctx.plot("spectrum.csv");
}

void cmd_sweep(Context& ctx)
{
    const auto& cfg = ctx.cfg;
    spectroscopy::SweepOptions opt;
    opt.N = static_cast<int>(cfg.integer("model.N"));
    opt.r = cfg.number("model.r");
    const auto range = cfg.list("numeric.d_range");
    opt.d_lo = range[0];
    opt.d_hi = range[1];
    opt.grid = static_cast<int>(cfg.integer("numeric.grid"));
    opt.dim = static_cast<std::size_t>(cfg.integer("numeric.dim"));
    opt.tol = cfg.number("numeric.tol");
    opt.threads = worker_threads();
    const auto res = spectroscopy::sweep_detuning(opt);

    const Meta meta = {{"N", std::to_string(res.N)},
                       {"r", num(res.r)},
                       {"dim", std::to_string(res.dim)},
                       {"window", std::to_string(res.window)},
                       {"tol", num(opt.tol)},
                       {"label_reference_d", num(res.reference_d)}};
    std::ostringstream os;
    spectroscopy::write_csv(os, res);
    ctx.csv("sweep.csv", meta, os.str());
    ctx.json("sweep.json", meta,
             {{"points", res.points.size()},
              {"refinements", res.refinements},
              {"dropped", res.dropped},
              {"labels", res.labels}});
    ctx.plot("sweep.csv");
}

void cmd_rabi(Context& ctx)
{
    const auto& cfg = ctx.cfg;
    const int N = static_cast<int>(cfg.integer("model.N"));
    const auto range = cfg.list("numeric.r_range");
    const auto points = static_cast<std::size_t>(cfg.integer("numeric.r_points"));
    const auto dim = static_cast<std::size_t>(cfg.integer("numeric.dim"));
    const double tol = cfg.number("numeric.tol");
    // the N-photon anticrossing sits near d = (N+1)/2
    const double d_lo = 0.5 * (N + 1) - 0.45, d_hi = 0.5 * (N + 1) + 0.45;

    std::vector<double> rs(points);
    for (std::size_t i = 0; i < points; ++i)
        rs[i] = range[0] * std::pow(range[1] / range[0], static_cast<double>(i) / static_cast<double>(points - 1));
    std::vector<spectroscopy::RabiEstimate> est(points);
    parallel_for(points, worker_threads(), [&](std::size_t i) { est[i] = spectroscopy::min_gap(N, rs[i], d_lo, d_hi, dim, tol); });

    std::vector<double> gaps;
    std::ostringstream os;
    os << "r,d_min,gap_g,gap_v,formula_v\n";
    std::size_t dmax = 0;
    for (const auto& e : est) {
        os << num(e.r) << "," << num(e.location) << "," << num(e.gap_g) << "," << num(e.gap_v) << ","
           << num(e.formula_v) << "\n";
        gaps.push_back(e.gap_v);
        dmax = std::max(dmax, e.dim);
    }
    const auto fit = spectroscopy::fit_power_law(rs, gaps);
    const auto ref = spectroscopy::min_gap(N, cfg.number("model.r"), d_lo, d_hi, dim, tol);

    const Meta meta = {{"N", std::to_string(N)}, {"dim", std::to_string(dmax)}, {"tol", num(tol)}};
    ctx.csv("rabi.csv", meta, os.str());
    ctx.json("rabi.json", meta,
             {{"slope", fit.slope},
              {"intercept", fit.intercept},
              {"max_fit_residual", fit.max_residual},
              {"prefactor",
               {{"r", ref.r},
                {"d_min", ref.location},
                {"gap_v", ref.gap_v},
                {"formula_v", ref.formula_v},
                {"ratio", ref.formula_v / ref.gap_v}}}});
    ctx.plot("rabi.csv");
}

semiclassics::Sheet pick_sheet(const RunConfig& cfg, const semiclassics::SurfaceGeometry& geo)
{
    using semiclassics::Sheet;
    const std::string name = cfg.text("numeric.sheet");
    if (name != "auto") {
        const Sheet s = semiclassics::parse_sheet(name);
        if (!geo.has_sheet(s))
            throw DomainError("sheet " + name + " does not exist at this drive");
        return s;
    }
    for (Sheet s : {Sheet::dome, Sheet::right_well, Sheet::rim, Sheet::left_well})
        if (geo.has_sheet(s))
            return s;
    throw DomainError("no quantizable sheet");
}

void cmd_semiclassics(Context& ctx)
{
    const auto& cfg = ctx.cfg;
    const double field = field_of(cfg);
    const auto geo = semiclassics::find_extrema(cfg.kind(), field);
    const auto sheet = pick_sheet(cfg, geo);
    auto [g0, g1] = semiclassics::sheet_range(geo, sheet);
    if (!std::isfinite(g1))
        g1 = g0 + (g0 == 0.0 ? 1.0 : std::abs(g0));
    const auto n = static_cast<std::size_t>(cfg.integer("numeric.g_points"));
    std::vector<double> gs(n);
    for (std::size_t i = 0; i < n; ++i)
        gs[i] = g0 + (g1 - g0) * static_cast<double>(i + 1) / static_cast<double>(n + 1);
    const int kmax = static_cast<int>(cfg.integer("numeric.kmax"));
    const auto rows = semiclassics::tabulate(geo, sheet, gs, kmax, worker_threads());

    const Meta meta = {{"kind", to_string(cfg.kind())},
                       {cfg.kind() == DriveKind::resonant ? "beta" : "mu", num(field)},
                       {"sheet", semiclassics::to_string(sheet)},
                       {"g_range", num(g0) + ":" + num(g1)}};
    std::ostringstream os;
    semiclassics::write_csv(os, rows, kmax);
    ctx.csv("orbits.csv", meta, os.str());

    Json levels = Json::array();
    if (cfg.is_set("model.lambda")) {
        const double lambda = cfg.number("model.lambda");
        std::ostringstream ls;
        ls << "n,g_bs\n";
        for (long k = 0; k < cfg.integer("numeric.levels"); ++k) {
            double g = 0.0;
            try {
                g = semiclassics::bohr_sommerfeld(lambda, geo, sheet, static_cast<int>(k));
            } catch (const DomainError&) {
                break; // level no longer fits on the sheet
            }
            ls << k << "," << num(g) << "\n";
            levels.push_back(g);
        }
        Meta lmeta = meta;
        lmeta.emplace_back("lambda", num(lambda));
        ctx.csv("levels.csv", lmeta, ls.str());
    }

    Json extrema = Json::array();
    for (const auto& e : geo.extrema)
        extrema.push_back({{"Q", e.Q}, {"P", e.P}, {"g", e.g}, {"type", semiclassics::to_string(e.type)}});
    Json payload = {{"bistable", geo.bistable}, {"extrema", extrema}, {"levels", levels}};
    if (geo.bistable)
        payload["s_tun_extremum"] = semiclassics::tunneling_exponent_at_extremum(geo);
    ctx.json("semiclassics.json", meta, payload);
    ctx.plot("orbits.csv");
}

Json fit_json(const kinetics::ActivationFit& fit)
{
    Json pts = Json::array();
    for (const auto& p : fit.points)
        pts.push_back({{"lambda", p.lambda},
                       {"dim", p.fock_dim},
                       {"well_states", p.well_states},
                       {"g_extremum", p.g_extremum},
                       {"g_boundary", p.g_boundary},
                       {"log_ratio", p.log_ratio},
                       {"r_boundary", p.r_boundary},
                       {"r", p.r},
                       {"residual", p.residual}});
    return {{"R_A", fit.R_A},
            {"slope", fit.slope},
            {"max_fit_residual", fit.max_fit_residual},
            {"monotone", fit.monotone},
            {"few_states", fit.few_states},
            {"estimator", fit.estimator},
            {"points", pts}};
}

void cmd_escape(Context& ctx)
{
    const auto& cfg = ctx.cfg;
    kinetics::KineticsOptions opt;
    opt.truncation_tol = cfg.number("numeric.tol");
    opt.threads = worker_threads();
    const double field = field_of(cfg);
    const auto rep = kinetics::escape_report(cfg.kind(), field, cfg.list("numeric.lambda_list"),
                                             cfg.number("model.nbar"), opt);

    std::size_t dmax = 0;
    for (const auto& p : rep.activation.points)
        dmax = std::max(dmax, p.fock_dim);
    const Meta meta = {{"dim", std::to_string(dmax)},
                       {"tol", num(opt.truncation_tol)},
                       {"estimator", rep.activation.estimator}};
    const std::string fname = rep.kind == DriveKind::resonant ? "beta" : "mu";
    ctx.json("escape.json", meta,
             {{"kind", to_string(rep.kind)},
              {fname, rep.field},
              {"nbar", rep.nbar},
              {"lambdas", rep.lambdas},
              {"well", rep.well},
              {"activation", fit_json(rep.activation)},
              {"R_A", rep.activation.R_A},
              {"s_tun", rep.s_tun},
              {"mfpt", rep.mfpt},
              {"mfpt_rate", rep.mfpt_rate},
              {"mfpt_lambda", rep.mfpt_lambda},
              {"verdict", rep.verdict},
              {"near_boundary", rep.near_boundary}});

    std::ostringstream os;
    os << detail::header(cfg, meta);
    os << "kind=" << to_string(rep.kind) << "\n" << fname << "=" << num(rep.field) << "\n";
    os << "nbar=" << num(rep.nbar) << "\nwell=" << rep.well << "\n";
    os << "R_A=" << num(rep.activation.R_A) << "\ns_tun=" << num(rep.s_tun) << "\n";
    os << "mfpt=" << num(rep.mfpt) << "\nmfpt_rate=" << num(rep.mfpt_rate) << "\nmfpt_lambda="
       << num(rep.mfpt_lambda) << "\n";
    os << "verdict=" << rep.verdict << "\nnear_boundary=" << (rep.near_boundary ? "true" : "false") << "\n";
    os << "monotone=" << (rep.activation.monotone ? "true" : "false")
       << "\nfew_states=" << (rep.activation.few_states ? "true" : "false") << "\n";
    ctx.put("escape.txt", os.str());
}

void cmd_distribution(Context& ctx)
{
    const auto& cfg = ctx.cfg;
    const auto model = resolve_model(cfg);
    kinetics::KineticsOptions opt;
    opt.truncation_tol = cfg.number("numeric.tol");
    opt.threads = worker_threads();
    const auto chain = kinetics::build_chain(model, cfg.number("model.nbar"), opt);
    const auto full = kinetics::stationary(chain.rates);

    Meta meta = model_meta(model, chain.fock_dim, opt.truncation_tol);
    meta.emplace_back("nbar", num(cfg.number("model.nbar")));
    meta.emplace_back("residual", num(full.residual));
    meta.emplace_back("well_residual", num(chain.distribution.residual));

    std::ostringstream os;
    os << "n,g_n,rho_n,rho_well,well_label\n";
    Json rows = Json::array();
    for (std::size_t i = 0; i < chain.states.labels.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        const auto label = kinetics::to_string(chain.states.labels[i]);
        os << i << "," << num(chain.states.g[k]) << "," << num(full.rho[k]) << ","
           << num(chain.distribution.rho[k]) << "," << label << "\n";
        rows.push_back({{"n", i},
                        {"g_n", chain.states.g[k]},
                        {"rho_n", full.rho[k]},
                        {"rho_well", chain.distribution.rho[k]},
                        {"well_label", label}});
    }
    ctx.csv("distribution.csv", meta, os.str());
    ctx.json("distribution.json", meta, {{"well", chain.well}, {"states", rows}});
    ctx.plot("distribution.csv");
}

const char* error_class(const std::exception& e)
{
    if (dynamic_cast<const ConvergenceError*>(&e))
        return "ConvergenceError";
    if (dynamic_cast<const NumericError*>(&e))
        return "NumericError";
    if (dynamic_cast<const DomainError*>(&e))
        return "DomainError";
    return "RuntimeError";
}

void write_error(const RunConfig& cfg, const fs::path& dir, const std::exception& e)
{
    Json rec;
    rec["status"] = "error";
    rec["class"] = error_class(e);
    rec["message"] = e.what();
    rec["command"] = to_string(cfg.command);
    rec["config_hash"] = config_hash(cfg);
    if (auto* c = dynamic_cast<const ConvergenceError*>(&e))
        rec["index"] = c->index();
    try {
        detail::write_file(dir / "error.json", rec.dump(2) + "\n");
    } catch (const std::exception& w) {
        std::cerr << "quasidrive: " << w.what() << "\n";
    }
}

} // namespace

int run(const RunConfig& cfg)
{
    const fs::path dir = cfg.text("output.dir");
    try {
        Context ctx{cfg, dir, {}};
        detail::write_file(dir / "config.json", serialize(cfg));
        detail::write_file(dir / "provenance.json", serialize_provenance(cfg));
        switch (cfg.command) {
        case Command::spectrum: cmd_spectrum(ctx); break;
        case Command::sweep: cmd_sweep(ctx); break;
        case Command::rabi: cmd_rabi(ctx); break;
        case Command::semiclassics: cmd_semiclassics(ctx); break;
        case Command::escape: cmd_escape(ctx); break;
        case Command::distribution: cmd_distribution(ctx); break;
        }
        for (const auto& p : ctx.written)
            std::cerr << "wrote " << p.string() << "\n";
        return ExitCode::ok;
    } catch (const ConfigError& e) {
        std::cerr << "quasidrive: config error: " << e.what() << "\n";
        return ExitCode::config_failure;
    } catch (const std::exception& e) {
        std::cerr << "quasidrive: " << error_class(e) << ": " << e.what() << "\n";
        write_error(cfg, dir, e);
        return ExitCode::numeric_failure;
    }
}

int main_entry(const std::vector<std::string>& args)
{
    if (!args.empty() && (args[0] == "--help" || args[0] == "-h")) {
        std::cout << usage() << "\n";
        return ExitCode::ok;
    }
    RunConfig cfg;
    try {
        cfg = parse_config(args);
    } catch (const ConfigError& e) {
        std::cerr << "quasidrive: config error: " << e.what() << "\n";
        return ExitCode::config_failure;
    } catch (const std::exception& e) {
        std::cerr << "quasidrive: config error: " << e.what() << "\n";
        return ExitCode::config_failure;
    }
    return run(cfg);
}

} // namespace quasidrive::cli
