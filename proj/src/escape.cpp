#include "quasidrive/kinetics.hpp"
#include "quasidrive/errors.hpp"
#include "quasidrive/semiclassics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace quasidrive::kinetics {

namespace {

constexpr std::size_t kManyLevels = 8;

std::size_t resolved_levels(double lambda, double cutoff_r2)
{
    const double n = std::ceil((cutoff_r2 / lambda - 1.0) / 2.0);
    return std::max<std::size_t>(16, static_cast<std::size_t>(n));
}

LambdaPoint analyse(const WellChain& c)
{
    LambdaPoint p;
    p.lambda = c.model.lambda;
    p.fock_dim = c.fock_dim;
    p.well_states = c.well.size();
    const auto& rho = c.distribution.rho;
    const auto& g = c.states.g;
    const std::size_t e = c.extremum, b = c.boundary, b1 = c.well[c.well.size() - 2];
    p.g_extremum = g[e];
    p.g_boundary = g[b];
    if (!(rho[b] > 0) || !(rho[b1] > 0))
        throw NumericError("stationary occupation underflows at the well boundary");
    p.log_ratio = std::log(rho[b] / rho[e]);
    p.r_boundary = -p.lambda * p.log_ratio;
    const double slope = (std::log(rho[b]) - std::log(rho[b1])) / (g[b] - g[b1]);
    const double at_saddle = p.log_ratio + slope * (c.geometry.saddle_value() - g[b]);
    p.r = -p.lambda * at_saddle;
    p.residual = c.distribution.residual;
    return p;
}

} // namespace

WellChain build_chain(const scaling::ScaledModel& model, double nbar, const KineticsOptions& opt)
{
    WellChain c;
    c.model = model;
    c.geometry = semiclassics::find_extrema(model);
    if (!c.geometry.bistable)
        throw DomainError("escape needs the bistable regime");
    const std::size_t K = resolved_levels(model.lambda, opt.level_cutoff_r2);
    fock::TruncationOptions topt;
    topt.tol = opt.truncation_tol;
    c.fock_dim = fock::truncation_check(model, K, topt);
    const fock::Spectrum spec = fock::solve(model, c.fock_dim, K);
    c.states = classify_wells(spec, c.geometry, opt.wells);
    const auto lowering = fock::build_quadratures(model.lambda, c.fock_dim).lowering;
    c.rates = rate_matrix(c.states.basis, c.states.g, lowering, opt.Gamma, nbar);

    c.well = c.states.members(escape_well(model.kind));
    if (c.well.size() < 2)
        throw DomainError("too few well states (" + std::to_string(c.well.size()) + ") at lambda=" +
                          std::to_string(model.lambda));
    // the dome extremum is a maximum of g, the wells are minima
    const bool descending = model.kind == DriveKind::resonant;
    std::sort(c.well.begin(), c.well.end(), [&](std::size_t a, std::size_t b) {
        return descending ? c.states.g[a] > c.states.g[b] : c.states.g[a] < c.states.g[b];
    });
    c.extremum = c.well.front();
    c.boundary = c.well.back();
    c.distribution = stationary(c.rates, c.well);
    return c;
}

ActivationFit activation_exponent(DriveKind kind, double field, const std::vector<double>& lambdas, double nbar,
                                  const KineticsOptions& opt)
{
    if (lambdas.size() < 3)
        throw DomainError("activation exponent needs at least 3 lambda values");
    ActivationFit fit;
    fit.points.resize(lambdas.size());
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < lambdas.size(); i = next++) {
            try {
                const auto model = kind == DriveKind::resonant ? scaling::resonant_model(lambdas[i], field)
                                                               : scaling::parametric_model(lambdas[i], field);
                fit.points[i] = analyse(build_chain(model, nbar, opt));
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(opt.threads, static_cast<unsigned>(lambdas.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n; ++t)
        pool.emplace_back(worker);
    worker();
    for (auto& th : pool)
        th.join();
    if (failure)
        std::rethrow_exception(failure);

    std::sort(fit.points.begin(), fit.points.end(),
              [](const LambdaPoint& a, const LambdaPoint& b) { return a.lambda < b.lambda; });
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(fit.points.size());
    for (const auto& p : fit.points) {
        sx += p.lambda;
        sy += p.r;
        sxx += p.lambda * p.lambda;
        sxy += p.lambda * p.r;
        fit.few_states = fit.few_states || p.well_states < kManyLevels;
    }
    fit.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    fit.R_A = (sy - fit.slope * sx) / m;
    int rising = 0, falling = 0;
    for (std::size_t i = 0; i < fit.points.size(); ++i) {
        const auto& p = fit.points[i];
        fit.max_fit_residual = std::max(fit.max_fit_residual, std::abs(p.r - fit.R_A - fit.slope * p.lambda));
        if (i > 0)
            (p.r > fit.points[i - 1].r ? rising : falling)++;
    }
    fit.monotone = rising == 0 || falling == 0;
    fit.estimator = "r = -lambda ln(rho_saddle/rho_extremum), ln rho extrapolated linearly in g from the two "
                    "outermost well states to the saddle; R_A = intercept of a least-squares line in lambda";
    return fit;
}

bool near_boundary(DriveKind kind, double field)
{
    return kind == DriveKind::resonant ? field > 0.9 * scaling::kResonantBetaLimit : std::abs(field) > 0.9;
}

EscapeReport escape_report(DriveKind kind, double field, const std::vector<double>& lambdas, double nbar,
                           const KineticsOptions& opt)
{
    EscapeReport r;
    r.kind = kind;
    r.field = field;
    r.nbar = nbar;
    r.lambdas = lambdas;
    r.well = to_string(escape_well(kind));
    r.activation = activation_exponent(kind, field, lambdas, nbar, opt);
    const auto geometry = semiclassics::find_extrema(kind, field);
    r.s_tun = semiclassics::tunneling_exponent_at_extremum(geometry);

    r.mfpt_lambda = *std::min_element(lambdas.begin(), lambdas.end());
    const auto model = kind == DriveKind::resonant ? scaling::resonant_model(r.mfpt_lambda, field)
                                                   : scaling::parametric_model(r.mfpt_lambda, field);
    const WellChain c = build_chain(model, nbar, opt);
    std::vector<bool> inside(c.rates.size(), false);
    for (std::size_t i : c.well)
        inside[i] = true;
    std::vector<std::size_t> outside;
    for (std::size_t i = 0; i < inside.size(); ++i)
        if (!inside[i])
            outside.push_back(i);
    r.mfpt = mean_first_passage(c.rates, c.extremum, outside);
    r.mfpt_rate = 1.0 / r.mfpt;

    r.verdict = r.activation.R_A < r.s_tun ? "activation" : "tunneling";
    r.near_boundary = near_boundary(kind, field);
    return r;
}

} // namespace quasidrive::kinetics
