#include "quasidrive/scaling.hpp"

#include <cmath>
#include <numbers>

#include "quasidrive/errors.hpp"

namespace quasidrive {

std::string to_string(DriveKind kind)
{
    return kind == DriveKind::resonant ? "resonant" : "parametric";
}

DriveKind parse_drive_kind(const std::string& text)
{
    if (text == "resonant")
        return DriveKind::resonant;
    if (text == "parametric")
        return DriveKind::parametric;
    throw DomainError("unknown drive kind '" + text + "'");
}

namespace scaling {

namespace {

void require_finite_positive(double v, const char* name)
{
    if (!std::isfinite(v) || v <= 0.0)
        throw DomainError(std::string(name) + " must be positive and finite");
}

void check_common(const PhysicalParams& p)
{
    require_finite_positive(p.omega0, "omega0");
    require_finite_positive(p.gamma, "gamma");
    require_finite_positive(p.hbar, "hbar");
    require_finite_positive(p.omegaF, "omegaF");
    require_finite_positive(p.Gamma, "Gamma");
    if (!(p.nbar >= 0.0))
        throw DomainError("nbar must be >= 0");
}

} // namespace

bool ScaledModel::bistable() const
{
    if (kind == DriveKind::resonant)
        return beta > 0.0 && beta < kResonantBetaLimit;
    return mu > -1.0 && mu < 1.0;
}

ScaledModel resonant_model(double lambda, double beta)
{
    require_finite_positive(lambda, "lambda");
    if (!(beta >= 0.0) || !std::isfinite(beta))
        throw DomainError("beta must be >= 0");
    ScaledModel m;
    m.kind = DriveKind::resonant;
    m.lambda = lambda;
    m.beta = beta;
    return m;
}

ScaledModel parametric_model(double lambda, double mu)
{
    require_finite_positive(lambda, "lambda");
    if (!std::isfinite(mu))
        throw DomainError("mu must be finite");
    ScaledModel m;
    m.kind = DriveKind::parametric;
    m.lambda = lambda;
    m.mu = mu;
    return m;
}

ScaledModel scale_resonant(const PhysicalParams& p)
{
    if (p.drive_kind != DriveKind::resonant)
        throw DomainError("scale_resonant needs drive_kind=resonant");
    check_common(p);
    const double dw = p.omegaF - p.omega0;
    if (!(dw > 0.0))
        throw DomainError("resonant scaling needs omegaF > omega0 (positive detuning for gamma > 0), got "
                          "omegaF - omega0 = " + std::to_string(dw));
    if (!(p.A >= 0.0))
        throw DomainError("A must be >= 0");
    const double alpha2 = 8.0 * p.omegaF * dw / (3.0 * p.gamma);
    ScaledModel m;
    m.kind = DriveKind::resonant;
    m.lambda = p.hbar / (p.omegaF * alpha2);
    m.beta = 3.0 * p.gamma * p.A * p.A / (32.0 * std::pow(p.omegaF, 3) * std::pow(dw, 3));
    m.energy_scale = p.omegaF * dw * alpha2;
    return m;
}

ScaledModel scale_parametric(const PhysicalParams& p)
{
    if (p.drive_kind != DriveKind::parametric)
        throw DomainError("scale_parametric needs drive_kind=parametric");
    check_common(p);
    if (!(p.F > 0.0))
        throw DomainError("parametric scaling needs F > 0");
    const double dw = 0.5 * p.omegaF - p.omega0;
    const double alpha2 = 2.0 * p.F / (3.0 * p.gamma);
    ScaledModel m;
    m.kind = DriveKind::parametric;
    m.lambda = p.hbar / (0.5 * p.omegaF * alpha2);
    m.mu = 2.0 * p.omegaF * dw / p.F;
    m.energy_scale = 0.25 * p.F * alpha2;
    return m;
}

double resonant_amplitude_for_beta(const PhysicalParams& p, double beta)
{
    check_common(p);
    const double dw = p.omegaF - p.omega0;
    if (!(dw > 0.0))
        throw DomainError("resonant scaling needs omegaF > omega0");
    if (!(beta >= 0.0))
        throw DomainError("beta must be >= 0");
    return std::sqrt(32.0 * std::pow(p.omegaF, 3) * std::pow(dw, 3) * beta / (3.0 * p.gamma));
}

double resonance_lambda(int N)
{
    if (N < 1)
        throw DomainError("photon number N must be >= 1");
    return 1.0 / (N + 1.0);
}

double resonance_detuning(int N)
{
    if (N < 1)
        throw DomainError("photon number N must be >= 1");
    return 0.5 * (N + 1.0);
}

double multiphoton_amplitude(int N, double V, double hbar, double omega0)
{
    if (N < 1)
        throw DomainError("photon number N must be >= 1");
    return std::sqrt(2.0 * hbar * omega0) * std::abs(V) * std::pow(N, 1.5) * std::exp(-1.5) / 2.0;
}

double sweep_beta(int N, double d, double r)
{
    if (N < 1)
        throw DomainError("photon number N must be >= 1");
    if (!(d > 0.0) || !std::isfinite(d))
        throw DomainError("detuning d must be > 0, got " + std::to_string(d));
    if (!(r >= 0.0))
        throw DomainError("drive ratio r must be >= 0");
    const double e3 = std::exp(3.0);
    return r * r * std::pow(N, 3) / (16.0 * e3 * d * d * d);
}

ScaledModel resonant_sweep_map(const ResonanceSpec& spec)
{
    const double d = spec.detuning_over_V;
    const double beta = sweep_beta(spec.N, d, spec.drive_ratio);
    ScaledModel m = resonant_model(1.0 / (2.0 * d), beta);
    // epsilon = energy_scale * g with energy_scale = delta_omega / lambda and V = 2 lambda delta_omega
    m.energy_scale = spec.V / (2.0 * m.lambda * m.lambda);
    return m;
}

ResonanceSpec to_resonance_spec(const PhysicalParams& p, int N)
{
    check_common(p);
    const double dw = p.omegaF - p.omega0;
    if (!(dw > 0.0))
        throw DomainError("resonant scaling needs omegaF > omega0");
    ResonanceSpec s;
    s.N = N;
    s.V = 3.0 * p.hbar * p.gamma / (4.0 * p.omegaF * p.omegaF);
    s.detuning_over_V = dw / s.V;
    s.drive_ratio = p.A / multiphoton_amplitude(N, s.V, p.hbar, p.omegaF);
    return s;
}

} // namespace scaling
} // namespace quasidrive
