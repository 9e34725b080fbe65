#pragma once

#include <string>

namespace quasidrive {

enum class DriveKind { resonant, parametric };

std::string to_string(DriveKind kind);
DriveKind parse_drive_kind(const std::string& text);

namespace scaling {

inline constexpr double kResonantBetaLimit = 4.0 / 27.0;

struct PhysicalParams {
    double omega0 = 1.0;
    double gamma = 1.0;
    double hbar = 1.0;
    DriveKind drive_kind = DriveKind::resonant;
    double A = 0.0;      // resonant drive amplitude
    double F = 0.0;      // parametric modulation depth
    double omegaF = 1.0; // drive frequency
    double Gamma = 1.0;
    double nbar = 0.0;
};

struct ScaledModel {
    DriveKind kind = DriveKind::resonant;
    double lambda = 0.0;
    double beta = 0.0;
    double mu = 0.0;
    double energy_scale = 1.0;

    double field() const { return kind == DriveKind::resonant ? beta : mu; }
    bool bistable() const;
};

// N-photon resonance bookkeeping in units of the nonlinearity frequency V.
struct ResonanceSpec {
    int N = 1;
    double V = 1.0;
    double detuning_over_V = 1.0;
    double drive_ratio = 0.0;
};

ScaledModel resonant_model(double lambda, double beta);
ScaledModel parametric_model(double lambda, double mu);

ScaledModel scale_resonant(const PhysicalParams& p);
ScaledModel scale_parametric(const PhysicalParams& p);

// Drive amplitude that produces the given beta (inverse of scale_resonant).
double resonant_amplitude_for_beta(const PhysicalParams& p, double beta);

double resonance_lambda(int N);
double resonance_detuning(int N);

// A_N in the convention of the multiphoton Rabi formula.
double multiphoton_amplitude(int N, double V, double hbar, double omega0);

ScaledModel resonant_sweep_map(const ResonanceSpec& spec);
double sweep_beta(int N, double d, double r);

// Physical parameters expressed on sweep axes, with omega_F standing in for omega_0.
ResonanceSpec to_resonance_spec(const PhysicalParams& p, int N);

} // namespace scaling
} // namespace quasidrive
