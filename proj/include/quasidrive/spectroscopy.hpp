#pragma once

#include <cstddef>
#include <ostream>
#include <vector>

#include "quasidrive/fockspace.hpp"

namespace quasidrive::spectroscopy {

struct SweepOptions {
    int N = 5;
    double r = 0.5;
    double d_lo = 2.0;
    double d_hi = 4.0;
    int grid = 201;
    std::size_t dim = 0;    // 0: certify with truncation_check
    std::size_t window = 0; // eigenpairs kept per point; 0: from the zero-drive diagonal
    double tol = 1e-10;
    double min_overlap = 0.9;
    int max_refine_depth = 20;
    unsigned threads = 1;
};

struct SweepPoint {
    double d = 0.0;
    double lambda = 0.0;
    double beta = 0.0;
    bool refined = false;
    // indexed by tracked slot (label = slot)
    std::vector<double> g;
    std::vector<double> chi;
    std::vector<double> overlap;
    std::vector<std::size_t> adiabatic; // position in the ascending spectrum
    std::vector<int> dominant;          // Fock index with the largest weight
};

struct SweepResult {
    int N = 0;
    double r = 0.0;
    std::size_t dim = 0;
    std::size_t window = 0;
    std::size_t refinements = 0;
    std::size_t dropped = 0; // zero-drive points sitting on a susceptibility pole
    double reference_d = 0.0; // labels are Fock levels at this detuning
    std::vector<int> labels;
    std::vector<SweepPoint> points;

    std::vector<double> axis() const;
};

SweepResult sweep_detuning(const SweepOptions& opt);

// Scaled vibration amplitude 2 lambda <Q>_n / sqrt(beta).
double susceptibility(const fock::Spectrum& s, std::size_t index, double lambda, double beta);

// Fock level m with n + m + 1 = 2d exactly (degenerate with n at zero drive), or -1.
int resonance_partner(int n, double d);

// Susceptibility of the state labelled by Fock level n. At an exact resonance the eigenstates are
// mixtures of n and its partner; the labelled state is then |n> projected onto their span.
double fock_susceptibility(const fock::Spectrum& s, int n, double d, double lambda, double beta);

// First-order result -d / ((d - n)(d - n - 1)).
double perturbative_amplitude(int n, double d);

// Eigenpair count that keeps Fock levels 0..N inside the window over [d_lo, d_hi].
std::size_t sweep_window(int N, double d_lo, double d_hi);

// Quasienergy splitting in units of V.
double gap_in_v_units(double gap_g, double lambda);

struct RabiEstimate {
    int N = 0;
    double r = 0.0;
    double location = 0.0;
    double lambda = 0.0;
    double beta = 0.0;
    double gap_g = 0.0;
    double gap_v = 0.0;
    double formula_v = 0.0;
    std::size_t dim = 0;
    int evaluations = 0;
};

RabiEstimate min_gap(int N, double r, double d_lo, double d_hi, std::size_t dim = 0, double rel_tol = 1e-10);

// Gap between the two eigenstates carrying most of Fock 0 and Fock N.
struct PairGap {
    double gap = 0.0;
    double weight_a = 0.0;
    double weight_b = 0.0;
    std::size_t a = 0, b = 0;
};
PairGap resonant_pair_gap(int N, double r, double d, std::size_t dim, std::size_t window);

double rabi_formula(int N, double r);

struct PowerLawFit {
    double slope = 0.0;
    double intercept = 0.0;
    double max_residual = 0.0;
};
PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y);

void write_csv(std::ostream& os, const SweepResult& res);

} // namespace quasidrive::spectroscopy
