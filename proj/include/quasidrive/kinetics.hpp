#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "quasidrive/fockspace.hpp"
#include "quasidrive/geometry.hpp"
#include "quasidrive/scaling.hpp"

namespace quasidrive::kinetics {

using semiclassics::SurfaceGeometry;

// W(n, m) is the rate n -> m in units of Gamma; the diagonal is zero.
struct RateMatrix {
    Eigen::MatrixXd W;
    Eigen::VectorXd g; // quasienergy of each basis state
    std::size_t fock_dim = 0;
    double Gamma = 1.0;
    double nbar = 0.0;

    std::size_t size() const { return static_cast<std::size_t>(W.rows()); }
};

// Entries below floor * max(W) are rounding noise of the eigenvectors and are zeroed.
inline constexpr double kRateFloor = 1e-24;

// W_{nu mu} = Gamma [(nbar+1) |<mu|a|nu>|^2 + nbar |<mu|a^+|nu>|^2]; columns of `states` are the basis.
RateMatrix rate_matrix(const Eigen::MatrixXd& states, const Eigen::VectorXd& g, const Eigen::MatrixXd& lowering,
                       double Gamma, double nbar);
RateMatrix rate_matrix(const fock::Spectrum& spectrum, const Eigen::MatrixXd& lowering, double Gamma, double nbar);

struct Distribution {
    Eigen::VectorXd rho;              // full length, zero off the support
    std::vector<std::size_t> support; // ascending
    double residual = 0.0;            // max |d rho / dt| over the support
};

// Null vector of the balance operator restricted to `support` (transitions leaving it are dropped).
// A single closed class is solved by GTH elimination; states outside it get zero weight.
Distribution stationary(const RateMatrix& W, const std::vector<std::size_t>& support);
Distribution stationary(const RateMatrix& W);

// generator L with d rho/dt = L rho
Eigen::MatrixXd generator(const RateMatrix& W);
// max |(L rho)_n| over n in support
double balance_residual(const RateMatrix& W, const Eigen::VectorXd& rho, const std::vector<std::size_t>& support);

Eigen::VectorXd evolve(const RateMatrix& W, const Eigen::VectorXd& rho0, double t);

// expected time to reach any absorbing state, starting in `start`
double mean_first_passage(const RateMatrix& W, std::size_t start, const std::vector<std::size_t>& absorbing);

// outer: parametric states above the saddle
enum class WellLabel { dome, rim, left_well, right_well, outer, ambiguous };
std::string to_string(WellLabel l);

struct WellOptions {
    double saddle_tol = 1e-6;  // |g - g_saddle| below this is ambiguous
    double doublet_ratio = 0.5; // max pair splitting over the gap to the next state
};

// States in the basis used for kinetics. For the parametric drive, paired parity doublets are
// replaced by their localized combinations.
struct WellStates {
    Eigen::MatrixXd basis; // Fock coefficients, one column per state
    Eigen::VectorXd g;
    std::vector<WellLabel> labels;
    std::vector<double> q;  // <Q>
    std::vector<double> r2; // <Q^2+P^2>
    std::vector<std::size_t> members(WellLabel l) const;
};

WellStates classify_wells(const fock::Spectrum& spectrum, const SurfaceGeometry& geometry,
                          const WellOptions& opt = {});

// metastable well studied for escape: dome (resonant) or right well (parametric)
WellLabel escape_well(DriveKind kind);

struct KineticsOptions {
    double Gamma = 1.0;
    double level_cutoff_r2 = 4.0; // Fock levels with lambda(2n+1) below this are resolved
    double truncation_tol = 1e-10;
    WellOptions wells;
    unsigned threads = 1;
};

// Spectrum, wells and rates of one model at one lambda.
struct WellChain {
    scaling::ScaledModel model;
    SurfaceGeometry geometry;
    std::size_t fock_dim = 0;
    WellStates states;
    RateMatrix rates;
    std::vector<std::size_t> well;     // indices of escape-well states, ordered from the extremum outward
    Distribution distribution;         // stationary over `well`
    std::size_t extremum = 0;          // well[0]
    std::size_t boundary = 0;          // well.back()
};

WellChain build_chain(const scaling::ScaledModel& model, double nbar, const KineticsOptions& opt = {});

struct LambdaPoint {
    double lambda = 0.0;
    std::size_t fock_dim = 0;
    std::size_t well_states = 0;
    double g_extremum = 0.0;
    double g_boundary = 0.0;
    double log_ratio = 0.0; // ln(rho_boundary / rho_extremum)
    double r_boundary = 0.0; // -lambda * log_ratio
    double r = 0.0;          // same with ln rho extrapolated linearly in g to the saddle
    double residual = 0.0;
};

struct ActivationFit {
    std::vector<LambdaPoint> points;
    double R_A = 0.0; // intercept of r(lambda) at lambda -> 0
    double slope = 0.0;
    double max_fit_residual = 0.0;
    bool monotone = true;
    bool few_states = false; // some lambda has fewer than 8 well states
    std::string estimator;
};

ActivationFit activation_exponent(DriveKind kind, double field, const std::vector<double>& lambdas, double nbar,
                                  const KineticsOptions& opt = {});

struct EscapeReport {
    DriveKind kind = DriveKind::resonant;
    double field = 0.0;
    double nbar = 0.0;
    std::vector<double> lambdas;
    std::string well;
    ActivationFit activation;
    double s_tun = 0.0;
    double mfpt = 0.0; // from the well extremum to any state outside the well, smallest lambda
    double mfpt_rate = 0.0;
    double mfpt_lambda = 0.0;
    std::string verdict; // activation | tunneling
    bool near_boundary = false;
};

// within 10% of the end of the bistable range
bool near_boundary(DriveKind kind, double field);

EscapeReport escape_report(DriveKind kind, double field, const std::vector<double>& lambdas, double nbar,
                           const KineticsOptions& opt = {});

} // namespace quasidrive::kinetics
