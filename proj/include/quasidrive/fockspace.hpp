#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "quasidrive/banded.hpp"
#include "quasidrive/eigensolver.hpp"
#include "quasidrive/scaling.hpp"

namespace quasidrive::fock {

struct Quadratures {
    Eigen::MatrixXd q;
    Eigen::MatrixXd p_imag;   // P = i * p_imag
    Eigen::MatrixXd lowering; // <n-1|a|n> = sqrt(n)

    Eigen::MatrixXcd p() const;
};

Quadratures build_quadratures(double lambda, std::size_t dim);

BandedSymmetricMatrix build_g_resonant(double lambda, double beta, std::size_t dim);
BandedSymmetricMatrix build_g_parametric(double lambda, double mu, std::size_t dim);
BandedSymmetricMatrix build_g(const scaling::ScaledModel& model, std::size_t dim);

// Diagonal of Q^2 + P^2 in the Fock basis.
double radius_squared(double lambda, std::size_t n);

struct StateObservables {
    double q = 0.0;
    double p = 0.0;
    double r2 = 0.0;
    int parity = 0; // +1 even, -1 odd, 0 when not applicable
};

struct Spectrum {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors; // columns in the Fock basis
    std::vector<StateObservables> observables;
    double lambda = 0.0;

    std::size_t size() const { return static_cast<std::size_t>(values.size()); }
    std::size_t dim() const { return static_cast<std::size_t>(vectors.rows()); }
};

Spectrum eigensolve(const BandedSymmetricMatrix& m, std::size_t count, const EigenOptions& opt = {});

// Solve the scaled model and attach per-state observables.
Spectrum solve(const scaling::ScaledModel& model, std::size_t dim, std::size_t count);
void annotate(Spectrum& s, const scaling::ScaledModel& model);

double expectation(const Eigen::MatrixXd& op, std::span<const double> state);
std::complex<double> expectation(const Eigen::MatrixXcd& op, std::span<const std::complex<double>> state);
double expectation(const Eigen::MatrixXd& op, const Eigen::VectorXd& state);

using MatrixBuilder = std::function<BandedSymmetricMatrix(std::size_t)>;

struct TruncationOptions {
    double tol = 1e-10;
    std::size_t max_dim = 4096;
};

// Smallest D on a doubling schedule starting at K whose lowest K eigenvalues move by < tol under D -> 1.25 D.
std::size_t truncation_check(const MatrixBuilder& builder, std::size_t K, const TruncationOptions& opt = {});
std::size_t truncation_check(const scaling::ScaledModel& model, std::size_t K, const TruncationOptions& opt = {});

} // namespace quasidrive::fock
