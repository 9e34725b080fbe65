#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "quasidrive/banded.hpp"

namespace quasidrive::fock {

struct Tridiagonal {
    Eigen::VectorXd diag;
    Eigen::VectorXd offdiag; // offdiag[i] couples i and i+1
    Eigen::MatrixXd q;       // A = Q T Q^T, empty unless requested
};

// Givens band reduction with bulge chasing.
Tridiagonal tridiagonalize(const BandedSymmetricMatrix& m, bool accumulate);

struct EigenOptions {
    bool vectors = true;
    int max_sweeps = 60; // per eigenvalue
};

struct EigenPairs {
    Eigen::VectorXd values;  // ascending, lowest `count`
    Eigen::MatrixXd vectors; // dim x count, unit columns, first significant entry positive
};

// Implicit-shift QL on the tridiagonal form; throws ConvergenceError carrying the stuck index.
EigenPairs eigensolve_banded(const BandedSymmetricMatrix& m, std::size_t count, const EigenOptions& opt = {});

void tridiagonal_ql(Eigen::VectorXd& d, Eigen::VectorXd& e, Eigen::MatrixXd* z, int max_sweeps);

} // namespace quasidrive::fock
