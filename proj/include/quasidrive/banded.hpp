#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace quasidrive::fock {

// Real symmetric matrix stored by its diagonals 0..bandwidth (upper triangle).
class BandedSymmetricMatrix {
public:
    BandedSymmetricMatrix(std::size_t dim, std::size_t bandwidth);

    std::size_t dim() const { return dim_; }
    std::size_t bandwidth() const { return bands_.size() - 1; }

    double operator()(std::size_t i, std::size_t j) const;
    void set(std::size_t i, std::size_t j, double value);

    // band(k)[i] is entry (i, i+k).
    std::span<const double> band(std::size_t k) const;

    Eigen::MatrixXd dense() const;
    Eigen::VectorXd apply(const Eigen::VectorXd& v) const;

private:
    std::size_t dim_;
    std::vector<std::vector<double>> bands_;
};

} // namespace quasidrive::fock
