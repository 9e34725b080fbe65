#include "quasidrive/banded.hpp"

#include <string>
#include <utility>

#include "quasidrive/errors.hpp"

namespace quasidrive::fock {

BandedSymmetricMatrix::BandedSymmetricMatrix(std::size_t dim, std::size_t bandwidth) : dim_(dim)
{
    if (dim < 1)
        throw DomainError("banded matrix needs dim >= 1");
    if (bandwidth >= dim)
        bandwidth = dim - 1;
    bands_.resize(bandwidth + 1);
    for (std::size_t k = 0; k <= bandwidth; ++k)
        bands_[k].assign(dim - k, 0.0);
}

double BandedSymmetricMatrix::operator()(std::size_t i, std::size_t j) const
{
    if (i > j)
        std::swap(i, j);
    if (j >= dim_)
        throw DomainError("banded index out of range");
    const std::size_t k = j - i;
    return k < bands_.size() ? bands_[k][i] : 0.0;
}

void BandedSymmetricMatrix::set(std::size_t i, std::size_t j, double value)
{
    if (i > j)
        std::swap(i, j);
    if (j >= dim_ || j - i >= bands_.size())
        throw DomainError("entry (" + std::to_string(i) + "," + std::to_string(j) + ") outside band");
    bands_[j - i][i] = value;
}

std::span<const double> BandedSymmetricMatrix::band(std::size_t k) const
{
    if (k >= bands_.size())
        throw DomainError("band index out of range");
    return bands_[k];
}

Eigen::MatrixXd BandedSymmetricMatrix::dense() const
{
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim_, dim_);
    for (std::size_t k = 0; k < bands_.size(); ++k)
        for (std::size_t i = 0; i + k < dim_; ++i) {
            a(i, i + k) = bands_[k][i];
            a(i + k, i) = bands_[k][i];
        }
    return a;
}

Eigen::VectorXd BandedSymmetricMatrix::apply(const Eigen::VectorXd& v) const
{
    if (static_cast<std::size_t>(v.size()) != dim_)
        throw DomainError("dimension mismatch in banded apply");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(dim_);
    for (std::size_t i = 0; i < dim_; ++i)
        out[i] += bands_[0][i] * v[i];
    for (std::size_t k = 1; k < bands_.size(); ++k)
        for (std::size_t i = 0; i + k < dim_; ++i) {
            out[i] += bands_[k][i] * v[i + k];
            out[i + k] += bands_[k][i] * v[i];
        }
    return out;
}

} // namespace quasidrive::fock
