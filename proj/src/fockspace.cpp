#include "quasidrive/fockspace.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "quasidrive/errors.hpp"

namespace quasidrive::fock {

namespace {

void check_lambda_dim(double lambda, std::size_t dim)
{
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw DomainError("lambda must be > 0");
    if (dim < 2)
        throw DomainError("Fock dimension must be >= 2");
}

} // namespace

Eigen::MatrixXcd Quadratures::p() const
{
    return std::complex<double>(0.0, 1.0) * p_imag.cast<std::complex<double>>();
}

Quadratures build_quadratures(double lambda, std::size_t dim)
{
    check_lambda_dim(lambda, dim);
    const auto n = static_cast<Eigen::Index>(dim);
    Quadratures out;
    out.lowering = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index k = 1; k < n; ++k)
        out.lowering(k - 1, k) = std::sqrt(static_cast<double>(k));
    const double s = std::sqrt(lambda / 2.0);
    const Eigen::MatrixXd raise = out.lowering.transpose();
    out.q = s * (out.lowering + raise);
    out.p_imag = s * (raise - out.lowering);
    return out;
}

double radius_squared(double lambda, std::size_t n)
{
    return lambda * (2.0 * static_cast<double>(n) + 1.0);
}

BandedSymmetricMatrix build_g_resonant(double lambda, double beta, std::size_t dim)
{
    check_lambda_dim(lambda, dim);
    if (!(beta >= 0.0) || !std::isfinite(beta))
        throw DomainError("beta must be >= 0, got " + std::to_string(beta));
    BandedSymmetricMatrix g(dim, 1);
    const double sb = std::sqrt(beta);
    for (std::size_t n = 0; n < dim; ++n) {
        const double x = radius_squared(lambda, n) - 1.0;
        g.set(n, n, 0.25 * x * x);
        if (n + 1 < dim)
            g.set(n, n + 1, -sb * std::sqrt(lambda * (n + 1.0) / 2.0));
    }
    return g;
}

BandedSymmetricMatrix build_g_parametric(double lambda, double mu, std::size_t dim)
{
    check_lambda_dim(lambda, dim);
    if (!std::isfinite(mu))
        throw DomainError("mu must be finite");
    BandedSymmetricMatrix g(dim, 2);
    for (std::size_t n = 0; n < dim; ++n) {
        const double m = 2.0 * n + 1.0;
        g.set(n, n, 0.25 * lambda * lambda * m * m - 0.5 * lambda * mu * m);
        if (n + 2 < dim)
            g.set(n, n + 2, -0.5 * lambda * std::sqrt((n + 1.0) * (n + 2.0)));
    }
    return g;
}

BandedSymmetricMatrix build_g(const scaling::ScaledModel& model, std::size_t dim)
{
    return model.kind == DriveKind::resonant ? build_g_resonant(model.lambda, model.beta, dim)
                                             : build_g_parametric(model.lambda, model.mu, dim);
}

Spectrum eigensolve(const BandedSymmetricMatrix& m, std::size_t count, const EigenOptions& opt)
{
    EigenPairs e = eigensolve_banded(m, count, opt);
    Spectrum s;
    s.values = std::move(e.values);
    s.vectors = std::move(e.vectors);
    return s;
}

void annotate(Spectrum& s, const scaling::ScaledModel& model)
{
    s.lambda = model.lambda;
    const auto n = s.vectors.rows();
    const double amp = std::sqrt(2.0 * model.lambda); // 2 sqrt(lambda/2)
    s.observables.assign(s.size(), {});
    for (std::size_t k = 0; k < s.size(); ++k) {
        const auto v = s.vectors.col(static_cast<Eigen::Index>(k));
        StateObservables o;
        double q = 0.0, r2 = 0.0, odd = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            r2 += radius_squared(model.lambda, static_cast<std::size_t>(i)) * v[i] * v[i];
            if (i + 1 < n)
                q += std::sqrt(i + 1.0) * v[i] * v[i + 1];
            if (i % 2)
                odd += v[i] * v[i];
        }
        o.q = amp * q;
        o.p = 0.0; // v^T (i A) v with A antisymmetric and v real
        o.r2 = r2;
        if (model.kind == DriveKind::parametric)
            o.parity = odd < 0.5 ? 1 : -1;
        s.observables[k] = o;
    }
}

Spectrum solve(const scaling::ScaledModel& model, std::size_t dim, std::size_t count)
{
    Spectrum s = eigensolve(build_g(model, dim), count);
    annotate(s, model);
    return s;
}

double expectation(const Eigen::MatrixXd& op, std::span<const double> state)
{
    const auto n = static_cast<Eigen::Index>(state.size());
    if (op.rows() != n || op.cols() != n)
        throw DomainError("operator is " + std::to_string(op.rows()) + "x" + std::to_string(op.cols()) +
                          " but state has length " + std::to_string(n));
    Eigen::Map<const Eigen::VectorXd> v(state.data(), n);
    if (std::abs(v.squaredNorm() - 1.0) > 1e-10)
        throw DomainError("state is not normalized");
    return v.dot(op * v);
}

double expectation(const Eigen::MatrixXd& op, const Eigen::VectorXd& state)
{
    return expectation(op, std::span<const double>(state.data(), static_cast<std::size_t>(state.size())));
}

std::complex<double> expectation(const Eigen::MatrixXcd& op, std::span<const std::complex<double>> state)
{
    const auto n = static_cast<Eigen::Index>(state.size());
    if (op.rows() != n || op.cols() != n)
        throw DomainError("operator is " + std::to_string(op.rows()) + "x" + std::to_string(op.cols()) +
                          " but state has length " + std::to_string(n));
    Eigen::Map<const Eigen::VectorXcd> v(state.data(), n);
    if (std::abs(v.squaredNorm() - 1.0) > 1e-10)
        throw DomainError("state is not normalized");
    return v.dot(op * v); // dot conjugates the left argument
}

std::size_t truncation_check(const MatrixBuilder& builder, std::size_t K, const TruncationOptions& opt)
{
    if (K < 1)
        throw DomainError("truncation_check needs K >= 1");
    if (!(opt.tol > 0.0))
        throw DomainError("truncation_check needs tol > 0");
    EigenOptions values_only;
    values_only.vectors = false;
    std::size_t d = std::max<std::size_t>(K, 2);
    while (d <= opt.max_dim) {
        const std::size_t d1 = (5 * d + 3) / 4;
        const Eigen::VectorXd a = eigensolve_banded(builder(d), K, values_only).values;
        const Eigen::VectorXd b = eigensolve_banded(builder(d1), K, values_only).values;
        if ((a - b).cwiseAbs().maxCoeff() < opt.tol)
            return d;
        d *= 2;
    }
    throw NumericError("truncation_check: lowest " + std::to_string(K) + " levels not stable below D = " +
                       std::to_string(opt.max_dim));
}

std::size_t truncation_check(const scaling::ScaledModel& model, std::size_t K, const TruncationOptions& opt)
{
    return truncation_check([&](std::size_t d) { return build_g(model, d); }, K, opt);
}

} // namespace quasidrive::fock
