#include "quasidrive/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "quasidrive/errors.hpp"

namespace quasidrive::fock {

namespace {

struct Rotator {
    Eigen::MatrixXd& a;
    Eigen::MatrixXd* q;
    std::size_t n;
    std::size_t reach; // columns touched around the rotation plane

    // similarity A <- G^T A G in plane (p, p+1), chosen to annihilate a(p+1, col)
    void annihilate(std::size_t p, std::size_t col)
    {
        const std::size_t r = p + 1;
        const double x = a(p, col);
        const double y = a(r, col);
        if (y == 0.0)
            return;
        const double h = std::hypot(x, y);
        const double c = x / h;
        const double s = y / h;
        const std::size_t lo = p > reach ? p - reach : 0;
        const std::size_t hi = std::min(n - 1, r + reach);
        for (std::size_t k = lo; k <= hi; ++k) {
            const double ap = a(p, k);
            const double ar = a(r, k);
            a(p, k) = c * ap + s * ar;
            a(r, k) = -s * ap + c * ar;
        }
        for (std::size_t k = lo; k <= hi; ++k) {
            const double ap = a(k, p);
            const double ar = a(k, r);
            a(k, p) = c * ap + s * ar;
            a(k, r) = -s * ap + c * ar;
        }
        a(r, col) = 0.0;
        a(col, r) = 0.0;
        if (q) {
            for (std::size_t k = 0; k < n; ++k) {
                const double qp = (*q)(k, p);
                const double qr = (*q)(k, r);
                (*q)(k, p) = c * qp + s * qr;
                (*q)(k, r) = -s * qp + c * qr;
            }
        }
    }
};

} // namespace

Tridiagonal tridiagonalize(const BandedSymmetricMatrix& m, bool accumulate)
{
    const std::size_t n = m.dim();
    const std::size_t b = m.bandwidth();
    Tridiagonal t;
    t.diag.resize(n);
    t.offdiag = Eigen::VectorXd::Zero(n);
    if (accumulate)
        t.q = Eigen::MatrixXd::Identity(n, n);

    if (b <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            t.diag[i] = m(i, i);
        if (b == 1)
            for (std::size_t i = 0; i + 1 < n; ++i)
                t.offdiag[i] = m(i, i + 1);
        return t;
    }

    Eigen::MatrixXd a = m.dense();
    Rotator rot{a, accumulate ? &t.q : nullptr, n, 2 * b + 2};
    for (std::size_t j = 0; j + 2 < n; ++j) {
        for (std::size_t k = std::min(j + b, n - 1); k >= j + 2; --k) {
            if (a(k, j) == 0.0)
                continue;
            rot.annihilate(k - 1, j);
            // bulge at (row, col) with row - col = b + 1
            std::size_t col = k - 1;
            std::size_t row = col + b + 1;
            while (row < n && a(row, col) != 0.0) {
                rot.annihilate(row - 1, col);
                col = row - 1;
                row = col + b + 1;
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        t.diag[i] = a(i, i);
    for (std::size_t i = 0; i + 1 < n; ++i)
        t.offdiag[i] = a(i, i + 1);
    return t;
}

void tridiagonal_ql(Eigen::VectorXd& d, Eigen::VectorXd& e, Eigen::MatrixXd* z, int max_sweeps)
{
    const int n = static_cast<int>(d.size());
    if (n == 0)
        return;
    const double eps = std::numeric_limits<double>::epsilon();
    e[n - 1] = 0.0;
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= eps * dd)
                    break;
            }
            if (m == l)
                break;
            if (iter++ == max_sweeps)
                throw ConvergenceError("implicit QL did not converge", static_cast<std::size_t>(l));
            double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            double r = std::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
            double s = 1.0, c = 1.0, p = 0.0;
            int i;
            bool underflow = false;
            for (i = m - 1; i >= l; --i) {
                double f = s * e[i];
                const double bb = c * e[i];
                r = std::hypot(f, g);
                e[i + 1] = r;
                if (r == 0.0) {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * bb;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - bb;
                if (z) {
                    for (int k = 0; k < z->rows(); ++k) {
                        f = (*z)(k, i + 1);
                        (*z)(k, i + 1) = s * (*z)(k, i) + c * f;
                        (*z)(k, i) = c * (*z)(k, i) - s * f;
                    }
                }
            }
            if (underflow)
                continue;
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        } while (m != l);
    }
}

EigenPairs eigensolve_banded(const BandedSymmetricMatrix& m, std::size_t count, const EigenOptions& opt)
{
    const std::size_t n = m.dim();
    if (count > n)
        throw DomainError("requested " + std::to_string(count) + " eigenpairs from dimension " + std::to_string(n));
    Tridiagonal t = tridiagonalize(m, opt.vectors);
    Eigen::MatrixXd z;
    if (opt.vectors)
        z = t.q.size() ? t.q : Eigen::MatrixXd::Identity(n, n);
    tridiagonal_ql(t.diag, t.offdiag, opt.vectors ? &z : nullptr, opt.max_sweeps);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return t.diag[x] < t.diag[y]; });

    EigenPairs out;
    out.values.resize(count);
    if (opt.vectors)
        out.vectors.resize(n, count);
    for (std::size_t k = 0; k < count; ++k) {
        out.values[k] = t.diag[order[k]];
        if (!opt.vectors)
            continue;
        Eigen::VectorXd v = z.col(order[k]);
        v.normalize();
        const double cut = 1e-6 * v.cwiseAbs().maxCoeff();
        for (std::size_t i = 0; i < n; ++i)
            if (std::abs(v[i]) > cut) {
                if (v[i] < 0.0)
                    v = -v;
                break;
            }
        out.vectors.col(k) = v;
    }
    return out;
}

} // namespace quasidrive::fock
