#include "quasidrive/kinetics.hpp"
#include "quasidrive/errors.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace quasidrive::kinetics {

RateMatrix rate_matrix(const Eigen::MatrixXd& states, const Eigen::VectorXd& g, const Eigen::MatrixXd& lowering,
                       double Gamma, double nbar)
{
    if (states.rows() != lowering.rows() || lowering.rows() != lowering.cols())
        throw DomainError("basis mismatch: states have " + std::to_string(states.rows()) +
                          " Fock components, lowering operator is " + std::to_string(lowering.rows()) + "x" +
                          std::to_string(lowering.cols()));
    if (g.size() != states.cols())
        throw DomainError("basis mismatch: " + std::to_string(g.size()) + " quasienergies for " +
                          std::to_string(states.cols()) + " states");
    if (!(Gamma > 0) || !(nbar >= 0))
        throw DomainError("need Gamma > 0 and nbar >= 0");

    // A(mu, nu) = <mu|a|nu>
    const Eigen::MatrixXd A = states.transpose() * lowering * states;
    const Eigen::MatrixXd A2 = A.cwiseProduct(A);
    RateMatrix r;
    r.W = Gamma * ((nbar + 1.0) * A2.transpose() + nbar * A2);
    r.W.diagonal().setZero();
    const double floor = kRateFloor * r.W.maxCoeff();
    r.W = (r.W.array() < floor).select(0.0, r.W);
    r.g = g;
    r.fock_dim = static_cast<std::size_t>(states.rows());
    r.Gamma = Gamma;
    r.nbar = nbar;
    return r;
}

RateMatrix rate_matrix(const fock::Spectrum& spectrum, const Eigen::MatrixXd& lowering, double Gamma, double nbar)
{
    return rate_matrix(spectrum.vectors, spectrum.values, lowering, Gamma, nbar);
}

Eigen::MatrixXd generator(const RateMatrix& W)
{
    Eigen::MatrixXd L = W.W.transpose();
    L.diagonal() = -W.W.rowwise().sum();
    return L;
}

double balance_residual(const RateMatrix& W, const Eigen::VectorXd& rho, const std::vector<std::size_t>& support)
{
    double worst = 0.0;
    for (std::size_t n : support) {
        double out = 0.0, in = 0.0;
        for (std::size_t m : support) {
            out += W.W(n, m);
            in += W.W(m, n) * rho[m];
        }
        worst = std::max(worst, std::abs(in - out * rho[n]));
    }
    return worst;
}

namespace {

// strongly connected components of the positive-rate graph, Tarjan
std::vector<int> components(const Eigen::MatrixXd& Q, int& count)
{
    const int n = static_cast<int>(Q.rows());
    std::vector<int> index(n, -1), low(n, 0), comp(n, -1), stack;
    std::vector<bool> on(n, false);
    int next = 0;
    count = 0;
    std::function<void(int)> visit = [&](int v) {
        index[v] = low[v] = next++;
        stack.push_back(v);
        on[v] = true;
        for (int w = 0; w < n; ++w) {
            if (w == v || Q(v, w) <= 0)
                continue;
            if (index[w] < 0) {
                visit(w);
                low[v] = std::min(low[v], low[w]);
            } else if (on[w]) {
                low[v] = std::min(low[v], index[w]);
            }
        }
        if (low[v] == index[v]) {
            int w;
            do {
                w = stack.back();
                stack.pop_back();
                on[w] = false;
                comp[w] = count;
            } while (w != v);
            ++count;
        }
    };
    for (int v = 0; v < n; ++v)
        if (index[v] < 0)
            visit(v);
    return comp;
}

// Grassmann-Taksar-Heyman elimination for an irreducible rate matrix (off-diagonal part only)
Eigen::VectorXd gth(Eigen::MatrixXd Q)
{
    const Eigen::Index n = Q.rows();
    Q.diagonal().setZero();
    for (Eigen::Index k = n - 1; k > 0; --k) {
        const double s = Q.row(k).head(k).sum();
        if (!(s > 0))
            throw NumericError("GTH elimination hit a state with no exit");
        Q.col(k).head(k) /= s;
        for (Eigen::Index i = 0; i < k; ++i) {
            const double f = Q(i, k);
            if (f != 0.0)
                Q.row(i).head(k) += f * Q.row(k).head(k);
        }
    }
    Eigen::VectorXd pi(n);
    pi[0] = 1.0;
    for (Eigen::Index j = 1; j < n; ++j)
        pi[j] = pi.head(j).dot(Q.col(j).head(j));
    return pi / pi.sum();
}

} // namespace

Distribution stationary(const RateMatrix& W, const std::vector<std::size_t>& support_in)
{
    std::vector<std::size_t> support = support_in;
    std::sort(support.begin(), support.end());
    support.erase(std::unique(support.begin(), support.end()), support.end());
    if (support.empty())
        throw DomainError("stationary: empty support");
    for (std::size_t s : support)
        if (s >= W.size())
            throw DomainError("stationary: state " + std::to_string(s) + " outside the basis");

    const auto n = static_cast<Eigen::Index>(support.size());
    Eigen::MatrixXd Q(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            Q(i, j) = i == j ? 0.0 : W.W(support[i], support[j]);

    int count = 0;
    const std::vector<int> comp = components(Q, count);
    std::vector<bool> closed(count, true);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (Q(i, j) > 0 && comp[i] != comp[j])
                closed[comp[i]] = false;
    const auto nclosed = std::count(closed.begin(), closed.end(), true);
    if (nclosed != 1) {
        std::ostringstream msg;
        msg << "reducible chain: " << nclosed << " closed classes";
        for (int c = 0; c < count; ++c) {
            if (!closed[c])
                continue;
            msg << " {";
            bool first = true;
            for (Eigen::Index i = 0; i < n; ++i)
                if (comp[i] == c) {
                    msg << (first ? "" : ",") << support[i];
                    first = false;
                }
            msg << "}";
        }
        throw NumericError(msg.str());
    }
    const int target = static_cast<int>(std::find(closed.begin(), closed.end(), true) - closed.begin());
    std::vector<Eigen::Index> cls;
    for (Eigen::Index i = 0; i < n; ++i)
        if (comp[i] == target)
            cls.push_back(i);

    Distribution d;
    d.rho = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(W.size()));
    d.support = support;
    if (cls.size() == 1) {
        d.rho[support[cls[0]]] = 1.0;
    } else {
        const auto m = static_cast<Eigen::Index>(cls.size());
        Eigen::MatrixXd sub(m, m);
        for (Eigen::Index i = 0; i < m; ++i)
            for (Eigen::Index j = 0; j < m; ++j)
                sub(i, j) = Q(cls[i], cls[j]);
        const Eigen::VectorXd pi = gth(sub);
        for (Eigen::Index i = 0; i < m; ++i)
            d.rho[support[cls[i]]] = pi[i];
    }
    d.residual = balance_residual(W, d.rho, support);
    return d;
}

Distribution stationary(const RateMatrix& W)
{
    std::vector<std::size_t> all(W.size());
    for (std::size_t i = 0; i < all.size(); ++i)
        all[i] = i;
    return stationary(W, all);
}

Eigen::VectorXd evolve(const RateMatrix& W, const Eigen::VectorXd& rho0, double t)
{
    if (!(t >= 0))
        throw DomainError("evolve: t must be >= 0");
    if (rho0.size() != W.W.rows())
        throw DomainError("evolve: initial distribution has the wrong length");
    if (std::abs(rho0.sum() - 1.0) > 1e-12 || rho0.minCoeff() < 0)
        throw DomainError("evolve: initial distribution is not normalized");
    if (t == 0)
        return rho0;
    const Eigen::MatrixXd L = generator(W) * t;
    return L.exp() * rho0;
}

double mean_first_passage(const RateMatrix& W, std::size_t start, const std::vector<std::size_t>& absorbing)
{
    const std::size_t n = W.size();
    if (start >= n)
        throw DomainError("mean_first_passage: start outside the basis");
    std::vector<bool> absorb(n, false);
    for (std::size_t a : absorbing) {
        if (a >= n)
            throw DomainError("mean_first_passage: absorbing state outside the basis");
        absorb[a] = true;
    }
    if (absorb[start])
        return 0.0;

    // transient states reachable from start without passing an absorbing state
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> queue{start}, transient;
    seen[start] = true;
    bool hits = false;
    while (!queue.empty()) {
        const std::size_t v = queue.back();
        queue.pop_back();
        transient.push_back(v);
        for (std::size_t w = 0; w < n; ++w) {
            if (w == v || W.W(v, w) <= 0 || seen[w])
                continue;
            seen[w] = true;
            if (absorb[w])
                hits = true;
            else
                queue.push_back(w);
        }
    }
    if (!hits)
        throw DomainError("mean_first_passage: absorbing set unreachable from state " + std::to_string(start));
    std::sort(transient.begin(), transient.end());

    // sum_m W_nm (h_m - h_n) = -1, h = 0 on absorbing states
    const auto m = static_cast<Eigen::Index>(transient.size());
    std::vector<Eigen::Index> pos(n, -1);
    for (Eigen::Index i = 0; i < m; ++i)
        pos[transient[i]] = i;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const std::size_t v = transient[i];
        for (std::size_t w = 0; w < n; ++w) {
            if (w == v || W.W(v, w) <= 0)
                continue;
            A(i, i) += W.W(v, w);
            if (pos[w] >= 0)
                A(i, pos[w]) -= W.W(v, w);
        }
    }
    const Eigen::VectorXd h = A.partialPivLu().solve(Eigen::VectorXd::Ones(m));
    const double out = h[pos[start]];
    if (!std::isfinite(out) || out <= 0)
        throw NumericError("mean_first_passage: singular system (some reachable state cannot reach the target)");
    return out;
}

} // namespace quasidrive::kinetics
