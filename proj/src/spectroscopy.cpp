#include "quasidrive/spectroscopy.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <mutex>
#include <thread>

#include "quasidrive/errors.hpp"

namespace quasidrive::spectroscopy {

namespace {

struct Solved {
    double d = 0.0;
    scaling::ScaledModel model;
    fock::Spectrum spec;
};

Solved solve_at(int N, double r, double d, std::size_t dim, std::size_t window)
{
    Solved s;
    s.d = d;
    s.model = scaling::resonant_sweep_map({N, 1.0, d, r});
    s.spec = fock::solve(s.model, dim, window);
    return s;
}

std::string fmt(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

// Greedy largest-weight matching of Fock labels to eigenvectors; w gets the matched weights.
std::vector<std::size_t> reference_pick(const Solved& sol, const std::vector<int>& labels, std::vector<double>& w)
{
    const auto nslots = labels.size();
    const auto& v = sol.spec.vectors;
    struct Cand {
        double w;
        std::size_t s;
        Eigen::Index j;
    };
    std::vector<Cand> cands;
    for (std::size_t s = 0; s < nslots; ++s)
        for (Eigen::Index j = 0; j < v.cols(); ++j) {
            const double c = v(labels[s], j);
            cands.push_back({c * c, s, j});
        }
    std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) { return a.w > b.w; });
    std::vector<std::size_t> pick(nslots, 0);
    std::vector<bool> done(nslots, false), used(static_cast<std::size_t>(v.cols()), false);
    w.assign(nslots, 0.0);
    for (const auto& c : cands) {
        if (done[c.s] || used[static_cast<std::size_t>(c.j)])
            continue;
        done[c.s] = true;
        used[static_cast<std::size_t>(c.j)] = true;
        pick[c.s] = static_cast<std::size_t>(c.j);
        w[c.s] = c.w;
    }
    return pick;
}

class Tracker {
public:
    Tracker(const SweepOptions& opt, std::size_t dim, std::size_t window, SweepResult& out,
            std::vector<SweepPoint>& sink)
        : opt_(opt), dim_(dim), window_(window), out_(out), sink_(sink)
    {
    }

    // Fock-labelled assignment at the reference point; `record` false skips the output row
    void start(const Solved& first, bool record = true)
    {
        std::vector<double> w;
        const auto pick = reference_pick(first, out_.labels, w);
        emit(first, pick, std::vector<double>(pick.size(), 1.0), false, record);
    }

    // Track from the current state to `next`, bisecting the interval while overlaps are poor.
    void advance(const Solved& next, int depth)
    {
        std::vector<double> ov;
        auto pick = assign(next, ov);
        const double worst = *std::min_element(ov.begin(), ov.end());
        if (worst >= opt_.min_overlap) {
            emit(next, pick, ov, depth > 0);
            return;
        }
        if (depth >= opt_.max_refine_depth)
            throw NumericError("diabatic tracking lost between d=" + fmt(prev_d_) + " and d=" + fmt(next.d) +
                               " (overlap " + fmt(worst) + ") after " + std::to_string(depth) + " bisections");
        const Solved mid = solve_at(opt_.N, opt_.r, 0.5 * (prev_d_ + next.d), dim_, window_);
        ++out_.refinements;
        advance(mid, depth + 1);
        advance(next, depth + 1);
    }

private:
    std::vector<std::size_t> assign(const Solved& next, std::vector<double>& ov) const
    {
        const auto nslots = prev_vecs_.cols();
        const auto m = next.spec.vectors.cols();
        const Eigen::MatrixXd o = (prev_vecs_.transpose() * next.spec.vectors).cwiseAbs();
        struct Cand {
            double overlap, dg;
            Eigen::Index s, j;
        };
        std::vector<Cand> cands;
        cands.reserve(static_cast<std::size_t>(nslots * m));
        for (Eigen::Index s = 0; s < nslots; ++s)
            for (Eigen::Index j = 0; j < m; ++j)
                cands.push_back({o(s, j), std::abs(prev_g_[s] - next.spec.values[j]), s, j});
        std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
            if (a.overlap != b.overlap)
                return a.overlap > b.overlap;
            return a.dg < b.dg;
        });
        std::vector<std::size_t> pick(static_cast<std::size_t>(nslots), 0);
        std::vector<bool> slot_done(static_cast<std::size_t>(nslots), false), col_used(static_cast<std::size_t>(m), false);
        ov.assign(static_cast<std::size_t>(nslots), 0.0);
        Eigen::Index left = nslots;
        for (const auto& c : cands) {
            if (slot_done[c.s] || col_used[c.j])
                continue;
            slot_done[c.s] = true;
            col_used[c.j] = true;
            pick[c.s] = static_cast<std::size_t>(c.j);
            ov[c.s] = c.overlap;
            if (--left == 0)
                break;
        }
        return pick;
    }

    void emit(const Solved& sol, const std::vector<std::size_t>& pick, const std::vector<double>& ov, bool refined,
              bool record = true)
    {
        const auto nslots = pick.size();
        SweepPoint p;
        p.d = sol.d;
        p.lambda = sol.model.lambda;
        p.beta = sol.model.beta;
        p.refined = refined;
        bool finite = true;
        for (std::size_t s = 0; s < nslots; ++s) {
            p.g.push_back(sol.spec.values[static_cast<Eigen::Index>(pick[s])]);
            p.overlap.push_back(ov[s]);
            p.adiabatic.push_back(pick[s]);
            Eigen::Index dom = 0;
            sol.spec.vectors.col(static_cast<Eigen::Index>(pick[s])).cwiseAbs().maxCoeff(&dom);
            p.dominant.push_back(static_cast<int>(dom));
            double chi;
            if (sol.model.beta > 0.0) {
                chi = susceptibility(sol.spec, pick[s], sol.model.lambda, sol.model.beta);
            } else {
                const int n = out_.labels[s];
                const bool pole = std::abs(sol.d - n) < 1e-12 || std::abs(sol.d - n - 1) < 1e-12;
                chi = pole ? std::numeric_limits<double>::quiet_NaN() : perturbative_amplitude(n, sol.d);
            }
            finite = finite && std::isfinite(chi);
            p.chi.push_back(chi);
        }
        prev_vecs_.resize(sol.spec.vectors.rows(), static_cast<Eigen::Index>(nslots));
        prev_g_.resize(static_cast<Eigen::Index>(nslots));
        for (std::size_t s = 0; s < nslots; ++s) {
            prev_vecs_.col(static_cast<Eigen::Index>(s)) = sol.spec.vectors.col(static_cast<Eigen::Index>(pick[s]));
            prev_g_[static_cast<Eigen::Index>(s)] = p.g[s];
        }
        prev_d_ = sol.d;
        if (!record)
            return;
        if (finite)
            sink_.push_back(std::move(p));
        else
            ++out_.dropped;
    }

    const SweepOptions& opt_;
    std::size_t dim_, window_;
    SweepResult& out_;
    std::vector<SweepPoint>& sink_;
    Eigen::MatrixXd prev_vecs_;
    Eigen::VectorXd prev_g_;
    double prev_d_ = 0.0;
};

} // namespace

std::vector<double> SweepResult::axis() const
{
    std::vector<double> a;
    a.reserve(points.size());
    for (const auto& p : points)
        a.push_back(p.d);
    return a;
}

double susceptibility(const fock::Spectrum& s, std::size_t index, double lambda, double beta)
{
    if (!(beta > 0.0))
        throw DomainError("susceptibility needs beta > 0; use perturbative_amplitude at zero drive");
    if (index >= s.size())
        throw DomainError("state index out of range");
    double q;
    if (s.observables.size() == s.size()) {
        q = s.observables[index].q;
    } else {
        const auto v = s.vectors.col(static_cast<Eigen::Index>(index));
        double acc = 0.0;
        for (Eigen::Index i = 0; i + 1 < v.size(); ++i)
            acc += std::sqrt(i + 1.0) * v[i] * v[i + 1];
        q = std::sqrt(2.0 * lambda) * acc;
    }
    return 2.0 * lambda * q / std::sqrt(beta);
}

int resonance_partner(int n, double d)
{
    const double m = 2.0 * d - 1.0 - n;
    const double mr = std::round(m);
    if (mr < 0.0 || mr == n || std::abs(m - mr) > 1e-12 * std::max(1.0, std::abs(d)))
        return -1;
    return static_cast<int>(mr);
}

double fock_susceptibility(const fock::Spectrum& s, int n, double d, double lambda, double beta)
{
    if (!(beta > 0.0))
        throw DomainError("susceptibility needs beta > 0; use perturbative_amplitude at zero drive");
    const auto& v = s.vectors;
    if (n < 0 || n >= v.rows())
        throw DomainError("Fock label outside the basis");
    const int m = resonance_partner(n, d);
    if (m < 0 || m >= v.rows()) {
        Eigen::Index j = 0;
        v.row(n).cwiseAbs().maxCoeff(&j);
        return susceptibility(s, static_cast<std::size_t>(j), lambda, beta);
    }
    std::vector<std::pair<double, Eigen::Index>> w;
    for (Eigen::Index j = 0; j < v.cols(); ++j)
        w.emplace_back(v(n, j) * v(n, j) + v(m, j) * v(m, j), j);
    std::partial_sort(w.begin(), w.begin() + 2, w.end(), [](auto& a, auto& b) { return a.first > b.first; });
    const Eigen::VectorXd a = v.col(w[0].second), b = v.col(w[1].second);
    Eigen::VectorXd phi = a(n) * a + b(n) * b;
    phi.normalize();
    double acc = 0.0;
    for (Eigen::Index i = 0; i + 1 < phi.size(); ++i)
        acc += std::sqrt(i + 1.0) * phi[i] * phi[i + 1];
    return 2.0 * lambda * std::sqrt(2.0 * lambda) * acc / std::sqrt(beta);
}

double perturbative_amplitude(int n, double d)
{
    const double a = d - n;
    const double b = d - n - 1.0;
    const double scale = std::max(1.0, std::abs(d));
    if (std::abs(a) <= 1e-12 * scale || std::abs(b) <= 1e-12 * scale)
        throw DomainError("single-photon resonance pole at d=" + fmt(d) + " for n=" + std::to_string(n));
    return -d / (a * b);
}

std::size_t sweep_window(int N, double d_lo, double d_hi)
{
    if (N < 1)
        throw DomainError("N must be >= 1");
    if (!(d_lo > 0.0) || !(d_hi >= d_lo))
        throw DomainError("detuning range must satisfy 0 < lo <= hi");
    std::size_t best = 0;
    for (int i = 0; i <= 8; ++i) {
        const double d = d_lo + (d_hi - d_lo) * i / 8.0;
        const double lambda = 1.0 / (2.0 * d);
        auto diag = [&](int n) {
            const double x = lambda * (2.0 * n + 1.0) - 1.0;
            return 0.25 * x * x;
        };
        double gmax = 0.0;
        for (int n = 0; n <= N; ++n)
            gmax = std::max(gmax, diag(n));
        std::size_t count = 0;
        const int nmax = N + static_cast<int>(2.0 / lambda) + 10;
        for (int n = 0; n <= nmax; ++n)
            if (diag(n) <= gmax + 1e-12)
                ++count;
        best = std::max(best, count);
    }
    return best + 4;
}

SweepResult sweep_detuning(const SweepOptions& opt)
{
    if (opt.N < 1)
        throw DomainError("N must be >= 1");
    if (!(opt.d_lo > 0.0) || !(opt.d_hi > opt.d_lo))
        throw DomainError("detuning range must satisfy 0 < lo < hi");
    if (opt.grid < 3)
        throw DomainError("sweep grid needs at least 3 points");
    if (!(opt.r >= 0.0))
        throw DomainError("drive ratio r must be >= 0");

    SweepResult res;
    res.N = opt.N;
    res.r = opt.r;
    res.window = opt.window ? opt.window : sweep_window(opt.N, opt.d_lo, opt.d_hi);
    if (opt.dim) {
        res.dim = opt.dim;
    } else {
        for (double d : {opt.d_lo, 0.5 * (opt.d_lo + opt.d_hi), opt.d_hi}) {
            const auto m = scaling::resonant_sweep_map({opt.N, 1.0, d, opt.r});
            res.dim = std::max(res.dim, fock::truncation_check(m, res.window, {opt.tol}));
        }
    }
    if (res.window > res.dim)
        throw DomainError("eigenpair window exceeds the Fock dimension");
    for (int n = 0; n <= opt.N; ++n)
        res.labels.push_back(n);

    std::vector<double> grid(static_cast<std::size_t>(opt.grid));
    for (int i = 0; i < opt.grid; ++i)
        grid[static_cast<std::size_t>(i)] = opt.d_lo + (opt.d_hi - opt.d_lo) * i / (opt.grid - 1.0);

    std::vector<std::optional<Solved>> solved(grid.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < grid.size(); i = next++) {
            try {
                solved[i] = solve_at(opt.N, opt.r, grid[i], res.dim, res.window);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
            }
        }
    };
    const unsigned nthreads = std::max(1u, std::min<unsigned>(opt.threads, static_cast<unsigned>(grid.size())));
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < nthreads; ++t)
            pool.emplace_back(worker);
        for (auto& th : pool)
            th.join();
    }
    if (failure)
        std::rethrow_exception(failure);

    // Labels are Fock levels at the first purity maximum from the left edge (detunings below the
    // resonance); exact multiphoton resonances at half-integer d leave 50/50 mixtures.
    std::vector<double> purity(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        std::vector<double> w;
        reference_pick(*solved[i], res.labels, w);
        purity[i] = *std::min_element(w.begin(), w.end());
    }
    std::size_t ref = 0;
    while (ref + 1 < grid.size() && purity[ref + 1] > purity[ref] + 1e-12)
        ++ref;
    res.reference_d = grid[ref];

    std::vector<SweepPoint> left;
    Tracker back(opt, res.dim, res.window, res, left);
    back.start(*solved[ref], false);
    for (std::size_t i = ref; i-- > 0;)
        back.advance(*solved[i], 0);
    res.points.assign(std::make_move_iterator(left.rbegin()), std::make_move_iterator(left.rend()));

    Tracker fwd(opt, res.dim, res.window, res, res.points);
    fwd.start(*solved[ref]);
    for (std::size_t i = ref + 1; i < grid.size(); ++i)
        fwd.advance(*solved[i], 0);
    return res;
}

double gap_in_v_units(double gap_g, double lambda)
{
    // epsilon = hbar V g / (2 lambda^2)
    return gap_g / (2.0 * lambda * lambda);
}

PairGap resonant_pair_gap(int N, double r, double d, std::size_t dim, std::size_t window)
{
    const Solved s = solve_at(N, r, d, dim, window);
    const auto& v = s.spec.vectors;
    std::vector<std::pair<double, std::size_t>> w;
    for (Eigen::Index j = 0; j < v.cols(); ++j)
        w.emplace_back(v(0, j) * v(0, j) + v(N, j) * v(N, j), static_cast<std::size_t>(j));
    std::partial_sort(w.begin(), w.begin() + 2, w.end(), [](auto& a, auto& b) { return a.first > b.first; });
    PairGap pg;
    pg.a = w[0].second;
    pg.b = w[1].second;
    pg.weight_a = w[0].first;
    pg.weight_b = w[1].first;
    pg.gap = std::abs(s.spec.values[static_cast<Eigen::Index>(pg.a)] - s.spec.values[static_cast<Eigen::Index>(pg.b)]);
    return pg;
}

RabiEstimate min_gap(int N, double r, double d_lo, double d_hi, std::size_t dim, double rel_tol)
{
    if (!(d_lo > 0.0) || !(d_hi > d_lo))
        throw DomainError("gap bracket must satisfy 0 < lo < hi");
    const std::size_t window = sweep_window(N, d_lo, d_hi);
    if (!dim)
        for (double d : {d_lo, d_hi})
            dim = std::max(dim, fock::truncation_check(scaling::resonant_sweep_map({N, 1.0, d, r}), window));

    RabiEstimate est;
    est.N = N;
    est.r = r;
    est.dim = dim;
    auto f = [&](double d) {
        ++est.evaluations;
        const PairGap pg = resonant_pair_gap(N, r, d, dim, window);
        if (pg.weight_a < 0.5 || pg.weight_b < 0.5)
            throw NumericError("lost the (0," + std::to_string(N) + ") pair at d=" + fmt(d) +
                               " (Fock weights " + fmt(pg.weight_a) + ", " + fmt(pg.weight_b) + ")");
        return pg.gap;
    };

    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = d_lo, b = d_hi;
    double c = b - invphi * (b - a), e = a + invphi * (b - a);
    double fc = f(c), fe = f(e);
    while (b - a > rel_tol * 0.5 * (std::abs(a) + std::abs(b))) {
        if (fc < fe) {
            b = e;
            e = c;
            fe = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + invphi * (b - a);
            fe = f(e);
        }
    }
    const double x = 0.5 * (a + b);
    const double edge = 1e-6 * (d_hi - d_lo);
    if (x - d_lo < edge || d_hi - x < edge)
        throw NumericError("no gap minimum inside [" + fmt(d_lo) + ", " + fmt(d_hi) + "]");
    const auto model = scaling::resonant_sweep_map({N, 1.0, x, r});
    est.location = x;
    est.lambda = model.lambda;
    est.beta = model.beta;
    est.gap_g = f(x);
    est.gap_v = gap_in_v_units(est.gap_g, model.lambda);
    est.formula_v = rabi_formula(N, r);
    return est;
}

double rabi_formula(int N, double r)
{
    if (N < 1)
        throw DomainError("N must be >= 1");
    if (!(r >= 0.0))
        throw DomainError("r must be >= 0");
    return std::pow(r, N) * std::pow(N, 1.25) * std::pow(2.0 * std::numbers::pi, -0.75);
}

PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.size() < 2)
        throw DomainError("power-law fit needs >= 2 matched points");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0))
            throw DomainError("power-law fit needs positive data");
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    PowerLawFit fit;
    fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.intercept = (sy - fit.slope * sx) / n;
    for (std::size_t i = 0; i < x.size(); ++i)
        fit.max_residual = std::max(fit.max_residual,
                                    std::abs(std::log(y[i]) - fit.intercept - fit.slope * std::log(x[i])));
    return fit;
}

void write_csv(std::ostream& os, const SweepResult& res)
{
    os << "d,n_diabatic,g_n,chi_n,overlap\n";
    char buf[160];
    for (const auto& p : res.points)
        for (std::size_t s = 0; s < res.labels.size(); ++s) {
            std::snprintf(buf, sizeof buf, "%.17g,%d,%.17g,%.17g,%.17g\n", p.d, res.labels[s], p.g[s], p.chi[s],
                          p.overlap[s]);
            os << buf;
        }
}

} // namespace quasidrive::spectroscopy
