#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "quasidrive/errors.hpp"
#include "quasidrive/kinetics.hpp"
#include "quasidrive/semiclassics.hpp"

using namespace quasidrive;
using namespace quasidrive::kinetics;

namespace {

RateMatrix chain(const Eigen::MatrixXd& W)
{
    RateMatrix r;
    r.W = W;
    r.g = Eigen::VectorXd::Zero(W.rows());
    return r;
}

// Floquet index -> Fock index for states that are pure Fock states
std::vector<Eigen::Index> fock_index(const fock::Spectrum& s)
{
    std::vector<Eigen::Index> idx(s.size());
    for (std::size_t k = 0; k < s.size(); ++k)
        s.vectors.col(static_cast<Eigen::Index>(k)).cwiseAbs().maxCoeff(&idx[k]);
    return idx;
}

struct Undriven {
    fock::Spectrum spectrum;
    RateMatrix rates;
    std::vector<Eigen::Index> n;
};

Undriven undriven(double lambda, std::size_t dim, double nbar, double Gamma = 1.0)
{
    Undriven u;
    u.spectrum = fock::solve(scaling::resonant_model(lambda, 0.0), dim, dim);
    u.rates = rate_matrix(u.spectrum, fock::build_quadratures(lambda, dim).lowering, Gamma, nbar);
    u.n = fock_index(u.spectrum);
    return u;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

// max residual of the least-squares line through (x, y)
double affine_residual(const std::vector<double>& x, const std::vector<double>& y)
{
    const double b = fit_slope(x, y);
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i] / x.size();
        my += y[i] / y.size();
    }
    double worst = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
        worst = std::max(worst, std::abs(y[i] - my - b * (x[i] - mx)));
    return worst;
}

} // namespace

TEST_CASE("undriven rates are the birth-death chain")
{
    for (double nbar : {0.0, 0.3, 2.0}) {
        const auto u = undriven(0.0437, 40, nbar, 1.7);
        const auto& W = u.rates.W;
        for (std::size_t a = 0; a < u.rates.size(); ++a)
            for (std::size_t b = 0; b < u.rates.size(); ++b) {
                const Eigen::Index na = u.n[a], nb = u.n[b];
                double expect = 0.0;
                if (nb == na - 1)
                    expect = 1.7 * (nbar + 1) * na;
                else if (nb == na + 1 && nb < 40)
                    expect = 1.7 * nbar * nb;
                CHECK(std::abs(W(a, b) - expect) < 1e-12);
            }
    }
}

TEST_CASE("tilted rates go both ways in quasienergy at zero temperature")
{
    const auto chain = build_chain(scaling::resonant_model(0.03, 1.0 / 27), 0.0);
    const auto& W = chain.rates.W;
    const auto& g = chain.states.g;
    bool both = false;
    for (std::size_t v = 0; v < chain.rates.size() && !both; ++v) {
        bool up = false, down = false;
        for (std::size_t m = 0; m < chain.rates.size(); ++m) {
            if (W(v, m) > 1e-10 && g[m] > g[v])
                up = true;
            if (W(v, m) > 1e-10 && g[m] < g[v])
                down = true;
        }
        both = up && down;
    }
    CHECK(both);
    CHECK(W.minCoeff() >= 0.0);
    CHECK(W.diagonal().cwiseAbs().maxCoeff() == 0.0);

    // away from the metastable extremum: some dome state has outward rates in its well
    const double ge = g[chain.extremum];
    bool outward = false;
    for (std::size_t v : chain.well) {
        double sum = 0.0;
        for (std::size_t m = 0; m < chain.rates.size(); ++m)
            if (std::abs(g[m] - ge) > std::abs(g[v] - ge))
                sum += W(v, m);
        outward = outward || sum > 0;
    }
    CHECK(outward);
}

TEST_CASE("rate matrix rejects a mismatched basis")
{
    const auto s = fock::solve(scaling::resonant_model(0.05, 0.01), 30, 10);
    CHECK_THROWS_AS(rate_matrix(s, fock::build_quadratures(0.05, 31).lowering, 1.0, 0.0), DomainError);
    CHECK_THROWS_AS(rate_matrix(s.vectors, Eigen::VectorXd::Zero(3), fock::build_quadratures(0.05, 30).lowering,
                                1.0, 0.0),
                    DomainError);
    CHECK_THROWS_AS(rate_matrix(s, fock::build_quadratures(0.05, 30).lowering, 1.0, -0.1), DomainError);
}

TEST_CASE("stationary distributions of small chains")
{
    Eigen::MatrixXd W(2, 2);
    W << 0, 1, 2, 0;
    const auto d = stationary(chain(W));
    CHECK(d.rho[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(d.rho[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(d.residual < 1e-15);

    // two closed classes
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(5, 5);
    R(0, 1) = R(1, 0) = 1;
    R(2, 3) = R(3, 2) = 1;
    R(4, 0) = R(4, 2) = 1;
    try {
        stationary(chain(R));
        FAIL("expected a reducibility error");
    } catch (const NumericError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("{0,1}") != std::string::npos);
        CHECK(msg.find("{2,3}") != std::string::npos);
    }
    // restricting to one block makes it well posed
    const auto half = stationary(chain(R), {2, 3});
    CHECK(half.rho[2] == doctest::Approx(0.5));
    CHECK(half.rho[0] == 0.0);
    CHECK_THROWS_AS(stationary(chain(R), {}), DomainError);
    CHECK_THROWS_AS(stationary(chain(R), {7}), DomainError);
}

TEST_CASE("undriven zero temperature relaxes to the Fock ground state")
{
    const auto u = undriven(0.0437, 60, 0.0);
    const auto d = stationary(u.rates);
    for (std::size_t k = 0; k < u.rates.size(); ++k)
        CHECK(std::abs(d.rho[k] - (u.n[k] == 0 ? 1.0 : 0.0)) < 1e-12);
}

TEST_CASE("undriven finite temperature gives the truncated thermal distribution")
{
    const double nbar = 0.5, x = nbar / (nbar + 1);
    const std::size_t D = 60;
    const auto u = undriven(0.0437, D, nbar);
    const auto d = stationary(u.rates);
    const double Z = (1 - std::pow(x, static_cast<double>(D))) / (1 - x);
    for (std::size_t k = 0; k < D; ++k)
        CHECK(std::abs(d.rho[k] - std::pow(x, static_cast<double>(u.n[k])) / Z) < 1e-10);
    CHECK(d.residual < 1e-14);
}

TEST_CASE("time evolution")
{
    Eigen::MatrixXd W(2, 2);
    W << 0, 1, 1, 0;
    const auto two = chain(W);
    Eigen::VectorXd rho0(2);
    rho0 << 0.9, 0.1;
    CHECK((evolve(two, rho0, 0.0) - rho0).norm() == 0.0);
    for (double t : {0.01, 0.3, 1.0, 4.0})
        CHECK(evolve(two, rho0, t)[0] == doctest::Approx(0.5 + 0.4 * std::exp(-2 * t)).epsilon(1e-13));
    CHECK_THROWS_AS(evolve(two, rho0, -1.0), DomainError);
    CHECK_THROWS_AS(evolve(two, Eigen::VectorXd::Constant(2, 0.7), 1.0), DomainError);

    // physical chain: conservation over six decades, then the stationary limit
    const auto c = build_chain(scaling::resonant_model(0.05, 1.0 / 27), 0.3);
    Eigen::VectorXd start = Eigen::VectorXd::Zero(c.rates.size());
    start[c.extremum] = 1.0;
    for (double t : {1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1000.0}) {
        const Eigen::VectorXd rho = evolve(c.rates, start, t);
        CHECK(std::abs(rho.sum() - 1.0) < 1e-10);
        CHECK(rho.minCoeff() > -1e-12);
    }
    const auto full = stationary(c.rates);
    CHECK((evolve(c.rates, start, 1e5) - full.rho).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("mean first passage")
{
    Eigen::MatrixXd W(2, 2);
    W << 0, 0.37, 0.1, 0;
    CHECK(mean_first_passage(chain(W), 0, {1}) == doctest::Approx(1 / 0.37).epsilon(1e-14));

    const auto u = undriven(0.0437, 30, 0.0, 2.0);
    std::size_t ground = 0;
    for (std::size_t k = 0; k < u.n.size(); ++k)
        if (u.n[k] == 0)
            ground = k;
    for (std::size_t k = 0; k < u.n.size(); ++k) {
        double expect = 0.0;
        for (Eigen::Index j = 1; j <= u.n[k]; ++j)
            expect += 1.0 / (2.0 * j);
        CHECK(mean_first_passage(u.rates, k, {ground}) == doctest::Approx(expect).epsilon(1e-12));
    }

    // raising a rate into the absorbing set shortens the passage
    Eigen::MatrixXd M(4, 4);
    M << 0, 1, 0, 0, 0.5, 0, 0.2, 0, 0, 0.3, 0, 0.05, 0, 0, 0, 0;
    const double before = mean_first_passage(chain(M), 0, {3});
    M(2, 3) = 0.5;
    CHECK(mean_first_passage(chain(M), 0, {3}) < before);
    M(2, 3) = 0.0;
    CHECK_THROWS_AS(mean_first_passage(chain(M), 0, {3}), DomainError);
    CHECK(mean_first_passage(chain(M), 3, {3}) == 0.0);
}

TEST_CASE("wells of the untilted hat are the inner Fock states")
{
    const double lambda = 0.0437;
    const auto model = scaling::resonant_model(lambda, 0.0);
    const auto s = fock::solve(model, 60, 60);
    const auto w = classify_wells(s, semiclassics::find_extrema(model));
    for (std::size_t k = 0; k < w.labels.size(); ++k) {
        Eigen::Index n;
        w.basis.col(static_cast<Eigen::Index>(k)).cwiseAbs().maxCoeff(&n);
        const double R2 = lambda * (2 * n + 1);
        CHECK((w.labels[k] == WellLabel::dome) == (R2 < 1));
    }
}

TEST_CASE("no state above the dome top is a dome state")
{
    const auto model = scaling::resonant_model(0.02, 1.0 / 27);
    const auto geo = semiclassics::find_extrema(model);
    const auto w = classify_wells(fock::solve(model, 300, 120), geo);
    const double top = geo.find(semiclassics::ExtremumType::max).g;
    const double gs = geo.saddle_value();
    int dome = 0;
    for (std::size_t k = 0; k < w.labels.size(); ++k)
        if (w.labels[k] == WellLabel::dome) {
            ++dome;
            CHECK(w.g[k] <= top);
            CHECK(w.g[k] > gs);
        }
    // semiclassical count of dome states at this lambda
    const double area = semiclassics::action(semiclassics::orbit(geo, semiclassics::Sheet::dome, gs + 1e-6),
                                             semiclassics::QuadratureOptions{1e-6, 22});
    CHECK(std::abs(dome - area / (2 * M_PI * 0.02)) < 1.0);
}

TEST_CASE("parametric doublets localize into the two wells")
{
    const double lambda = 0.03, mu = -0.1;
    const auto model = scaling::parametric_model(lambda, mu);
    const auto s = fock::solve(model, 200, 40);
    // lowest doublet: opposite parity, splitting far below the level spacing
    CHECK(s.observables[0].parity != s.observables[1].parity);
    CHECK(s.values[1] - s.values[0] < 1e-3 * (s.values[2] - s.values[1]));

    const auto w = classify_wells(s, semiclassics::find_extrema(model));
    const auto left = w.members(WellLabel::left_well), right = w.members(WellLabel::right_well);
    CHECK(left.size() == right.size());
    REQUIRE(right.size() >= 3);
    // localized ground states sit near the well minima
    CHECK(w.q[right[0]] == doctest::Approx(std::sqrt(1 + mu)).epsilon(0.05));
    CHECK(w.q[left[0]] == doctest::Approx(-std::sqrt(1 + mu)).epsilon(0.05));
    for (std::size_t i : right)
        CHECK(w.g[i] < 0.0);
    // the localized basis stays orthonormal
    const Eigen::MatrixXd G = w.basis.transpose() * w.basis;
    CHECK((G - Eigen::MatrixXd::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("zero temperature well distribution has a finite, non-Boltzmann width")
{
    for (auto [kind, field] : {std::pair{DriveKind::resonant, 1.0 / 27}, std::pair{DriveKind::parametric, -0.1}}) {
        const auto model = kind == DriveKind::resonant ? scaling::resonant_model(0.025, field)
                                                       : scaling::parametric_model(0.025, field);
        const auto c = build_chain(model, 0.0);
        const auto& rho = c.distribution.rho;
        REQUIRE(c.well.size() >= 3);
        CHECK(rho[c.well[1]] / rho[c.extremum] > 0);
        CHECK(rho[c.extremum] < 1.0);
        std::vector<double> g, lr;
        for (std::size_t i : c.well) {
            CHECK(rho[i] > 0);
            g.push_back(c.states.g[i]);
            lr.push_back(std::log(rho[i]));
        }
        CHECK(std::abs(c.distribution.rho.sum() - 1.0) < 1e-12);
        CHECK(affine_residual(g, lr) > 10 * std::max(c.distribution.residual, 1e-300));
        CHECK(affine_residual(g, lr) > 1e-3);
    }
}

TEST_CASE("matrix elements of a decay with Floquet index like the Fourier components")
{
    const double lambda = 0.02, beta = 1.0 / 27;
    const auto model = scaling::resonant_model(lambda, beta);
    const auto geo = semiclassics::find_extrema(model);
    const auto w = classify_wells(fock::solve(model, 300, 100), geo);
    const Eigen::MatrixXd A = w.basis.transpose() * fock::build_quadratures(lambda, 300).lowering * w.basis;
    auto rim = w.members(WellLabel::rim);
    std::sort(rim.begin(), rim.end(), [&](std::size_t a, std::size_t b) { return w.g[a] < w.g[b]; });
    const std::size_t nu = rim[15];
    std::vector<double> k, quantum, classical;
    const auto series = semiclassics::fourier_series(semiclassics::orbit(geo, semiclassics::Sheet::rim, w.g[nu]), 8);
    for (int j = 3; j <= 8; ++j) {
        k.push_back(j);
        quantum.push_back(std::log(A(rim[15 + j], nu) * A(rim[15 + j], nu)));
        classical.push_back(std::log(std::norm(series[j].Q)));
    }
    const double sq = fit_slope(k, quantum), sc = fit_slope(k, classical);
    CHECK(sq < 0);
    CHECK(sc < 0);
    CHECK(sq / sc > 0.5);
    CHECK(sq / sc < 2.0);
}

TEST_CASE("escape exponents do not depend on Gamma")
{
    KineticsOptions a, b;
    b.Gamma = 3.5;
    const auto ra = escape_report(DriveKind::resonant, 1.0 / 27, {0.05, 0.033, 0.025}, 0.0, a);
    const auto rb = escape_report(DriveKind::resonant, 1.0 / 27, {0.05, 0.033, 0.025}, 0.0, b);
    CHECK(ra.activation.R_A == doctest::Approx(rb.activation.R_A).epsilon(1e-12));
    CHECK(ra.mfpt == doctest::Approx(3.5 * rb.mfpt).epsilon(1e-6));
}

TEST_CASE("activation beats tunneling at the reference points")
{
    const auto res = escape_report(DriveKind::resonant, 1.0 / 27, {0.05, 0.033, 0.025}, 0.0);
    const auto par = escape_report(DriveKind::parametric, -0.1, {0.05, 0.033, 0.025}, 0.0);
    for (const auto& r : {res, par}) {
        CHECK(r.activation.R_A > 0);
        CHECK(std::isfinite(r.activation.R_A));
        CHECK(r.activation.R_A < r.s_tun);
        CHECK(r.verdict == "activation");
        CHECK_FALSE(r.near_boundary);
        CHECK(r.mfpt > 0);
        CHECK(r.mfpt_lambda == 0.025);
        CHECK(r.activation.points.size() == 3);
        for (const auto& p : r.activation.points)
            CHECK(p.well_states >= 2);
    }
    CHECK(res.well == "dome");
    CHECK(par.well == "right-well");
}

TEST_CASE("the barrier vanishes toward the end of the bistable range")
{
    const auto mid = activation_exponent(DriveKind::resonant, 0.07, {0.02, 0.0143, 0.0111}, 0.0);
    const auto late = activation_exponent(DriveKind::resonant, 0.1, {0.01, 0.0075, 0.006}, 0.0);
    const auto early = activation_exponent(DriveKind::resonant, 1.0 / 27, {0.05, 0.033, 0.025}, 0.0);
    CHECK(late.R_A > 0);
    CHECK(late.R_A < mid.R_A);
    CHECK(mid.R_A < early.R_A);
    CHECK(near_boundary(DriveKind::resonant, 0.14));
    CHECK_FALSE(near_boundary(DriveKind::resonant, 0.1));
    CHECK(near_boundary(DriveKind::parametric, -0.95));
    CHECK_FALSE(near_boundary(DriveKind::parametric, 0.3));
}

TEST_CASE("escape preconditions")
{
    CHECK_THROWS_AS(activation_exponent(DriveKind::resonant, 1.0 / 27, {0.05, 0.03}, 0.0), DomainError);
    CHECK_THROWS_AS(escape_report(DriveKind::resonant, 0.2, {0.05, 0.033, 0.025}, 0.0), DomainError);
    CHECK_THROWS_AS(escape_report(DriveKind::parametric, 1.5, {0.05, 0.033, 0.025}, 0.0), DomainError);
    // a lambda too large to hold two dome states
    CHECK_THROWS_AS(build_chain(scaling::resonant_model(0.2, 1.0 / 27), 0.0), DomainError);
}
