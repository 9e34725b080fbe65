#include "quasidrive/semiclassics.hpp"
#include "quasidrive/errors.hpp"
#include "quadrature.hpp"

#include <boost/math/tools/roots.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <ostream>
#include <thread>

namespace quasidrive::semiclassics {

namespace {

constexpr double kEdge = 2e-9; // stays clear of the 1e-9 saddle guard in orbit()

double solve_root(auto f, double lo, double hi, double flo, double fhi, const char* what)
{
    if (flo == 0.0)
        return lo;
    if (fhi == 0.0)
        return hi;
    if ((flo > 0) == (fhi > 0))
        throw NumericError(std::string(what) + ": root not bracketed");
    std::uintmax_t iters = 300;
    auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi,
                                               boost::math::tools::eps_tolerance<double>(), iters);
    return 0.5 * (r.first + r.second);
}

double solve_root(auto f, double lo, double hi, const char* what)
{
    return solve_root(f, lo, hi, f(lo), f(hi), what);
}

double axis_root(const SurfaceGeometry& s, double g, double lo, double hi)
{
    return solve_root([&](double Q) { return s.axis_value(Q) - g; }, lo, hi, "forbidden segment");
}

// integral over [a,b] with u^2 substitution at both ends; fn(Q, offset, at_a)
template <class Fn>
double integrate_both_ends(double a, double b, Fn fn, const QuadratureOptions& opt)
{
    if (b <= a)
        return 0.0;
    const double m = 0.5 * (a + b);
    double total = 0.0;
    for (bool at_a : {true, false}) {
        const double len = std::sqrt(at_a ? m - a : b - m);
        auto f = [&](double u) {
            const double off = u * u;
            return 2.0 * u * fn(at_a ? a + off : b - off, off, at_a);
        };
        double err = 0.0, l1 = 0.0;
        const double part = detail::integrate_unit(f, len, opt.max_depth, &err, &l1);
        if (!std::isfinite(part) || err > opt.tol * std::max(l1, 1e-300) + 1e-14)
            throw NumericError("tunneling quadrature did not converge");
        total += part;
    }
    return total;
}

double resonant_tunneling(const SurfaceGeometry& s, double g, const QuadratureOptions& opt)
{
    const double b = std::sqrt(s.beta);
    const auto [q_out, q_in] = forbidden_segment(s, g);
    // inner branch is negative throughout; it vanishes at q_in, and at q_out when g < sqrt(beta)
    const bool out_on_inner = g < b;
    auto im_p = [&](double Q, double off, bool at_a) {
        const double w = std::max(0.0, g + b * Q);
        const double plus = 1.0 - Q * Q + 2.0 * std::sqrt(w);
        double minus;
        if (!at_a || out_on_inner) {
            const double end = at_a ? q_out : q_in;
            const double delta = at_a ? off : -off;
            minus = delta * ((Q + end) * (Q * Q + end * end - 2.0) - 4.0 * b) / plus;
        } else {
            minus = 1.0 - Q * Q - 2.0 * std::sqrt(w);
        }
        return std::sqrt(std::max(0.0, -minus));
    };
    return 2.0 * integrate_both_ends(q_out, q_in, im_p, opt);
}

double parametric_tunneling(const SurfaceGeometry& s, double g, const QuadratureOptions& opt)
{
    const double mu = s.mu;
    const double c = 1.0 + mu;
    const double root = std::sqrt(std::max(0.0, c * c + 4 * g));
    const double q2sq = c + root;
    const double q1sq = -4 * g / q2sq;
    const double q1 = std::sqrt(q1sq);
    const double d0 = (1 - mu) * (1 - mu) + 4 * g;
    // below QD the two momentum branches are complex conjugates
    const double QD = d0 < 0 ? std::sqrt(-d0 / 4.0) : 0.0;

    auto im_p = [&](double Q, double, bool) {
        const double D = 4 * Q * Q + d0;
        const double lin = Q * Q + 1 - mu;
        if (D < 0) {
            const double modulus = std::sqrt(lin * lin - D);
            return std::sqrt(std::max(0.0, 0.5 * (modulus + lin)));
        }
        const double upper = (Q - q1) * (Q + q1) * (Q * Q - q2sq) / (-lin - std::sqrt(D));
        return std::sqrt(std::max(0.0, -upper));
    };
    double half = 0.0;
    if (QD > 0 && QD < q1) {
        half += integrate_both_ends(0.0, QD, im_p, opt);
        half += integrate_both_ends(QD, q1, im_p, opt);
    } else {
        half = integrate_both_ends(0.0, q1, im_p, opt);
    }
    return 4.0 * half;
}

} // namespace

std::pair<double, double> sheet_range(const SurfaceGeometry& s, Sheet sheet)
{
    const Extremum& ext = s.sheet_extremum(sheet);
    if (s.kind == DriveKind::parametric)
        return {ext.g, 0.0};
    if (sheet == Sheet::dome)
        return {ext.g, s.saddle_value()};
    if (s.bistable && s.beta > 0)
        return {ext.g, s.saddle_value()};
    return {ext.g, std::numeric_limits<double>::infinity()};
}

double bohr_sommerfeld(double lambda, const SurfaceGeometry& s, Sheet sheet, int n)
{
    if (!(lambda > 0))
        throw DomainError("lambda must be positive");
    if (n < 0)
        throw DomainError("quantum number must be nonnegative");
    const double target = 2.0 * std::numbers::pi * lambda * (n + 0.5);
    const auto [g_ext, g_sad] = sheet_range(s, sheet);
    const double dir = g_sad > g_ext ? 1.0 : -1.0;
    auto S = [&](double g) { return action(orbit(s, sheet, g)); };

    double lo = g_ext;
    double hi;
    double S_lo = 0.0, S_hi;
    if (std::isinf(g_sad)) {
        // untilted rim: ring at g_ext is also the saddle
        lo = g_ext + kEdge;
        S_lo = S(lo);
        if (S_lo > target)
            throw DomainError("state " + std::to_string(n) + " lies below the rim bottom (on the dome)");
        double step = 0.25;
        hi = g_ext + step;
        while ((S_hi = S(hi)) < target) {
            step *= 2.0;
            hi = g_ext + step;
        }
    } else {
        // the orbit pinches at the saddle; a coarse action suffices for the fit test
        hi = g_sad - dir * kEdge;
        S_hi = action(orbit(s, sheet, hi), QuadratureOptions{1e-6, 22});
        if (S_hi < target)
            throw DomainError("state " + std::to_string(n) + " on " + to_string(sheet) +
                              " is above the saddle: it does not fit on the sheet");
    }
    auto f = [&](double g) { return S(g) - target; };
    if (lo < hi)
        return solve_root(f, lo, hi, S_lo - target, S_hi - target, "Bohr-Sommerfeld");
    return solve_root(f, hi, lo, S_hi - target, S_lo - target, "Bohr-Sommerfeld");
}

std::vector<double> bohr_sommerfeld_levels(double lambda, const SurfaceGeometry& s, Sheet sheet, int count)
{
    std::vector<double> out;
    for (int n = 0; n < count; ++n)
        out.push_back(bohr_sommerfeld(lambda, s, sheet, n));
    return out;
}

std::pair<double, double> forbidden_segment(const SurfaceGeometry& s, double g)
{
    if (!s.bistable)
        throw DomainError("no forbidden segment outside the bistable regime");
    if (s.kind == DriveKind::parametric) {
        const Extremum& well = s.sheet_extremum(Sheet::right_well);
        if (g >= 0.0)
            throw DomainError("no forbidden segment: g above the saddle");
        if (g < well.g - 1e-14)
            throw DomainError("g below the well minimum");
        const double c = 1.0 + s.mu;
        const double q1 = std::sqrt(-4 * g / (c + std::sqrt(std::max(0.0, c * c + 4 * g))));
        return {-q1, q1};
    }
    const Extremum& top = s.find(ExtremumType::max);
    const Extremum& sad = s.find(ExtremumType::saddle);
    if (g <= sad.g)
        throw DomainError("no forbidden segment: g below the saddle");
    if (g > top.g + 1e-14)
        throw DomainError("g above the dome top");
    const double b = std::sqrt(s.beta);
    const double q_in = g >= top.g ? top.Q : axis_root(s, g, sad.Q, top.Q);
    double q_out;
    if (g < b) {
        q_out = axis_root(s, g, -g / b, sad.Q);
    } else {
        double lo = -2.0;
        while (s.axis_value(lo) <= g)
            lo *= 2.0;
        if (b > 0)
            lo = std::max(lo, -g / b);
        q_out = axis_root(s, g, lo, -1.0);
    }
    return {q_out, q_in};
}

double tunneling_exponent(const SurfaceGeometry& s, double g, const QuadratureOptions& opt)
{
    if (s.kind == DriveKind::parametric) {
        forbidden_segment(s, g);
        return parametric_tunneling(s, g, opt);
    }
    return resonant_tunneling(s, g, opt);
}

double tunneling_exponent_at_extremum(const SurfaceGeometry& s)
{
    const Sheet sheet = s.kind == DriveKind::resonant ? Sheet::dome : Sheet::right_well;
    return tunneling_exponent(s, s.sheet_extremum(sheet).g);
}

std::vector<OrbitRow> tabulate(const SurfaceGeometry& s, Sheet sheet, const std::vector<double>& levels, int kmax,
                               unsigned threads)
{
    std::vector<OrbitRow> rows(levels.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < levels.size(); i = next++) {
            try {
                OrbitRow& r = rows[i];
                r.g = levels[i];
                r.sheet = sheet;
                const Orbit o = orbit(s, sheet, r.g);
                r.S = action(o);
                r.tau = period(o);
                r.qbar = orbit_average_Q(o);
                if (kmax > 0) {
                    const auto series = fourier_series(o, kmax);
                    for (int k = 1; k <= kmax; ++k)
                        r.harmonics.push_back(std::abs(series[k].Q));
                }
                try {
                    r.s_tun = tunneling_exponent(s, r.g);
                } catch (const DomainError&) {
                    r.s_tun = std::numeric_limits<double>::quiet_NaN();
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(levels.size())));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < n; ++t)
            pool.emplace_back(worker);
        for (auto& th : pool)
            th.join();
    }
    if (failure)
        std::rethrow_exception(failure);
    return rows;
}

void write_csv(std::ostream& os, const std::vector<OrbitRow>& rows, int kmax)
{
    char buf[64];
    auto num = [&buf](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    os << "g,sheet,S,tau,qbar";
    for (int k = 1; k <= kmax; ++k)
        os << ",abs_Q" << k;
    os << ",s_tun\n";
    for (const auto& r : rows) {
        os << num(r.g) << ',' << to_string(r.sheet) << ',' << num(r.S) << ',' << num(r.tau) << ','
           << num(r.qbar);
        for (int k = 0; k < kmax; ++k)
            os << ',' << (k < static_cast<int>(r.harmonics.size()) ? num(r.harmonics[k]) : num(NAN));
        os << ',' << num(r.s_tun) << '\n';
    }
}

} // namespace quasidrive::semiclassics
