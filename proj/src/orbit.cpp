#include "quasidrive/orbit.hpp"
#include "quasidrive/errors.hpp"
#include "quadrature.hpp"

#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace quasidrive::semiclassics {

namespace {

constexpr double kSaddleGuard = 1e-9;
constexpr double kPointTol = 1e-14;

double axis_root(const SurfaceGeometry& s, double g, double lo, double hi)
{
    auto f = [&](double Q) { return s.axis_value(Q) - g; };
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0)
        return lo;
    if (fhi == 0.0)
        return hi;
    if ((flo > 0) == (fhi > 0))
        throw NumericError("turning point not bracketed in [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + "] at g=" + std::to_string(g));
    std::uintmax_t iters = 200;
    auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi,
                                               boost::math::tools::eps_tolerance<double>(), iters);
    return 0.5 * (r.first + r.second);
}

// walk away from `from` until the axis value exceeds g
double grow_until_above(const SurfaceGeometry& s, double g, double from, double dir)
{
    double step = 0.5;
    double Q = from + dir * step;
    while (s.axis_value(Q) <= g) {
        step *= 2.0;
        Q = from + dir * step;
        if (step > 1e6)
            throw NumericError("orbit does not close");
    }
    return Q;
}

Orbit point_orbit(const SurfaceGeometry& s, Sheet sheet, const Extremum& e)
{
    Orbit o;
    o.geometry = s;
    o.sheet = sheet;
    o.g = e.g;
    o.shape = OrbitShape::point;
    o.centre = e.Q;
    o.turning_points = {e.Q};
    return o;
}

double point_period(const Orbit& o)
{
    const auto h = o.geometry.hessian(o.centre, 0.0);
    const double det = h[0] * h[2] - h[1] * h[1];
    if (det <= 0)
        throw DomainError("degenerate orbit at a non-elliptic point");
    return 2.0 * std::numbers::pi / std::sqrt(det);
}

void check_part(double part, double err, double l1, const Orbit& o, const QuadratureOptions& opt)
{
    if (!std::isfinite(part) || err > opt.tol * std::max(l1, 1e-300) + 1e-14)
        throw NumericError("orbit quadrature did not converge at g=" + std::to_string(o.g));
}

// Horn arcs in v = sqrt(g + bQ): Q = Q_br + v^2/b makes both branches polynomial in v.
template <class Fn>
double integrate_horn_arc(const Orbit& o, const Arc& arc, Fn fn, const QuadratureOptions& opt)
{
    const double b = std::sqrt(o.geometry.beta);
    const double qbr = arc.a, qe = arc.b;
    const double ve = std::sqrt(b * (qe - qbr));
    const double br = arc.branch;
    double err = 0.0, l1 = 0.0;

    auto near_horn = [&](double v) {
        const double Q = qbr + v * v / b;
        const ArcSample s{Q, 1.0 - Q * Q + br * 2.0 * v, 2.0 * v};
        return fn(s) * 2.0 * v / b;
    };
    double total = detail::integrate_unit(near_horn, 0.5 * ve, opt.max_depth, &err, &l1);
    check_part(total, err, l1, o, opt);

    auto near_turn = [&](double t) {
        const double v = ve - t * t;
        const double Q = qbr + v * v / b;
        // P^2(v) - P^2(ve), with P^2(ve) = 0
        const double p2 = -t * t * (-(v + ve) * (Q + qe) / b + br * 2.0);
        const ArcSample s{Q, p2, 2.0 * v};
        return fn(s) * 2.0 * v / b * 2.0 * t;
    };
    const double part = detail::integrate_unit(near_turn, std::sqrt(0.5 * ve), opt.max_depth, &err, &l1);
    check_part(part, err, l1, o, opt);
    return total + part;
}

template <class Fn>
double integrate_arc(const Orbit& o, const Arc& arc, Fn fn, const QuadratureOptions& opt)
{
    if (arc.ka == EndKind::horn)
        return integrate_horn_arc(o, arc, fn, opt);
    const double m = 0.5 * (arc.a + arc.b);
    double total = 0.0;
    for (bool at_a : {true, false}) {
        const double len = std::sqrt(at_a ? m - arc.a : arc.b - m);
        auto f = [&](double u) {
            const ArcSample s = sample_arc(o, arc, at_a, u * u);
            return 2.0 * u * fn(s);
        };
        double err = 0.0, l1 = 0.0;
        const double part = detail::integrate_unit(f, len, opt.max_depth, &err, &l1);
        check_part(part, err, l1, o, opt);
        total += part;
    }
    return total;
}

} // namespace

std::string to_string(OrbitShape s)
{
    switch (s) {
    case OrbitShape::point: return "point";
    case OrbitShape::oval: return "oval";
    case OrbitShape::crescent: return "crescent";
    case OrbitShape::outer: return "outer";
    }
    return "?";
}

double Orbit::p2(int branch, double Q) const
{
    if (geometry.kind == DriveKind::resonant) {
        const double w = std::max(0.0, g + std::sqrt(geometry.beta) * Q);
        return 1.0 - Q * Q + branch * 2.0 * std::sqrt(w);
    }
    const double mu = geometry.mu;
    const double D = std::max(0.0, 4 * Q * Q + (1 - mu) * (1 - mu) + 4 * g);
    return -(Q * Q + 1 - mu) + branch * std::sqrt(D);
}

double Orbit::speed_factor(int, double Q) const
{
    if (geometry.kind == DriveKind::resonant)
        return 2.0 * std::sqrt(std::max(0.0, g + std::sqrt(geometry.beta) * Q));
    const double mu = geometry.mu;
    return std::sqrt(std::max(0.0, 4 * Q * Q + (1 - mu) * (1 - mu) + 4 * g));
}

ArcSample sample_arc(const Orbit& o, const Arc& arc, bool at_a, double offset)
{
    const double end = at_a ? arc.a : arc.b;
    const double far = at_a ? arc.b : arc.a;
    const EndKind kind = at_a ? arc.ka : arc.kb;
    const double delta = at_a ? offset : -offset;
    const double Q = end + delta;
    ArcSample s{Q, 0.0, 0.0};

    if (o.geometry.kind == DriveKind::resonant) {
        const double b = std::sqrt(o.geometry.beta);
        const double w = kind == EndKind::horn ? b * offset : std::max(0.0, o.g + b * Q);
        const double root = std::sqrt(w);
        s.speed = 2.0 * root;
        if (kind == EndKind::turning) {
            // P+^2 P-^2 = (Q^2-1)^2 - 4bQ - 4g, factored through the root at `end`
            const double bracket = (Q + end) * (Q * Q + end * end - 2.0) - 4.0 * b;
            const double other = 1.0 - Q * Q - arc.branch * 2.0 * root;
            const double direct = 1.0 - Q * Q + arc.branch * 2.0 * root;
            // the other branch may vanish inside the arc, where the quotient is 0/0
            s.p2 = std::abs(other) > std::abs(direct) ? delta * bracket / other : direct;
        } else {
            s.p2 = 1.0 - Q * Q + arc.branch * 2.0 * root;
        }
        return s;
    }

    const double mu = o.geometry.mu;
    const double D = std::max(0.0, 4 * Q * Q + (1 - mu) * (1 - mu) + 4 * o.g);
    s.speed = std::sqrt(D);
    // only the + branch carries well orbits; P+^2 P-^2 = (Q^2-a^2)(Q^2-b^2)
    const double lower = -(Q * Q + 1 - mu) - std::sqrt(D);
    s.p2 = delta * (Q + end) * (Q - far) * (Q + far) / lower;
    return s;
}

Orbit orbit(const SurfaceGeometry& s, Sheet sheet, double g)
{
    if (!std::isfinite(g))
        throw DomainError("orbit level must be finite");
    if (!s.has_sheet(sheet))
        throw DomainError("sheet " + to_string(sheet) + " does not exist for this model");

    Orbit o;
    o.geometry = s;
    o.sheet = sheet;
    o.g = g;
    const Extremum& ext = s.sheet_extremum(sheet);
    o.centre = ext.Q;

    if (s.kind == DriveKind::parametric) {
        const double c = 1.0 + s.mu;
        if (g < ext.g - kPointTol)
            throw DomainError("g below the well minimum");
        if (g >= -kSaddleGuard)
            throw DomainError(g >= kSaddleGuard ? "g above the saddle: orbits leave the well"
                                                : "g within 1e-9 of the saddle: branch selection ambiguous");
        if (g - ext.g <= kPointTol)
            return point_orbit(s, sheet, ext);
        const double root = std::sqrt(std::max(0.0, c * c + 4 * g));
        const double q2 = std::sqrt(c + root);
        const double q1 = std::sqrt(-4 * g / (c + root));
        Arc arc;
        if (sheet == Sheet::right_well) {
            arc.a = q1;
            arc.b = q2;
        } else {
            arc.a = -q2;
            arc.b = -q1;
        }
        o.arcs = {arc};
        o.turning_points = {arc.a, arc.b};
        o.shape = OrbitShape::oval;
        return o;
    }

    const double b = std::sqrt(s.beta);
    const bool bistable = s.bistable;
    const double gs = bistable ? s.saddle_value() : -INFINITY;

    if (sheet == Sheet::dome) {
        const Extremum& top = ext;
        const Extremum& sad = s.find(ExtremumType::saddle);
        if (g > top.g + kPointTol)
            throw DomainError("g above the dome top");
        if (g < gs)
            throw DomainError("g below the saddle: no dome orbit");
        if (g - gs < kSaddleGuard)
            throw DomainError("g within 1e-9 of the saddle: branch selection ambiguous");
        if (top.g - g <= kPointTol)
            return point_orbit(s, sheet, top);
        const double qa = axis_root(s, g, sad.Q, top.Q);
        const double qb = axis_root(s, g, top.Q, 1.0);
        o.arcs = {Arc{-1, qa, qb, EndKind::turning, EndKind::turning, +1}};
        o.turning_points = {qa, qb};
        o.shape = OrbitShape::oval;
        return o;
    }

    // rim
    if (g < ext.g - kPointTol)
        throw DomainError("g below the rim bottom");
    if (bistable && std::abs(g - gs) < kSaddleGuard)
        throw DomainError("g within 1e-9 of the saddle: branch selection ambiguous");
    if (g - ext.g <= kPointTol)
        return point_orbit(s, sheet, ext);

    const double qR = axis_root(s, g, ext.Q, grow_until_above(s, g, ext.Q, +1.0));
    if (b > 0 && g <= -b) {
        const double Qbr = -g / b;
        const double qL = axis_root(s, g, std::max(1.0, Qbr), ext.Q);
        o.arcs = {Arc{+1, qL, qR, EndKind::turning, EndKind::turning, +1}};
        o.turning_points = {qL, qR};
        o.shape = OrbitShape::oval;
    } else if (b > 0 && g < b) {
        // the rim curve folds over at w=0 and returns on the inner branch
        const double Qbr = -g / b;
        double qx;
        if (bistable && g > gs)
            qx = axis_root(s, g, Qbr, s.find(ExtremumType::saddle).Q);
        else if (bistable)
            qx = axis_root(s, g, std::max(Qbr, s.find(ExtremumType::max).Q), 1.0);
        else
            qx = axis_root(s, g, Qbr, 1.0);
        o.arcs = {Arc{+1, Qbr, qR, EndKind::horn, EndKind::turning, +1},
                  Arc{-1, Qbr, qx, EndKind::horn, EndKind::turning, -1}};
        o.turning_points = {qx, qR};
        o.shape = (bistable && g > gs) ? OrbitShape::outer : OrbitShape::crescent;
    } else {
        double lo = grow_until_above(s, g, -1.0, -1.0);
        if (b > 0)
            lo = std::max(lo, -g / b);
        const double qL = axis_root(s, g, lo, -1.0);
        o.arcs = {Arc{+1, qL, qR, EndKind::turning, EndKind::turning, +1}};
        o.turning_points = {qL, qR};
        o.shape = OrbitShape::outer;
    }
    return o;
}

double action(const Orbit& o, const QuadratureOptions& opt)
{
    if (o.shape == OrbitShape::point)
        return 0.0;
    double S = 0.0;
    for (const auto& arc : o.arcs)
        S += arc.sign * 2.0 * integrate_arc(o, arc, [](const ArcSample& s) {
                 return std::sqrt(std::max(0.0, s.p2));
             }, opt);
    return S;
}

double period(const Orbit& o, const QuadratureOptions& opt)
{
    if (o.shape == OrbitShape::point)
        return point_period(o);
    double tau = 0.0;
    for (const auto& arc : o.arcs)
        tau += 2.0 * integrate_arc(o, arc, [](const ArcSample& s) {
                   return s.p2 > 0 ? 1.0 / (std::sqrt(s.p2) * s.speed) : 0.0;
               }, opt);
    return tau;
}

double orbit_average_Q(const Orbit& o, const QuadratureOptions& opt)
{
    if (o.shape == OrbitShape::point)
        return o.centre;
    double tau = 0.0, moment = 0.0;
    for (const auto& arc : o.arcs) {
        tau += 2.0 * integrate_arc(o, arc, [](const ArcSample& s) {
                   return s.p2 > 0 ? 1.0 / (std::sqrt(s.p2) * s.speed) : 0.0;
               }, opt);
        moment += 2.0 * integrate_arc(o, arc, [](const ArcSample& s) {
                      return s.p2 > 0 ? s.Q / (std::sqrt(s.p2) * s.speed) : 0.0;
                  }, opt);
    }
    return moment / tau;
}

std::vector<FourierComponent> fourier_series(const Orbit& o, int kmax, const FourierOptions& opt)
{
    if (kmax < 0)
        throw DomainError("kmax must be nonnegative");
    std::vector<FourierComponent> out(kmax + 1);
    if (o.shape == OrbitShape::point) {
        out[0].Q = o.centre;
        return out;
    }
    namespace ode = boost::numeric::odeint;
    using State = std::array<double, 2>;
    const double tau = period(o);
    const SurfaceGeometry& geo = o.geometry;
    auto rhs = [&geo](const State& x, State& dx, double) {
        const auto grad = geo.gradient(x[0], x[1]);
        dx[0] = grad[1];
        dx[1] = -grad[0];
    };
    const std::size_t M = std::max<std::size_t>(opt.samples, 4 * (kmax + 1));
    std::vector<double> times(M);
    for (std::size_t j = 0; j < M; ++j)
        times[j] = tau * static_cast<double>(j) / static_cast<double>(M);
    std::vector<State> path;
    path.reserve(M);
    State x{o.turning_points.back(), 0.0};
    auto stepper = ode::make_dense_output(opt.abs_tol, opt.rel_tol, ode::runge_kutta_dopri5<State>());
    ode::integrate_times(stepper, rhs, x, times.begin(), times.end(), tau / (4.0 * M),
                         [&path](const State& s, double) { path.push_back(s); });
    if (path.size() != M)
        throw NumericError("orbit traversal incomplete");
    for (int k = 0; k <= kmax; ++k) {
        std::complex<double> q = 0.0, p = 0.0;
        for (std::size_t j = 0; j < M; ++j) {
            const double phase = -2.0 * std::numbers::pi * k * static_cast<double>(j) / static_cast<double>(M);
            const std::complex<double> e(std::cos(phase), std::sin(phase));
            q += path[j][0] * e;
            p += path[j][1] * e;
        }
        out[k].Q = q / static_cast<double>(M);
        out[k].P = p / static_cast<double>(M);
    }
    return out;
}

FourierComponent fourier_components(const Orbit& o, int k, const FourierOptions& opt)
{
    const auto series = fourier_series(o, std::abs(k), opt);
    FourierComponent c = series[std::abs(k)];
    if (k < 0)
        c = {std::conj(c.Q), std::conj(c.P)};
    return c;
}

} // namespace quasidrive::semiclassics
