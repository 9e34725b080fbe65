#include "quasidrive/geometry.hpp"
#include "quasidrive/errors.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>

namespace quasidrive::semiclassics {

namespace {

double bracketed_root(auto f, double lo, double hi)
{
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0)
        return lo;
    if (fhi == 0.0)
        return hi;
    if ((flo > 0) == (fhi > 0))
        throw NumericError("extremum root not bracketed");
    std::uintmax_t iters = 200;
    auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi,
                                               boost::math::tools::eps_tolerance<double>(), iters);
    return 0.5 * (r.first + r.second);
}

Extremum classify(const SurfaceGeometry& s, double Q, double P)
{
    Extremum e;
    e.Q = Q;
    e.P = P;
    e.g = s.value(Q, P);
    const auto h = s.hessian(Q, P);
    const double det = h[0] * h[2] - h[1] * h[1];
    const double scale = std::max({std::abs(h[0]), std::abs(h[2]), 1.0});
    e.degenerate = std::abs(det) < 1e-12 * scale * scale;
    if (det < 0)
        e.type = ExtremumType::saddle;
    else
        e.type = (h[0] + h[2] > 0) ? ExtremumType::min : ExtremumType::max;
    return e;
}

} // namespace

std::string to_string(ExtremumType t)
{
    switch (t) {
    case ExtremumType::max: return "max";
    case ExtremumType::min: return "min";
    case ExtremumType::saddle: return "saddle";
    }
    return "?";
}

std::string to_string(Sheet s)
{
    switch (s) {
    case Sheet::dome: return "dome";
    case Sheet::rim: return "rim";
    case Sheet::left_well: return "left-well";
    case Sheet::right_well: return "right-well";
    }
    return "?";
}

Sheet parse_sheet(const std::string& text)
{
    if (text == "dome") return Sheet::dome;
    if (text == "rim") return Sheet::rim;
    if (text == "left-well") return Sheet::left_well;
    if (text == "right-well") return Sheet::right_well;
    throw DomainError("unknown sheet '" + text + "'");
}

double SurfaceGeometry::value(double Q, double P) const
{
    const double R2 = Q * Q + P * P;
    if (kind == DriveKind::resonant)
        return 0.25 * (R2 - 1.0) * (R2 - 1.0) - std::sqrt(beta) * Q;
    return 0.25 * R2 * R2 + 0.5 * (1.0 - mu) * P * P - 0.5 * (1.0 + mu) * Q * Q;
}

std::array<double, 2> SurfaceGeometry::gradient(double Q, double P) const
{
    const double R2 = Q * Q + P * P;
    if (kind == DriveKind::resonant)
        return {Q * (R2 - 1.0) - std::sqrt(beta), P * (R2 - 1.0)};
    return {Q * (R2 - 1.0 - mu), P * (R2 + 1.0 - mu)};
}

std::array<double, 3> SurfaceGeometry::hessian(double Q, double P) const
{
    if (kind == DriveKind::resonant)
        return {3 * Q * Q + P * P - 1.0, 2 * Q * P, Q * Q + 3 * P * P - 1.0};
    return {3 * Q * Q + P * P - (1.0 + mu), 2 * Q * P, Q * Q + 3 * P * P + (1.0 - mu)};
}

const Extremum& SurfaceGeometry::find(ExtremumType t) const
{
    for (const auto& e : extrema)
        if (e.type == t)
            return e;
    throw DomainError("surface has no " + to_string(t) + " in this regime");
}

const Extremum& SurfaceGeometry::sheet_extremum(Sheet s) const
{
    if (!has_sheet(s))
        throw DomainError("sheet " + to_string(s) + " does not exist for this model");
    if (s == Sheet::dome)
        return find(ExtremumType::max);
    if (s == Sheet::rim)
        return find(ExtremumType::min);
    for (const auto& e : extrema)
        if (e.type == ExtremumType::min && ((s == Sheet::right_well) == (e.Q > 0)))
            return e;
    throw DomainError("well minimum missing");
}

double SurfaceGeometry::saddle_value() const
{
    if (kind == DriveKind::parametric)
        return 0.0;
    return find(ExtremumType::saddle).g;
}

bool SurfaceGeometry::has_sheet(Sheet s) const
{
    if (kind == DriveKind::resonant) {
        if (s == Sheet::rim)
            return true;
        return s == Sheet::dome && bistable;
    }
    return (s == Sheet::left_well || s == Sheet::right_well) && bistable;
}

SurfaceGeometry find_extrema(DriveKind kind, double field)
{
    SurfaceGeometry s;
    s.kind = kind;
    if (!std::isfinite(field))
        throw DomainError("field parameter must be finite");

    if (kind == DriveKind::resonant) {
        if (field < 0)
            throw DomainError("beta must be nonnegative");
        s.beta = field;
        const double b = std::sqrt(field);
        auto slope = [b](double Q) { return Q * (Q * Q - 1.0) - b; };
        const double knee = -1.0 / std::sqrt(3.0);

        // rim bottom always exists
        const double hi = 2.0 + std::cbrt(b);
        s.extrema.push_back(classify(s, bracketed_root(slope, 1.0, hi), 0.0));

        const double knee_value = slope(knee);
        if (field == 0.0) {
            // untilted hat: the rim is a ring through Q=+-1
            s.extrema.push_back(classify(s, 0.0, 0.0));
            auto sad = classify(s, -1.0, 0.0);
            sad.type = ExtremumType::saddle;
            sad.degenerate = true;
            s.extrema.front().degenerate = true;
            s.extrema.push_back(sad);
            s.bistable = true;
        } else if (knee_value > 0) {
            s.extrema.push_back(classify(s, bracketed_root(slope, knee, 0.0), 0.0));
            s.extrema.push_back(classify(s, bracketed_root(slope, -1.0, knee), 0.0));
            s.bistable = true;
        } else if (knee_value == 0.0 || std::abs(field - scaling::kResonantBetaLimit) < 1e-15) {
            auto merged = classify(s, knee, 0.0);
            merged.type = ExtremumType::saddle;
            merged.degenerate = true;
            s.extrema.push_back(merged);
        }
    } else {
        s.mu = field;
        const double mu = field;
        s.extrema.push_back(classify(s, 0.0, 0.0));
        if (mu > -1.0) {
            const double q = std::sqrt(1.0 + mu);
            s.extrema.push_back(classify(s, -q, 0.0));
            s.extrema.push_back(classify(s, q, 0.0));
        }
        if (mu > 1.0) {
            const double p = std::sqrt(mu - 1.0);
            s.extrema.push_back(classify(s, 0.0, -p));
            s.extrema.push_back(classify(s, 0.0, p));
        }
        if (mu == -1.0 || mu == 1.0)
            s.extrema.front().degenerate = true;
        s.bistable = std::abs(mu) < 1.0;
    }
    return s;
}

SurfaceGeometry find_extrema(const scaling::ScaledModel& model)
{
    return find_extrema(model.kind, model.field());
}

} // namespace quasidrive::semiclassics
