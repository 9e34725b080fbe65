#pragma once

#include "quasidrive/scaling.hpp"

#include <array>
#include <string>
#include <vector>

namespace quasidrive::semiclassics {

enum class ExtremumType { max, min, saddle };
enum class Sheet { dome, rim, left_well, right_well };

std::string to_string(ExtremumType t);
std::string to_string(Sheet s);
Sheet parse_sheet(const std::string& text);

struct Extremum {
    double Q = 0.0;
    double P = 0.0;
    double g = 0.0;
    ExtremumType type = ExtremumType::min;
    bool degenerate = false; // zero Hessian eigenvalue
};

struct SurfaceGeometry {
    DriveKind kind = DriveKind::resonant;
    double beta = 0.0;
    double mu = 0.0;
    bool bistable = false;
    std::vector<Extremum> extrema;

    double value(double Q, double P) const;
    std::array<double, 2> gradient(double Q, double P) const;
    std::array<double, 3> hessian(double Q, double P) const; // QQ, QP, PP

    // g on the P=0 axis and its Q-derivative
    double axis_value(double Q) const { return value(Q, 0.0); }
    double axis_slope(double Q) const { return gradient(Q, 0.0)[0]; }

    // throws DomainError when the regime has no such point
    const Extremum& find(ExtremumType t) const;
    // the extremum of the named sheet: dome top, rim bottom, well minimum
    const Extremum& sheet_extremum(Sheet s) const;
    // resonant: g at the saddle; parametric: 0
    double saddle_value() const;

    bool has_sheet(Sheet s) const;
};

SurfaceGeometry find_extrema(DriveKind kind, double field);
SurfaceGeometry find_extrema(const scaling::ScaledModel& model);

} // namespace quasidrive::semiclassics
