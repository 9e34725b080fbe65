#pragma once

#include "quasidrive/geometry.hpp"

#include <complex>
#include <vector>

namespace quasidrive::semiclassics {

enum class EndKind { turning, horn };

// One momentum branch over [a, b], mirrored into P<0.
// sign is +1 where the arc bounds the enclosed region from above, -1 from below.
struct Arc {
    int branch = +1;
    double a = 0.0;
    double b = 0.0;
    EndKind ka = EndKind::turning;
    EndKind kb = EndKind::turning;
    int sign = +1;
};

enum class OrbitShape { point, oval, crescent, outer };

std::string to_string(OrbitShape s);

struct Orbit {
    SurfaceGeometry geometry;
    Sheet sheet = Sheet::rim;
    double g = 0.0;
    OrbitShape shape = OrbitShape::oval;
    std::vector<Arc> arcs;
    std::vector<double> turning_points; // P=0 crossings, ascending
    double centre = 0.0;                // Q of the sheet extremum (point orbits)

    // closed-form momentum branch; resonant: 1-Q^2 +- 2 sqrt(g + sqrt(beta) Q)
    double p2(int branch, double Q) const;
    // |dg/dP| / |P| on the branch
    double speed_factor(int branch, double Q) const;
};

// Evaluation near an arc endpoint without cancellation: Q = end + offset.
struct ArcSample {
    double Q;
    double p2;
    double speed; // |dg/dP| / |P|
};
ArcSample sample_arc(const Orbit& o, const Arc& arc, bool at_a, double offset);

Orbit orbit(const SurfaceGeometry& geometry, Sheet sheet, double g);

struct QuadratureOptions {
    double tol = 1e-10;
    unsigned max_depth = 18;
};

double action(const Orbit& o, const QuadratureOptions& opt = {});
double period(const Orbit& o, const QuadratureOptions& opt = {});
double orbit_average_Q(const Orbit& o, const QuadratureOptions& opt = {});

struct FourierComponent {
    std::complex<double> Q;
    std::complex<double> P;
};

struct FourierOptions {
    std::size_t samples = 512;
    double rel_tol = 1e-12;
    double abs_tol = 1e-13;
};

// k-th harmonic over one period, starting at the rightmost turning point
FourierComponent fourier_components(const Orbit& o, int k, const FourierOptions& opt = {});
std::vector<FourierComponent> fourier_series(const Orbit& o, int kmax, const FourierOptions& opt = {});

} // namespace quasidrive::semiclassics
