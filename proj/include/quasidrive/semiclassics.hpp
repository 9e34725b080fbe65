#pragma once

#include "quasidrive/geometry.hpp"
#include "quasidrive/orbit.hpp"

#include <iosfwd>
#include <utility>
#include <vector>

namespace quasidrive::semiclassics {

// g-interval over which the sheet carries quantizable orbits (extremum first).
// The rim of the untilted hat has no saddle bound and extends upward.
std::pair<double, double> sheet_range(const SurfaceGeometry& geometry, Sheet sheet);

// S(g) = 2 pi lambda (n + 1/2)
double bohr_sommerfeld(double lambda, const SurfaceGeometry& geometry, Sheet sheet, int n);
std::vector<double> bohr_sommerfeld_levels(double lambda, const SurfaceGeometry& geometry, Sheet sheet,
                                           int count);

// Exponent of exp(-s/lambda): 2 * integral of |Im P| across the forbidden real-Q segment.
double tunneling_exponent(const SurfaceGeometry& geometry, double g, const QuadratureOptions& opt = {});
// the same at the quasienergy of the metastable extremum (dome top or well bottom)
double tunneling_exponent_at_extremum(const SurfaceGeometry& geometry);

// forbidden segment used by tunneling_exponent
std::pair<double, double> forbidden_segment(const SurfaceGeometry& geometry, double g);

struct OrbitRow {
    double g = 0.0;
    Sheet sheet = Sheet::rim;
    double S = 0.0;
    double tau = 0.0;
    double qbar = 0.0;
    std::vector<double> harmonics; // |Q_1| .. |Q_kmax|
    double s_tun = 0.0;            // NaN where no forbidden segment
};

std::vector<OrbitRow> tabulate(const SurfaceGeometry& geometry, Sheet sheet, const std::vector<double>& levels,
                               int kmax, unsigned threads = 1);

void write_csv(std::ostream& os, const std::vector<OrbitRow>& rows, int kmax);

} // namespace quasidrive::semiclassics
