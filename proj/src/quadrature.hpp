#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace quasidrive::detail {

// Adaptive Gauss-Kronrod over [0, len], evaluated on the unit interval so that the
// reported error estimate is in the same units as the result.
template <class F>
double integrate_unit(F f, double len, unsigned max_depth, double* err, double* l1)
{
    auto unit = [&](double x) { return len * f(len * x); };
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(unit, 0.0, 1.0, max_depth, 1e-13, err, l1);
}

} // namespace quasidrive::detail
