#include "quasidrive/kinetics.hpp"
#include "quasidrive/errors.hpp"

#include <cmath>

namespace quasidrive::kinetics {

std::string to_string(WellLabel l)
{
    switch (l) {
    case WellLabel::dome: return "dome";
    case WellLabel::rim: return "rim";
    case WellLabel::left_well: return "left-well";
    case WellLabel::right_well: return "right-well";
    case WellLabel::outer: return "outer";
    case WellLabel::ambiguous: return "ambiguous";
    }
    return "?";
}

std::vector<std::size_t> WellStates::members(WellLabel l) const
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == l)
            out.push_back(i);
    return out;
}

WellLabel escape_well(DriveKind kind)
{
    return kind == DriveKind::resonant ? WellLabel::dome : WellLabel::right_well;
}

namespace {

struct Moments {
    double q;
    double r2;
    double odd;
};

Moments moments(const Eigen::VectorXd& v, double lambda)
{
    Moments m{0.0, 0.0, 0.0};
    const Eigen::Index n = v.size();
    for (Eigen::Index i = 0; i < n; ++i) {
        m.r2 += lambda * (2.0 * i + 1.0) * v[i] * v[i];
        if (i + 1 < n)
            m.q += std::sqrt(i + 1.0) * v[i] * v[i + 1];
        if (i % 2)
            m.odd += v[i] * v[i];
    }
    m.q *= std::sqrt(2.0 * lambda);
    return m;
}

void push(WellStates& w, const Eigen::VectorXd& v, double g, WellLabel label, const Moments& m)
{
    const Eigen::Index k = w.basis.cols();
    w.basis.conservativeResize(v.size(), k + 1);
    w.basis.col(k) = v;
    w.g.conservativeResize(k + 1);
    w.g[k] = g;
    w.labels.push_back(label);
    w.q.push_back(m.q);
    w.r2.push_back(m.r2);
}

// <a|X|b> for X = Q^2+P^2 (radial) or X = Q
double element(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double lambda, bool radial)
{
    double sum = 0.0;
    const Eigen::Index n = a.size();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (radial)
            sum += lambda * (2.0 * i + 1.0) * a[i] * b[i];
        else if (i + 1 < n)
            sum += std::sqrt(i + 1.0) * (a[i] * b[i + 1] + a[i + 1] * b[i]);
    }
    return radial ? sum : sum * std::sqrt(lambda / 2.0);
}

} // namespace

WellStates classify_wells(const fock::Spectrum& spectrum, const SurfaceGeometry& geometry, const WellOptions& opt)
{
    if (!geometry.bistable)
        throw DomainError("classify_wells: not in the bistable regime");
    const double lambda = spectrum.lambda;
    if (!(lambda > 0))
        throw DomainError("classify_wells: spectrum carries no lambda (not annotated)");
    const Eigen::Index count = spectrum.vectors.cols();
    const double gs = geometry.saddle_value();
    const bool resonant = geometry.kind == DriveKind::resonant;
    const double g_top = resonant ? geometry.find(semiclassics::ExtremumType::max).g : gs;
    const double ring = resonant ? std::pow(geometry.find(semiclassics::ExtremumType::saddle).Q, 2) : 0.0;

    auto label = [&](double g, const Moments& m) {
        if (std::abs(g - gs) < opt.saddle_tol)
            return WellLabel::ambiguous;
        if (resonant)
            return g > gs && g <= g_top && m.r2 < ring ? WellLabel::dome : WellLabel::rim;
        if (g > gs)
            return WellLabel::outer;
        return m.q > 0 ? WellLabel::right_well : WellLabel::left_well;
    };
    // quasienergies where states of the two wells coexist and hybridize into doublets
    auto doublet_band = [&](double g) {
        return resonant ? g > gs + opt.saddle_tol && g <= g_top : g < gs - opt.saddle_tol;
    };
    auto gap = [&](Eigen::Index a, Eigen::Index b) {
        return (a < 0 || b >= count) ? INFINITY : spectrum.values[b] - spectrum.values[a];
    };

    WellStates w;
    w.basis.resize(spectrum.vectors.rows(), 0);
    for (Eigen::Index k = 0; k < count;) {
        const Eigen::VectorXd v = spectrum.vectors.col(k);
        const double g = spectrum.values[k];
        const Moments m = moments(v, lambda);
        if (k + 1 < count && doublet_band(g) && doublet_band(spectrum.values[k + 1])) {
            const Eigen::VectorXd u = spectrum.vectors.col(k + 1);
            const Moments mu = moments(u, lambda);
            const bool parity_ok = resonant || (m.odd < 0.5) != (mu.odd < 0.5);
            const double split = gap(k, k + 1);
            const double neighbour = std::min(gap(k - 1, k), gap(k + 1, k + 2));
            if (parity_ok && split <= opt.doublet_ratio * neighbour) {
                // localize by diagonalizing R^2 (resonant) or Q (parametric) inside the pair
                Eigen::Matrix2d X;
                X(0, 0) = element(v, v, lambda, resonant);
                X(1, 1) = element(u, u, lambda, resonant);
                X(0, 1) = X(1, 0) = element(v, u, lambda, resonant);
                Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(X);
                for (int j = 0; j < 2; ++j) {
                    const double c0 = es.eigenvectors()(0, j), c1 = es.eigenvectors()(1, j);
                    const Eigen::VectorXd loc = c0 * v + c1 * u;
                    const double gl = c0 * c0 * g + c1 * c1 * spectrum.values[k + 1];
                    const Moments ml = moments(loc, lambda);
                    push(w, loc, gl, label(gl, ml), ml);
                }
                k += 2;
                continue;
            }
        }
        const WellLabel l = !resonant && doublet_band(g) ? WellLabel::ambiguous : label(g, m);
        push(w, v, g, l, m);
        ++k;
    }
    return w;
}

} // namespace quasidrive::kinetics
