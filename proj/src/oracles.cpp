#include "geomhom/oracles.hpp"

#include <cmath>
#include <limits>

namespace geomhom {

double lambert_w(double z) {
    if (z < 0) throw InvalidInput("lambert_w: out of supported branch (z < 0)");
    if (z == 0) return 0.0;
    if (!std::isfinite(z)) throw InvalidInput("lambert_w: argument not finite");
    double w = std::log1p(z);
    for (int it = 0; it < 50; ++it) {
        const double ew = std::exp(w);
        const double f = w * ew - z;
        if (std::fabs(f) <= 1e-13 * (1.0 + z)) break;
        const double fp = ew * (1.0 + w);
        const double fpp = ew * (2.0 + w);
        const double denom = fp - 0.5 * f * fpp / fp;
        w -= f / denom;
    }
    if (std::fabs(w * std::exp(w) - z) > 1e-12 * (1.0 + z))
        throw NumericalFailure("lambert_w: Halley iteration did not meet residual target");
    return w;
}

double lambert_w_derivative(double z) {
    if (z <= 0) throw InvalidInput("lambert_w_derivative: needs z > 0");
    const double w = lambert_w(z);
    return w / (z * (1.0 + w));
}

double lambert_w_of_exp(double L) {
    if (L < 1.0) throw InvalidInput("lambert_w_of_exp: needs L >= 1");
    // solve g(w) = w + log w - L = 0, Newton from w0 = L - log L
    double w = L - std::log(L);
    for (int it = 0; it < 60; ++it) {
        const double g = w + std::log(w) - L;
        const double gp = 1.0 + 1.0 / w;
        const double step = g / gp;
        w -= step;
        if (std::fabs(step) <= 1e-14 * (1.0 + std::fabs(w))) break;
    }
    if (std::fabs(w + std::log(w) - L) > 1e-10 * (1.0 + std::fabs(L)))
        throw NumericalFailure("lambert_w_of_exp: iteration did not converge");
    return w;
}

double radial_xi1(double r, double eps, double s) {
    if (eps <= 0) throw InvalidInput("radial_xi1: eps must be positive");
    if (r / eps <= 1.0) throw InvalidInput("radial_xi1: requires r/eps > 1");
    if (s < 0) throw InvalidInput("radial_xi1: requires s >= 0");
    const double xi0 = r / eps;
    const double L = std::log(xi0 - 1.0) + (xi0 - 1.0 - s);
    // W of (xi0-1) e^{xi0-1-s}; go through log space when exp would lose range
    if (L > 500.0) return lambert_w_of_exp(L) + 1.0;
    return lambert_w((xi0 - 1.0) * std::exp(xi0 - 1.0 - s)) + 1.0;
}

double radial_phi_eps(double r, double t, double eps) {
    if (t < 0) throw InvalidInput("radial_phi_eps: requires t >= 0");
    if (r <= t) throw InvalidInput("radial_phi_eps: closed form holds for r > t");
    if (t == 0) return -r;
    return -eps * radial_xi1(r, eps, t / eps);
}

double lower_bound_value(double eps, double t) {
    if (eps <= 0) throw InvalidInput("lower_bound_value: eps must be positive");
    if (t <= eps * (1.0 + std::exp(-1.0)))
        throw InvalidInput("lower_bound_value: requires t > eps(1 + 1/e)");
    return 0.5 * eps * (std::log(t / eps - 1.0) + 1.0);
}

double vshape_initial(const std::vector<double>& x, double alpha,
                      const std::vector<std::vector<double>>& A_set) {
    if (A_set.empty()) throw InvalidInput("vshape: A_set must be nonempty");
    if (!(alpha > 0 && alpha <= std::acos(-1.0) / 2))
        throw InvalidInput("vshape: alpha must lie in (0, pi/2]");
    const std::size_t n = x.size();
    if (n < 2) throw InvalidInput("vshape: dimension must be >= 2");
    const double cot = std::cos(alpha) / std::sin(alpha);
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& nu : A_set) {
        if (nu.size() != n - 1) throw InvalidInput("vshape: A_set entries must be (n-1)-vectors");
        double dot = 0;
        for (std::size_t k = 0; k < n - 1; ++k) dot += x[k] * nu[k];
        best = std::max(best, cot * dot);
    }
    return best - x[n - 1];
}

double vshape_effective(const std::vector<double>& x, double t, double alpha,
                        const std::vector<std::vector<double>>& A_set) {
    const double csc = 1.0 / std::sin(alpha);
    return vshape_initial(x, alpha, A_set) + csc * t;
}

double cone_effective(double x, double y, double t, double c0) {
    const double r = std::hypot(x, y);
    return -std::max(r - c0 * t, 0.0);
}

double scaling_identity_residual(double eps, const GridFunction& u_eps,
                                 const GridFunction& u_unit, const Mask& mask) {
    if (eps <= 0) throw InvalidInput("scaling_identity_residual: eps must be positive");
    if (!u_eps.grid.same_shape(mask.grid))
        throw InvalidInput("scaling_identity_residual: incompatible masks");
    // the rescaled point x/eps must land inside the unit-scale box
    const auto& g = u_eps.grid;
    const auto& gu = u_unit.grid;
    double worst = 0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!mask.keep[static_cast<std::size_t>(j) * g.nx + i]) continue;
            const double xs = g.x(i) / eps, ys = g.y(j) / eps;
            if (xs < gu.x0 || xs > gu.x(gu.nx - 1) || ys < gu.y0 || ys > gu.y(gu.ny - 1))
                throw InvalidInput("scaling_identity_residual: rescaled point leaves unit box");
            const double diff = u_eps.at(i, j) - eps * u_unit.sample(xs, ys);
            worst = std::max(worst, std::fabs(diff));
        }
    return worst;
}

}  // namespace geomhom
