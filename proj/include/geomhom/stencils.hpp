#pragma once

#include <array>
#include <cmath>

#include "geomhom/field.hpp"
#include "geomhom/grid.hpp"

namespace geomhom {

/// dt = safety / (2n * curvature_coef / h^2 + speed_bound / h + extra_rate),
/// safety = 0.4. extra_rate absorbs zeroth-order terms (the discount lambda).
/// Throws InvalidInput when the denominator vanishes ("no dynamics").
double cfl_timestep(double curvature_coef, double speed_bound, double h, int n,
                    double extra_rate = 0.0);

namespace stencil {

// Per-node kernels. `p_offset` shifts the gradient argument: all first-difference
// quotients represent components of p + Du, so a planar drift is carried exactly.

/// Rouy-Tourin upwind norm of p + Du. speed_sign = +1 selects the branch that is
/// monotone when the term enters the dynamics as u_t = +c * G with c > 0 (one-sided
/// differences taken from the uphill side; local maxima are stationary). speed_sign
/// = -1 mirrors the branch for u_t = -c * G, c > 0 (local minima stationary).
inline double rt_gradient_norm_at(const GridFunction& u, int i, int j, int speed_sign,
                                  const std::array<double, 2>& p_offset) {
    const double inv_h = 1.0 / u.grid.h;
    const double c0 = u.at(i, j);
    const double dmx = p_offset[0] + (c0 - u.ghost(i - 1, j)) * inv_h;
    const double dpx = p_offset[0] + (u.ghost(i + 1, j) - c0) * inv_h;
    const double dmy = p_offset[1] + (c0 - u.ghost(i, j - 1)) * inv_h;
    const double dpy = p_offset[1] + (u.ghost(i, j + 1) - c0) * inv_h;
    double gx, gy;
    if (speed_sign >= 0) {
        gx = std::max(std::max(dpx, 0.0) * std::max(dpx, 0.0),
                      std::min(dmx, 0.0) * std::min(dmx, 0.0));
        gy = std::max(std::max(dpy, 0.0) * std::max(dpy, 0.0),
                      std::min(dmy, 0.0) * std::min(dmy, 0.0));
    } else {
        gx = std::max(std::max(dmx, 0.0) * std::max(dmx, 0.0),
                      std::min(dpx, 0.0) * std::min(dpx, 0.0));
        gy = std::max(std::max(dmy, 0.0) * std::max(dmy, 0.0),
                      std::min(dpy, 0.0) * std::min(dpy, 0.0));
    }
    return std::sqrt(gx + gy);
}

/// tr{(I - q x q / (|q|^2 + dg^2)) D^2 u} with q = p_offset + central Du,
/// discretized as a nonnegative combination of directional second differences
/// (axes, diagonals and the (2,1)-family). Nonnegative weights keep every
/// assembled explicit scheme monotone under the cfl_timestep bound; the price
/// is an O(1)-bounded directional defect where the level-set normal falls
/// between stencil directions.
double curvature_term_at(const GridFunction& u, int i, int j, double delta_g,
                         const std::array<double, 2>& p_offset);

/// V . (p + Du) with donor-cell differences: V_i > 0 uses the backward
/// difference, matching terms that enter the dynamics as u_t = -V.Du.
inline double advect_at(const GridFunction& u, int i, int j, double v1, double v2,
                        const std::array<double, 2>& p_offset) {
    const double inv_h = 1.0 / u.grid.h;
    const double c0 = u.at(i, j);
    const double dx = (v1 > 0) ? (c0 - u.ghost(i - 1, j)) * inv_h : (u.ghost(i + 1, j) - c0) * inv_h;
    const double dy = (v2 > 0) ? (c0 - u.ghost(i, j - 1)) * inv_h : (u.ghost(i, j + 1) - c0) * inv_h;
    return v1 * (p_offset[0] + dx) + v2 * (p_offset[1] + dy);
}

}  // namespace stencil

// Whole-field wrappers around the per-node kernels.

GridFunction upwind_gradient_norm(const GridFunction& u, int speed_sign,
                                  const std::array<double, 2>& p_offset = {0, 0});

GridFunction curvature_term(const GridFunction& u, double delta_g,
                            const std::array<double, 2>& p_offset = {0, 0});

/// V evaluated at x/scale per node (scale = epsilon for the fast variable).
GridFunction advect_upwind(const GridFunction& u, const FlowField& V, double scale = 1.0,
                           const std::array<double, 2>& p_offset = {0, 0});

}  // namespace geomhom
