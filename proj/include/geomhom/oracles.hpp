#pragma once

#include <array>
#include <vector>

#include "geomhom/common.hpp"
#include "geomhom/grid.hpp"

namespace geomhom {

/// Principal-branch Lambert W for z >= 0: the w >= 0 with w e^w = z.
/// Halley iteration from w0 = log(1+z); exit residual |w e^w - z| <= 1e-12 (1+z).
/// Throws InvalidInput for z < 0 ("out of supported branch").
double lambert_w(double z);

/// W'(z) = W(z) / (z (1 + W(z))), z > 0.
double lambert_w_derivative(double z);

/// W(exp(L)) without forming exp(L); solves w + log w = L. Valid for L >= 1,
/// used where the radial formula's argument overflows a double.
double lambert_w_of_exp(double L);

/// xi_1(s) = W((r/eps - 1) exp(r/eps - 1 - s)) + 1, the rescaled radius of the
/// shrinking front. Satisfies xi' = -1 + 1/xi with xi(0) = r/eps. Requires r/eps > 1.
double radial_xi1(double r, double eps, double s);

/// phi^eps(r, t) = -eps xi_1(t/eps), the radial profile of the cone solution
/// for r > t (closed form of the slow-rate example).
double radial_phi_eps(double r, double t, double eps);

/// (1/2) eps (log(t/eps - 1) + 1); valid for t > eps(1 + 1/e). The sup-norm gap
/// |u^eps - u| at |x| = t is at least this value.
double lower_bound_value(double eps, double t);

/// V-shaped traveling graph data and its effective solution for c == 1.
/// u0(x) = max_{nu in A} cot(alpha) x . (nu, 0) - x_n  (the front as the graph
/// x_n = cot(alpha) ...), and u(x, t) = u0(x) + csc(alpha) t. A is a finite set
/// of unit (n-1)-vectors; n = 2 uses nu in {-1, +1}.
double vshape_initial(const std::vector<double>& x, double alpha,
                      const std::vector<std::vector<double>>& A_set);
double vshape_effective(const std::vector<double>& x, double t, double alpha,
                        const std::vector<std::vector<double>>& A_set);

/// Effective cone solution for constant force c0: u(x,t) = -(|x| - c0 t)_+ ... with
/// the filled core, via the Hopf-Lax formula for u_t = c0 |Du|.
double cone_effective(double x, double y, double t, double c0 = 1.0);

/// sup over mask of |u_eps(x, t) - eps * u_unit(x/eps, t/eps)|, interpolating the
/// unit-scale snapshot. Both snapshots must be at matching rescaled times. The
/// initial data must be positively 1-homogeneous (checked via the descriptor by
/// callers; this routine just compares fields).
double scaling_identity_residual(double eps, const GridFunction& u_eps,
                                 const GridFunction& u_unit, const Mask& mask);

}  // namespace geomhom
