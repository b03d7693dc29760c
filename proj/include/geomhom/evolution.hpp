#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "geomhom/grid.hpp"
#include "geomhom/operators.hpp"
#include "geomhom/stencils.hpp"

namespace geomhom {

struct EvolutionResult {
    std::vector<std::pair<double, GridFunction>> snapshots;  // strictly increasing t
    double dt = 0;
    double eps = 0;  // 0 marks the effective equation
    double speed_bound = 0;

    const GridFunction& at_time(double t, double tol = 1e-9) const;
};

/// One explicit step of the oscillatory problem on a box or periodic grid.
/// ForcedMCF:  u_t = eps * curvature + c(x/eps) * |Du|  (Rouy-Tourin branch
/// switched per node by sign c; ties use the expanding branch).
/// CurvatureG: u_t = -( |Du| - eps d * curvature )_+ - V(x/eps) . Du.
class EpsStepper {
  public:
    EpsStepper(OperatorSpec spec, double eps, const Grid2& grid, double delta_g = 0);

    double dt() const { return dt_; }
    double speed_bound() const { return speed_bound_; }
    double delta_g() const { return delta_g_; }
    void step(GridFunction& u, double dt_override = -1) const;

  private:
    OperatorSpec spec_;
    Operator op_;
    double eps_, delta_g_, dt_, speed_bound_;
    std::vector<double> c_at_node_;            // MCF: c(x/eps) per node
    std::vector<double> v1_at_node_, v2_at_node_;  // G: flow components per node
    mutable std::vector<double> rhs_;
};

/// Explicit forward-Euler integration to time T, clipping the final steps so
/// that each requested snapshot time is hit exactly. Throws InvalidInput if the
/// grid does not resolve the fast variable (h > eps/8) or if the buffer is
/// thinner than 1.2 * speed_bound * T.
EvolutionResult evolve_eps(const OperatorSpec& spec, double eps, const GridFunction& u0, double T,
                           std::vector<double> snap_times = {}, double delta_g = 0);

struct EffectiveHamiltonianTable;  // cell_solver.hpp

/// Lax-Friedrichs step for u_t + H(Du) = 0 with the tabulated 1-homogeneous H:
/// u_t = -H(Du_central) + theta_LF h Laplace(u).
class EffectiveStepper {
  public:
    explicit EffectiveStepper(const EffectiveHamiltonianTable& table, const Grid2& grid);

    double dt() const { return dt_; }
    double theta_lf() const { return theta_; }
    double speed_bound() const { return speed_bound_; }
    void step(GridFunction& u, double dt_override = -1) const;

  private:
    std::function<double(double, double)> H_;  // H(p) for p = (px, py)
    double theta_, dt_, speed_bound_;
    mutable std::vector<double> rhs_;
};

EvolutionResult evolve_effective(const EffectiveHamiltonianTable& table, const GridFunction& u0,
                                 double T, std::vector<double> snap_times = {});

/// 1-d radial reduction phi_t = (eps/r) phi_r + |phi_r| on (r_min, r_max],
/// r_min = 2h, phi(r, 0) = -r. Queries are only valid for r > t + 3h.
struct RadialResult {
    double eps = 0, r_min = 0, r_max = 0, h = 0, dt = 0;
    std::vector<double> r;                                   // node radii
    std::vector<std::pair<double, std::vector<double>>> snapshots;

    /// Interpolated phi(r, t) at a snapshot time; refuses r <= t + 3h.
    double value(double r_query, double t, double tol = 1e-9) const;
};

RadialResult evolve_radial(double eps, double r_max, double T, int N,
                           std::vector<double> snap_times = {});

}  // namespace geomhom
