#include "geomhom/evolution.hpp"

#include <algorithm>
#include <cmath>

#include "geomhom/cell_solver.hpp"

namespace geomhom {

namespace {

std::vector<double> normalize_snaps(std::vector<double> snaps, double T) {
    if (snaps.empty()) snaps = {T};
    std::sort(snaps.begin(), snaps.end());
    for (std::size_t k = 0; k < snaps.size(); ++k) {
        if (snaps[k] <= 0 || snaps[k] > T + 1e-12)
            throw InvalidInput("snapshot times must lie in (0, T]");
        if (k > 0 && snaps[k] <= snaps[k - 1]) throw InvalidInput("snapshot times must increase");
    }
    return snaps;
}

template <typename Stepper>
EvolutionResult march(const Stepper& st, const GridFunction& u0, double T,
                      std::vector<double> snaps, double eps_field) {
    snaps = normalize_snaps(std::move(snaps), T);
    EvolutionResult res;
    res.dt = st.dt();
    res.eps = eps_field;
    res.speed_bound = st.speed_bound();
    res.snapshots.push_back({0.0, u0});

    GridFunction u = u0;
    double t = 0;
    for (double target : snaps) {
        while (t < target - 1e-13) {
            const double dt = std::min(st.dt(), target - t);
            st.step(u, dt);
            t += dt;
        }
        t = target;
        res.snapshots.push_back({t, u});
    }
    return res;
}

}  // namespace

const GridFunction& EvolutionResult::at_time(double t, double tol) const {
    for (const auto& s : snapshots)
        if (std::fabs(s.first - t) <= tol) return s.second;
    throw InvalidInput("no snapshot at requested time");
}

EpsStepper::EpsStepper(OperatorSpec spec, double eps, const Grid2& grid, double delta_g)
    : spec_(std::move(spec)), op_(spec_), eps_(eps) {
    if (eps <= 0) throw InvalidInput("eps must be positive");
    delta_g_ = delta_g > 0 ? delta_g : grid.h;
    const std::size_t n = grid.size();
    if (spec_.is_mcf()) {
        const ForcingField& c = op_.effective_field();
        c_at_node_.resize(n);
        for (int j = 0; j < grid.ny; ++j)
            for (int i = 0; i < grid.nx; ++i)
                c_at_node_[static_cast<std::size_t>(j) * grid.nx + i] =
                    c.eval(grid.x(i) / eps, grid.y(j) / eps);
        speed_bound_ = 0;
        for (double v : c_at_node_) speed_bound_ = std::max(speed_bound_, std::fabs(v));
        dt_ = cfl_timestep(eps_, speed_bound_, grid.h, 2);
    } else {
        if (spec_.perturbation.kind != PerturbationKind::None && spec_.perturbation.eta > 0)
            throw InvalidInput("evolve_eps: shift perturbations are cell-problem machinery");
        const FlowField& V = spec_.geq().V;
        v1_at_node_.resize(n);
        v2_at_node_.resize(n);
        for (int j = 0; j < grid.ny; ++j)
            for (int i = 0; i < grid.nx; ++i) {
                double a, b;
                V.eval(grid.x(i) / eps, grid.y(j) / eps, a, b);
                const std::size_t k = static_cast<std::size_t>(j) * grid.nx + i;
                v1_at_node_[k] = a;
                v2_at_node_[k] = b;
            }
        speed_bound_ = 1.0 + spec_.geq().V.A;
        dt_ = cfl_timestep(eps_ * spec_.geq().d, speed_bound_, grid.h, 2);
    }
    rhs_.resize(n);
}

void EpsStepper::step(GridFunction& u, double dt_override) const {
    const double dt = dt_override > 0 ? dt_override : dt_;
    const int nx = u.grid.nx, ny = u.grid.ny;
    const std::array<double, 2> zero{0, 0};
    if (spec_.is_mcf()) {
#pragma omp parallel for schedule(static)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const std::size_t k = static_cast<std::size_t>(j) * nx + i;
                const double cv = c_at_node_[k];
                const int sign = cv >= 0 ? +1 : -1;
                const double g = stencil::rt_gradient_norm_at(u, i, j, sign, zero);
                const double curv = stencil::curvature_term_at(u, i, j, delta_g_, zero);
                rhs_[k] = eps_ * curv + cv * g;
            }
    } else {
        const double d = spec_.geq().d;
#pragma omp parallel for schedule(static)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const std::size_t k = static_cast<std::size_t>(j) * nx + i;
                const double g = stencil::rt_gradient_norm_at(u, i, j, -1, zero);
                const double curv = stencil::curvature_term_at(u, i, j, delta_g_, zero);
                const double adv = stencil::advect_at(u, i, j, v1_at_node_[k], v2_at_node_[k], zero);
                rhs_[k] = -std::max(g - eps_ * d * curv, 0.0) - adv;
            }
    }
    const std::size_t n = u.v.size();
#pragma omp parallel for schedule(static)
    for (std::size_t k = 0; k < n; ++k) u.v[k] += dt * rhs_[k];
}

EvolutionResult evolve_eps(const OperatorSpec& spec, double eps, const GridFunction& u0, double T,
                           std::vector<double> snap_times, double delta_g) {
    if (u0.grid.h > eps / 8 + 1e-15)
        throw InvalidInput("evolve_eps: grid too coarse for eps (need h <= eps/8)");
    EpsStepper st(spec, eps, u0.grid, delta_g);
    if (!u0.grid.periodic && u0.grid.buffer_width < 1.2 * st.speed_bound() * T - 1e-12)
        throw InvalidInput("evolve_eps: buffer thinner than 1.2 * speed_bound * T");
    return march(st, u0, T, std::move(snap_times), eps);
}

EffectiveStepper::EffectiveStepper(const EffectiveHamiltonianTable& table, const Grid2& grid) {
    if (!table.complete()) throw InvalidInput("evolve_effective: partial table");
    H_ = [table](double px, double py) { return table.eval(px, py); };
    double vmax = 0, dmax = 0;
    const int M = static_cast<int>(table.directions.size());
    for (int k = 0; k < M; ++k) {
        vmax = std::max(vmax, std::fabs(table.values[k]));
        const double dv = table.values[(k + 1) % M] - table.values[k];
        const double dth = 2.0 * std::acos(-1.0) / M;
        dmax = std::max(dmax, std::fabs(dv / dth));
    }
    theta_ = vmax + dmax;  // >= max directional derivative of H on the unit circle
    speed_bound_ = theta_;
    dt_ = cfl_timestep(theta_ * grid.h, speed_bound_, grid.h, 2);
    rhs_.resize(grid.size());
}

void EffectiveStepper::step(GridFunction& u, double dt_override) const {
    const double dt = dt_override > 0 ? dt_override : dt_;
    const int nx = u.grid.nx, ny = u.grid.ny;
    const double inv_h = 1.0 / u.grid.h, inv_h2 = inv_h * inv_h;
#pragma omp parallel for schedule(static)
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const double c0 = u.at(i, j);
            const double ue = u.ghost(i + 1, j), uw = u.ghost(i - 1, j);
            const double un = u.ghost(i, j + 1), us = u.ghost(i, j - 1);
            const double px = (ue - uw) * 0.5 * inv_h;
            const double py = (un - us) * 0.5 * inv_h;
            const double lap = (ue + uw + un + us - 4.0 * c0) * inv_h2;
            rhs_[static_cast<std::size_t>(j) * nx + i] =
                -H_(px, py) + theta_ * u.grid.h * lap;
        }
    const std::size_t n = u.v.size();
#pragma omp parallel for schedule(static)
    for (std::size_t k = 0; k < n; ++k) u.v[k] += dt * rhs_[k];
}

EvolutionResult evolve_effective(const EffectiveHamiltonianTable& table, const GridFunction& u0,
                                 double T, std::vector<double> snap_times) {
    EffectiveStepper st(table, u0.grid);
    return march(st, u0, T, std::move(snap_times), 0.0);
}

RadialResult evolve_radial(double eps, double r_max, double T, int N,
                           std::vector<double> snap_times) {
    if (eps <= 0 || r_max <= 0 || N < 16) throw InvalidInput("evolve_radial: bad parameters");
    RadialResult res;
    res.eps = eps;
    res.h = r_max / (N + 1);
    res.r_min = 2 * res.h;
    res.r_max = r_max;
    res.r.resize(N);
    for (int k = 0; k < N; ++k) res.r[k] = (k + 2) * res.h;

    std::vector<double> phi(N);
    for (int k = 0; k < N; ++k) phi[k] = -res.r[k];

    const double speed = 1.0 + eps / res.r_min;
    res.dt = cfl_timestep(0.0, speed, res.h, 1);

    auto snaps = normalize_snaps(std::move(snap_times), T);
    res.snapshots.push_back({0.0, phi});

    std::vector<double> rhs(N);
    auto ghost = [&](const std::vector<double>& f, int k) -> double {
        if (k < 0) return 2.0 * f[0] - f[1];
        if (k >= N) return 2.0 * f[N - 1] - f[N - 2];
        return f[k];
    };
    auto do_step = [&](double dt) {
        const double inv_h = 1.0 / res.h;
        for (int k = 0; k < N; ++k) {
            const double dp = (ghost(phi, k + 1) - phi[k]) * inv_h;
            const double dm = (phi[k] - ghost(phi, k - 1)) * inv_h;
            // phi_t = (eps/r) phi_r + |phi_r|; both terms pull information inward
            const double adv = (eps / res.r[k]) * dp;  // coefficient > 0, forward difference
            const double grad = std::max(std::max(dp, 0.0), -std::min(dm, 0.0));
            rhs[k] = adv + grad;
        }
        for (int k = 0; k < N; ++k) phi[k] += dt * rhs[k];
    };

    double t = 0;
    for (double target : snaps) {
        while (t < target - 1e-13) {
            const double dt = std::min(res.dt, target - t);
            do_step(dt);
            t += dt;
        }
        t = target;
        res.snapshots.push_back({t, phi});
    }
    return res;
}

double RadialResult::value(double r_query, double t, double tol) const {
    const std::vector<double>* snap = nullptr;
    for (const auto& s : snapshots)
        if (std::fabs(s.first - t) <= tol) snap = &s.second;
    if (!snap) throw InvalidInput("evolve_radial: no snapshot at requested time");
    if (r_query <= t + 3 * h)
        throw InvalidInput("evolve_radial: query outside the closed-form regime (r <= t + 3h)");
    if (r_query < r_min || r_query > r_max) throw InvalidInput("evolve_radial: r out of range");
    const double s = (r_query - r[0]) / h;
    const int k = std::min(static_cast<int>(std::floor(s)), static_cast<int>(r.size()) - 2);
    const double a = s - k;
    return (1 - a) * (*snap)[k] + a * (*snap)[k + 1];
}

}  // namespace geomhom
