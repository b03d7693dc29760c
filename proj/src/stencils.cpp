#include "geomhom/stencils.hpp"

namespace geomhom {

double cfl_timestep(double curvature_coef, double speed_bound, double h, int n,
                    double extra_rate) {
    if (curvature_coef < 0 || speed_bound < 0 || extra_rate < 0)
        throw InvalidInput("cfl_timestep: rates must be nonnegative");
    if (h <= 0) throw InvalidInput("cfl_timestep: spacing must be positive");
    const double denom = 2.0 * n * curvature_coef / (h * h) + speed_bound / h + extra_rate;
    if (denom <= 0) throw InvalidInput("no dynamics");
    return 0.4 / denom;
}

namespace stencil {

namespace {

// half-plane stencil directions, ordered by angle; u8 holds unit vectors
struct Dir {
    int ix, iy;
    double ux, uy;
    double len2;
};

constexpr double kS5 = 0.4472135954999579;   // 1/sqrt(5)
constexpr double kC5 = 0.8944271909999159;   // 2/sqrt(5)
constexpr double kS2 = 0.7071067811865476;   // 1/sqrt(2)

const Dir kDirs[9] = {
    {1, 0, 1.0, 0.0, 1.0},       // 0
    {2, 1, kC5, kS5, 5.0},       // 26.565
    {1, 1, kS2, kS2, 2.0},       // 45
    {1, 2, kS5, kC5, 5.0},       // 63.435
    {0, 1, 0.0, 1.0, 1.0},       // 90
    {-1, 2, -kS5, kC5, 5.0},     // 116.565
    {-1, 1, -kS2, kS2, 2.0},     // 135
    {-2, 1, -kC5, kS5, 5.0},     // 153.435
    {1, 0, -1.0, 0.0, 1.0},      // 180 == 0 with the sign flipped
};

// sin/cos of the gap between consecutive directions
struct Gap {
    double sin_t, cos_t;
};

struct GapTable {
    Gap g[8];
    GapTable() {
        for (int k = 0; k < 8; ++k) {
            const Dir& a = kDirs[k];
            const Dir& b = kDirs[k + 1];
            g[k].cos_t = a.ux * b.ux + a.uy * b.uy;
            g[k].sin_t = a.ux * b.uy - a.uy * b.ux;
        }
    }
};
const GapTable kGapTable;

inline double second_diff(const GridFunction& u, int i, int j, const Dir& d, double c0,
                          double inv_h2) {
    return (u.ghost(i + d.ix, j + d.iy) - 2.0 * c0 + u.ghost(i - d.ix, j - d.iy)) * inv_h2 / d.len2;
}

}  // namespace

double curvature_term_at(const GridFunction& u, int i, int j, double delta_g,
                         const std::array<double, 2>& p_offset) {
    const double inv_h = 1.0 / u.grid.h;
    const double inv_h2 = inv_h * inv_h;
    const double c0 = u.at(i, j);

    const double q1 = p_offset[0] + (u.ghost(i + 1, j) - u.ghost(i - 1, j)) * (0.5 * inv_h);
    const double q2 = p_offset[1] + (u.ghost(i, j + 1) - u.ghost(i, j - 1)) * (0.5 * inv_h);
    const double q_sq = q1 * q1 + q2 * q2;
    const double t = q_sq + delta_g * delta_g;

    const double dxx = second_diff(u, i, j, kDirs[0], c0, inv_h2);
    const double dyy = second_diff(u, i, j, kDirs[4], c0, inv_h2);

    if (q_sq == 0.0 || t == 0.0) return dxx + dyy;  // projector degenerates to the identity

    const double iso = (delta_g * delta_g) / t;  // weight of the identity part
    const double needle = q_sq / t;              // weight of n x n, n = unit normal to q

    // unit needle direction, flipped into the upper half-plane
    const double qn = std::sqrt(q_sq);
    double nx = -q2 / qn, ny = q1 / qn;
    if (ny < 0 || (ny == 0 && nx < 0)) {
        nx = -nx;
        ny = -ny;
    }

    // locate the bracketing pair [v_a, v_b] by cross-product sector tests
    int a = 0;
    int lo = 0, hi = 8;
    while (hi - lo > 1) {
        const int mid = (lo + hi) / 2;
        const double cr = kDirs[mid].ux * ny - kDirs[mid].uy * nx;  // >0 iff n above v_mid
        if (cr >= 0)
            lo = mid;
        else
            hi = mid;
    }
    a = lo;

    const Dir& va = kDirs[a];
    const Dir& vb = kDirs[a + 1];
    const Gap& gap = kGapTable.g[a];

    const double sa = va.ux * ny - va.uy * nx;  // sin(angle from v_a to n)  >= 0
    const double sb = nx * vb.uy - ny * vb.ux;  // sin(angle from n to v_b)  >= 0
    const double cb = nx * vb.ux + ny * vb.uy;
    const double ca = va.ux * nx + va.uy * ny;

    const double denom = gap.sin_t * gap.cos_t;
    double ga = (sb * cb) / denom;
    double gb = (sa * ca) / denom;
    if (ga < 0) ga = 0;  // guards rounding at the sector edges
    if (gb < 0) gb = 0;

    double out = iso * (dxx + dyy);
    out += needle * ga * second_diff(u, i, j, va, c0, inv_h2);
    out += needle * gb * second_diff(u, i, j, vb, c0, inv_h2);
    return out;
}

}  // namespace stencil

GridFunction upwind_gradient_norm(const GridFunction& u, int speed_sign,
                                  const std::array<double, 2>& p_offset) {
    GridFunction out(u.grid);
    const int nx = u.grid.nx, ny = u.grid.ny;
#pragma omp parallel for schedule(static)
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            out.at(i, j) = stencil::rt_gradient_norm_at(u, i, j, speed_sign, p_offset);
    return out;
}

GridFunction curvature_term(const GridFunction& u, double delta_g,
                            const std::array<double, 2>& p_offset) {
    if (delta_g <= 0) throw InvalidInput("curvature_term: regularization length must be positive");
    GridFunction out(u.grid);
    const int nx = u.grid.nx, ny = u.grid.ny;
#pragma omp parallel for schedule(static)
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            out.at(i, j) = stencil::curvature_term_at(u, i, j, delta_g, p_offset);
    return out;
}

GridFunction advect_upwind(const GridFunction& u, const FlowField& V, double scale,
                           const std::array<double, 2>& p_offset) {
    GridFunction out(u.grid);
    const int nx = u.grid.nx, ny = u.grid.ny;
#pragma omp parallel for schedule(static)
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            double v1, v2;
            V.eval(u.grid.x(i) / scale, u.grid.y(j) / scale, v1, v2);
            out.at(i, j) = stencil::advect_at(u, i, j, v1, v2, p_offset);
        }
    return out;
}

}  // namespace geomhom
