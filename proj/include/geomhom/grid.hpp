#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "geomhom/common.hpp"

namespace geomhom {

enum class BoundaryRule : std::uint8_t { ExtrapolateLinear, Clamp };

/// Uniform 2-d lattice, either periodic (cell of edge `period`) or a truncated
/// box with ghost nodes synthesized from `rule`. Spacing is the same on both axes.
struct Grid2 {
    int nx = 0, ny = 0;
    double x0 = 0, y0 = 0;
    double h = 0;
    bool periodic = false;
    BoundaryRule rule = BoundaryRule::ExtrapolateLinear;
    double buffer_width = 0;  // length near box faces excluded from error norms

    static Grid2 periodic_cell(int N, double period);
    static Grid2 box(double lox, double loy, double hix, double hiy, double h,
                     BoundaryRule rule = BoundaryRule::ExtrapolateLinear, double buffer_width = 0);

    double x(int i) const { return x0 + i * h; }
    double y(int j) const { return y0 + j * h; }
    double period() const { return nx * h; }  // periodic grids only
    std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
    bool same_shape(const Grid2& o) const;
};

struct GridFunction {
    Grid2 grid;
    std::vector<double> v;

    GridFunction() = default;
    explicit GridFunction(const Grid2& g, double fill = 0.0) : grid(g), v(g.size(), fill) {}

    double& at(int i, int j) { return v[static_cast<std::size_t>(j) * grid.nx + i]; }
    double at(int i, int j) const { return v[static_cast<std::size_t>(j) * grid.nx + i]; }

    /// Access with (i,j) up to two nodes outside the lattice; periodic wrap or
    /// ghost extrapolation per the grid rule.
    double ghost(int i, int j) const;

    /// Bilinear interpolation at a physical point (periodic wrap or clamped to the box).
    double sample(double x, double y) const;

    double min_value() const;
    double max_value() const;
    double mean() const;
};

/// Fills from f(x, y) at the nodes.
GridFunction sample_grid_function(const Grid2& g, double (*f)(double, double));

template <typename F>
GridFunction make_grid_function(const Grid2& g, F&& f) {
    GridFunction u(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) u.at(i, j) = f(g.x(i), g.y(j));
    return u;
}

/// Nodewise keep/drop flags for error measurement.
struct Mask {
    Grid2 grid;
    std::vector<std::uint8_t> keep;

    static Mask all(const Grid2& g);
    /// Drops nodes within `width` of a box face (everything kept on periodic grids).
    static Mask buffer(const Grid2& g, double width);
    /// Additionally drops nodes with |r(x) - t| < tube, r = Euclidean distance to origin.
    Mask exclude_radial_tube(double t, double tube) const;
    /// Additionally drops nodes where |ref| < band (used near a reference kink set).
    Mask exclude_value_band(const GridFunction& ref, double band) const;
    std::size_t count() const;
};

/// max |a - b| over mask nodes. Throws InvalidInput on shape mismatch.
double sup_norm_diff(const GridFunction& a, const GridFunction& b, const Mask& mask);
double sup_norm_diff(const GridFunction& a, const GridFunction& b);

// snapshot export: JSON header + row-major values, plus an optional CSV slice
std::string grid_function_to_json(const GridFunction& u, double t);
GridFunction grid_function_from_json(const std::string& text, double* t_out = nullptr);
void save_grid_function(const GridFunction& u, double t, const std::string& path);
void save_csv_slice(const GridFunction& u, int axis, int index, const std::string& path);

}  // namespace geomhom
