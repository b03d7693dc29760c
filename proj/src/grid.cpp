#include "geomhom/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "json.hpp"

namespace geomhom {

Grid2 Grid2::periodic_cell(int N, double period) {
    if (N < 8) throw InvalidInput("periodic grid needs N >= 8");
    if (period <= 0) throw InvalidInput("period must be positive");
    Grid2 g;
    g.nx = g.ny = N;
    g.h = period / N;
    g.periodic = true;
    return g;
}

Grid2 Grid2::box(double lox, double loy, double hix, double hiy, double h, BoundaryRule rule,
                 double buffer_width) {
    if (h <= 0) throw InvalidInput("spacing must be positive");
    if (hix <= lox || hiy <= loy) throw InvalidInput("box bounds are empty");
    Grid2 g;
    g.nx = static_cast<int>(std::lround((hix - lox) / h)) + 1;
    g.ny = static_cast<int>(std::lround((hiy - loy) / h)) + 1;
    if (g.nx < 8 || g.ny < 8) throw InvalidInput("box grid needs >= 8 nodes per axis");
    g.x0 = lox;
    g.y0 = loy;
    g.h = h;
    g.periodic = false;
    g.rule = rule;
    g.buffer_width = buffer_width;
    return g;
}

bool Grid2::same_shape(const Grid2& o) const {
    return nx == o.nx && ny == o.ny && periodic == o.periodic && std::fabs(h - o.h) < 1e-14 &&
           std::fabs(x0 - o.x0) < 1e-12 && std::fabs(y0 - o.y0) < 1e-12;
}

namespace {
inline int wrap2(int i, int n) {
    if (i >= n) i -= n;
    if (i >= n) i -= n;
    if (i < 0) i += n;
    if (i < 0) i += n;
    return i;
}
}  // namespace

double GridFunction::ghost(int i, int j) const {
    const int nx = grid.nx, ny = grid.ny;
    if (grid.periodic) return at(wrap2(i, nx), wrap2(j, ny));
    if (grid.rule == BoundaryRule::Clamp) {
        return at(std::clamp(i, 0, nx - 1), std::clamp(j, 0, ny - 1));
    }
    // linear extrapolation from the two edge nodes, one axis at a time
    if (i < 0) {
        const double k = static_cast<double>(-i);
        return (1 + k) * ghost(0, j) - k * ghost(1, j);
    }
    if (i >= nx) {
        const double k = static_cast<double>(i - nx + 1);
        return (1 + k) * ghost(nx - 1, j) - k * ghost(nx - 2, j);
    }
    if (j < 0) {
        const double k = static_cast<double>(-j);
        return (1 + k) * at(i, 0) - k * at(i, 1);
    }
    if (j >= ny) {
        const double k = static_cast<double>(j - ny + 1);
        return (1 + k) * at(i, ny - 1) - k * at(i, ny - 2);
    }
    return at(i, j);
}

double GridFunction::sample(double x, double y) const {
    double s = (x - grid.x0) / grid.h, t = (y - grid.y0) / grid.h;
    if (!grid.periodic) {
        s = std::clamp(s, 0.0, static_cast<double>(grid.nx - 1));
        t = std::clamp(t, 0.0, static_cast<double>(grid.ny - 1));
    }
    const double fs = std::floor(s), ft = std::floor(t);
    int i = static_cast<int>(fs), j = static_cast<int>(ft);
    const double a = s - fs, b = t - ft;
    if (grid.periodic) {
        i %= grid.nx;
        if (i < 0) i += grid.nx;
        j %= grid.ny;
        if (j < 0) j += grid.ny;
    } else {
        i = std::min(i, grid.nx - 2);
        j = std::min(j, grid.ny - 2);
    }
    const int i1 = grid.periodic ? wrap2(i + 1, grid.nx) : i + 1;
    const int j1 = grid.periodic ? wrap2(j + 1, grid.ny) : j + 1;
    return (1 - a) * (1 - b) * at(i, j) + a * (1 - b) * at(i1, j) + (1 - a) * b * at(i, j1) +
           a * b * at(i1, j1);
}

double GridFunction::min_value() const { return *std::min_element(v.begin(), v.end()); }
double GridFunction::max_value() const { return *std::max_element(v.begin(), v.end()); }
double GridFunction::mean() const { return det_sum(v) / static_cast<double>(v.size()); }

GridFunction sample_grid_function(const Grid2& g, double (*f)(double, double)) {
    return make_grid_function(g, f);
}

Mask Mask::all(const Grid2& g) { return Mask{g, std::vector<std::uint8_t>(g.size(), 1)}; }

Mask Mask::buffer(const Grid2& g, double width) {
    Mask m = all(g);
    if (g.periodic || width <= 0) return m;
    const double xlo = g.x0 + width, xhi = g.x(g.nx - 1) - width;
    const double ylo = g.y0 + width, yhi = g.y(g.ny - 1) - width;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (g.x(i) < xlo || g.x(i) > xhi || g.y(j) < ylo || g.y(j) > yhi)
                m.keep[static_cast<std::size_t>(j) * g.nx + i] = 0;
    return m;
}

Mask Mask::exclude_radial_tube(double t, double tube) const {
    Mask m = *this;
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) {
            const double r = std::hypot(grid.x(i), grid.y(j));
            if (std::fabs(r - t) < tube) m.keep[static_cast<std::size_t>(j) * grid.nx + i] = 0;
        }
    return m;
}

Mask Mask::exclude_value_band(const GridFunction& ref, double band) const {
    if (!grid.same_shape(ref.grid)) throw InvalidInput("mask/reference shape mismatch");
    Mask m = *this;
    for (std::size_t k = 0; k < m.keep.size(); ++k)
        if (std::fabs(ref.v[k]) < band) m.keep[k] = 0;
    return m;
}

std::size_t Mask::count() const {
    std::size_t n = 0;
    for (auto k : keep) n += k;
    return n;
}

double sup_norm_diff(const GridFunction& a, const GridFunction& b, const Mask& mask) {
    if (!a.grid.same_shape(b.grid) || !a.grid.same_shape(mask.grid))
        throw InvalidInput("sup_norm_diff: shape mismatch");
    double m = 0;
    for (std::size_t k = 0; k < a.v.size(); ++k)
        if (mask.keep[k]) m = std::max(m, std::fabs(a.v[k] - b.v[k]));
    return m;
}

double sup_norm_diff(const GridFunction& a, const GridFunction& b) {
    return sup_norm_diff(a, b, Mask::all(a.grid));
}

std::string grid_function_to_json(const GridFunction& u, double t) {
    nlohmann::json j;
    j["grid"] = {{"nx", u.grid.nx},     {"ny", u.grid.ny},
                 {"x0", u.grid.x0},     {"y0", u.grid.y0},
                 {"h", u.grid.h},       {"periodic", u.grid.periodic},
                 {"buffer", u.grid.buffer_width}};
    j["t"] = t;
    j["values"] = u.v;
    return j.dump();
}

GridFunction grid_function_from_json(const std::string& text, double* t_out) {
    try {
        nlohmann::json j = nlohmann::json::parse(text);
        const auto& g = j.at("grid");
        Grid2 grid;
        grid.nx = g.at("nx").get<int>();
        grid.ny = g.at("ny").get<int>();
        grid.x0 = g.at("x0").get<double>();
        grid.y0 = g.at("y0").get<double>();
        grid.h = g.at("h").get<double>();
        grid.periodic = g.at("periodic").get<bool>();
        grid.buffer_width = g.value("buffer", 0.0);
        GridFunction u(grid);
        u.v = j.at("values").get<std::vector<double>>();
        if (u.v.size() != grid.size()) throw InvalidInput("snapshot JSON: value count mismatch");
        if (t_out) *t_out = j.at("t").get<double>();
        return u;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("snapshot JSON: ") + e.what());
    }
}

void save_grid_function(const GridFunction& u, double t, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write " + path);
    out << grid_function_to_json(u, t) << "\n";
}

void save_csv_slice(const GridFunction& u, int axis, int index, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write " + path);
    out.precision(17);
    if (axis == 0) {
        if (index < 0 || index >= u.grid.nx) throw InvalidInput("slice index out of range");
        out << "y,value\n";
        for (int j = 0; j < u.grid.ny; ++j) out << u.grid.y(j) << "," << u.at(index, j) << "\n";
    } else {
        if (index < 0 || index >= u.grid.ny) throw InvalidInput("slice index out of range");
        out << "x,value\n";
        for (int i = 0; i < u.grid.nx; ++i) out << u.grid.x(i) << "," << u.at(i, index) << "\n";
    }
}

}  // namespace geomhom
