#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "geomhom/grid.hpp"
#include "geomhom/operators.hpp"

namespace geomhom {

/// Approximate corrector w solving  lambda w + F(D^2 w, p + Dw, y) = 0  on the
/// periodic cell, with the discrete operator assembled from the grid primitives.
struct CorrectorSolution {
    GridFunction w;
    std::array<double, 2> p{};
    double lambda = 0;
    double eta = 0;
    double residual = 0;   // final sup norm of lambda w + F_h[w]
    double amplitude = 0;  // sup w - inf w
    std::array<double, 2> effective_bracket{};  // [min(-lambda w), max(-lambda w)]
    double effective_estimate = 0;              // mean(-lambda w)
    bool converged = false;
    long steps = 0;
    double tau = 0;  // damping used on the finest level
};

/// Damped fixed-point iteration w <- w - tau (lambda w + F_h[w]) with the mean
/// mode pinned algebraically each step (F_h ignores constants, so the mean of w
/// is determined by mean F_h[w] alone) and cascadic coarse-to-fine warm starts.
/// Throws NumericalFailure if the residual grows tenfold over its running
/// minimum. Non-convergence within max_steps returns a flagged solution.
CorrectorSolution solve_approx_corrector(const OperatorSpec& spec, const std::array<double, 2>& p,
                                         double lambda, const Grid2& grid, double tol = 1e-8,
                                         long max_steps = 2'000'000, double delta_g = 0);

/// (estimate, bracket) of the effective value F-bar(p) = lim -lambda w_lambda.
/// Refuses non-converged solutions.
std::pair<double, std::array<double, 2>> effective_value(const CorrectorSolution& sol);

/// Long-time flatness estimator: evolve u = p.x + v(y,t), v periodic, v(.,0) = 0,
/// and read the effective value off the mean slope of v.
struct FlatnessResult {
    double estimate = 0;  // F-bar(p): -(mean v(T) - mean v(T/2)) / (T/2)
    double oscillation_at_T = 0;
    std::vector<std::pair<double, double>> oscillation_series;  // (t, sup v - inf v)
    bool flatness_suspect = false;  // oscillation kept growing over [T/2, T]
    double T = 0;
};

FlatnessResult solve_flatness(const OperatorSpec& spec, const std::array<double, 2>& p, double T,
                              const Grid2& grid, double delta_g = 0);

/// F-bar sampled on unit directions with 1-homogeneous extension and periodic
/// linear interpolation in angle. Directions that failed to converge are marked
/// invalid; evaluation refuses arcs touching an invalid direction.
struct EffectiveHamiltonianTable {
    std::string spec_hash;
    std::vector<double> directions;  // angles theta_k, uniform on [0, 2 pi)
    std::vector<double> values;      // F-bar(theta_k) on unit vectors
    std::vector<std::uint8_t> valid;
    std::map<std::string, double> metadata;  // lambda, eta, N, T, residuals...

    bool complete() const;
    double eval(double px, double py) const;  // table(p) = |p| table(p-hat)
};

/// Constant table F-bar(p) = value * |p| (closed-form media, c constant).
EffectiveHamiltonianTable constant_table(double value, int M = 32);

/// Corrector route for forced MCF, flatness route for the curvature G operator.
/// With cache_path set, a table whose spec_hash matches is loaded instead of
/// recomputed, and fresh builds are persisted there.
EffectiveHamiltonianTable build_effective_table(const OperatorSpec& spec, int M, double lambda,
                                                const Grid2& grid, double tol = 1e-6,
                                                double T_flatness = 40.0,
                                                const std::string& cache_path = "");

std::string table_to_json(const EffectiveHamiltonianTable& t);
EffectiveHamiltonianTable table_from_json(const std::string& text);
void save_table(const EffectiveHamiltonianTable& t, const std::string& path);
EffectiveHamiltonianTable load_table(const std::string& path);

}  // namespace geomhom
