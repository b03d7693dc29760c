#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "geomhom/cell_solver.hpp"
#include "geomhom/evolution.hpp"
#include "geomhom/grid.hpp"
#include "geomhom/operators.hpp"

namespace geomhom {

enum class InitialDataKind : std::uint8_t { Cone, VShape, Plane, Custom };

struct InitialData {
    InitialDataKind kind = InitialDataKind::Cone;
    double alpha = 0;                            // VShape
    std::vector<std::vector<double>> A_set;      // VShape, subsets of S^{n-2}
    std::array<double, 2> p{1, 0};               // Plane
    std::string path;                            // Custom snapshot file

    double eval(double x, double y) const;       // analytic kinds only
    GridFunction materialize(const Grid2& g) const;
    bool positively_homogeneous() const;
};

enum class ReferenceKind : std::uint8_t { EffectiveTable, ClosedForm };

struct SweepConfig {
    OperatorSpec op;
    InitialData u0;
    std::vector<double> eps_list;  // strictly decreasing, all in (0,1)
    double T = 0.5;
    double grid_divisor = 8.0;       // h = eps / grid_divisor
    bool refinement_control = true;  // rerun each eps at h/2 to flag scheme error
    ReferenceKind reference = ReferenceKind::ClosedForm;
    double measure_halfwidth = 0.5;  // error region; the box adds the buffer on top
    std::vector<double> snap_times;  // default {T/2, T}
    int table_M = 16;
    double table_lambda = 1e-2;
    int table_N = 64;
    double table_tol = 1e-6;
    double table_T = 40.0;
    int ref_N = 1024;                // fine-grid resolution of the table reference run
    std::string table_cache;
    std::uint64_t seed = 0;
    std::string config_echo;         // canonical JSON of the parsed config

    void validate() const;
};

struct RatePoint {
    double eps = 0;
    double h = 0;
    double error = 0;           // sup over mask, max over snapshots
    double error_refined = -1;  // same at h/2 when refinement control ran
    double error_at_front = -1; // cone data: sup on the ring |r - t| <= h at t = T
    double lower_bound = -1;    // cone data, constant force: Omega(eps log eps) value
    double runtime_s = 0;
    std::vector<std::string> flags;
};

struct RateFit {
    double exponent = 0, intercept = 0, residual = 0;
    bool valid = false;
};

struct RateReport {
    std::string config_echo;
    std::vector<RatePoint> points;
    RateFit fit;
    bool monotone_ok = false;  // at most one inversion, within 10%
    int inversions = 0;
    std::vector<std::string> notes;
};

/// Ordinary least squares of log error against log eps.
/// residual = max absolute log misfit. Needs >= 3 points with positive errors.
RateFit fit_rate(const std::vector<std::pair<double, double>>& points);

RateReport run_sweep(const SweepConfig& cfg);

/// report.json (full) and report.csv ("eps,error,h,flags"), deterministic order.
void emit_report(const RateReport& r, const std::string& json_path,
                 const std::string& csv_path);
std::string report_to_json(const RateReport& r);

SweepConfig sweep_config_from_json(const std::string& text);

}  // namespace geomhom
