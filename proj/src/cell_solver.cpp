#include "geomhom/cell_solver.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "geomhom/stencils.hpp"
#include "json.hpp"

namespace geomhom {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_cell_grid(const OperatorSpec& spec, const Grid2& grid) {
    if (!grid.periodic) throw InvalidInput("cell problems live on periodic grids");
    const double want = spec.cell_period();
    if (std::fabs(grid.period() - want) > 1e-9 * want)
        throw InvalidInput("grid period does not match the operator cell (periods are not rescaled)");
}

/// Discrete cell operator F_h[w] at gradient p + Dw, assembled from the grid
/// primitives. The pseudo-time dynamics w_t = -(lambda w + F_h[w]) stay
/// monotone under the cfl_timestep bound.
class CellOperator {
  public:
    CellOperator(const OperatorSpec& spec, const std::array<double, 2>& p, const Grid2& grid,
                 double delta_g)
        : spec_(spec), op_(spec), p_(p), grid_(grid) {
        check_cell_grid(spec, grid);
        delta_g_ = delta_g > 0 ? delta_g : grid.h;
        if (spec_.is_mcf()) {
            const ForcingField& c = op_.effective_field();
            c_node_.resize(grid.size());
            for (int j = 0; j < grid.ny; ++j)
                for (int i = 0; i < grid.nx; ++i)
                    c_node_[idx(i, j)] = c.eval(grid.x(i), grid.y(j));
            speed_ = 0;
            for (double v : c_node_) speed_ = std::max(speed_, std::fabs(v));
            curvature_coef_ = 1.0;
        } else {
            const FlowField& V = spec_.geq().V;
            v1_node_.resize(grid.size());
            v2_node_.resize(grid.size());
            for (int j = 0; j < grid.ny; ++j)
                for (int i = 0; i < grid.nx; ++i) {
                    double a, b;
                    V.eval(grid.x(i), grid.y(j), a, b);
                    v1_node_[idx(i, j)] = a;
                    v2_node_[idx(i, j)] = b;
                }
            if (spec_.perturbation.kind != PerturbationKind::None && spec_.perturbation.eta > 0) {
                // the only y-dependence of the G operator is V(y).q; the shift
                // extremum reduces to an extremum of that dot product
                const double eta = spec_.perturbation.eta;
                const int nr = 4, na = 16;
                for (int k = 1; k <= nr; ++k)
                    for (int a = 0; a < na; ++a) {
                        const double r = eta * k / nr, th = kTwoPi * a / na;
                        shifts_.push_back({r * std::cos(th), r * std::sin(th)});
                    }
            }
            speed_ = 1.0 + spec_.geq().V.A;
            curvature_coef_ = spec_.geq().d;
        }
    }

    double curvature_coef() const { return curvature_coef_; }
    double speed() const { return speed_; }
    double delta_g() const { return delta_g_; }

    void apply(const GridFunction& w, std::vector<double>& out) const {
        const int nx = grid_.nx, ny = grid_.ny;
        if (spec_.is_mcf()) {
#pragma omp parallel for schedule(static)
            for (int j = 0; j < ny; ++j)
                for (int i = 0; i < nx; ++i) {
                    const double cv = c_node_[idx(i, j)];
                    const int sign = cv >= 0 ? +1 : -1;
                    const double g = stencil::rt_gradient_norm_at(w, i, j, sign, p_);
                    const double curv = stencil::curvature_term_at(w, i, j, delta_g_, p_);
                    out[idx(i, j)] = -curv - cv * g;
                }
        } else {
            const double d = spec_.geq().d;
            const bool sup = spec_.perturbation.kind == PerturbationKind::Sup;
#pragma omp parallel for schedule(static)
            for (int j = 0; j < ny; ++j)
                for (int i = 0; i < nx; ++i) {
                    const double g = stencil::rt_gradient_norm_at(w, i, j, -1, p_);
                    const double curv = stencil::curvature_term_at(w, i, j, delta_g_, p_);
                    double adv =
                        stencil::advect_at(w, i, j, v1_node_[idx(i, j)], v2_node_[idx(i, j)], p_);
                    if (!shifts_.empty()) {
                        const FlowField& V = spec_.geq().V;
                        for (const auto& e : shifts_) {
                            double a, b;
                            V.eval(grid_.x(i) + e[0], grid_.y(j) + e[1], a, b);
                            const double cand = stencil::advect_at(w, i, j, a, b, p_);
                            adv = sup ? std::max(adv, cand) : std::min(adv, cand);
                        }
                    }
                    out[idx(i, j)] = std::max(g - d * curv, 0.0) + adv;
                }
        }
    }

  private:
    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(j) * grid_.nx + i; }

    OperatorSpec spec_;
    Operator op_;
    std::array<double, 2> p_;
    Grid2 grid_;
    double delta_g_ = 0, speed_ = 0, curvature_coef_ = 0;
    std::vector<double> c_node_, v1_node_, v2_node_;
    std::vector<std::array<double, 2>> shifts_;
};

struct LevelOutcome {
    bool converged = false;
    long steps = 0;
    double residual = 0;
    double tau = 0;
};

LevelOutcome relax_level(const CellOperator& cell, double lambda, GridFunction& w, double tol,
                         long max_steps) {
    const double tau = cfl_timestep(cell.curvature_coef(), cell.speed(), w.grid.h, 2, lambda);
    std::vector<double> F(w.v.size());
    LevelOutcome out;
    out.tau = tau;
    double res_min = std::numeric_limits<double>::infinity();
    const std::size_t n = w.v.size();
    for (long it = 0; it < max_steps; ++it) {
        cell.apply(w, F);
        double res = 0;
        for (std::size_t k = 0; k < n; ++k) res = std::max(res, std::fabs(lambda * w.v[k] + F[k]));
        out.residual = res;
        out.steps = it;
        if (!std::isfinite(res) || (it > 32 && res > 10.0 * res_min)) {
            std::ostringstream msg;
            msg << "corrector iteration diverged (lambda=" << lambda << ", tau=" << tau
                << ", residual=" << res << ")";
            throw NumericalFailure(msg.str());
        }
        res_min = std::min(res_min, res);
        if (res <= tol) {
            out.converged = true;
            return out;
        }
        // explicit damped step, then pin the mean mode exactly:
        // F_h ignores constants, so at the fixed point mean(w) = -mean(F)/lambda
        const double meanF = det_sum(F) / static_cast<double>(n);
#pragma omp parallel for schedule(static)
        for (std::size_t k = 0; k < n; ++k) w.v[k] -= tau * (lambda * w.v[k] + F[k]);
        const double target_mean = -meanF / lambda;
        const double shift = target_mean - w.mean();
#pragma omp parallel for schedule(static)
        for (std::size_t k = 0; k < n; ++k) w.v[k] += shift;
    }
    return out;
}

GridFunction prolong_periodic(const GridFunction& coarse, const Grid2& fine) {
    GridFunction out(fine);
    for (int j = 0; j < fine.ny; ++j)
        for (int i = 0; i < fine.nx; ++i) out.at(i, j) = coarse.sample(fine.x(i), fine.y(j));
    return out;
}

}  // namespace

CorrectorSolution solve_approx_corrector(const OperatorSpec& spec, const std::array<double, 2>& p,
                                         double lambda, const Grid2& grid, double tol,
                                         long max_steps, double delta_g) {
    if (lambda <= 0) throw InvalidInput("discount lambda must be positive");
    if (grid.nx < 64) throw InvalidInput("corrector grid must resolve the field (N >= 64)");
    check_cell_grid(spec, grid);

    // cascadic warm start: solve coarsened copies of the same problem first
    std::vector<int> levels{grid.nx};
    while (levels.back() / 2 >= 16 && levels.back() % 2 == 0) levels.push_back(levels.back() / 2);
    std::reverse(levels.begin(), levels.end());

    CorrectorSolution sol;
    sol.p = p;
    sol.lambda = lambda;
    sol.eta = spec.perturbation.kind == PerturbationKind::None ? 0.0 : spec.perturbation.eta;

    GridFunction w(Grid2::periodic_cell(levels.front(), grid.period()));
    long total_steps = 0;
    for (std::size_t li = 0; li < levels.size(); ++li) {
        const Grid2 g = Grid2::periodic_cell(levels[li], grid.period());
        if (li > 0) w = prolong_periodic(w, g);
        // delta_g tracks each level's spacing unless the caller pinned it
        const double dg = delta_g > 0 ? delta_g : g.h;
        CellOperator cell(spec, p, g, dg);
        const bool finest = li + 1 == levels.size();
        LevelOutcome lo = relax_level(cell, lambda, w, tol, max_steps);
        total_steps += lo.steps;
        if (finest) {
            sol.converged = lo.converged;
            sol.residual = lo.residual;
            sol.tau = lo.tau;
        }
    }

    sol.w = w;
    sol.steps = total_steps;
    sol.amplitude = w.max_value() - w.min_value();
    sol.effective_estimate = -lambda * w.mean();
    sol.effective_bracket = {-lambda * w.max_value(), -lambda * w.min_value()};
    return sol;
}

std::pair<double, std::array<double, 2>> effective_value(const CorrectorSolution& sol) {
    if (!sol.converged) {
        std::ostringstream msg;
        msg << "effective_value: corrector did not converge (residual=" << sol.residual
            << ", lambda=" << sol.lambda << ", steps=" << sol.steps << ")";
        throw NumericalFailure(msg.str());
    }
    return {sol.effective_estimate, sol.effective_bracket};
}

FlatnessResult solve_flatness(const OperatorSpec& spec, const std::array<double, 2>& p, double T,
                              const Grid2& grid, double delta_g) {
    if (T <= 0) throw InvalidInput("flatness horizon must be positive");
    CellOperator cell(spec, p, grid, delta_g);
    const double dt0 = cfl_timestep(cell.curvature_coef(), cell.speed(), grid.h, 2);

    GridFunction v(grid, 0.0);
    std::vector<double> F(v.v.size());
    const std::size_t n = v.v.size();

    FlatnessResult res;
    res.T = T;

    // march v_t = -F_h[v], recording the mean at T/2 and T and the oscillation
    // at ~32 checkpoints for the boundedness diagnostic
    const int checkpoints = 32;
    double mean_half = 0;
    double t = 0;
    int next_cp = 1;
    while (t < T - 1e-13) {
        double dt = std::min(dt0, T - t);
        const double t_cp = T * next_cp / checkpoints;
        if (t + dt > t_cp - 1e-13 && t < t_cp - 1e-13) dt = t_cp - t;
        cell.apply(v, F);
#pragma omp parallel for schedule(static)
        for (std::size_t k = 0; k < n; ++k) v.v[k] -= dt * F[k];
        t += dt;
        if (std::fabs(t - t_cp) <= 1e-12 * std::max(1.0, T)) {
            const double osc = v.max_value() - v.min_value();
            res.oscillation_series.push_back({t, osc});
            if (!std::isfinite(osc)) throw NumericalFailure("flatness evolution blew up");
            if (next_cp == checkpoints / 2) mean_half = v.mean();
            ++next_cp;
        }
    }
    const double mean_T = v.mean();
    res.estimate = -(mean_T - mean_half) / (T / 2);
    res.oscillation_at_T = v.max_value() - v.min_value();

    // linear growth of the oscillation across dyadic windows marks failed flatness
    double w1 = 0, w2 = 0;
    for (const auto& [tc, osc] : res.oscillation_series) {
        if (tc > T / 4 && tc <= T / 2) w1 = std::max(w1, osc);
        if (tc > T / 2) w2 = std::max(w2, osc);
    }
    res.flatness_suspect = w2 > 1.5 * w1 + 1e-9;
    return res;
}

bool EffectiveHamiltonianTable::complete() const {
    if (directions.empty()) return false;
    for (auto f : valid)
        if (!f) return false;
    return true;
}

double EffectiveHamiltonianTable::eval(double px, double py) const {
    const double pn = std::hypot(px, py);
    if (pn == 0) return 0.0;
    if (directions.empty()) throw InvalidInput("effective table is empty");
    const int M = static_cast<int>(directions.size());
    double th = std::atan2(py, px);
    if (th < 0) th += kTwoPi;
    const double pos = th / (kTwoPi / M);
    const int k0 = static_cast<int>(std::floor(pos)) % M;
    const int k1 = (k0 + 1) % M;
    if (!valid[k0] || !valid[k1])
        throw InvalidInput("effective table incomplete in the queried arc");
    const double a = pos - std::floor(pos);
    return pn * ((1 - a) * values[k0] + a * values[k1]);
}

EffectiveHamiltonianTable constant_table(double value, int M) {
    EffectiveHamiltonianTable t;
    t.spec_hash = "constant";
    for (int k = 0; k < M; ++k) {
        t.directions.push_back(kTwoPi * k / M);
        t.values.push_back(value);
        t.valid.push_back(1);
    }
    t.metadata["constant"] = value;
    return t;
}

EffectiveHamiltonianTable build_effective_table(const OperatorSpec& spec, int M, double lambda,
                                                const Grid2& grid, double tol, double T_flatness,
                                                const std::string& cache_path) {
    if (M < 16) throw InvalidInput("effective table needs M >= 16 directions");
    const std::string hash = spec.content_hash();
    if (!cache_path.empty() && std::filesystem::exists(cache_path)) {
        EffectiveHamiltonianTable cached = load_table(cache_path);
        if (cached.spec_hash == hash && static_cast<int>(cached.directions.size()) == M)
            return cached;
    }

    EffectiveHamiltonianTable t;
    t.spec_hash = hash;
    t.metadata["lambda"] = lambda;
    t.metadata["eta"] = spec.perturbation.kind == PerturbationKind::None ? 0.0 : spec.perturbation.eta;
    t.metadata["N"] = grid.nx;
    t.metadata["T"] = T_flatness;
    for (int k = 0; k < M; ++k) {
        const double th = kTwoPi * k / M;
        const std::array<double, 2> p{std::cos(th), std::sin(th)};
        t.directions.push_back(th);
        try {
            if (spec.is_mcf()) {
                CorrectorSolution sol = solve_approx_corrector(spec, p, lambda, grid, tol);
                if (!sol.converged) throw NumericalFailure("direction did not converge");
                t.values.push_back(sol.effective_estimate);
                t.metadata["residual_" + std::to_string(k)] = sol.residual;
            } else {
                FlatnessResult fr = solve_flatness(spec, p, T_flatness, grid);
                t.values.push_back(fr.estimate);
                t.metadata["oscillation_" + std::to_string(k)] = fr.oscillation_at_T;
            }
            t.valid.push_back(1);
        } catch (const NumericalFailure&) {
            t.values.push_back(0.0);
            t.valid.push_back(0);
        }
    }
    if (!cache_path.empty()) save_table(t, cache_path);
    return t;
}

std::string table_to_json(const EffectiveHamiltonianTable& t) {
    nlohmann::json j;
    j["spec_hash"] = t.spec_hash;
    j["directions"] = t.directions;
    j["values"] = t.values;
    j["valid"] = t.valid;
    j["metadata"] = t.metadata;
    return j.dump();
}

EffectiveHamiltonianTable table_from_json(const std::string& text) {
    try {
        nlohmann::json j = nlohmann::json::parse(text);
        EffectiveHamiltonianTable t;
        t.spec_hash = j.at("spec_hash").get<std::string>();
        t.directions = j.at("directions").get<std::vector<double>>();
        t.values = j.at("values").get<std::vector<double>>();
        t.valid = j.at("valid").get<std::vector<std::uint8_t>>();
        t.metadata = j.at("metadata").get<std::map<std::string, double>>();
        if (t.values.size() != t.directions.size() || t.valid.size() != t.directions.size())
            throw InvalidInput("table JSON: inconsistent array lengths");
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("table JSON: ") + e.what());
    }
}

void save_table(const EffectiveHamiltonianTable& t, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write " + path);
    out << table_to_json(t) << "\n";
}

EffectiveHamiltonianTable load_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return table_from_json(ss.str());
}

}  // namespace geomhom
