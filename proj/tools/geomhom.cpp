#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "geomhom/cell_solver.hpp"
#include "geomhom/common.hpp"
#include "geomhom/evolution.hpp"
#include "geomhom/field.hpp"
#include "geomhom/operators.hpp"
#include "geomhom/oracles.hpp"
#include "geomhom/rate.hpp"

namespace {

using namespace geomhom;

nlohmann::json defaults_block(double h) {
    return {{"N", 256}, {"lambda", 1e-2}, {"eta", 0.0}, {"delta_g", h > 0 ? h : 0.0},
            {"tol", 1e-8}, {"cfl_safety", 0.4}};
}

ForcingField resolve_field(const std::string& spec, int N) {
    if (spec.rfind("builtin:", 0) == 0) return builtin_field(spec.substr(8), N);
    return load_field(spec);
}

std::array<double, 2> parse_vec2(const std::string& s) {
    const auto comma = s.find(',');
    if (comma == std::string::npos) throw InvalidInput("expected 'x,y'");
    return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(std::stod(item));
    return out;
}

OperatorSpec build_op(const std::string& op, const std::string& cspec, int field_N, double A,
                      double d, const std::string& pert, double eta) {
    Perturbation p;
    if (pert == "sup")
        p = {PerturbationKind::Sup, eta};
    else if (pert == "inf")
        p = {PerturbationKind::Inf, eta};
    else if (pert != "none")
        throw InvalidInput("--pert must be none|sup|inf");
    if (op == "mcf") return make_forced_mcf(resolve_field(cspec, field_N), p);
    if (op == "g") return make_curvature_g(d, A, p);
    throw InvalidInput("--op must be mcf|g");
}

InitialData parse_u0(const std::string& s) {
    InitialData d;
    if (s == "cone") {
        d.kind = InitialDataKind::Cone;
    } else if (s.rfind("vshape:", 0) == 0) {
        d.kind = InitialDataKind::VShape;
        d.alpha = std::stod(s.substr(7));
        d.A_set = {{1.0}, {-1.0}};
    } else if (s.rfind("plane:", 0) == 0) {
        d.kind = InitialDataKind::Plane;
        d.p = parse_vec2(s.substr(6));
    } else if (s.rfind("file:", 0) == 0) {
        d.kind = InitialDataKind::Custom;
        d.path = s.substr(5);
    } else {
        throw InvalidInput("--u0 must be cone | vshape:<alpha> | plane:<px,py> | file:<path>");
    }
    return d;
}

void write_json(const nlohmann::json& j, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << j.dump(2) << "\n";
        return;
    }
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write " + path);
    out << j.dump(2) << "\n";
}

long long now_unix() {
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"geomhom: periodic homogenization laboratory for geometric level-set equations"};
    app.require_subcommand(1);

    int threads = 0;
    if (const char* env = std::getenv("GEOMHOM_THREADS")) threads = std::atoi(env);
    app.add_option("--threads", threads, "cap on worker threads (default: GEOMHOM_THREADS or all)");
    std::uint64_t seed = 1;
    app.add_option("--seed", seed, "seed for randomized checks");

    // shared operator options
    std::string op_kind = "mcf", cspec = "builtin:const1", pert = "none";
    double A = 2.0, d = 0.1, eta = 0.0;
    int field_N = 256;

    auto add_op_flags = [&](CLI::App* cmd) {
        cmd->add_option("--op", op_kind, "operator family: mcf | g");
        cmd->add_option("--c", cspec, "forcing field: builtin:const1 | builtin:sin1 | <file.json>");
        cmd->add_option("--field-N", field_N, "builtin field sampling resolution");
        cmd->add_option("--A", A, "cellular flow intensity (g)");
        cmd->add_option("--d", d, "Markstein number (g)");
        cmd->add_option("--pert", pert, "shift perturbation: none | sup | inf");
        cmd->add_option("--eta", eta, "perturbation radius");
    };

    // cell
    auto* cell = app.add_subcommand("cell", "solve the discounted cell problem");
    std::string p_str = "1,0", out_path = "-";
    double lambda = 1e-2, tol = 1e-8, delta_g = 0;
    int N = 128;
    long max_steps = 2'000'000;
    add_op_flags(cell);
    cell->add_option("--p", p_str, "direction p as 'px,py'");
    cell->add_option("--lambda", lambda, "discount");
    cell->add_option("--N", N, "cell grid nodes per axis");
    cell->add_option("--tol", tol, "residual tolerance");
    cell->add_option("--max-steps", max_steps, "iteration cap");
    cell->add_option("--delta-g", delta_g, "curvature regularization (default h)");
    cell->add_option("--out", out_path, "output JSON path or - for stdout");

    // table
    auto* table_cmd = app.add_subcommand("table", "tabulate the effective Hamiltonian");
    int M = 16;
    double table_T = 40.0;
    std::string table_out = "table.json", table_cache;
    add_op_flags(table_cmd);
    table_cmd->add_option("--M", M, "number of directions (>= 16)");
    table_cmd->add_option("--lambda", lambda, "discount (mcf route)");
    table_cmd->add_option("--N", N, "cell grid nodes per axis");
    table_cmd->add_option("--tol", tol, "corrector tolerance");
    table_cmd->add_option("--T", table_T, "flatness horizon (g route)");
    table_cmd->add_option("--out", table_out, "output table path");
    table_cmd->add_option("--table", table_cache, "cache path to reuse if the spec hash matches");

    // evolve
    auto* evolve = app.add_subcommand("evolve", "evolve the eps-scale problem");
    double eps = 0.1, T = 0.5, measure = 0.5;
    std::string u0_str = "cone", snap_str, out_prefix = "evolve";
    bool csv_slice = false;
    add_op_flags(evolve);
    evolve->add_option("--eps", eps, "scale parameter");
    evolve->add_option("--u0", u0_str, "cone | vshape:<alpha> | plane:<px,py> | file:<path>");
    evolve->add_option("--T", T, "horizon");
    evolve->add_option("--measure", measure, "half-width of the kept region (box adds the buffer)");
    evolve->add_option("--snap", snap_str, "comma list of snapshot times");
    evolve->add_option("--delta-g", delta_g, "curvature regularization (default h)");
    evolve->add_option("--out", out_prefix, "snapshot path prefix");
    evolve->add_flag("--csv-slice", csv_slice, "also export the midline CSV slice");

    // radial
    auto* radial = app.add_subcommand("radial", "evolve the 1-d radial reduction");
    double r_max = 2.0;
    int rN = 4000;
    radial->add_option("--eps", eps, "scale parameter");
    radial->add_option("--rmax", r_max, "outer radius");
    radial->add_option("--T", T, "horizon");
    radial->add_option("--N", rN, "radial nodes");
    radial->add_option("--snap", snap_str, "comma list of snapshot times");
    radial->add_option("--out", out_path, "CSV output path or - for stdout");

    // oracle
    auto* oracle = app.add_subcommand("oracle", "closed-form reference values");
    std::string which = "lambertw", params;
    oracle->add_option("--which", which, "lambertw | radial | vshape");
    oracle->add_option("--params", params,
                       "lambertw: z,... ; radial: r,t,eps[,...]; vshape: x1,x2,t,alpha[,...]");

    // coercivity
    auto* coer = app.add_subcommand("coercivity", "audit the coercivity condition");
    int dim = 2;
    coer->add_option("--c", cspec, "forcing field");
    coer->add_option("--field-N", field_N, "builtin field sampling resolution");
    coer->add_option("--n", dim, "dimension");

    // rate
    auto* rate = app.add_subcommand("rate", "run an eps sweep and fit the rate");
    std::string config_path, rate_out = "report";
    rate->add_option("--config", config_path, "sweep config JSON")->required();
    rate->add_option("--out", rate_out, "output prefix (writes <prefix>.json and <prefix>.csv)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        set_thread_cap(threads);

        if (cell->parsed()) {
            OperatorSpec spec = build_op(op_kind, cspec, field_N, A, d, pert, eta);
            const auto p = parse_vec2(p_str);
            const Grid2 grid = Grid2::periodic_cell(N, spec.cell_period());
            CorrectorSolution sol =
                solve_approx_corrector(spec, p, lambda, grid, tol, max_steps, delta_g);
            nlohmann::json j;
            j["effective_estimate"] = sol.effective_estimate;
            j["effective_bracket"] = sol.effective_bracket;
            j["residual"] = sol.residual;
            j["amplitude"] = sol.amplitude;
            j["converged"] = sol.converged;
            j["steps"] = sol.steps;
            j["lambda"] = sol.lambda;
            j["eta"] = sol.eta;
            j["defaults"] = defaults_block(grid.h);
            j["generated_unix"] = now_unix();
            write_json(j, out_path);
            if (!sol.converged) return 1;
            return 0;
        }

        if (table_cmd->parsed()) {
            OperatorSpec spec = build_op(op_kind, cspec, field_N, A, d, pert, eta);
            const Grid2 grid = Grid2::periodic_cell(N, spec.cell_period());
            EffectiveHamiltonianTable t =
                build_effective_table(spec, M, lambda, grid, tol, table_T, table_cache);
            save_table(t, table_out);
            std::cout << "table: " << table_out << (t.complete() ? "" : " (partial)") << "\n";
            return t.complete() ? 0 : 1;
        }

        if (evolve->parsed()) {
            OperatorSpec spec = build_op(op_kind, cspec, field_N, A, d, pert, eta);
            InitialData u0d = parse_u0(u0_str);
            const double speed = spec.is_mcf()
                                     ? std::max(std::fabs(spec.mcf().c.min_value()),
                                                std::fabs(spec.mcf().c.max_value()))
                                     : 1.0 + spec.geq().V.A;
            const double buffer = 1.2 * speed * T;
            const double L = measure + buffer;
            const Grid2 g =
                Grid2::box(-L, -L, L, L, eps / 8, BoundaryRule::ExtrapolateLinear, buffer);
            GridFunction u0 = u0d.materialize(g);
            std::vector<double> snaps = snap_str.empty() ? std::vector<double>{T}
                                                         : parse_list(snap_str);
            EvolutionResult res = evolve_eps(spec, eps, u0, T, snaps, delta_g);
            int idx = 0;
            for (const auto& [t, u] : res.snapshots) {
                const std::string path = out_prefix + "_" + std::to_string(idx) + ".json";
                save_grid_function(u, t, path);
                if (csv_slice)
                    save_csv_slice(u, 1, u.grid.ny / 2,
                                   out_prefix + "_" + std::to_string(idx) + ".csv");
                std::cout << "snapshot t=" << t << ": " << path << "\n";
                ++idx;
            }
            return 0;
        }

        if (radial->parsed()) {
            std::vector<double> snaps = snap_str.empty() ? std::vector<double>{T}
                                                         : parse_list(snap_str);
            RadialResult res = evolve_radial(eps, r_max, T, rN, snaps);
            std::ostream* os = &std::cout;
            std::ofstream file;
            if (out_path != "-") {
                file.open(out_path);
                if (!file) throw InvalidInput("cannot write " + out_path);
                os = &file;
            }
            os->precision(12);
            *os << "t,r,phi\n";
            for (const auto& [t, phi] : res.snapshots)
                for (std::size_t k = 0; k < res.r.size(); ++k)
                    *os << t << "," << res.r[k] << "," << phi[k] << "\n";
            return 0;
        }

        if (oracle->parsed()) {
            const std::vector<double> xs = parse_list(params);
            std::cout.precision(15);
            if (which == "lambertw") {
                std::cout << "z,W\n";
                for (double z : xs) std::cout << z << "," << lambert_w(z) << "\n";
            } else if (which == "radial") {
                if (xs.size() % 3) throw InvalidInput("radial oracle wants r,t,eps triples");
                std::cout << "r,t,eps,phi\n";
                for (std::size_t k = 0; k < xs.size(); k += 3)
                    std::cout << xs[k] << "," << xs[k + 1] << "," << xs[k + 2] << ","
                              << radial_phi_eps(xs[k], xs[k + 1], xs[k + 2]) << "\n";
            } else if (which == "vshape") {
                if (xs.size() % 4) throw InvalidInput("vshape oracle wants x1,x2,t,alpha");
                std::cout << "x1,x2,t,alpha,u\n";
                for (std::size_t k = 0; k < xs.size(); k += 4)
                    std::cout << xs[k] << "," << xs[k + 1] << "," << xs[k + 2] << "," << xs[k + 3]
                              << ","
                              << vshape_effective({xs[k], xs[k + 1]}, xs[k + 2], xs[k + 3],
                                                  {{1.0}, {-1.0}})
                              << "\n";
            } else {
                throw InvalidInput("--which must be lambertw|radial|vshape");
            }
            return 0;
        }

        if (coer->parsed()) {
            ForcingField c = resolve_field(cspec, field_N);
            const double delta = check_coercivity(c, dim);
            std::cout << "delta_est=" << delta << (delta > 0 ? " (coercive)" : " (not coercive)")
                      << "\n";
            return 0;
        }

        if (rate->parsed()) {
            std::ifstream in(config_path);
            if (!in) throw InvalidInput("cannot read " + config_path);
            std::stringstream ss;
            ss << in.rdbuf();
            SweepConfig cfg = sweep_config_from_json(ss.str());
            RateReport report = run_sweep(cfg);
            nlohmann::json j = nlohmann::json::parse(report_to_json(report));
            j["defaults"] = defaults_block(0);
            j["generated_unix"] = now_unix();
            {
                std::ofstream out(rate_out + ".json");
                if (!out) throw InvalidInput("cannot write " + rate_out + ".json");
                out << j.dump(2) << "\n";
            }
            emit_report(report, rate_out + ".tmp.json", rate_out + ".csv");
            std::remove((rate_out + ".tmp.json").c_str());
            std::cout << "report: " << rate_out << ".json  exponent="
                      << (report.fit.valid ? report.fit.exponent : 0.0) << "\n";
            return 0;
        }
    } catch (const InvalidInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalFailure& e) {
        nlohmann::json diag{{"error", e.what()}};
        std::cerr << diag.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
