#include "geomhom/rate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "geomhom/oracles.hpp"
#include "json.hpp"

namespace geomhom {

double InitialData::eval(double x, double y) const {
    switch (kind) {
        case InitialDataKind::Cone:
            return -std::hypot(x, y);
        case InitialDataKind::VShape:
            return vshape_initial({x, y}, alpha, A_set);
        case InitialDataKind::Plane:
            return p[0] * x + p[1] * y;
        case InitialDataKind::Custom:
            throw InvalidInput("custom initial data has no analytic form");
    }
    throw InvalidInput("unknown initial data kind");
}

GridFunction InitialData::materialize(const Grid2& g) const {
    if (kind == InitialDataKind::Custom) {
        GridFunction file = grid_function_from_json([&] {
            std::ifstream in(path);
            if (!in) throw InvalidInput("cannot read " + path);
            std::stringstream ss;
            ss << in.rdbuf();
            return ss.str();
        }());
        GridFunction out(g);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) out.at(i, j) = file.sample(g.x(i), g.y(j));
        return out;
    }
    return make_grid_function(g, [&](double x, double y) { return eval(x, y); });
}

bool InitialData::positively_homogeneous() const {
    return kind == InitialDataKind::Cone || kind == InitialDataKind::VShape ||
           kind == InitialDataKind::Plane;
}

void SweepConfig::validate() const {
    if (eps_list.size() < 1) throw InvalidInput("sweep needs at least one eps");
    for (std::size_t k = 0; k < eps_list.size(); ++k) {
        if (!(eps_list[k] > 0 && eps_list[k] < 1))
            throw InvalidInput("eps values must lie in (0,1)");
        if (k > 0 && eps_list[k] >= eps_list[k - 1])
            throw InvalidInput("eps list must be strictly decreasing");
    }
    if (T <= 0) throw InvalidInput("sweep horizon must be positive");
    if (grid_divisor < 8) throw InvalidInput("grid policy must resolve eps (h <= eps/8)");
    op.validate();
}

RateFit fit_rate(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3) throw InvalidInput("fit_rate needs >= 3 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(points.size());
    for (auto [eps, err] : points) {
        if (!(eps > 0)) throw InvalidInput("fit_rate: eps must be positive");
        if (!(err > 0)) throw InvalidInput("fit_rate: errors must be positive");
        const double x = std::log(eps), y = std::log(err);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double var = sxx - sx * sx / n;
    if (var <= 1e-14) throw InvalidInput("fit_rate: degenerate eps set");
    RateFit fit;
    fit.exponent = (sxy - sx * sy / n) / var;
    fit.intercept = (sy - fit.exponent * sx) / n;
    fit.residual = 0;
    for (auto [eps, err] : points) {
        const double miss = std::log(err) - (fit.intercept + fit.exponent * std::log(eps));
        fit.residual = std::max(fit.residual, std::fabs(miss));
    }
    fit.valid = true;
    return fit;
}

namespace {

double operator_speed_bound(const OperatorSpec& spec) {
    if (spec.is_mcf()) {
        const auto& c = spec.mcf().c;
        return std::max(std::fabs(c.min_value()), std::fabs(c.max_value()));
    }
    return 1.0 + spec.geq().V.A;
}

std::optional<double> constant_force(const OperatorSpec& spec) {
    if (!spec.is_mcf()) return std::nullopt;
    const auto& c = spec.mcf().c;
    if (c.max_value() - c.min_value() < 1e-14) return c.max_value();
    return std::nullopt;
}

struct Reference {
    // closed form
    bool closed = false;
    double c0 = 1.0;
    InitialData u0;
    // table route: fine-grid effective snapshots
    std::vector<std::pair<double, GridFunction>> fine;

    GridFunction on_grid(const Grid2& g, double t, const InitialData&) const;
};

GridFunction Reference::on_grid(const Grid2& g, double t, const InitialData& data) const {
    GridFunction out(g);
    if (closed) {
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const double x = g.x(i), y = g.y(j);
                switch (data.kind) {
                    case InitialDataKind::Cone:
                        out.at(i, j) = cone_effective(x, y, t, c0);
                        break;
                    case InitialDataKind::VShape:
                        out.at(i, j) =
                            vshape_initial({x, y}, data.alpha, data.A_set) + c0 / std::sin(data.alpha) * t;
                        break;
                    case InitialDataKind::Plane: {
                        const double pn = std::hypot(data.p[0], data.p[1]);
                        out.at(i, j) = data.p[0] * x + data.p[1] * y + c0 * pn * t;
                        break;
                    }
                    default:
                        throw InvalidInput("closed-form reference needs analytic initial data");
                }
            }
        return out;
    }
    for (const auto& [ts, u] : fine)
        if (std::fabs(ts - t) <= 1e-9) {
            for (int j = 0; j < g.ny; ++j)
                for (int i = 0; i < g.nx; ++i) out.at(i, j) = u.sample(g.x(i), g.y(j));
            return out;
        }
    throw InvalidInput("reference has no snapshot at requested time");
}

}  // namespace

RateReport run_sweep(const SweepConfig& cfg) {
    cfg.validate();
    RateReport report;
    report.config_echo = cfg.config_echo;

    const double speed = operator_speed_bound(cfg.op);
    const double buffer = 1.2 * speed * cfg.T;
    const double L = cfg.measure_halfwidth + buffer;
    std::vector<double> snaps = cfg.snap_times.empty()
                                    ? std::vector<double>{cfg.T / 2, cfg.T}
                                    : cfg.snap_times;

    // reference: closed form where the force is constant, else the tabulated
    // effective Hamiltonian evolved once on a fine grid
    Reference ref;
    ref.u0 = cfg.u0;
    const auto c0 = constant_force(cfg.op);
    if (cfg.reference == ReferenceKind::ClosedForm) {
        if (!c0) throw InvalidInput("closed-form reference requires a constant force");
        ref.closed = true;
        ref.c0 = *c0;
    } else {
        EffectiveHamiltonianTable table =
            build_effective_table(cfg.op, cfg.table_M, cfg.table_lambda,
                                  Grid2::periodic_cell(cfg.table_N, cfg.op.cell_period()),
                                  cfg.table_tol, cfg.table_T, cfg.table_cache);
        if (!table.complete()) throw NumericalFailure("effective table is partial; sweep aborted");
        const double href = 2.0 * L / (cfg.ref_N - 1);
        const Grid2 fine = Grid2::box(-L, -L, L, L, href, BoundaryRule::ExtrapolateLinear, buffer);
        GridFunction u0f = cfg.u0.materialize(fine);
        EvolutionResult er = evolve_effective(table, u0f, cfg.T, snaps);
        for (const auto& s : er.snapshots)
            if (s.first > 0) ref.fine.push_back(s);
        report.notes.push_back("reference: effective table on " + std::to_string(cfg.ref_N) +
                               "^2 grid");
    }

    auto run_once = [&](double eps, double h, RatePoint& pt) {
        const Grid2 g = Grid2::box(-L, -L, L, L, h, BoundaryRule::ExtrapolateLinear, buffer);
        GridFunction u0 = cfg.u0.materialize(g);
        EvolutionResult er = evolve_eps(cfg.op, eps, u0, cfg.T, snaps);
        double worst = 0;
        for (double t : snaps) {
            const GridFunction& ue = er.at_time(t);
            GridFunction ur = ref.on_grid(g, t, cfg.u0);
            Mask mask = Mask::buffer(g, buffer);
            if (cfg.u0.kind == InitialDataKind::Cone) {
                mask = mask.exclude_radial_tube(t * (ref.closed ? ref.c0 : 1.0), 3 * h);
                if (!ref.closed) {
                    // the table reference smears its own kink; widen the cut to
                    // the reference value band swept by that layer
                    const double band = 3 * std::max(h, 4 * std::sqrt(ur.grid.h * t)) * speed;
                    mask = mask.exclude_value_band(ur, band);
                }
            }
            worst = std::max(worst, sup_norm_diff(ue, ur, mask));
            if (cfg.u0.kind == InitialDataKind::Cone && std::fabs(t - cfg.T) < 1e-12) {
                // error on the ring |x| = t, where the slow-rate bound lives
                double front = 0;
                const double rt = t * (ref.closed ? ref.c0 : 1.0);
                for (int j = 0; j < g.ny; ++j)
                    for (int i = 0; i < g.nx; ++i) {
                        const double r = std::hypot(g.x(i), g.y(j));
                        if (std::fabs(r - rt) <= h)
                            front = std::max(front, std::fabs(ue.at(i, j) - ur.at(i, j)));
                    }
                pt.error_at_front = front;
            }
        }
        return worst;
    };

    for (double eps : cfg.eps_list) {
        RatePoint pt;
        pt.eps = eps;
        pt.h = eps / cfg.grid_divisor;
        const auto tic = std::chrono::steady_clock::now();
        pt.error = run_once(eps, pt.h, pt);
        if (cfg.refinement_control) {
            RatePoint scratch;
            pt.error_refined = run_once(eps, pt.h / 2, scratch);
            const double rel = std::fabs(pt.error - pt.error_refined) /
                               std::max(1e-300, std::max(pt.error, pt.error_refined));
            if (rel > 0.2) pt.flags.push_back("discretization-dominated");
        }
        pt.runtime_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - tic).count();
        if (pt.error <= 5 * pt.h) pt.flags.push_back("scheme-noise regime");
        if (cfg.u0.kind == InitialDataKind::Cone && c0) {
            const double tmin = *c0 > 0 ? cfg.T : 0;
            if (tmin > eps * (1 + std::exp(-1.0)))
                pt.lower_bound = lower_bound_value(eps, cfg.T);
        }
        report.points.push_back(std::move(pt));
    }

    // error monotonicity in eps, allowing one inversion within 10%
    report.inversions = 0;
    bool hard_violation = false;
    for (std::size_t k = 1; k < report.points.size(); ++k) {
        const double prev = report.points[k - 1].error, cur = report.points[k].error;
        if (cur >= prev) {
            ++report.inversions;
            if (cur > 1.10 * prev) hard_violation = true;
        }
    }
    report.monotone_ok = !hard_violation && report.inversions <= 1;

    std::vector<std::pair<double, double>> clean;
    for (const auto& pt : report.points) {
        const bool excluded =
            std::find(pt.flags.begin(), pt.flags.end(), "discretization-dominated") !=
            pt.flags.end();
        if (!excluded && pt.error > 0) clean.push_back({pt.eps, pt.error});
    }
    if (clean.size() >= 3) {
        report.fit = fit_rate(clean);
    } else if (report.points.size() >= 3) {
        std::vector<std::pair<double, double>> all;
        for (const auto& pt : report.points) all.push_back({pt.eps, pt.error});
        report.fit = fit_rate(all);
        report.notes.push_back("fit-contaminated: fewer than 3 clean points, fitted all");
    } else {
        report.notes.push_back("fit skipped: fewer than 3 points");
    }
    bool all_noise = true;
    for (const auto& pt : report.points)
        if (std::find(pt.flags.begin(), pt.flags.end(), "scheme-noise regime") == pt.flags.end())
            all_noise = false;
    if (all_noise) report.notes.push_back("all points in scheme-noise regime; exponent meaningless");
    return report;
}

std::string report_to_json(const RateReport& r) {
    nlohmann::json j;
    j["config"] = r.config_echo.empty() ? nlohmann::json::object()
                                        : nlohmann::json::parse(r.config_echo);
    j["points"] = nlohmann::json::array();
    for (const auto& pt : r.points) {
        nlohmann::json p;
        p["eps"] = pt.eps;
        p["h"] = pt.h;
        p["error"] = pt.error;
        if (pt.error_refined >= 0) p["error_refined"] = pt.error_refined;
        if (pt.error_at_front >= 0) p["error_at_front"] = pt.error_at_front;
        if (pt.lower_bound >= 0) p["lower_bound"] = pt.lower_bound;
        p["runtime_s"] = pt.runtime_s;
        p["flags"] = pt.flags;
        j["points"].push_back(p);
    }
    j["fit"] = {{"exponent", r.fit.exponent},
                {"intercept", r.fit.intercept},
                {"residual", r.fit.residual},
                {"valid", r.fit.valid}};
    j["monotone_ok"] = r.monotone_ok;
    j["inversions"] = r.inversions;
    j["notes"] = r.notes;
    return j.dump(2);
}

void emit_report(const RateReport& r, const std::string& json_path, const std::string& csv_path) {
    if (r.points.empty()) throw InvalidInput("emit_report: empty sweep");
    {
        std::ofstream out(json_path);
        if (!out) throw InvalidInput("cannot write " + json_path);
        out << report_to_json(r) << "\n";
    }
    std::ofstream csv(csv_path);
    if (!csv) throw InvalidInput("cannot write " + csv_path);
    csv.precision(17);
    csv << "eps,error,h,flags\n";
    for (const auto& pt : r.points) {
        csv << pt.eps << "," << pt.error << "," << pt.h << ",";
        for (std::size_t k = 0; k < pt.flags.size(); ++k) {
            if (k) csv << ";";
            csv << pt.flags[k];
        }
        csv << "\n";
    }
}

SweepConfig sweep_config_from_json(const std::string& text) {
    try {
        nlohmann::json j = nlohmann::json::parse(text);
        SweepConfig cfg;

        const auto& opj = j.at("operator");
        const std::string kind = opj.at("kind").get<std::string>();
        if (kind == "mcf") {
            const std::string cspec = opj.value("c", "builtin:const1");
            ForcingField c = cspec.rfind("builtin:", 0) == 0
                                 ? builtin_field(cspec.substr(8), opj.value("field_N", 256))
                                 : load_field(cspec);
            cfg.op = make_forced_mcf(std::move(c));
        } else if (kind == "g") {
            cfg.op = make_curvature_g(opj.value("d", 0.1), opj.value("A", 2.0));
        } else {
            throw InvalidInput("operator.kind must be 'mcf' or 'g'");
        }

        const auto& u0j = j.at("u0");
        const std::string dk = u0j.at("kind").get<std::string>();
        if (dk == "cone") {
            cfg.u0.kind = InitialDataKind::Cone;
        } else if (dk == "vshape") {
            cfg.u0.kind = InitialDataKind::VShape;
            cfg.u0.alpha = u0j.value("alpha", std::acos(-1.0) / 4);
            cfg.u0.A_set = {{1.0}, {-1.0}};
        } else if (dk == "plane") {
            cfg.u0.kind = InitialDataKind::Plane;
            const auto pv = u0j.value("p", std::vector<double>{1.0, 0.0});
            cfg.u0.p = {pv.at(0), pv.at(1)};
        } else if (dk == "custom") {
            cfg.u0.kind = InitialDataKind::Custom;
            cfg.u0.path = u0j.at("path").get<std::string>();
        } else {
            throw InvalidInput("u0.kind must be cone|vshape|plane|custom");
        }

        cfg.eps_list = j.at("eps_list").get<std::vector<double>>();
        cfg.T = j.at("T").get<double>();
        cfg.grid_divisor = j.value("grid_divisor", 8.0);
        cfg.refinement_control = j.value("refinement_control", true);
        cfg.measure_halfwidth = j.value("measure_halfwidth", 0.5);
        cfg.snap_times = j.value("snap_times", std::vector<double>{});
        const std::string refk = j.value("reference", "closed-form");
        if (refk == "closed-form")
            cfg.reference = ReferenceKind::ClosedForm;
        else if (refk == "table")
            cfg.reference = ReferenceKind::EffectiveTable;
        else
            throw InvalidInput("reference must be 'closed-form' or 'table'");
        cfg.table_M = j.value("table_M", 16);
        cfg.table_lambda = j.value("table_lambda", 1e-2);
        cfg.table_N = j.value("table_N", 64);
        cfg.table_tol = j.value("table_tol", 1e-6);
        cfg.table_T = j.value("table_T", 40.0);
        cfg.ref_N = j.value("ref_N", 1024);
        cfg.table_cache = j.value("table_cache", std::string{});
        cfg.seed = j.value("seed", 0ull);
        cfg.config_echo = j.dump();
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("sweep config: ") + e.what());
    }
}

}  // namespace geomhom
