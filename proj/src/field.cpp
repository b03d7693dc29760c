#include "geomhom/field.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "json.hpp"

namespace geomhom {

namespace {
inline int wrap(int i, int N) {
    int r = i % N;
    return r < 0 ? r + N : r;
}
}  // namespace

ForcingField::ForcingField(int N_, double period_, std::vector<double> values_)
    : N(N_), period(period_), values(std::move(values_)) {
    if (N < 4) throw InvalidInput("ForcingField: lattice too coarse (N < 4)");
    if (period <= 0) throw InvalidInput("ForcingField: period must be positive");
    if (static_cast<int>(values.size()) != N * N)
        throw InvalidInput("ForcingField: values size does not match N*N");
    for (double v : values)
        if (!std::isfinite(v)) throw InvalidInput("ForcingField: non-finite sample");
    const double hh = h();
    double lip = 0.0;
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) {
            const double c0 = at(i, j);
            lip = std::max(lip, std::fabs(at(i + 1, j) - c0) / hh);
            lip = std::max(lip, std::fabs(at(i, j + 1) - c0) / hh);
        }
    lipschitz_bound = lip;
}

double ForcingField::at(int i, int j) const { return values[wrap(j, N) * N + wrap(i, N)]; }

double ForcingField::eval(double y1, double y2) const {
    const double hh = h();
    double s = y1 / hh, t = y2 / hh;
    const double fs = std::floor(s), ft = std::floor(t);
    const int i = static_cast<int>(fs), j = static_cast<int>(ft);
    const double a = s - fs, b = t - ft;
    return (1 - a) * (1 - b) * at(i, j) + a * (1 - b) * at(i + 1, j) +
           (1 - a) * b * at(i, j + 1) + a * b * at(i + 1, j + 1);
}

double ForcingField::min_value() const { return *std::min_element(values.begin(), values.end()); }
double ForcingField::max_value() const { return *std::max_element(values.begin(), values.end()); }

ForcingField sample_field(int N, double period, double (*f)(double, double)) {
    std::vector<double> v(static_cast<std::size_t>(N) * N);
    const double h = period / N;
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) v[j * N + i] = f(i * h, j * h);
    return ForcingField(N, period, std::move(v));
}

ForcingField builtin_field(const std::string& name, int N) {
    if (name == "const1")
        return sample_field(N, 1.0, [](double, double) { return 1.0; });
    if (name == "sin1")
        return sample_field(N, 1.0, [](double y1, double) {
            return 2.0 + 0.25 * std::sin(2.0 * std::numbers::pi * y1);
        });
    throw InvalidInput("unknown builtin field: " + name);
}

namespace {
ForcingField ball_extremum(const ForcingField& c, double eta, bool take_max) {
    if (eta < 0) throw InvalidInput("perturbation radius must be nonnegative");
    if (eta > 0.5 * c.period) throw InvalidInput("perturbation exceeds cell");
    const double h = c.h();
    const int R = static_cast<int>(std::floor(eta / h));
    std::vector<double> out(c.values.size());
    for (int j = 0; j < c.N; ++j)
        for (int i = 0; i < c.N; ++i) {
            double best = c.at(i, j);  // di = dj = 0 always included
            for (int dj = -R; dj <= R; ++dj)
                for (int di = -R; di <= R; ++di) {
                    if (static_cast<double>(di) * di + static_cast<double>(dj) * dj > (eta / h) * (eta / h))
                        continue;
                    const double v = c.at(i + di, j + dj);
                    best = take_max ? std::max(best, v) : std::min(best, v);
                }
            out[j * c.N + i] = best;
        }
    return ForcingField(c.N, c.period, std::move(out));
}
}  // namespace

ForcingField dilate_field(const ForcingField& c, double eta) { return ball_extremum(c, eta, true); }
ForcingField erode_field(const ForcingField& c, double eta) { return ball_extremum(c, eta, false); }

double check_coercivity(const ForcingField& c, int n) {
    if (n < 2) throw InvalidInput("dimension must be >= 2");
    const double h = c.h();
    double worst = std::numeric_limits<double>::infinity();
    for (int j = 0; j < c.N; ++j)
        for (int i = 0; i < c.N; ++i) {
            const double d1 = (c.at(i + 1, j) - c.at(i - 1, j)) / (2 * h);
            const double d2 = (c.at(i, j + 1) - c.at(i, j - 1)) / (2 * h);
            const double grad = std::sqrt(d1 * d1 + d2 * d2);
            const double v = c.at(i, j);
            worst = std::min(worst, v * v - (n - 1) * grad);
        }
    return worst;
}

void FlowField::eval(double x1, double x2, double& v1, double& v2) const {
    v1 = -A * std::cos(x2) * std::sin(x1);
    v2 = A * std::cos(x1) * std::sin(x2);
}

double FlowField::divergence(double x1, double x2) const {
    return -A * std::cos(x2) * std::cos(x1) + A * std::cos(x1) * std::cos(x2);
}

std::string field_to_json(const ForcingField& c) {
    nlohmann::json j;
    j["period"] = c.period;
    j["shape"] = {c.N, c.N};
    j["values"] = c.values;
    return j.dump();
}

ForcingField field_from_json(const std::string& text) {
    try {
        nlohmann::json j = nlohmann::json::parse(text);
        const auto shape = j.at("shape").get<std::vector<int>>();
        if (shape.size() != 2 || shape[0] != shape[1])
            throw InvalidInput("field JSON: shape must be [N,N]");
        return ForcingField(shape[0], j.at("period").get<double>(),
                            j.at("values").get<std::vector<double>>());
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("field JSON: ") + e.what());
    }
}

void save_field(const ForcingField& c, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write " + path);
    out << field_to_json(c) << "\n";
}

ForcingField load_field(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return field_from_json(ss.str());
}

}  // namespace geomhom
