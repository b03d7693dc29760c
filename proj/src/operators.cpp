#include "geomhom/operators.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace geomhom {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double norm(const std::vector<double>& p) {
    double s = 0;
    for (double x : p) s += x * x;
    return std::sqrt(s);
}

// tr{(I - p^ x p^) X} = tr X - p^' X p^
double projected_trace(const std::vector<double>& X, const std::vector<double>& p, double pn) {
    const int n = static_cast<int>(p.size());
    double tr = 0, quad = 0;
    for (int i = 0; i < n; ++i) {
        tr += X[i * n + i];
        for (int j = 0; j < n; ++j) quad += p[i] * X[i * n + j] * p[j];
    }
    return tr - quad / (pn * pn);
}

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h) {
    const auto* b = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= b[i];
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t hash_double(double x, std::uint64_t h) { return fnv1a(&x, sizeof(x), h); }

// uniform in [0,1), identical across platforms for a given engine state
double u01(std::mt19937_64& eng) { return (eng() >> 11) * 0x1.0p-53; }
double uab(std::mt19937_64& eng, double a, double b) { return a + (b - a) * u01(eng); }

}  // namespace

double OperatorSpec::cell_period() const { return is_mcf() ? mcf().c.period : kTwoPi; }

void OperatorSpec::validate() const {
    if (dim < 2) throw InvalidInput("operator dimension must be >= 2");
    if (perturbation.eta < 0) throw InvalidInput("perturbation radius must be nonnegative");
    if (!is_mcf()) {
        if (geq().d <= 0) throw InvalidInput("Markstein number d must be positive");
        if (dim != 2) throw InvalidInput("curvature G operator is two dimensional");
    }
}

std::string OperatorSpec::content_hash() const {
    std::uint64_t h = 1469598103934665603ull;
    if (is_mcf()) {
        h = fnv1a("mcf", 3, h);
        h = hash_double(mcf().c.period, h);
        h = hash_double(static_cast<double>(mcf().c.N), h);
        h = fnv1a(mcf().c.values.data(), mcf().c.values.size() * sizeof(double), h);
    } else {
        h = fnv1a("geq", 3, h);
        h = hash_double(geq().d, h);
        h = hash_double(geq().V.A, h);
    }
    h = hash_double(static_cast<double>(perturbation.kind), h);
    h = hash_double(perturbation.eta, h);
    h = hash_double(static_cast<double>(dim), h);
    std::ostringstream ss;
    ss << std::hex << h;
    return ss.str();
}

OperatorSpec make_forced_mcf(ForcingField c, Perturbation pert, int dim) {
    OperatorSpec s{ForcedMcf{std::move(c)}, pert, dim};
    s.validate();
    return s;
}

OperatorSpec make_curvature_g(double d, double A, Perturbation pert) {
    OperatorSpec s{CurvatureG{d, FlowField{A}}, pert, 2};
    s.validate();
    return s;
}

Operator::Operator(OperatorSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    const auto& pert = spec_.perturbation;
    if (spec_.is_mcf()) {
        // sup of F over shifts lowers c (erosion); inf of F raises it (dilation)
        if (pert.kind == PerturbationKind::Sup && pert.eta > 0)
            c_eff_ = std::make_shared<ForcingField>(erode_field(spec_.mcf().c, pert.eta));
        else if (pert.kind == PerturbationKind::Inf && pert.eta > 0)
            c_eff_ = std::make_shared<ForcingField>(dilate_field(spec_.mcf().c, pert.eta));
        else
            c_eff_ = std::make_shared<ForcingField>(spec_.mcf().c);
    } else if (pert.kind != PerturbationKind::None && pert.eta > 0) {
        shift_ball_.push_back({0.0, 0.0});
        const int nr = 4, na = 16;
        for (int k = 1; k <= nr; ++k)
            for (int a = 0; a < na; ++a) {
                const double r = pert.eta * k / nr;
                const double th = kTwoPi * a / na;
                shift_ball_.push_back({r * std::cos(th), r * std::sin(th)});
            }
    }
}

const ForcingField& Operator::effective_field() const {
    if (!c_eff_) throw InvalidInput("effective_field: operator has no forcing field");
    return *c_eff_;
}

double Operator::eval_unperturbed(const std::vector<double>& X, const std::vector<double>& p,
                                  const std::vector<double>& y) const {
    const double pn = norm(p);
    const double ptr = projected_trace(X, p, pn);
    if (spec_.is_mcf()) {
        return -ptr - c_eff_->eval(y[0], y[1]) * pn;
    }
    const auto& g = spec_.geq();
    double v1, v2;
    g.V.eval(y[0], y[1], v1, v2);
    const double core = pn - g.d * ptr;
    return std::max(core, 0.0) + v1 * p[0] + v2 * p[1];
}

double Operator::eval(const std::vector<double>& X, const std::vector<double>& p,
                      const std::vector<double>& y) const {
    const int n = spec_.dim;
    if (static_cast<int>(p.size()) != n || static_cast<int>(y.size()) != n ||
        static_cast<int>(X.size()) != n * n)
        throw InvalidInput("eval: argument sizes do not match operator dimension");
    if (norm(p) == 0.0) throw InvalidInput("gradient at operator singularity");

    if (spec_.is_mcf() || shift_ball_.empty()) return eval_unperturbed(X, p, y);

    // curvature G with perturbation: extremum over the discretized shift ball
    const bool take_sup = spec_.perturbation.kind == PerturbationKind::Sup;
    double best = 0;
    bool first = true;
    std::vector<double> ys = y;
    for (const auto& e : shift_ball_) {
        ys[0] = y[0] + e[0];
        ys[1] = y[1] + e[1];
        const double v = eval_unperturbed(X, p, ys);
        if (first || (take_sup ? v > best : v < best)) best = v;
        first = false;
    }
    return best;
}

namespace {

struct SampleSet {
    std::vector<double> X, p, y;
};

SampleSet random_sample(std::mt19937_64& eng, int n, double cell) {
    SampleSet s;
    s.X.assign(n * n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) {
            const double v = uab(eng, -1, 1);
            s.X[i * n + j] = v;
            s.X[j * n + i] = v;
        }
    s.p.assign(n, 0.0);
    double pn = 0;
    do {
        for (int i = 0; i < n; ++i) s.p[i] = uab(eng, -1, 1);
        pn = norm(s.p);
    } while (pn < 0.3);
    s.y.assign(n, 0.0);
    for (int i = 0; i < n; ++i) s.y[i] = uab(eng, 0, cell);
    return s;
}

}  // namespace

double check_geometricity(const OperatorSpec& spec, int samples, std::uint64_t seed) {
    Operator op(spec);
    std::mt19937_64 eng(seed);
    const int n = spec.dim;
    double worst = 0;
    for (int k = 0; k < samples; ++k) {
        SampleSet s = random_sample(eng, n, spec.cell_period());
        const double lam = uab(eng, 0.25, 4.0);
        const double mu = uab(eng, -2.0, 2.0);
        const double f = op.eval(s.X, s.p, s.y);
        std::vector<double> Xs(n * n);
        std::vector<double> ps(n);
        for (int i = 0; i < n; ++i) {
            ps[i] = lam * s.p[i];
            for (int j = 0; j < n; ++j) Xs[i * n + j] = lam * s.X[i * n + j] + mu * s.p[i] * s.p[j];
        }
        const double fs = op.eval(Xs, ps, s.y);
        worst = std::max(worst, std::fabs(fs - lam * f) / (1.0 + std::fabs(lam * f)));
    }
    return worst;
}

double check_ellipticity(const OperatorSpec& spec, int samples, std::uint64_t seed) {
    Operator op(spec);
    std::mt19937_64 eng(seed);
    const int n = spec.dim;
    double worst = 0;
    for (int k = 0; k < samples; ++k) {
        SampleSet s = random_sample(eng, n, spec.cell_period());
        std::vector<double> P(n * n);
        for (double& v : P) v = uab(eng, -1, 1);
        std::vector<double> Y = s.X;  // Y = X + P'P >= X
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double acc = 0;
                for (int m = 0; m < n; ++m) acc += P[m * n + i] * P[m * n + j];
                Y[i * n + j] += acc;
            }
        const double fx = op.eval(s.X, s.p, s.y);
        const double fy = op.eval(Y, s.p, s.y);
        worst = std::max(worst, std::max(fy - fx, 0.0));
    }
    return worst;
}

}  // namespace geomhom
