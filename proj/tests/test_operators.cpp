#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "geomhom/operators.hpp"

using namespace geomhom;

namespace {
double u01(std::mt19937_64& eng) { return (eng() >> 11) * 0x1.0p-53; }
}

TEST_CASE("forced MCF pointwise values") {
    Operator op(make_forced_mcf(builtin_field("const1", 64)));
    const std::vector<double> zero{0, 0, 0, 0};

    // X = 0, p = (1,0): F = -c|p| = -1
    CHECK(op.eval(zero, {1, 0}, {0.3, 0.4}) == doctest::Approx(-1.0).epsilon(1e-14));

    // X = I, p = (1,0): projector is diag(0,1), so F = -tr{diag(0,1)} - 1 = -2
    const std::vector<double> eye{1, 0, 0, 1};
    CHECK(op.eval(eye, {1, 0}, {0, 0}) == doctest::Approx(-2.0).epsilon(1e-14));

    CHECK_THROWS_AS(op.eval(zero, {0, 0}, {0, 0}), InvalidInput);
}

TEST_CASE("curvature G pointwise values") {
    Operator op(make_curvature_g(1.0, 0.0));
    const std::vector<double> zero{0, 0, 0, 0};
    // X = 0, p = (0,2), V == 0: (|p| - 0)_+ = 2
    CHECK(op.eval(zero, {0, 2}, {1.0, 2.0}) == doctest::Approx(2.0).epsilon(1e-14));

    // the positive part clips: strong concavity along the front
    const std::vector<double> big{10, 0, 0, 10};
    CHECK(op.eval(big, {0, 1}, {0, 0}) == doctest::Approx(0.0));
}

TEST_CASE("geometricity: exact identity on fixed and random samples") {
    // fixed sample, lambda = 2, mu = 3
    Operator g(make_curvature_g(0.5, 1.5));
    const std::vector<double> X{0.3, -0.2, -0.2, 0.7};
    const std::vector<double> p{0.8, -0.6};
    const std::vector<double> y{1.0, 2.0};
    const double lam = 2.0, mu = 3.0;
    std::vector<double> Xs(4);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) Xs[i * 2 + j] = lam * X[i * 2 + j] + mu * p[i] * p[j];
    const double lhs = g.eval(Xs, {lam * p[0], lam * p[1]}, y);
    const double rhs = lam * g.eval(X, p, y);
    CHECK(std::fabs(lhs - rhs) / (1 + std::fabs(rhs)) <= 1e-12);

    CHECK(check_geometricity(make_forced_mcf(builtin_field("const1", 64)), 50) <= 1e-12);
    CHECK(check_geometricity(make_forced_mcf(builtin_field("sin1", 128)), 1000) <= 1e-10);
    CHECK(check_geometricity(make_curvature_g(0.1, 2.0), 1000) <= 1e-10);
}

TEST_CASE("ellipticity: F does not increase when the Hessian grows") {
    Operator op(make_forced_mcf(builtin_field("sin1", 128)));
    const std::vector<double> X{0.4, 0.1, 0.1, -0.3};
    const std::vector<double> p{1, 0};
    const std::vector<double> y{0.2, 0.9};
    // Y = X: equality
    CHECK(op.eval(X, p, y) == op.eval(X, p, y));
    // Y = X + I lowers F by the projected trace of the identity (= n-1 here)
    std::vector<double> Y{X[0] + 1, X[1], X[2], X[3] + 1};
    CHECK(op.eval(Y, p, y) - op.eval(X, p, y) == doctest::Approx(-1.0).epsilon(1e-12));

    CHECK(check_ellipticity(make_forced_mcf(builtin_field("sin1", 128)), 1000) <= 1e-12);
    CHECK(check_ellipticity(make_curvature_g(0.1, 2.0), 1000) <= 1e-12);
}

TEST_CASE("operator periodicity in y") {
    Operator mcf(make_forced_mcf(builtin_field("sin1", 128)));
    Operator geq(make_curvature_g(0.2, 1.0));
    const std::vector<double> X{0.5, -0.1, -0.1, 0.2};
    const std::vector<double> p{0.3, 0.9};
    std::mt19937_64 eng(3);
    for (int k = 0; k < 32; ++k) {
        const std::vector<double> y{u01(eng), u01(eng)};
        CHECK(mcf.eval(X, p, y) ==
              doctest::Approx(mcf.eval(X, p, {y[0] + 2, y[1] - 1})).epsilon(1e-14));
        const std::vector<double> yg{y[0] * 2 * std::numbers::pi, y[1] * 2 * std::numbers::pi};
        CHECK(geq.eval(X, p, yg) ==
              doctest::Approx(geq.eval(X, p, {yg[0] + 2 * std::numbers::pi,
                                              yg[1] - 4 * std::numbers::pi}))
                  .epsilon(1e-13));
    }
}

TEST_CASE("perturbation ordering: Inf <= None <= Sup") {
    std::mt19937_64 eng(11);
    for (const bool is_mcf : {true, false}) {
        const double eta = 0.07;
        OperatorSpec none = is_mcf ? make_forced_mcf(builtin_field("sin1", 128))
                                   : make_curvature_g(0.3, 1.7);
        OperatorSpec sup = none, inf = none;
        sup.perturbation = {PerturbationKind::Sup, eta};
        inf.perturbation = {PerturbationKind::Inf, eta};
        Operator o_none(none), o_sup(sup), o_inf(inf);
        const double cell = none.cell_period();
        for (int k = 0; k < 64; ++k) {
            std::vector<double> X(4);
            X[0] = 2 * u01(eng) - 1;
            X[3] = 2 * u01(eng) - 1;
            X[1] = X[2] = 2 * u01(eng) - 1;
            const std::vector<double> p{2 * u01(eng) - 1, 2 * u01(eng) - 1 + 1.1};
            const std::vector<double> y{cell * u01(eng), cell * u01(eng)};
            const double fi = o_inf.eval(X, p, y);
            const double f0 = o_none.eval(X, p, y);
            const double fs = o_sup.eval(X, p, y);
            CHECK(fi <= f0 + 1e-12);
            CHECK(f0 <= fs + 1e-12);
        }
    }
}

TEST_CASE("spec hashing distinguishes operators") {
    const auto a = make_forced_mcf(builtin_field("const1", 64)).content_hash();
    const auto b = make_forced_mcf(builtin_field("sin1", 64)).content_hash();
    const auto c = make_curvature_g(0.1, 2.0).content_hash();
    auto spec_d = make_curvature_g(0.1, 2.0);
    spec_d.perturbation = {PerturbationKind::Sup, 0.1};
    CHECK(a != b);
    CHECK(b != c);
    CHECK(c != spec_d.content_hash());
    CHECK(c == make_curvature_g(0.1, 2.0).content_hash());
}

TEST_CASE("invalid operator parameters are rejected") {
    CHECK_THROWS_AS(make_curvature_g(0.0, 1.0), InvalidInput);
    CHECK_THROWS_AS(make_curvature_g(-0.5, 1.0), InvalidInput);
    auto spec = make_forced_mcf(builtin_field("const1", 64));
    spec.perturbation.eta = -0.1;
    CHECK_THROWS_AS(Operator{spec}, InvalidInput);
}
