#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "geomhom/field.hpp"

using namespace geomhom;

namespace {
constexpr double kPi = std::numbers::pi;

double u01(std::mt19937_64& eng) { return (eng() >> 11) * 0x1.0p-53; }

// brute-force ball extremum used as the oracle for dilate/erode: scan every
// lattice node within distance eta of the query node
double brute_ball_max(const ForcingField& c, int i, int j, double eta) {
    const double h = c.h();
    const int R = static_cast<int>(std::floor(eta / h));
    double best = c.at(i, j);
    for (int dj = -R; dj <= R; ++dj)
        for (int di = -R; di <= R; ++di)
            if ((di * di + dj * dj) * h * h <= eta * eta)
                best = std::max(best, c.at(i + di, j + dj));
    return best;
}
}  // namespace

TEST_CASE("builtin fields and bilinear evaluation") {
    ForcingField c1 = builtin_field("const1", 64);
    CHECK(c1.eval(0.37, 0.91) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(c1.lipschitz_bound == doctest::Approx(0.0));

    ForcingField s = builtin_field("sin1", 256);
    CHECK(s.eval(0.0, 0.5) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(s.eval(0.25, 0.1) == doctest::Approx(2.25).epsilon(1e-4));
    // Lipschitz bound dominates the analytic sup |Dc| = pi/2 up to sampling
    CHECK(s.lipschitz_bound >= 0.25 * 2 * kPi * 0.99);

    CHECK_THROWS_AS(builtin_field("nope"), InvalidInput);
}

TEST_CASE("periodic wraparound is exact") {
    ForcingField s = builtin_field("sin1", 64);
    for (int k : {-2, -1, 1, 3}) {
        CHECK(s.at(5, 7) == s.at(5 + 64 * k, 7));
        CHECK(s.eval(0.13, 0.77) == doctest::Approx(s.eval(0.13 + k, 0.77 - k)).epsilon(1e-14));
    }
}

TEST_CASE("dilate: eta = 0 is the identity, constants are invariant") {
    ForcingField s = builtin_field("sin1", 128);
    ForcingField d0 = dilate_field(s, 0.0);
    for (std::size_t k = 0; k < s.values.size(); ++k) CHECK(d0.values[k] == s.values[k]);

    ForcingField c = builtin_field("const1", 64);
    ForcingField dk = dilate_field(c, 0.2);
    ForcingField ek = erode_field(c, 0.2);
    for (std::size_t k = 0; k < c.values.size(); ++k) {
        CHECK(dk.values[k] == 1.0);
        CHECK(ek.values[k] == 1.0);
    }
}

TEST_CASE("dilate matches the brute-force ball scan at random nodes") {
    ForcingField s = builtin_field("sin1", 256);
    const double eta = 0.1;
    ForcingField d = dilate_field(s, eta);
    std::mt19937_64 eng(42);
    for (int trial = 0; trial < 100; ++trial) {
        const int i = static_cast<int>(u01(eng) * 256);
        const int j = static_cast<int>(u01(eng) * 256);
        CHECK(d.at(i, j) == brute_ball_max(s, i, j, eta));
    }
}

TEST_CASE("dilate/erode ordering and monotonicity in eta") {
    ForcingField s = builtin_field("sin1", 128);
    ForcingField d1 = dilate_field(s, 0.05), d2 = dilate_field(s, 0.11);
    ForcingField e1 = erode_field(s, 0.05), e2 = erode_field(s, 0.11);
    for (std::size_t k = 0; k < s.values.size(); ++k) {
        CHECK(e2.values[k] <= e1.values[k]);
        CHECK(e1.values[k] <= s.values[k]);
        CHECK(s.values[k] <= d1.values[k]);
        CHECK(d1.values[k] <= d2.values[k]);
    }
    CHECK_THROWS_AS(dilate_field(s, 0.51), InvalidInput);
}

TEST_CASE("coercivity audit") {
    // c == 1: delta_est = 1 exactly
    CHECK(check_coercivity(builtin_field("const1", 64), 2) == doctest::Approx(1.0));

    // builtin sin1: dense-scan value stays comfortably above 1
    const double d = check_coercivity(builtin_field("sin1", 256), 2);
    CHECK(d > 1.0);
    // scan oracle on a finer lattice agrees to a few percent
    const double d_fine = check_coercivity(builtin_field("sin1", 1024), 2);
    CHECK(d == doctest::Approx(d_fine).epsilon(0.02));

    // a force that vanishes somewhere fails the condition
    ForcingField bad = sample_field(256, 1.0, [](double y1, double) {
        return 0.1 + std::sin(2 * std::numbers::pi * y1);
    });
    CHECK(check_coercivity(bad, 2) < 0.0);
}

TEST_CASE("cellular flow is divergence free at sampled points") {
    FlowField V{2.0};
    std::mt19937_64 eng(7);
    for (int k = 0; k < 200; ++k) {
        const double x = u01(eng) * 2 * kPi, y = u01(eng) * 2 * kPi;
        CHECK(std::fabs(V.divergence(x, y)) <= 1e-15);
    }
    double v1, v2;
    V.eval(0.0, 0.0, v1, v2);
    CHECK(v1 == doctest::Approx(0.0));
    CHECK(v2 == doctest::Approx(0.0));
}

TEST_CASE("field JSON round trip") {
    ForcingField s = builtin_field("sin1", 64);
    ForcingField back = field_from_json(field_to_json(s));
    CHECK(back.N == s.N);
    CHECK(back.period == s.period);
    for (std::size_t k = 0; k < s.values.size(); ++k) CHECK(back.values[k] == s.values[k]);
    CHECK_THROWS_AS(field_from_json("{\"period\":1}"), InvalidInput);
}
