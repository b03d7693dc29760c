#pragma once

#include <string>
#include <vector>

#include "geomhom/common.hpp"

namespace geomhom {

/// Periodic scalar forcing field c sampled on an N x N lattice over one cell.
/// Node (i,j) sits at y = (i*h, j*h) with h = period/N; indexing wraps mod N.
struct ForcingField {
    int N = 0;
    double period = 1.0;
    std::vector<double> values;       // row-major, values[j*N + i]
    double lipschitz_bound = 0.0;     // sup of one-sided difference quotients

    ForcingField() = default;
    ForcingField(int N, double period, std::vector<double> values);

    double h() const { return period / N; }
    double at(int i, int j) const;            // wrapped node access
    double eval(double y1, double y2) const;  // periodic bilinear interpolation

    double min_value() const;
    double max_value() const;
};

/// Builds a field by sampling f(y1, y2) at the lattice nodes.
ForcingField sample_field(int N, double period, double (*f)(double, double));

/// Builtin fields used by the CLI and the test suite.
ForcingField builtin_field(const std::string& name, int N = 256);  // "const1", "sin1"

/// Pointwise max (resp. min) of c over all lattice shifts with |e| <= eta.
/// Throws InvalidInput if eta exceeds half the period.
ForcingField dilate_field(const ForcingField& c, double eta);
ForcingField erode_field(const ForcingField& c, double eta);

/// min over the lattice of c^2 - (n-1)|Dc| with |Dc| by central differences.
/// A positive return certifies the coercivity condition up to discretization;
/// a negative return is a valid report, not an error.
double check_coercivity(const ForcingField& c, int n);

/// Two dimensional cellular flow V(x) = A(-cos x2 sin x1, cos x1 sin x2), period 2*pi.
struct FlowField {
    double A = 0.0;

    void eval(double x1, double x2, double& v1, double& v2) const;
    /// Analytic divergence d1V1 + d2V2 at a point; identically zero for this family.
    double divergence(double x1, double x2) const;
};

// JSON import/export, schema {period, shape:[N,N], values:[row-major floats]}.
std::string field_to_json(const ForcingField& c);
ForcingField field_from_json(const std::string& text);
void save_field(const ForcingField& c, const std::string& path);
ForcingField load_field(const std::string& path);

}  // namespace geomhom
