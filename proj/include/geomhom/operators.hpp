#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "geomhom/field.hpp"

namespace geomhom {

/// Sup(eta):  sup over shifts |e| <= eta of F(X, p, y+e)
/// Inf(eta):  inf over shifts |e| <= eta of F(X, p, y+e)
/// For forced mean curvature flow these are realized by the eroded / dilated
/// forcing field; for the curvature G operator by a direct scan over shifts.
enum class PerturbationKind : std::uint8_t { None, Sup, Inf };

struct Perturbation {
    PerturbationKind kind = PerturbationKind::None;
    double eta = 0.0;
};

/// F(X,p,y) = -tr{(I - p^ x p^)X} - c(y)|p|
struct ForcedMcf {
    ForcingField c;
};

/// F(X,p,y) = (|p| - d tr{(I - p^ x p^)X})_+ + V(y).p   with the cellular flow V
struct CurvatureG {
    double d = 0.1;  // Markstein number, > 0
    FlowField V;
};

struct OperatorSpec {
    std::variant<ForcedMcf, CurvatureG> kind;
    Perturbation perturbation;
    int dim = 2;

    bool is_mcf() const { return std::holds_alternative<ForcedMcf>(kind); }
    const ForcedMcf& mcf() const { return std::get<ForcedMcf>(kind); }
    const CurvatureG& geq() const { return std::get<CurvatureG>(kind); }
    /// Cell edge length the operator is periodic over (1 for MCF, 2*pi for G).
    double cell_period() const;
    void validate() const;
    /// Stable content hash, used to key cached effective tables.
    std::string content_hash() const;
};

OperatorSpec make_forced_mcf(ForcingField c, Perturbation pert = {}, int dim = 2);
OperatorSpec make_curvature_g(double d, double A, Perturbation pert = {});

/// Pointwise evaluator with the perturbed field (if any) prepared once.
class Operator {
  public:
    explicit Operator(OperatorSpec spec);

    /// F(X,p,y). X is row-major n x n symmetric, p a nonzero n-vector.
    /// Throws InvalidInput at p = 0 ("gradient at operator singularity").
    double eval(const std::vector<double>& X, const std::vector<double>& p,
                const std::vector<double>& y) const;

    const OperatorSpec& spec() const { return spec_; }
    /// Forcing field with the perturbation folded in (MCF only).
    const ForcingField& effective_field() const;

  private:
    double eval_unperturbed(const std::vector<double>& X, const std::vector<double>& p,
                            const std::vector<double>& y) const;

    OperatorSpec spec_;
    std::shared_ptr<ForcingField> c_eff_;            // MCF: field after dilation/erosion
    std::vector<std::array<double, 2>> shift_ball_;  // G: discretized shift ball, e=0 first
};

/// max over seeded random samples of
///   |F(lambda X + mu p x p, lambda p, y) - lambda F(X,p,y)| / (1 + |lambda F|).
double check_geometricity(const OperatorSpec& spec, int samples, std::uint64_t seed = 1);

/// max over seeded random samples of (F(X + P'P, p, y) - F(X, p, y))_+ .
double check_ellipticity(const OperatorSpec& spec, int samples, std::uint64_t seed = 2);

}  // namespace geomhom
