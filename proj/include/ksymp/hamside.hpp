#pragma once

#include <optional>
#include <vector>

#include "ksymp/kvector.hpp"
#include "ksymp/section.hpp"

namespace ksymp {

/// A Hamiltonian on the momentum phase space. Either an explicit expression
/// in (q, p), or the implicit composition energy(inverse Legendre) whose
/// gradient is taken by central differences through the Newton inversion
/// (step 1e-6); the explicit route differentiates symbolically.
class HamFunction {
public:
    static HamFunction explicit_expr(const FieldModel& m, Expr h);
    static HamFunction implicit_energy(const FieldModel& m);

    double value(const HamPoint& y) const;
    std::vector<double> gradient(const HamPoint& y) const; // ham_dim entries

    const FieldModel& model() const { return *model_; }
    bool is_explicit() const { return expr_.has_value(); }
    const Expr& expr() const { return *expr_; }

private:
    const FieldModel* model_ = nullptr;
    std::optional<Expr> expr_;
    std::vector<Expr> grad_exprs_;
};

struct HdwResidual {
    /// Per node: n entries dH/dq^i + sum_A dpsi^A_i/dt^A followed by nk
    /// entries dH/dp^A_i - dpsi^i/dt^A, (A, i) lexicographic.
    std::vector<std::vector<double>> nodes;
    double max_interior = 0.0;
    double max_all = 0.0;
};

/// Residual of the Hamilton-De Donder-Weyl equations for a momentum-space
/// section with first-derivative data (finite differences fill gaps).
HdwResidual hdw_residual(const HamFunction& h, const Section& psi);

/// Residual covector of sum_A i_{X_A}(w0)_A - dH at y.
std::vector<double> ham_geoeq_residual(const HamFunction& h, const KVectorField& x,
                                       const HamPoint& y);
std::vector<double> ham_geoeq_residual(const HamFunction& h, const KCoeffs& x,
                                       const HamPoint& y);

/// Newton inversion of the Legendre map on the fiber over y.q: solves
/// dL/dv = p with the velocity Hessian as Jacobian, halving steps on
/// residual increase. Throws NumericError on a singular Hessian or
/// non-convergence.
LagPoint invert_legendre(const FieldModel& m, const HamPoint& y,
                         std::optional<LagPoint> guess = std::nullopt,
                         double tol = 1e-12, int max_iter = 50);

/// Gauss-Newton least-squares variant that accepts singular models: returns
/// a fiber point minimizing |dL/dv - p| (minimum-norm steps). Residual is
/// reported, not thrown.
struct FiberPoint {
    LagPoint x;
    double residual = 0.0;
};
FiberPoint invert_legendre_ls(const FieldModel& m, const HamPoint& y,
                              std::optional<LagPoint> guess = std::nullopt,
                              double tol = 1e-12, int max_iter = 100);

/// Push a velocity-space field through the Legendre map at y: evaluates the
/// field at the inverse image and applies the Legendre Jacobian. Returns the
/// coefficients at y together with the inverse point used.
struct Pushforward {
    KCoeffs coeffs;
    LagPoint at;
};
Pushforward pushforward_xh(const FieldModel& m, const KVectorField& xl, const HamPoint& y,
                           std::optional<LagPoint> guess = std::nullopt);

/// Residual of the constrained Hamiltonian field equation at y, projected
/// onto the numeric tangent space of the constraint set (orthonormal
/// nullspace of the constraint Jacobian, pivot tolerance 1e-10).
struct RestrictedResidual {
    std::vector<double> tangent_residual; // one entry per tangent direction
    int jacobian_rank = 0;
    bool rank_deficient = false;
};
RestrictedResidual restricted_ham_residual(const FieldModel& m,
                                           const std::vector<Expr>& constraints,
                                           const HamFunction& h0, const KCoeffs& x0,
                                           const HamPoint& y, double constraint_tol = 1e-8);

} // namespace ksymp
