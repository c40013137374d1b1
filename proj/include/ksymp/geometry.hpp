#pragma once

#include <vector>

#include "ksymp/linalg.hpp"
#include "ksymp/model.hpp"

namespace ksymp {

/// Matrix of expressions (row-major), used for 2-forms and Jacobians.
struct ExprMat {
    int rows = 0;
    int cols = 0;
    std::vector<Expr> e;

    ExprMat() = default;
    ExprMat(int r, int c) : rows(r), cols(c), e(static_cast<std::size_t>(r) * c) {}

    Expr& operator()(int i, int j) { return e[static_cast<std::size_t>(i) * cols + j]; }
    const Expr& operator()(int i, int j) const {
        return e[static_cast<std::size_t>(i) * cols + j];
    }
};

Mat eval(const ExprMat& m, const Bindings& b);

/// Family of k 2-forms on one phase space, stored as antisymmetric
/// coefficient matrices over the space's canonical coordinates: the matrix
/// entry (r, c) is the coefficient of dx^r wedge dx^c, lower triangle the
/// negation of the upper.
struct TwoFormFamily {
    Space space = Space::Lagrangian;
    std::vector<std::string> coords;
    std::vector<ExprMat> forms; // one per A

    /// Set entries (r, c) = expr and (c, r) = -expr.
    void set_pair(int a, int r, int c, const Expr& expr);
};

/// Legendre map: (q, v) -> (q, dL/dv). The base point is preserved exactly.
HamPoint legendre(const FieldModel& m, const LagPoint& x);

/// Velocity Hessian of L at x, (i,a) lexicographic, symmetric by
/// construction.
Mat hessian(const FieldModel& m, const LagPoint& x);

struct RegularityReport {
    bool regular = false;
    double tol = 0.0;
    std::vector<double> dets; // one per sample
};

/// Regular iff |det Hessian| > tol at every sample.
RegularityReport is_regular(const FieldModel& m, const std::vector<LagPoint>& samples,
                            double tol = 1e-9);

/// Energy sum_{i,A} v^i_A dL/dv^i_A - L, computed by numeric contraction
/// (not by evaluating `energy_expr`, which serves as the independent route).
double energy(const FieldModel& m, const LagPoint& x);

/// Canonical 2-forms dq^i wedge dp^A_i on the momentum phase space: constant
/// +-1 matrices.
TwoFormFamily canonical_two_forms(const FieldModel& m);

/// Lagrangian 2-forms -d(dL/dv^i_A dq^i) on the velocity phase space.
TwoFormFamily lagrangian_two_forms(const FieldModel& m);

/// Canonical 2-forms pulled to the product space: same +-1 pattern in the
/// (q, p) block, zero rows and columns for velocities.
TwoFormFamily unified_two_forms(const FieldModel& m);

/// Jacobian of the Legendre map as expressions over velocity coordinates
/// (ham_dim x lag_dim).
ExprMat legendre_jacobian(const FieldModel& m);

/// Jacobian of (q, v) -> (q, v, dL/dv) into the product space
/// (uni_dim x lag_dim).
ExprMat graph_jacobian(const FieldModel& m);

/// Residual per A of pulling the canonical 2-forms back through the Legendre
/// map against the Lagrangian 2-forms at x: max |J^T w0_A J - wL_A|.
std::vector<double> pullback_check(const FieldModel& m, const LagPoint& x);

} // namespace ksymp
