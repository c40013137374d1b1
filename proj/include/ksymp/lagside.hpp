#pragma once

#include <vector>

#include "ksymp/kvector.hpp"
#include "ksymp/section.hpp"

namespace ksymp {

/// Euler-Lagrange residual per grid node and field component for a
/// base-manifold section with first- and second-derivative data:
///   sum_A [ d2L/dq^j dv^i_A dphi^j/dt^A
///         + d2L/dv^j_B dv^i_A d2phi^j/dt^A dt^B ] - dL/dq^i.
/// Missing derivative data is filled by finite differences.
std::vector<std::vector<double>> el_residual(const FieldModel& m, const Section& phi);

/// Gauge choice for the underdetermined acceleration system: `Symmetric`
/// ties (X_A)^i_B = (X_B)^i_A and returns the minimum-norm solution in the
/// tied parameters; `Uniform` ties all (A, B) pairs per field component,
/// which favors integrable solutions on models whose acceleration is
/// slot-independent.
enum class SopdeAnsatz { Symmetric, Uniform };

struct SopdeSolution {
    bool consistent = false;
    double residual = 0.0; // least-squares residual of the linear system
    int rank = 0;
    /// Acceleration coefficients (X_A)^i_B, index (i*k + A)*k + B.
    std::vector<double> accel;

    double at(int i, int a, int b, int k) const {
        return accel[(static_cast<std::size_t>(i) * k + a) * k + b];
    }
};

/// Solve the pointwise acceleration system
///   d2L/dq^j dv^i_A v^j_A + d2L/dv^i_A dv^j_B (X_A)^j_B = dL/dq^i
/// at x under the given ansatz. Inconsistency (possible for singular L) is
/// reported, not thrown.
SopdeSolution sopde_solve(const FieldModel& m, const LagPoint& x,
                          SopdeAnsatz ansatz = SopdeAnsatz::Symmetric);

/// Symbolic counterpart of `sopde_solve`: the minimum-norm solution in the
/// tied parameters with the Gram matrix inverted by cofactors. Requires
/// n <= 4 and a Gram determinant that does not vanish where the field is
/// used (regular models). Base components are v^i_A, so the result is a
/// second-order field by construction.
KVectorField sopde_field(const FieldModel& m, SopdeAnsatz ansatz = SopdeAnsatz::Symmetric);

/// Residual covector of the geometric field equation on the velocity space:
/// sum_A i_{X_A}(wL)_A - dE_L at x.
std::vector<double> lag_geoeq_residual(const FieldModel& m, const KVectorField& x,
                                       const LagPoint& at);

/// Minimum-norm solution of the full linear system [sum_A i_{X_A}(wL)_A =
/// dE_L] in all k * dim coefficients at one point; diagnostic for inspecting
/// the solution family (for regular L every solution is second-order).
KCoeffs solve_lag_geoeq_full(const FieldModel& m, const LagPoint& at);

} // namespace ksymp
