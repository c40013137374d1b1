#pragma once

#include <vector>

#include "ksymp/kvector.hpp"
#include "ksymp/section.hpp"

namespace ksymp {

/// A k-vector field along the Legendre map: components are expressions over
/// velocity-space coordinates but represent tangent vectors at the image
/// point on the momentum phase space. The structural condition of a field
/// operator is built into this representation; the second-order and
/// field-equation conditions are checked by `verify_k`.
struct FieldOperatorK {
    std::vector<std::string> coords;        // velocity-space coordinates
    std::vector<std::vector<Expr>> base;    // base[a][i], along dq^i
    std::vector<std::vector<Expr>> moment;  // moment[a][b*n + i], along dp^B_i
};

/// Canonical local field operator: base components v^i_A, momentum
/// components (1/k) dL/dq^i on the diagonal slot.
FieldOperatorK default_k(const FieldModel& m);

struct VerifyKReport {
    bool structural_ok = true; // by representation
    double max_field_eq = 0.0;
    double max_second_order = 0.0;
    double max_slot_trace = 0.0; // |sum_A K_A^A_i - dL/dq^i|

    bool pass(double field_tol, double order_tol) const {
        return structural_ok && max_field_eq <= field_tol &&
               max_second_order <= order_tol && max_slot_trace <= order_tol;
    }
};

/// Check the defining conditions at the samples: the pulled-back field
/// equation J^T [sum_A (w0)_A . K_A] = dE_L, the second-order identity
/// K_A^i = v^i_A, and the diagonal-slot trace sum_A (K_A)^A_i = dL/dq^i.
VerifyKReport verify_k(const FieldModel& m, const FieldOperatorK& kop,
                       const std::vector<LagPoint>& samples);

/// True when sum_A (K_A)^A_i - dL/dq^i simplifies to the zero constant for
/// every i.
bool slot_trace_identity_exact(const FieldModel& m, const FieldOperatorK& kop);

/// Compose a second-order field with the Legendre Jacobian:
/// (K_A)^i = (X_A)^i, (K_A)^B_i = (X_A)^j d2L/dq^j dv^i_B
///                              + (X_A)^j_C d2L/dv^j_C dv^i_B.
FieldOperatorK k_from_sopde(const FieldModel& m, const KVectorField& xl);

/// Compose a momentum-space field with the Legendre map by substituting
/// p = dL/dv. Satisfies the structural and field-equation conditions when
/// x0 solves the Hamiltonian equation, but not necessarily the second-order
/// condition; `verify_k` reports it. Optional constraints are checked to
/// vanish on the image of the Legendre map at the given probe points.
FieldOperatorK k_from_hamiltonian(const FieldModel& m, const KVectorField& x0,
                                  const std::vector<Expr>& constraints = {},
                                  const std::vector<LagPoint>& probes = {},
                                  double tol = 1e-8);

/// Integral-section residual: per node and slot A,
/// J_FL(psi(t)) dpsi/dt^A - K_A(psi(t)), flattened over momentum-space
/// coordinates. The section must carry (or gets) first-derivative data.
struct KIntegralResidual {
    std::vector<std::vector<double>> nodes; // [node][a*ham_dim + c]
    double max_interior = 0.0;
    double max_all = 0.0;
};
KIntegralResidual k_integral_residual(const FieldModel& m, const FieldOperatorK& kop,
                                      const Section& psi);

} // namespace ksymp
