#pragma once

#include <cstdint>
#include <vector>

#include "ksymp/kvector.hpp"

namespace ksymp {

/// Pairing sum_{A,i} p^A_i v^i_A at a point of the product space.
double coupling(const FieldModel& m, const UnifiedPoint& w);

/// Hamiltonian of the product-space formalism: coupling - L.
double unified_hamiltonian(const FieldModel& m, const UnifiedPoint& w);

/// The same Hamiltonian as an expression plus its gradient and the product-
/// space 2-forms, assembled once for repeated residual evaluation.
struct UnifiedSystem {
    TwoFormFamily omega;
    Expr hamiltonian;
    std::vector<Expr> grad; // over product-space coordinates
};
UnifiedSystem make_unified_system(const FieldModel& m);

/// Residual covector of sum_A i_{Z_A} W_A - dH at w.
std::vector<double> unified_geoeq_residual(const FieldModel& m, const UnifiedSystem& sys,
                                           const KVectorField& z, const UnifiedPoint& w);
std::vector<double> unified_geoeq_residual(const FieldModel& m, const UnifiedSystem& sys,
                                           const KCoeffs& z, const UnifiedPoint& w);

/// Tangency residual of a product-space field against the Legendre graph,
/// one entry per (A, B, j):
///   (Z_A)^B_j - v^i_A d2L/dq^i dv^j_B - (Z_A)^i_C d2L/dv^i_C dv^j_B.
std::vector<double> tangency_residual(const FieldModel& m, const KCoeffs& z,
                                      const UnifiedPoint& w);
std::vector<double> tangency_residual(const FieldModel& m, const KVectorField& z,
                                      const UnifiedPoint& w);

struct SrSolution {
    /// p^A_i - dL/dv^i_A at w, index (a*n + i); the solvability obstruction.
    std::vector<double> graph_residual;
    bool feasible = false;
    /// Product-space coefficients of one solution (only when feasible).
    KCoeffs z;
    double tangency_max = 0.0;
};

/// Pointwise solution of the product-space field equation at w. Off the
/// Legendre graph the problem is infeasible and the graph residual says by
/// how much. On the graph the solution takes base components v^i_A, momentum
/// components (1/k) dL/dq^i on the diagonal slot, and velocity components
/// from the tangency system under the symmetric minimum-norm gauge.
SrSolution sr_solve(const FieldModel& m, const UnifiedPoint& w, double tol = 1e-8);

struct ConstraintSampleRow {
    int sample = 0;
    int rank = 0;
    double solve_residual = 0.0;
    bool retained = false;
};

struct ConstraintLevel {
    std::vector<Expr> active_constraints;
    std::vector<Expr> new_constraints;
    int new_count = 0;
    std::vector<ConstraintSampleRow> rows;
};

struct ConstraintReport {
    std::vector<ConstraintLevel> levels;
    bool stabilized = false;
    int final_level = 0;
    std::vector<int> surviving_samples;
};

/// Iterative restriction to points admitting a solution tangent to the
/// current constraint set. Level 0 carries exactly the nk graph constraints
/// p^A_i - dL/dv^i_A. When every row coefficient is state-independent, new
/// constraints are extracted symbolically from the left nullspace of the
/// solvability system; otherwise consistency is judged numerically per
/// sample. Stops when a level adds no constraints and drops no samples, or
/// at max_levels (stabilized = false).
ConstraintReport constraint_algorithm(const FieldModel& m,
                                      const std::vector<UnifiedPoint>& samples,
                                      int max_levels = 8, double tol = 1e-8);

/// Drop the momentum components of a graph-tangent product-space field and
/// re-express any momentum dependence through p = dL/dv. Tangency is checked
/// symbolically when the residual expressions are constant, else at
/// `check_points` (seeded graph points when empty).
KVectorField project_to_lagrangian(const FieldModel& m, const KVectorField& z,
                                   std::vector<UnifiedPoint> check_points = {},
                                   double tol = 1e-8);

/// Lift a second-order field through (id, Legendre map): base and velocity
/// components carry over, momentum components follow from differentiating
/// the graph relation. The result is tangent to the graph identically.
KVectorField lift_from_lagrangian(const FieldModel& m, const KVectorField& xl);

/// Seeded points on the Legendre graph: random (q, v), p = dL/dv.
std::vector<UnifiedPoint> random_graph_points(const FieldModel& m, int count,
                                              std::uint64_t seed, double lo = -1.0,
                                              double hi = 1.0);

} // namespace ksymp
