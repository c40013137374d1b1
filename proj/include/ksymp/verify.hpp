#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ksymp/hamside.hpp"
#include "ksymp/integrate.hpp"
#include "ksymp/koperator.hpp"
#include "ksymp/lagside.hpp"
#include "ksymp/unified.hpp"

namespace ksymp {

struct StageResult {
    std::string name;
    std::string claim; // serialized under the "paper_ref" key
    double max_residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    bool ran = false;
    std::string note;
};

struct EquivalenceReport {
    std::string model_hash;
    std::string ansatz;
    std::vector<StageResult> stages;
    bool all_pass = false;
};

struct VerifyOptions {
    /// "auto" probes symmetric first and falls back to the uniform gauge
    /// when the numeric bracket at the datum rejects it; "symmetric" and
    /// "uniform" force a gauge.
    std::string ansatz = "auto";
    std::uint64_t seed = 0;
    int samples = 50;
    int substeps = 1;
    std::optional<Expr> hamiltonian; // explicit H(q, p); implicit otherwise
};

/// Pipeline tying the formalisms together on a regular model: build a
/// second-order solution, integrate it, and check the Euler-Lagrange,
/// Hamilton-De Donder-Weyl, product-space, and field-operator residuals
/// along the way. Pointwise algebraic stages run at tolerance 1e-9,
/// integration-limited stages at 1e-5. A failed stage skips the rest.
EquivalenceReport equivalence_report(const FieldModel& m, const LagPoint& x0,
                                     const Grid& grid, const VerifyOptions& opts = {});

struct SingularOptions {
    std::uint64_t seed = 0;
    int max_levels = 8;
    double tol = 1e-8;
    std::optional<Expr> h0; // restricted Hamiltonian; fiber energy otherwise
};

struct SingularSampleRow {
    double heo_residual = 0.0;      // least-squares defect of the restricted equation
    double field_eq_residual = 0.0; // pulled-back field-equation condition
    double second_order_residual = 0.0;
};

struct SingularReport {
    std::string model_hash;
    ConstraintReport constraints;
    std::vector<Expr> momentum_constraints; // final constraints free of velocities
    std::vector<SingularSampleRow> rows;
    bool structural_ok = true;
    double field_eq_max = 0.0;
    double second_order_max = 0.0;
    bool field_eq_ok = false;
    bool second_order_ok = false;
    bool pass = false; // stabilized + structural + field equation
};

/// Constraint pathway for singular models: run the constraint algorithm on
/// the graph points over the samples, build a momentum-side candidate field
/// by least squares on the restricted Hamiltonian equation, compose it with
/// the Legendre map, and report which field-operator conditions hold on the
/// sample set.
SingularReport singular_report(const FieldModel& m, const std::vector<LagPoint>& samples,
                               const SingularOptions& opts = {});

struct CheckReport {
    std::string model_hash;
    int samples = 0;
    std::uint64_t seed = 0;
    bool regular = false;
    std::vector<double> hessian_dets;
    double pullback_max = 0.0;
    double pullback_tol = 1e-9;
    double slot_trace_max = 0.0;
    double second_order_max = 0.0;
    double identity_tol = 1e-12;
    double field_eq_max = 0.0;
    double field_eq_tol = 1e-10;
    bool pass = false;
};

/// Regularity, pullback-identity, and canonical field-operator identity
/// checks at seeded random points.
CheckReport check_report(const FieldModel& m, int samples, std::uint64_t seed,
                         double pullback_tol = 1e-9);

std::string equivalence_json(const EquivalenceReport& r);
std::string singular_json(const SingularReport& r);
std::string check_json(const CheckReport& r);
std::string constraint_json(const std::string& model_hash, const ConstraintReport& r,
                            int samples, std::uint64_t seed);

} // namespace ksymp
