#pragma once

#include <vector>

#include "ksymp/geometry.hpp"
#include "ksymp/model.hpp"

namespace ksymp {

/// Numeric coefficients of a k-vector field at one point: coeffs[a] is the
/// component vector in the canonical coordinate order of the carrier space.
using KCoeffs = std::vector<std::vector<double>>;

/// A k-vector field on one of the three phase spaces: for each A a component
/// expression per coordinate of the space, in canonical order.
struct KVectorField {
    Space space = Space::Lagrangian;
    std::vector<std::string> coords;        // coordinates of the carrier space
    std::vector<std::vector<Expr>> comps;   // comps[a][coord]

    static KVectorField zero(const FieldModel& m, Space s);

    int dim() const { return static_cast<int>(coords.size()); }

    std::vector<double> eval_at(int a, const Bindings& b) const;
    /// Evaluate all components at a flat point of the carrier space.
    KCoeffs eval_all(const std::vector<double>& flat) const;
};

/// Second-order check: every base component (X_A)^i equals v^i_A at each
/// sample, within tol.
bool is_sopde(const FieldModel& m, const KVectorField& x,
              const std::vector<LagPoint>& samples, double tol = 1e-10);

/// sum_A i_{X_A} w_A at a point, as a covector in coordinate order:
/// entry_j = sum_i X^i w_ij.
std::vector<double> contract(const TwoFormFamily& omega, const KVectorField& x,
                             const Bindings& at);
std::vector<double> contract(const TwoFormFamily& omega, const KCoeffs& x,
                             const Bindings& at);

/// Finite-difference Lie bracket [X_A, X_B] at a flat point, central
/// differences with step h (error O(h^2)).
std::vector<double> bracket_numeric(const KVectorField& x, int a, int b,
                                    const std::vector<double>& flat, double h = 1e-4);

/// Max |bracket| over all pairs A < B; zero for k = 1.
double bracket_max(const KVectorField& x, const std::vector<double>& flat, double h = 1e-4);

} // namespace ksymp
