#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ksymp/expr.hpp"

namespace ksymp {

/// Canonical variable names. Fields are q1..qn, velocities vI_A (field index
/// first), momenta pA_I (slot index first).
std::string q_name(int i);
std::string v_name(int i, int a);
std::string p_name(int a, int i);

/// Point on the velocity phase space: q[i], v[i][a] stored flat as v[i*k+a].
struct LagPoint {
    std::vector<double> q;
    std::vector<double> v;

    double vel(int i, int a, int k) const { return v[static_cast<std::size_t>(i) * k + a]; }
};

/// Point on the momentum phase space: q[i], p[a][i] stored flat as p[a*n+i].
struct HamPoint {
    std::vector<double> q;
    std::vector<double> p;

    double mom(int a, int i, int n) const { return p[static_cast<std::size_t>(a) * n + i]; }
};

/// Point on the product phase space carrying both velocities and momenta.
struct UnifiedPoint {
    std::vector<double> q;
    std::vector<double> v;
    std::vector<double> p;
};

enum class Space { Lagrangian, Hamiltonian, Unified };

/// A first-order field model: k parameters t^A, n field components q^i, and a
/// Lagrangian density L(q^i, v^i_A). Construction validates the variable set
/// and precomputes the first and second derivative tables used throughout.
///
/// Coordinate orders are fixed once:
///   velocity space  (q1..qn, v1_1..v1_k, v2_1.., vn_k)      index v: i*k+a
///   momentum space  (q1..qn, p1_1..p1_n, p2_1.., pk_n)      index p: a*n+i
///   product space   (q.., v.., p..) concatenated
struct FieldModel {
    FieldModel(int k, int n, Expr lagrangian);

    int k = 0;
    int n = 0;
    Expr lagrangian;

    // Derivative tables, all simplified.
    std::vector<Expr> dL_dq;    // [i]
    std::vector<Expr> dL_dv;    // [i*k+a]
    std::vector<Expr> d2L_dvdv; // [(i*k+a)*(n*k) + (j*k+b)], symmetric
    std::vector<Expr> d2L_dqdv; // [j*(n*k) + (i*k+a)]  = d2L/dq^j dv^i_a
    Expr energy_expr;           // sum v dL/dv - L
    std::vector<Expr> denergy;  // gradient of energy_expr in velocity coords

    int vdim() const { return n * k; }
    int lag_dim() const { return n + n * k; }
    int ham_dim() const { return n + n * k; }
    int uni_dim() const { return n + 2 * n * k; }

    int vflat(int i, int a) const { return i * k + a; }
    int pflat(int a, int i) const { return a * n + i; }

    const std::vector<std::string>& coords(Space s) const;
    const std::vector<std::string>& lag_coords() const { return lag_coords_; }
    const std::vector<std::string>& ham_coords() const { return ham_coords_; }
    const std::vector<std::string>& uni_coords() const { return uni_coords_; }

    const Expr& hess(int i, int a, int j, int b) const {
        return d2L_dvdv[static_cast<std::size_t>(vflat(i, a)) * vdim() + vflat(j, b)];
    }
    const Expr& mixed(int j, int i, int a) const {
        return d2L_dqdv[static_cast<std::size_t>(j) * vdim() + vflat(i, a)];
    }

    std::vector<double> flatten(const LagPoint& x) const;
    std::vector<double> flatten(const HamPoint& y) const;
    std::vector<double> flatten(const UnifiedPoint& w) const;
    LagPoint unflatten_lag(const std::vector<double>& s) const;
    HamPoint unflatten_ham(const std::vector<double>& s) const;
    UnifiedPoint unflatten_uni(const std::vector<double>& s) const;

    Bindings bind(Space s, const std::vector<double>& flat) const;
    Bindings bind(const LagPoint& x) const { return bind(Space::Lagrangian, flatten(x)); }
    Bindings bind(const HamPoint& y) const { return bind(Space::Hamiltonian, flatten(y)); }
    Bindings bind(const UnifiedPoint& w) const { return bind(Space::Unified, flatten(w)); }

    /// FNV-1a hash of the canonical rendering "k=..;n=..;L=..", hex encoded.
    std::string hash() const;

private:
    std::vector<std::string> lag_coords_, ham_coords_, uni_coords_;
};

/// Deterministic pseudo-random stream (splitmix64); identical across
/// platforms for a given seed.
struct Rng {
    std::uint64_t state;

    explicit Rng(std::uint64_t seed) : state(seed) {}

    std::uint64_t next_u64();
    /// Uniform in [lo, hi).
    double uniform(double lo, double hi);
};

/// Seeded sample points with every coordinate uniform in [lo, hi).
std::vector<LagPoint> random_lag_points(const FieldModel& m, int count, std::uint64_t seed,
                                        double lo = -1.0, double hi = 1.0);
std::vector<HamPoint> random_ham_points(const FieldModel& m, int count, std::uint64_t seed,
                                        double lo = -1.0, double hi = 1.0);

} // namespace ksymp
