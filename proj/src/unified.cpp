#include "ksymp/unified.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ksymp/errors.hpp"
#include "ksymp/parallel.hpp"

namespace ksymp {

double coupling(const FieldModel& m, const UnifiedPoint& w) {
    double s = 0.0;
    for (int a = 0; a < m.k; ++a)
        for (int i = 0; i < m.n; ++i)
            s += w.p[m.pflat(a, i)] * w.v[m.vflat(i, a)];
    return s;
}

double unified_hamiltonian(const FieldModel& m, const UnifiedPoint& w) {
    LagPoint x;
    x.q = w.q;
    x.v = w.v;
    return coupling(m, w) - m.lagrangian.eval(m.bind(x));
}

UnifiedSystem make_unified_system(const FieldModel& m) {
    UnifiedSystem sys;
    sys.omega = unified_two_forms(m);
    Expr h = Expr::constant(0.0);
    for (int a = 0; a < m.k; ++a)
        for (int i = 0; i < m.n; ++i)
            h = h + Expr::variable(p_name(a, i)) * Expr::variable(v_name(i, a));
    sys.hamiltonian = (h - m.lagrangian).simplified();
    sys.grad.reserve(m.uni_dim());
    for (const auto& c : m.uni_coords())
        sys.grad.push_back(sys.hamiltonian.diff(c).simplified());
    return sys;
}

namespace {

std::vector<double> geoeq_impl(const FieldModel& m, const UnifiedSystem& sys,
                               const std::vector<double>& contraction, const Bindings& b) {
    std::vector<double> res = contraction;
    for (int c = 0; c < m.uni_dim(); ++c)
        res[c] -= sys.grad[c].eval(b);
    return res;
}

} // namespace

std::vector<double> unified_geoeq_residual(const FieldModel& m, const UnifiedSystem& sys,
                                           const KVectorField& z, const UnifiedPoint& w) {
    const Bindings b = m.bind(w);
    return geoeq_impl(m, sys, contract(sys.omega, z, b), b);
}

std::vector<double> unified_geoeq_residual(const FieldModel& m, const UnifiedSystem& sys,
                                           const KCoeffs& z, const UnifiedPoint& w) {
    const Bindings b = m.bind(w);
    return geoeq_impl(m, sys, contract(sys.omega, z, b), b);
}

std::vector<double> tangency_residual(const FieldModel& m, const KCoeffs& z,
                                      const UnifiedPoint& w) {
    const Bindings b = m.bind(w);
    std::vector<double> out(static_cast<std::size_t>(m.k) * m.k * m.n, 0.0);
    const int p_base = m.lag_dim();
    for (int a = 0; a < m.k; ++a)
        for (int bb = 0; bb < m.k; ++bb)
            for (int j = 0; j < m.n; ++j) {
                double r = z[a][p_base + m.pflat(bb, j)];
                for (int i = 0; i < m.n; ++i)
                    r -= w.v[m.vflat(i, a)] * m.mixed(i, j, bb).eval(b);
                for (int i = 0; i < m.n; ++i)
                    for (int c = 0; c < m.k; ++c)
                        r -= z[a][m.n + m.vflat(i, c)] * m.hess(i, c, j, bb).eval(b);
                out[(static_cast<std::size_t>(a) * m.k + bb) * m.n + j] = r;
            }
    return out;
}

std::vector<double> tangency_residual(const FieldModel& m, const KVectorField& z,
                                      const UnifiedPoint& w) {
    return tangency_residual(m, z.eval_all(m.flatten(w)), w);
}

SrSolution sr_solve(const FieldModel& m, const UnifiedPoint& w, double tol) {
    SrSolution sol;
    const Bindings b = m.bind(w);
    sol.graph_residual.resize(m.vdim());
    double worst = 0.0;
    for (int a = 0; a < m.k; ++a)
        for (int i = 0; i < m.n; ++i) {
            const double r = w.p[m.pflat(a, i)] - m.dL_dv[m.vflat(i, a)].eval(b);
            sol.graph_residual[m.pflat(a, i)] = r;
            worst = std::max(worst, std::fabs(r));
        }
    if (worst > tol) {
        sol.feasible = false;
        return sol;
    }
    sol.feasible = true;

    // Velocity components from the tangency system in symmetric-reduced
    // unknowns y[(i, {A,B})].
    const int per_field = m.k * (m.k + 1) / 2;
    const int params = m.n * per_field;
    auto pid = [&](int i, int a, int bb) {
        const int lo = std::min(a, bb), hi = std::max(a, bb);
        const int tri = lo * m.k - lo * (lo - 1) / 2 + (hi - lo);
        return i * per_field + tri;
    };

    const int rows = m.k * m.k * m.n;
    Mat sys(rows, params);
    std::vector<double> rhs(rows, 0.0);
    int row = 0;
    for (int a = 0; a < m.k; ++a)
        for (int bb = 0; bb < m.k; ++bb)
            for (int j = 0; j < m.n; ++j, ++row) {
                for (int i = 0; i < m.n; ++i)
                    for (int c = 0; c < m.k; ++c)
                        sys(row, pid(i, a, c)) += m.hess(i, c, j, bb).eval(b);
                double r = (a == bb) ? m.dL_dq[j].eval(b) / m.k : 0.0;
                for (int i = 0; i < m.n; ++i)
                    r -= w.v[m.vflat(i, a)] * m.mixed(i, j, bb).eval(b);
                rhs[row] = r;
            }
    const LstsqResult ls = lstsq_min_norm(sys, rhs, 1e-10);

    sol.z.assign(m.k, std::vector<double>(m.uni_dim(), 0.0));
    for (int a = 0; a < m.k; ++a) {
        for (int i = 0; i < m.n; ++i)
            sol.z[a][i] = w.v[m.vflat(i, a)];
        for (int i = 0; i < m.n; ++i)
            for (int bb = 0; bb < m.k; ++bb)
                sol.z[a][m.n + m.vflat(i, bb)] = ls.x[pid(i, a, bb)];
        for (int i = 0; i < m.n; ++i)
            sol.z[a][m.lag_dim() + m.pflat(a, i)] = m.dL_dq[i].eval(b) / m.k;
    }
    sol.tangency_max = norm_inf(tangency_residual(m, sol.z, w));
    return sol;
}

namespace {

struct RowSpec {
    std::vector<Expr> coeffs; // per unknown column, over product coordinates
    Expr rhs;
};

// Unknown layout: for each A, nk velocity components then nk momentum
// components.
int unknown_cols(const FieldModel& m) { return m.k * 2 * m.n * m.k; }
int vel_col(const FieldModel& m, int a, int i, int bb) {
    return a * 2 * m.n * m.k + m.vflat(i, bb);
}
int mom_col(const FieldModel& m, int a, int bb, int i) {
    return a * 2 * m.n * m.k + m.n * m.k + m.pflat(bb, i);
}

std::vector<RowSpec> assemble_rows(const FieldModel& m, const std::vector<Expr>& constraints) {
    std::vector<RowSpec> rows;
    const int cols = unknown_cols(m);
    // Momentum-slot sum rows: sum_A (Z_A)^A_i = dL/dq^i.
    for (int i = 0; i < m.n; ++i) {
        RowSpec r;
        r.coeffs.assign(cols, Expr::constant(0.0));
        for (int a = 0; a < m.k; ++a)
            r.coeffs[mom_col(m, a, a, i)] = Expr::constant(1.0);
        r.rhs = m.dL_dq[i];
        rows.push_back(std::move(r));
    }
    // Tangency rows: Z_A(c) = 0 with the base components fixed at v^i_A.
    for (const Expr& c : constraints) {
        std::vector<Expr> grad_q(m.n), grad_v(m.vdim()), grad_p(m.vdim());
        for (int i = 0; i < m.n; ++i)
            grad_q[i] = c.diff(q_name(i)).simplified();
        for (int i = 0; i < m.n; ++i)
            for (int bb = 0; bb < m.k; ++bb)
                grad_v[m.vflat(i, bb)] = c.diff(v_name(i, bb)).simplified();
        for (int bb = 0; bb < m.k; ++bb)
            for (int i = 0; i < m.n; ++i)
                grad_p[m.pflat(bb, i)] = c.diff(p_name(bb, i)).simplified();
        for (int a = 0; a < m.k; ++a) {
            RowSpec r;
            r.coeffs.assign(cols, Expr::constant(0.0));
            for (int i = 0; i < m.n; ++i)
                for (int bb = 0; bb < m.k; ++bb)
                    r.coeffs[vel_col(m, a, i, bb)] = grad_v[m.vflat(i, bb)];
            for (int bb = 0; bb < m.k; ++bb)
                for (int i = 0; i < m.n; ++i)
                    r.coeffs[mom_col(m, a, bb, i)] = grad_p[m.pflat(bb, i)];
            Expr rhs = Expr::constant(0.0);
            for (int i = 0; i < m.n; ++i)
                rhs = rhs - grad_q[i] * Expr::variable(v_name(i, a));
            r.rhs = rhs.simplified();
            rows.push_back(std::move(r));
        }
    }
    return rows;
}

bool rows_are_constant(const std::vector<RowSpec>& rows) {
    for (const auto& r : rows)
        for (const auto& c : r.coeffs)
            if (!c.is_constant())
                return false;
    return true;
}

} // namespace

ConstraintReport constraint_algorithm(const FieldModel& m,
                                      const std::vector<UnifiedPoint>& samples,
                                      int max_levels, double tol) {
    if (samples.empty())
        throw ModelError("constraint algorithm needs at least one sample");

    std::vector<Expr> constraints;
    for (int a = 0; a < m.k; ++a)
        for (int i = 0; i < m.n; ++i)
            constraints.push_back(
                (Expr::variable(p_name(a, i)) - m.dL_dv[m.vflat(i, a)]).simplified());

    for (const auto& w : samples) {
        const Bindings b = m.bind(w);
        for (const auto& c : constraints)
            if (std::fabs(c.eval(b)) > tol)
                throw ModelError("sample violates the graph constraints");
    }

    // Functional dedup data: candidate constraints are admitted only when
    // their value vector on a fixed probe set is independent of the span of
    // the active constraints. String comparison alone cannot terminate the
    // iteration, since later left-null bases reproduce linear combinations
    // of constraints already found.
    std::vector<Bindings> probes;
    {
        Rng rng(999);
        for (int p = 0; p < 24; ++p) {
            Bindings b;
            for (const auto& name : m.uni_coords())
                b.emplace(name, rng.uniform(-1.0, 1.0));
            probes.push_back(std::move(b));
        }
    }
    const int np = static_cast<int>(probes.size());
    auto values_on_probes = [&](const Expr& e, std::vector<double>& out) {
        out.assign(np, 0.0);
        for (int p = 0; p < np; ++p) {
            try {
                out[p] = e.eval(probes[p]);
            } catch (const EvalError&) {
                return false;
            }
        }
        return true;
    };
    Mat span(np, 0);
    auto admit = [&](const Expr& e) {
        std::vector<double> vals;
        if (!values_on_probes(e, vals))
            return true; // cannot probe it, keep conservatively
        // Residual against the empty span is |vals|, so zero functions are
        // rejected by the same test.
        const LstsqResult fit = lstsq_min_norm(span, vals, 1e-10);
        if (fit.residual <= 1e-8 * (1.0 + norm2(vals)))
            return false;
        Mat grown(np, span.cols + 1);
        for (int r = 0; r < np; ++r) {
            for (int c = 0; c < span.cols; ++c)
                grown(r, c) = span(r, c);
            grown(r, span.cols) = vals[r];
        }
        span = std::move(grown);
        return true;
    };

    std::set<std::string> known;
    for (const auto& c : constraints) {
        known.insert(c.str());
        admit(c);
    }

    ConstraintReport report;
    std::vector<int> alive(samples.size());
    for (std::size_t s = 0; s < samples.size(); ++s)
        alive[s] = static_cast<int>(s);

    for (int level = 0; level < max_levels; ++level) {
        ConstraintLevel lv;
        lv.active_constraints = constraints;

        const std::vector<RowSpec> rows = assemble_rows(m, constraints);
        const int cols = unknown_cols(m);

        lv.rows.resize(alive.size());
        std::vector<int> next_alive;
        parallel_for(static_cast<int>(alive.size()), [&](int idx) {
            const UnifiedPoint& w = samples[alive[idx]];
            const Bindings b = m.bind(w);
            Mat sys(static_cast<int>(rows.size()), cols);
            std::vector<double> rhs(rows.size());
            for (std::size_t r = 0; r < rows.size(); ++r) {
                for (int c = 0; c < cols; ++c) {
                    double value = 0.0;
                    if (!rows[r].coeffs[c].is_constant(&value))
                        value = rows[r].coeffs[c].eval(b);
                    sys(static_cast<int>(r), c) = value;
                }
                rhs[r] = rows[r].rhs.eval(b);
            }
            const LstsqResult ls = lstsq_min_norm(sys, rhs, 1e-10);
            ConstraintSampleRow row;
            row.sample = alive[idx];
            row.rank = ls.rank;
            row.solve_residual = ls.residual;
            row.retained = ls.residual <= tol * (1.0 + norm2(rhs));
            lv.rows[idx] = row;
        });
        for (const auto& row : lv.rows)
            if (row.retained)
                next_alive.push_back(row.sample);

        // Symbolic consistency conditions when the system matrix is
        // state-independent: left-null combinations of the right-hand sides.
        if (rows_are_constant(rows)) {
            Mat sys(static_cast<int>(rows.size()), cols);
            for (std::size_t r = 0; r < rows.size(); ++r)
                for (int c = 0; c < cols; ++c)
                    rows[r].coeffs[c].is_constant(&sys(static_cast<int>(r), c));
            const Mat left_null = nullspace(sys.transposed(), 1e-10);
            for (int j = 0; j < left_null.cols; ++j) {
                Expr cand = Expr::constant(0.0);
                for (std::size_t r = 0; r < rows.size(); ++r) {
                    const double lam = left_null(static_cast<int>(r), j);
                    if (std::fabs(lam) < 1e-12)
                        continue;
                    cand = cand + Expr::constant(lam) * rows[r].rhs;
                }
                cand = cand.simplified();
                if (!known.insert(cand.str()).second)
                    continue;
                if (!admit(cand))
                    continue;
                lv.new_constraints.push_back(cand);
                constraints.push_back(cand);
            }
        }

        lv.new_count = static_cast<int>(lv.new_constraints.size());
        const bool dropped = next_alive.size() != alive.size();
        report.levels.push_back(std::move(lv));
        alive = std::move(next_alive);

        if (report.levels.back().new_count == 0 && !dropped) {
            report.stabilized = true;
            break;
        }
        if (alive.empty())
            break;
    }
    report.final_level = static_cast<int>(report.levels.size()) - 1;
    report.surviving_samples = alive;
    return report;
}

KVectorField project_to_lagrangian(const FieldModel& m, const KVectorField& z,
                                   std::vector<UnifiedPoint> check_points, double tol) {
    if (z.space != Space::Unified)
        throw ModelError("projection expects a product-space field");

    // Tangency precheck: symbolic where the residual folds to constants.
    std::unordered_map<std::string, Expr> graph_sub;
    for (int a = 0; a < m.k; ++a)
        for (int i = 0; i < m.n; ++i)
            graph_sub.emplace(p_name(a, i), m.dL_dv[m.vflat(i, a)]);

    bool all_const = true;
    double worst_const = 0.0;
    const int p_base = m.lag_dim();
    std::vector<Expr> residual_exprs;
    for (int a = 0; a < m.k; ++a)
        for (int bb = 0; bb < m.k; ++bb)
            for (int j = 0; j < m.n; ++j) {
                Expr r = z.comps[a][p_base + m.pflat(bb, j)];
                for (int i = 0; i < m.n; ++i)
                    r = r - Expr::variable(v_name(i, a)) * m.mixed(i, j, bb);
                for (int i = 0; i < m.n; ++i)
                    for (int c = 0; c < m.k; ++c)
                        r = r - z.comps[a][m.n + m.vflat(i, c)] * m.hess(i, c, j, bb);
                r = r.substitute(graph_sub).simplified();
                double cv = 0.0;
                if (r.is_constant(&cv))
                    worst_const = std::max(worst_const, std::fabs(cv));
                else
                    all_const = false;
                residual_exprs.push_back(std::move(r));
            }
    if (all_const) {
        if (worst_const > tol)
            throw ModelError("field is not tangent to the graph");
    } else {
        if (check_points.empty())
            check_points = random_graph_points(m, 5, 12345);
        for (const auto& w : check_points) {
            LagPoint x;
            x.q = w.q;
            x.v = w.v;
            const Bindings b = m.bind(x);
            for (const auto& r : residual_exprs)
                if (std::fabs(r.eval(b)) > tol)
                    throw ModelError("field is not tangent to the graph");
        }
    }

    KVectorField out;
    out.space = Space::Lagrangian;
    out.coords = m.lag_coords();
    out.comps.assign(m.k, std::vector<Expr>(m.lag_dim(), Expr::constant(0.0)));
    for (int a = 0; a < m.k; ++a)
        for (int c = 0; c < m.lag_dim(); ++c)
            out.comps[a][c] = z.comps[a][c].substitute(graph_sub).simplified();
    return out;
}

KVectorField lift_from_lagrangian(const FieldModel& m, const KVectorField& xl) {
    if (xl.space != Space::Lagrangian)
        throw ModelError("lift expects a velocity-space field");
    // Second-order check, symbolic first, then numeric fallback.
    bool symbolic_ok = true;
    for (int a = 0; a < m.k && symbolic_ok; ++a)
        for (int i = 0; i < m.n && symbolic_ok; ++i) {
            const Expr diff_expr =
                (xl.comps[a][i] - Expr::variable(v_name(i, a))).simplified();
            double cv = 1.0;
            if (!diff_expr.is_constant(&cv) || std::fabs(cv) > 0.0)
                symbolic_ok = false;
        }
    if (!symbolic_ok) {
        const std::vector<LagPoint> probes = random_lag_points(m, 5, 54321);
        if (!is_sopde(m, xl, probes, 1e-10))
            throw ModelError("lift requires a second-order field");
    }

    KVectorField z;
    z.space = Space::Unified;
    z.coords = m.uni_coords();
    z.comps.assign(m.k, std::vector<Expr>(m.uni_dim(), Expr::constant(0.0)));
    for (int a = 0; a < m.k; ++a) {
        for (int i = 0; i < m.n; ++i)
            z.comps[a][i] = Expr::variable(v_name(i, a));
        for (int i = 0; i < m.n; ++i)
            for (int bb = 0; bb < m.k; ++bb)
                z.comps[a][m.n + m.vflat(i, bb)] = xl.comps[a][m.n + m.vflat(i, bb)];
        for (int c = 0; c < m.k; ++c)
            for (int j = 0; j < m.n; ++j) {
                Expr s = Expr::constant(0.0);
                for (int i = 0; i < m.n; ++i)
                    s = s + Expr::variable(v_name(i, a)) * m.mixed(i, j, c);
                for (int i = 0; i < m.n; ++i)
                    for (int bb = 0; bb < m.k; ++bb)
                        s = s + xl.comps[a][m.n + m.vflat(i, bb)] * m.hess(i, bb, j, c);
                z.comps[a][m.lag_dim() + m.pflat(c, j)] = s.simplified();
            }
    }
    return z;
}

std::vector<UnifiedPoint> random_graph_points(const FieldModel& m, int count,
                                              std::uint64_t seed, double lo, double hi) {
    const std::vector<LagPoint> base = random_lag_points(m, count, seed, lo, hi);
    std::vector<UnifiedPoint> out;
    out.reserve(base.size());
    for (const auto& x : base) {
        const HamPoint y = legendre(m, x);
        UnifiedPoint w;
        w.q = x.q;
        w.v = x.v;
        w.p = y.p;
        out.push_back(std::move(w));
    }
    return out;
}

} // namespace ksymp
