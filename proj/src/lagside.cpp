#include "ksymp/lagside.hpp"

#include <cmath>

#include "ksymp/errors.hpp"

namespace ksymp {

namespace {

// Reduced acceleration parameters for the two ansatz choices.
struct ParamMap {
    int count = 0;
    // pid(i, a, b) -> column of the reduced system
    std::vector<int> pid; // [(i*k + a)*k + b]

    static ParamMap build(const FieldModel& m, SopdeAnsatz ansatz) {
        ParamMap pm;
        pm.pid.resize(static_cast<std::size_t>(m.n) * m.k * m.k);
        if (ansatz == SopdeAnsatz::Symmetric) {
            const int per_field = m.k * (m.k + 1) / 2;
            pm.count = m.n * per_field;
            for (int i = 0; i < m.n; ++i)
                for (int a = 0; a < m.k; ++a)
                    for (int b = 0; b < m.k; ++b) {
                        const int lo = std::min(a, b), hi = std::max(a, b);
                        const int tri = lo * m.k - lo * (lo - 1) / 2 + (hi - lo);
                        pm.pid[(static_cast<std::size_t>(i) * m.k + a) * m.k + b] =
                            i * per_field + tri;
                    }
        } else {
            pm.count = m.n;
            for (int i = 0; i < m.n; ++i)
                for (int a = 0; a < m.k; ++a)
                    for (int b = 0; b < m.k; ++b)
                        pm.pid[(static_cast<std::size_t>(i) * m.k + a) * m.k + b] = i;
        }
        return pm;
    }
};

// Reduced system rows as expressions: row i, column p. The full-system
// coefficient of unknown (X_A)^j_B in equation i is hess(i, A, j, B).
void assemble_symbolic(const FieldModel& m, const ParamMap& pm, ExprMat& mat,
                       std::vector<Expr>& rhs) {
    mat = ExprMat(m.n, pm.count);
    for (int i = 0; i < m.n; ++i)
        for (int a = 0; a < m.k; ++a)
            for (int j = 0; j < m.n; ++j)
                for (int b = 0; b < m.k; ++b) {
                    const int col = pm.pid[(static_cast<std::size_t>(j) * m.k + a) * m.k + b];
                    mat(i, col) = (mat(i, col) + m.hess(i, a, j, b)).simplified();
                }
    rhs.assign(m.n, Expr());
    for (int i = 0; i < m.n; ++i) {
        Expr r = m.dL_dq[i];
        for (int a = 0; a < m.k; ++a)
            for (int j = 0; j < m.n; ++j)
                r = r - m.mixed(j, i, a) * Expr::variable(v_name(j, a));
        rhs[i] = r.simplified();
    }
}

Expr det_sym(const ExprMat& g);

ExprMat minor_of(const ExprMat& g, int row, int col) {
    ExprMat sub(g.rows - 1, g.cols - 1);
    int rr = 0;
    for (int r = 0; r < g.rows; ++r) {
        if (r == row)
            continue;
        int cc = 0;
        for (int c = 0; c < g.cols; ++c) {
            if (c == col)
                continue;
            sub(rr, cc) = g(r, c);
            ++cc;
        }
        ++rr;
    }
    return sub;
}

Expr det_sym(const ExprMat& g) {
    if (g.rows == 1)
        return g(0, 0);
    Expr d = Expr::constant(0.0);
    for (int c = 0; c < g.cols; ++c) {
        Expr term = g(0, c) * det_sym(minor_of(g, 0, c));
        d = (c % 2 == 0) ? d + term : d - term;
    }
    return d.simplified();
}

// adj(g)_{ij} = cofactor_{ji}
ExprMat adjugate_sym(const ExprMat& g) {
    ExprMat adj(g.rows, g.cols);
    if (g.rows == 1) {
        adj(0, 0) = Expr::constant(1.0);
        return adj;
    }
    for (int r = 0; r < g.rows; ++r)
        for (int c = 0; c < g.cols; ++c) {
            Expr cof = det_sym(minor_of(g, r, c));
            if ((r + c) % 2 != 0)
                cof = Expr::neg(cof);
            adj(c, r) = cof.simplified();
        }
    return adj;
}

} // namespace

std::vector<std::vector<double>> el_residual(const FieldModel& m, const Section& phi) {
    if (phi.dim != m.n)
        throw ModelError("euler-lagrange residual expects a base-manifold section");
    Section src = phi;
    if (!src.has_d1 || !src.has_d2)
        src.compute_fd_derivatives(true);

    const int total = src.grid.node_count();
    const int k = src.grid.k();
    if (k != m.k)
        throw ModelError("section parameter count does not match the model");

    std::vector<std::vector<double>> out(total, std::vector<double>(m.n, 0.0));
    LagPoint x;
    x.q.resize(m.n);
    x.v.resize(m.vdim());
    for (int node = 0; node < total; ++node) {
        for (int i = 0; i < m.n; ++i)
            x.q[i] = src.value(node, i);
        for (int i = 0; i < m.n; ++i)
            for (int a = 0; a < k; ++a)
                x.v[m.vflat(i, a)] = src.deriv(node, a, i);
        const Bindings b = m.bind(x);
        for (int i = 0; i < m.n; ++i) {
            double r = -m.dL_dq[i].eval(b);
            for (int a = 0; a < k; ++a)
                for (int j = 0; j < m.n; ++j) {
                    r += m.mixed(j, i, a).eval(b) * src.deriv(node, a, j);
                    for (int bb = 0; bb < k; ++bb)
                        r += m.hess(i, a, j, bb).eval(b) * src.deriv2(node, a, bb, j);
                }
            out[node][i] = r;
        }
    }
    return out;
}

SopdeSolution sopde_solve(const FieldModel& m, const LagPoint& x, SopdeAnsatz ansatz) {
    const ParamMap pm = ParamMap::build(m, ansatz);
    ExprMat mat_sym;
    std::vector<Expr> rhs_sym;
    assemble_symbolic(m, pm, mat_sym, rhs_sym);

    const Bindings b = m.bind(x);
    const Mat mat = eval(mat_sym, b);
    std::vector<double> rhs(m.n);
    for (int i = 0; i < m.n; ++i)
        rhs[i] = rhs_sym[i].eval(b);

    const LstsqResult ls = lstsq_min_norm(mat, rhs, 1e-10);

    SopdeSolution sol;
    sol.rank = ls.rank;
    sol.residual = ls.residual;
    sol.consistent = ls.residual <= 1e-8 * (1.0 + norm2(rhs));
    sol.accel.resize(static_cast<std::size_t>(m.n) * m.k * m.k);
    for (int i = 0; i < m.n; ++i)
        for (int a = 0; a < m.k; ++a)
            for (int bb = 0; bb < m.k; ++bb)
                sol.accel[(static_cast<std::size_t>(i) * m.k + a) * m.k + bb] =
                    ls.x[pm.pid[(static_cast<std::size_t>(i) * m.k + a) * m.k + bb]];
    return sol;
}

KVectorField sopde_field(const FieldModel& m, SopdeAnsatz ansatz) {
    if (m.n > 4)
        throw ModelError("symbolic field construction supports n <= 4");
    const ParamMap pm = ParamMap::build(m, ansatz);
    ExprMat mat;
    std::vector<Expr> rhs;
    assemble_symbolic(m, pm, mat, rhs);

    // Minimum-norm solution y = M^T (M M^T)^{-1} b via the adjugate.
    ExprMat gram(m.n, m.n);
    for (int r = 0; r < m.n; ++r)
        for (int c = 0; c < m.n; ++c) {
            Expr s = Expr::constant(0.0);
            for (int p = 0; p < pm.count; ++p)
                s = s + mat(r, p) * mat(c, p);
            gram(r, c) = s.simplified();
        }
    const Expr gdet = det_sym(gram);
    const ExprMat adj = adjugate_sym(gram);

    // w = adj(G) b, then y_p = (sum_i M_ip w_i) / det(G).
    std::vector<Expr> w(m.n);
    for (int i = 0; i < m.n; ++i) {
        Expr s = Expr::constant(0.0);
        for (int j = 0; j < m.n; ++j)
            s = s + adj(i, j) * rhs[j];
        w[i] = s.simplified();
    }
    std::vector<Expr> params(pm.count);
    for (int p = 0; p < pm.count; ++p) {
        Expr s = Expr::constant(0.0);
        for (int i = 0; i < m.n; ++i)
            s = s + mat(i, p) * w[i];
        params[p] = (s.simplified() / gdet).simplified();
    }

    KVectorField f;
    f.space = Space::Lagrangian;
    f.coords = m.lag_coords();
    f.comps.assign(m.k, std::vector<Expr>(m.lag_dim(), Expr::constant(0.0)));
    for (int a = 0; a < m.k; ++a) {
        for (int i = 0; i < m.n; ++i)
            f.comps[a][i] = Expr::variable(v_name(i, a));
        for (int i = 0; i < m.n; ++i)
            for (int bb = 0; bb < m.k; ++bb)
                f.comps[a][m.n + m.vflat(i, bb)] =
                    params[pm.pid[(static_cast<std::size_t>(i) * m.k + a) * m.k + bb]];
    }
    return f;
}

std::vector<double> lag_geoeq_residual(const FieldModel& m, const KVectorField& x,
                                       const LagPoint& at) {
    if (x.space != Space::Lagrangian)
        throw ModelError("geometric equation residual expects a velocity-space field");
    const Bindings b = m.bind(at);
    std::vector<double> res = contract(lagrangian_two_forms(m), x, b);
    for (int c = 0; c < m.lag_dim(); ++c)
        res[c] -= m.denergy[c].eval(b);
    return res;
}

KCoeffs solve_lag_geoeq_full(const FieldModel& m, const LagPoint& at) {
    const Bindings b = m.bind(at);
    const TwoFormFamily wl = lagrangian_two_forms(m);
    const int dim = m.lag_dim();
    Mat sys(dim, m.k * dim);
    for (int a = 0; a < m.k; ++a) {
        const Mat w = eval(wl.forms[a], b);
        // Column for unit coefficient e_s of X_a contributes w(s, j) to
        // covector entry j.
        for (int s = 0; s < dim; ++s)
            for (int j = 0; j < dim; ++j)
                sys(j, a * dim + s) = w(s, j);
    }
    std::vector<double> rhs(dim);
    for (int c = 0; c < dim; ++c)
        rhs[c] = m.denergy[c].eval(b);
    const LstsqResult ls = lstsq_min_norm(sys, rhs, 1e-10);
    KCoeffs out(m.k, std::vector<double>(dim, 0.0));
    for (int a = 0; a < m.k; ++a)
        for (int s = 0; s < dim; ++s)
            out[a][s] = ls.x[a * dim + s];
    return out;
}

} // namespace ksymp
