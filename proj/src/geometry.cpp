#include "ksymp/geometry.hpp"

#include <cmath>

#include "ksymp/errors.hpp"

namespace ksymp {

Mat eval(const ExprMat& m, const Bindings& b) {
    Mat out(m.rows, m.cols);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) {
            double c = 0.0;
            const Expr& e = m(i, j);
            out(i, j) = e.is_constant(&c) ? c : e.eval(b);
        }
    return out;
}

void TwoFormFamily::set_pair(int a, int r, int c, const Expr& expr) {
    forms[a](r, c) = expr;
    forms[a](c, r) = Expr::neg(expr).simplified();
}

HamPoint legendre(const FieldModel& m, const LagPoint& x) {
    const Bindings b = m.bind(x);
    HamPoint y;
    y.q = x.q;
    y.p.resize(m.vdim());
    for (int a = 0; a < m.k; ++a)
        for (int i = 0; i < m.n; ++i)
            y.p[m.pflat(a, i)] = m.dL_dv[m.vflat(i, a)].eval(b);
    return y;
}

Mat hessian(const FieldModel& m, const LagPoint& x) {
    const Bindings b = m.bind(x);
    const int d = m.vdim();
    Mat h(d, d);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) {
            const Expr& e = m.d2L_dvdv[static_cast<std::size_t>(r) * d + c];
            double v = 0.0;
            h(r, c) = e.is_constant(&v) ? v : e.eval(b);
        }
    return h;
}

RegularityReport is_regular(const FieldModel& m, const std::vector<LagPoint>& samples,
                            double tol) {
    if (samples.empty())
        throw ModelError("regularity check needs at least one sample");
    RegularityReport report;
    report.tol = tol;
    report.regular = true;
    report.dets.reserve(samples.size());
    for (const auto& x : samples) {
        const double d = det(hessian(m, x));
        report.dets.push_back(d);
        if (!(std::fabs(d) > tol))
            report.regular = false;
    }
    return report;
}

double energy(const FieldModel& m, const LagPoint& x) {
    const Bindings b = m.bind(x);
    double e = 0.0;
    for (int i = 0; i < m.n; ++i)
        for (int a = 0; a < m.k; ++a)
            e += x.vel(i, a, m.k) * m.dL_dv[m.vflat(i, a)].eval(b);
    return e - m.lagrangian.eval(b);
}

TwoFormFamily canonical_two_forms(const FieldModel& m) {
    TwoFormFamily f;
    f.space = Space::Hamiltonian;
    f.coords = m.ham_coords();
    const int dim = m.ham_dim();
    f.forms.assign(m.k, ExprMat(dim, dim));
    const Expr one = Expr::constant(1.0);
    for (int a = 0; a < m.k; ++a)
        for (int i = 0; i < m.n; ++i)
            f.set_pair(a, i, m.n + m.pflat(a, i), one);
    return f;
}

TwoFormFamily lagrangian_two_forms(const FieldModel& m) {
    TwoFormFamily f;
    f.space = Space::Lagrangian;
    f.coords = m.lag_coords();
    const int dim = m.lag_dim();
    f.forms.assign(m.k, ExprMat(dim, dim));
    for (int a = 0; a < m.k; ++a) {
        // q-q block: d2L/dq^j dv^i_a - d2L/dq^i dv^j_a at entry (q^i, q^j).
        for (int i = 0; i < m.n; ++i)
            for (int j = i + 1; j < m.n; ++j) {
                Expr entry = (m.mixed(j, i, a) - m.mixed(i, j, a)).simplified();
                f.set_pair(a, i, j, entry);
            }
        // q-v block: d2L/dv^j_b dv^i_a at entry (q^i, v^j_b).
        for (int i = 0; i < m.n; ++i)
            for (int j = 0; j < m.n; ++j)
                for (int b = 0; b < m.k; ++b)
                    f.set_pair(a, i, m.n + m.vflat(j, b), m.hess(i, a, j, b));
    }
    return f;
}

TwoFormFamily unified_two_forms(const FieldModel& m) {
    TwoFormFamily f;
    f.space = Space::Unified;
    f.coords = m.uni_coords();
    const int dim = m.uni_dim();
    f.forms.assign(m.k, ExprMat(dim, dim));
    const Expr one = Expr::constant(1.0);
    const int p_base = m.lag_dim();
    for (int a = 0; a < m.k; ++a)
        for (int i = 0; i < m.n; ++i)
            f.set_pair(a, i, p_base + m.pflat(a, i), one);
    return f;
}

ExprMat legendre_jacobian(const FieldModel& m) {
    ExprMat j(m.ham_dim(), m.lag_dim());
    const Expr one = Expr::constant(1.0);
    for (int i = 0; i < m.n; ++i)
        j(i, i) = one;
    for (int a = 0; a < m.k; ++a)
        for (int i = 0; i < m.n; ++i) {
            const int row = m.n + m.pflat(a, i);
            for (int jq = 0; jq < m.n; ++jq)
                j(row, jq) = m.mixed(jq, i, a);
            for (int jj = 0; jj < m.n; ++jj)
                for (int b = 0; b < m.k; ++b)
                    j(row, m.n + m.vflat(jj, b)) = m.hess(i, a, jj, b);
        }
    return j;
}

ExprMat graph_jacobian(const FieldModel& m) {
    ExprMat j(m.uni_dim(), m.lag_dim());
    const Expr one = Expr::constant(1.0);
    for (int c = 0; c < m.lag_dim(); ++c)
        j(c, c) = one;
    for (int a = 0; a < m.k; ++a)
        for (int i = 0; i < m.n; ++i) {
            const int row = m.lag_dim() + m.pflat(a, i);
            for (int jq = 0; jq < m.n; ++jq)
                j(row, jq) = m.mixed(jq, i, a);
            for (int jj = 0; jj < m.n; ++jj)
                for (int b = 0; b < m.k; ++b)
                    j(row, m.n + m.vflat(jj, b)) = m.hess(i, a, jj, b);
        }
    return j;
}

std::vector<double> pullback_check(const FieldModel& m, const LagPoint& x) {
    const Bindings b = m.bind(x);
    const Mat j = eval(legendre_jacobian(m), b);
    const Mat jt = j.transposed();
    const TwoFormFamily omega0 = canonical_two_forms(m);
    const TwoFormFamily omega_l = lagrangian_two_forms(m);
    std::vector<double> out;
    out.reserve(m.k);
    for (int a = 0; a < m.k; ++a) {
        const Mat pulled = matmul(matmul(jt, eval(omega0.forms[a], b)), j);
        const Mat direct = eval(omega_l.forms[a], b);
        double worst = 0.0;
        for (int r = 0; r < pulled.rows; ++r)
            for (int c = 0; c < pulled.cols; ++c)
                worst = std::max(worst, std::fabs(pulled(r, c) - direct(r, c)));
        out.push_back(worst);
    }
    return out;
}

} // namespace ksymp
