#include "ksymp/hamside.hpp"

#include <cmath>

#include "ksymp/errors.hpp"

namespace ksymp {

HamFunction HamFunction::explicit_expr(const FieldModel& m, Expr h) {
    for (const std::string& var : h.free_variables()) {
        bool known = false;
        for (const auto& c : m.ham_coords())
            if (c == var) {
                known = true;
                break;
            }
        if (!known)
            throw ModelError("hamiltonian uses unknown variable '" + var + "'");
    }
    HamFunction f;
    f.model_ = &m;
    f.expr_ = h.simplified();
    f.grad_exprs_.reserve(m.ham_dim());
    for (const auto& c : m.ham_coords())
        f.grad_exprs_.push_back(f.expr_->diff(c).simplified());
    return f;
}

HamFunction HamFunction::implicit_energy(const FieldModel& m) {
    HamFunction f;
    f.model_ = &m;
    return f;
}

double HamFunction::value(const HamPoint& y) const {
    if (expr_)
        return expr_->eval(model_->bind(y));
    const LagPoint x = invert_legendre(*model_, y);
    return energy(*model_, x);
}

std::vector<double> HamFunction::gradient(const HamPoint& y) const {
    const FieldModel& m = *model_;
    if (expr_) {
        const Bindings b = m.bind(y);
        std::vector<double> g(m.ham_dim());
        for (int c = 0; c < m.ham_dim(); ++c)
            g[c] = grad_exprs_[c].eval(b);
        return g;
    }
    // Central differences through the Newton inversion. Warm-starting each
    // probe from the center's fiber point keeps the inversions cheap.
    const double h = 1e-6;
    const LagPoint center = invert_legendre(m, y);
    std::vector<double> flat = m.flatten(y);
    std::vector<double> g(m.ham_dim());
    for (int c = 0; c < m.ham_dim(); ++c) {
        flat[c] += h;
        const HamPoint yp = m.unflatten_ham(flat);
        const double fp = energy(m, invert_legendre(m, yp, center));
        flat[c] -= 2.0 * h;
        const HamPoint ym = m.unflatten_ham(flat);
        const double fm = energy(m, invert_legendre(m, ym, center));
        flat[c] += h;
        g[c] = (fp - fm) / (2.0 * h);
    }
    return g;
}

HdwResidual hdw_residual(const HamFunction& h, const Section& psi) {
    const FieldModel& m = h.model();
    if (psi.dim != m.ham_dim())
        throw ModelError("hdw residual expects a momentum-space section");
    Section src = psi;
    if (!src.has_d1)
        src.compute_fd_derivatives(false);

    const int total = src.grid.node_count();
    const int k = src.grid.k();
    HdwResidual out;
    out.nodes.resize(total);
    HamPoint y;
    y.q.resize(m.n);
    y.p.resize(m.vdim());
    for (int node = 0; node < total; ++node) {
        if (!src.node_valid(node))
            continue;
        for (int i = 0; i < m.n; ++i)
            y.q[i] = src.value(node, i);
        for (int c = 0; c < m.vdim(); ++c)
            y.p[c] = src.value(node, m.n + c);
        const std::vector<double> grad = h.gradient(y);
        std::vector<double>& r = out.nodes[node];
        r.resize(m.n + m.vdim());
        for (int i = 0; i < m.n; ++i) {
            double s = grad[i];
            for (int a = 0; a < k; ++a)
                s += src.deriv(node, a, m.n + m.pflat(a, i));
            r[i] = s;
        }
        for (int a = 0; a < k; ++a)
            for (int i = 0; i < m.n; ++i)
                r[m.n + m.pflat(a, i)] =
                    grad[m.n + m.pflat(a, i)] - src.deriv(node, a, i);
        const double worst = norm_inf(r);
        out.max_all = std::max(out.max_all, worst);
        if (src.grid.is_interior(src.grid.multi_index(node)))
            out.max_interior = std::max(out.max_interior, worst);
    }
    return out;
}

namespace {

std::vector<double> geoeq_residual_impl(const HamFunction& h,
                                        const std::vector<double>& contraction,
                                        const HamPoint& y) {
    const std::vector<double> grad = h.gradient(y);
    std::vector<double> res = contraction;
    for (std::size_t c = 0; c < res.size(); ++c)
        res[c] -= grad[c];
    return res;
}

} // namespace

std::vector<double> ham_geoeq_residual(const HamFunction& h, const KVectorField& x,
                                       const HamPoint& y) {
    const FieldModel& m = h.model();
    return geoeq_residual_impl(h, contract(canonical_two_forms(m), x, m.bind(y)), y);
}

std::vector<double> ham_geoeq_residual(const HamFunction& h, const KCoeffs& x,
                                       const HamPoint& y) {
    const FieldModel& m = h.model();
    return geoeq_residual_impl(h, contract(canonical_two_forms(m), x, m.bind(y)), y);
}

namespace {

std::vector<double> legendre_gap(const FieldModel& m, const LagPoint& x, const HamPoint& y) {
    const Bindings b = m.bind(x);
    std::vector<double> f(m.vdim());
    for (int i = 0; i < m.n; ++i)
        for (int a = 0; a < m.k; ++a)
            f[m.vflat(i, a)] = m.dL_dv[m.vflat(i, a)].eval(b) - y.mom(a, i, m.n);
    return f;
}

LagPoint start_point(const FieldModel& m, const HamPoint& y,
                     const std::optional<LagPoint>& guess) {
    if (guess)
        return *guess;
    LagPoint x;
    x.q = y.q;
    x.v.assign(m.vdim(), 0.0);
    return x;
}

} // namespace

LagPoint invert_legendre(const FieldModel& m, const HamPoint& y,
                         std::optional<LagPoint> guess, double tol, int max_iter) {
    LagPoint x = start_point(m, y, guess);
    x.q = y.q; // the base point is fixed by the fiber
    std::vector<double> f = legendre_gap(m, x, y);
    double fnorm = norm_inf(f);
    for (int iter = 0; iter < max_iter; ++iter) {
        if (fnorm <= tol)
            return x;
        const Mat jac = hessian(m, x);
        std::vector<double> rhs(f.size());
        for (std::size_t i = 0; i < f.size(); ++i)
            rhs[i] = -f[i];
        std::vector<double> step;
        try {
            step = solve_square(jac, rhs);
        } catch (const NumericError&) {
            throw NumericError("legendre inversion hit a singular hessian");
        }
        double lambda = 1.0;
        for (;;) {
            LagPoint trial = x;
            for (int c = 0; c < m.vdim(); ++c)
                trial.v[c] += lambda * step[c];
            const std::vector<double> ft = legendre_gap(m, trial, y);
            const double tnorm = norm_inf(ft);
            if (tnorm < fnorm || lambda < 1e-8) {
                x = trial;
                f = ft;
                fnorm = tnorm;
                break;
            }
            lambda *= 0.5;
        }
    }
    if (fnorm <= tol)
        return x;
    throw NumericError("legendre inversion did not converge (residual " +
                       format_double(fnorm) + ")");
}

FiberPoint invert_legendre_ls(const FieldModel& m, const HamPoint& y,
                              std::optional<LagPoint> guess, double tol, int max_iter) {
    LagPoint x = start_point(m, y, guess);
    x.q = y.q;
    std::vector<double> f = legendre_gap(m, x, y);
    double fnorm = norm2(f);
    for (int iter = 0; iter < max_iter && fnorm > tol; ++iter) {
        const Mat jac = hessian(m, x);
        std::vector<double> rhs(f.size());
        for (std::size_t i = 0; i < f.size(); ++i)
            rhs[i] = -f[i];
        const LstsqResult ls = lstsq_min_norm(jac, rhs, 1e-10);
        if (norm_inf(ls.x) < 1e-15)
            break; // stationary: nothing more Gauss-Newton can do
        double lambda = 1.0;
        bool moved = false;
        while (lambda >= 1e-10) {
            LagPoint trial = x;
            for (int c = 0; c < m.vdim(); ++c)
                trial.v[c] += lambda * ls.x[c];
            const std::vector<double> ft = legendre_gap(m, trial, y);
            const double tnorm = norm2(ft);
            if (tnorm < fnorm) {
                x = trial;
                f = ft;
                fnorm = tnorm;
                moved = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!moved)
            break;
    }
    return FiberPoint{x, fnorm};
}

Pushforward pushforward_xh(const FieldModel& m, const KVectorField& xl, const HamPoint& y,
                           std::optional<LagPoint> guess) {
    const LagPoint x = invert_legendre(m, y, guess);
    const Bindings b = m.bind(x);
    const Mat jac = eval(legendre_jacobian(m), b);
    Pushforward out;
    out.at = x;
    out.coeffs.reserve(m.k);
    for (int a = 0; a < m.k; ++a)
        out.coeffs.push_back(matvec(jac, xl.eval_at(a, b)));
    return out;
}

RestrictedResidual restricted_ham_residual(const FieldModel& m,
                                           const std::vector<Expr>& constraints,
                                           const HamFunction& h0, const KCoeffs& x0,
                                           const HamPoint& y, double constraint_tol) {
    const Bindings b = m.bind(y);
    for (const Expr& c : constraints)
        if (std::fabs(c.eval(b)) > constraint_tol)
            throw ModelError("point violates constraint '" + c.str() + "'");

    Mat jac(static_cast<int>(constraints.size()), m.ham_dim());
    for (std::size_t r = 0; r < constraints.size(); ++r)
        for (int c = 0; c < m.ham_dim(); ++c)
            jac(static_cast<int>(r), c) = constraints[r].diff(m.ham_coords()[c]).eval(b);

    RestrictedResidual out;
    out.jacobian_rank = constraints.empty() ? 0 : numeric_rank(jac, 1e-10);
    out.rank_deficient =
        !constraints.empty() && out.jacobian_rank < static_cast<int>(constraints.size());

    const Mat tangent = nullspace(jac, 1e-10);
    const std::vector<double> raw =
        geoeq_residual_impl(h0, contract(canonical_two_forms(m), x0, b), y);
    out.tangent_residual.resize(tangent.cols);
    for (int j = 0; j < tangent.cols; ++j) {
        double s = 0.0;
        for (int i = 0; i < tangent.rows; ++i)
            s += tangent(i, j) * raw[i];
        out.tangent_residual[j] = s;
    }
    return out;
}

} // namespace ksymp
