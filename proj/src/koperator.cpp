#include "ksymp/koperator.hpp"

#include <cmath>

#include "ksymp/errors.hpp"
#include "ksymp/parallel.hpp"

namespace ksymp {

FieldOperatorK default_k(const FieldModel& m) {
    FieldOperatorK kop;
    kop.coords = m.lag_coords();
    kop.base.assign(m.k, std::vector<Expr>(m.n, Expr::constant(0.0)));
    kop.moment.assign(m.k, std::vector<Expr>(m.vdim(), Expr::constant(0.0)));
    const Expr inv_k = Expr::constant(1.0 / m.k);
    for (int a = 0; a < m.k; ++a) {
        for (int i = 0; i < m.n; ++i)
            kop.base[a][i] = Expr::variable(v_name(i, a));
        for (int i = 0; i < m.n; ++i)
            kop.moment[a][m.pflat(a, i)] = (inv_k * m.dL_dq[i]).simplified();
    }
    return kop;
}

namespace {

// Value of K_A at x as a momentum-space tangent vector (q rows then p rows).
std::vector<double> eval_k(const FieldModel& m, const FieldOperatorK& kop, int a,
                           const Bindings& b) {
    std::vector<double> out(m.ham_dim(), 0.0);
    for (int i = 0; i < m.n; ++i) {
        double value = 0.0;
        if (!kop.base[a][i].is_constant(&value))
            value = kop.base[a][i].eval(b);
        out[i] = value;
    }
    for (int c = 0; c < m.vdim(); ++c) {
        double value = 0.0;
        if (!kop.moment[a][c].is_constant(&value))
            value = kop.moment[a][c].eval(b);
        out[m.n + c] = value;
    }
    return out;
}

} // namespace

VerifyKReport verify_k(const FieldModel& m, const FieldOperatorK& kop,
                       const std::vector<LagPoint>& samples) {
    const TwoFormFamily omega0 = canonical_two_forms(m);
    const ExprMat jac = legendre_jacobian(m);

    std::vector<double> field_eq(samples.size(), 0.0);
    std::vector<double> second_order(samples.size(), 0.0);
    std::vector<double> slot_trace(samples.size(), 0.0);

    parallel_for(static_cast<int>(samples.size()), [&](int idx) {
        const LagPoint& x = samples[idx];
        const Bindings b = m.bind(x);

        std::vector<double> cov(m.ham_dim(), 0.0);
        for (int a = 0; a < m.k; ++a) {
            const Mat w = eval(omega0.forms[a], b);
            const std::vector<double> part = mat_tvec(w, eval_k(m, kop, a, b));
            for (int c = 0; c < m.ham_dim(); ++c)
                cov[c] += part[c];
        }
        const Mat j = eval(jac, b);
        const std::vector<double> pulled = mat_tvec(j, cov);
        double fe = 0.0;
        for (int c = 0; c < m.lag_dim(); ++c)
            fe = std::max(fe, std::fabs(pulled[c] - m.denergy[c].eval(b)));
        field_eq[idx] = fe;

        double so = 0.0;
        for (int a = 0; a < m.k; ++a)
            for (int i = 0; i < m.n; ++i) {
                double value = 0.0;
                if (!kop.base[a][i].is_constant(&value))
                    value = kop.base[a][i].eval(b);
                so = std::max(so, std::fabs(value - x.vel(i, a, m.k)));
            }
        second_order[idx] = so;

        double kl = 0.0;
        for (int i = 0; i < m.n; ++i) {
            double s = -m.dL_dq[i].eval(b);
            for (int a = 0; a < m.k; ++a) {
                double value = 0.0;
                if (!kop.moment[a][m.pflat(a, i)].is_constant(&value))
                    value = kop.moment[a][m.pflat(a, i)].eval(b);
                s += value;
            }
            kl = std::max(kl, std::fabs(s));
        }
        slot_trace[idx] = kl;
    });

    VerifyKReport report;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        report.max_field_eq = std::max(report.max_field_eq, field_eq[i]);
        report.max_second_order = std::max(report.max_second_order, second_order[i]);
        report.max_slot_trace = std::max(report.max_slot_trace, slot_trace[i]);
    }
    return report;
}

bool slot_trace_identity_exact(const FieldModel& m, const FieldOperatorK& kop) {
    for (int i = 0; i < m.n; ++i) {
        Expr s = Expr::neg(m.dL_dq[i]);
        for (int a = 0; a < m.k; ++a)
            s = s + kop.moment[a][m.pflat(a, i)];
        double value = 1.0;
        if (!s.simplified().is_constant(&value) || value != 0.0)
            return false;
    }
    return true;
}

FieldOperatorK k_from_sopde(const FieldModel& m, const KVectorField& xl) {
    if (xl.space != Space::Lagrangian)
        throw ModelError("field operator composition expects a velocity-space field");
    FieldOperatorK kop;
    kop.coords = m.lag_coords();
    kop.base.assign(m.k, std::vector<Expr>(m.n, Expr::constant(0.0)));
    kop.moment.assign(m.k, std::vector<Expr>(m.vdim(), Expr::constant(0.0)));
    for (int a = 0; a < m.k; ++a) {
        for (int i = 0; i < m.n; ++i)
            kop.base[a][i] = xl.comps[a][i];
        for (int bb = 0; bb < m.k; ++bb)
            for (int i = 0; i < m.n; ++i) {
                Expr s = Expr::constant(0.0);
                for (int j = 0; j < m.n; ++j)
                    s = s + xl.comps[a][j] * m.mixed(j, i, bb);
                for (int j = 0; j < m.n; ++j)
                    for (int c = 0; c < m.k; ++c)
                        s = s + xl.comps[a][m.n + m.vflat(j, c)] * m.hess(j, c, i, bb);
                kop.moment[a][m.pflat(bb, i)] = s.simplified();
            }
    }
    return kop;
}

FieldOperatorK k_from_hamiltonian(const FieldModel& m, const KVectorField& x0,
                                  const std::vector<Expr>& constraints,
                                  const std::vector<LagPoint>& probes, double tol) {
    if (x0.space != Space::Hamiltonian)
        throw ModelError("composition with the Legendre map expects a momentum-space field");
    std::unordered_map<std::string, Expr> graph_sub;
    for (int a = 0; a < m.k; ++a)
        for (int i = 0; i < m.n; ++i)
            graph_sub.emplace(p_name(a, i), m.dL_dv[m.vflat(i, a)]);

    if (!constraints.empty() && !probes.empty()) {
        for (const auto& x : probes) {
            const Bindings b = m.bind(x);
            for (const Expr& c : constraints)
                if (std::fabs(c.substitute(graph_sub).eval(b)) > tol)
                    throw ModelError(
                        "constraint '" + c.str() +
                        "' does not vanish on the image of the Legendre map");
        }
    }

    FieldOperatorK kop;
    kop.coords = m.lag_coords();
    kop.base.assign(m.k, std::vector<Expr>(m.n, Expr::constant(0.0)));
    kop.moment.assign(m.k, std::vector<Expr>(m.vdim(), Expr::constant(0.0)));
    for (int a = 0; a < m.k; ++a) {
        for (int i = 0; i < m.n; ++i)
            kop.base[a][i] = x0.comps[a][i].substitute(graph_sub).simplified();
        for (int c = 0; c < m.vdim(); ++c)
            kop.moment[a][c] = x0.comps[a][m.n + c].substitute(graph_sub).simplified();
    }
    return kop;
}

KIntegralResidual k_integral_residual(const FieldModel& m, const FieldOperatorK& kop,
                                      const Section& psi) {
    if (psi.dim != m.lag_dim())
        throw ModelError("integral-section residual expects a velocity-space section");
    Section src = psi;
    if (!src.has_d1)
        src.compute_fd_derivatives(false);

    const ExprMat jac = legendre_jacobian(m);
    const int total = src.grid.node_count();
    const int k = src.grid.k();

    KIntegralResidual out;
    out.nodes.assign(total, {});
    for (int node = 0; node < total; ++node) {
        if (!src.node_valid(node))
            continue;
        std::vector<double> flat(m.lag_dim());
        for (int c = 0; c < m.lag_dim(); ++c)
            flat[c] = src.value(node, c);
        const Bindings b = m.bind(Space::Lagrangian, flat);
        const Mat j = eval(jac, b);
        std::vector<double>& r = out.nodes[node];
        r.assign(static_cast<std::size_t>(k) * m.ham_dim(), 0.0);
        for (int a = 0; a < k; ++a) {
            std::vector<double> d1(m.lag_dim());
            for (int c = 0; c < m.lag_dim(); ++c)
                d1[c] = src.deriv(node, a, c);
            const std::vector<double> pushed = matvec(j, d1);
            const std::vector<double> kval = eval_k(m, kop, a, b);
            for (int c = 0; c < m.ham_dim(); ++c)
                r[static_cast<std::size_t>(a) * m.ham_dim() + c] = pushed[c] - kval[c];
        }
        const double worst = norm_inf(r);
        out.max_all = std::max(out.max_all, worst);
        if (src.grid.is_interior(src.grid.multi_index(node)))
            out.max_interior = std::max(out.max_interior, worst);
    }
    return out;
}

} // namespace ksymp
