#include "ksymp/derive.hpp"

#include "ksymp/geometry.hpp"

namespace ksymp {

namespace {

// Append " + <expr>" or " - <positive part>" so signs read naturally.
void append_term(std::string& out, const Expr& e, bool first) {
    std::string body = e.str();
    bool negative = false;
    if (e.kind() == ExprKind::Neg) {
        negative = true;
        body = Expr::neg(e).simplified().str(); // double negation drops the sign
    } else {
        double c = 0.0;
        if (e.is_constant(&c) && c < 0.0) {
            negative = true;
            body = format_double(-c);
        }
    }
    if (first)
        out += negative ? "-" + body : body;
    else
        out += negative ? " - " + body : " + " + body;
}

void append_matrix(std::string& out, const ExprMat& mat) {
    for (int r = 0; r < mat.rows; ++r) {
        out += "  [";
        for (int c = 0; c < mat.cols; ++c) {
            if (c)
                out += ", ";
            out += mat(r, c).str();
        }
        out += "]\n";
    }
}

} // namespace

std::string derive_text(const FieldModel& m, const std::string& name) {
    std::string out;
    out += "model";
    if (!name.empty())
        out += " " + name;
    out += " (hash " + m.hash() + ")\n";
    out += "k = " + std::to_string(m.k) + ", n = " + std::to_string(m.n) + "\n";
    out += "L = " + m.lagrangian.str() + "\n\n";

    for (int i = 0; i < m.n; ++i) {
        out += "EL[" + std::to_string(i + 1) + "]: ";
        std::string terms;
        bool first = true;
        for (int a = 0; a < m.k; ++a) {
            const Expr& e = m.dL_dv[m.vflat(i, a)];
            double c = 0.0;
            if (e.is_constant(&c) && c == 0.0)
                continue;
            terms += first ? "" : " + ";
            terms += "d/dt" + std::to_string(a + 1) + "(" + e.str() + ")";
            first = false;
        }
        const Expr trailing = Expr::neg(m.dL_dq[i]).simplified();
        double c = 0.0;
        if (!(trailing.is_constant(&c) && c == 0.0))
            append_term(terms, trailing, first);
        if (terms.empty())
            terms = "0";
        out += terms + " = 0\n";
    }
    out += "\n";

    out += "FL:\n";
    for (int a = 0; a < m.k; ++a)
        for (int i = 0; i < m.n; ++i)
            out += "  " + p_name(a, i) + " = " + m.dL_dv[m.vflat(i, a)].str() + "\n";

    out += "E_L = " + m.energy_expr.str() + "\n\n";

    out += "Hessian d2L/dv dv (order";
    for (int i = 0; i < m.n; ++i)
        for (int a = 0; a < m.k; ++a)
            out += " " + v_name(i, a);
    out += "):\n";
    ExprMat hess(m.vdim(), m.vdim());
    for (int r = 0; r < m.vdim(); ++r)
        for (int c = 0; c < m.vdim(); ++c)
            hess(r, c) = m.d2L_dvdv[static_cast<std::size_t>(r) * m.vdim() + c];
    append_matrix(out, hess);
    out += "\n";

    for (int a = 0; a < m.k; ++a) {
        out += "theta_L[" + std::to_string(a + 1) + "] =";
        bool any = false;
        for (int i = 0; i < m.n; ++i) {
            const Expr& e = m.dL_dv[m.vflat(i, a)];
            double c = 0.0;
            if (e.is_constant(&c) && c == 0.0)
                continue;
            out += std::string(any ? " + " : " ") + "(" + e.str() + ") d" + q_name(i);
            any = true;
        }
        if (!any)
            out += " 0";
        out += "\n";
    }
    out += "\n";

    const TwoFormFamily wl = lagrangian_two_forms(m);
    for (int a = 0; a < m.k; ++a) {
        out += "omega_L[" + std::to_string(a + 1) + "] (coordinate order";
        for (const auto& cname : m.lag_coords())
            out += " " + cname;
        out += "):\n";
        append_matrix(out, wl.forms[a]);
    }
    return out;
}

} // namespace ksymp
