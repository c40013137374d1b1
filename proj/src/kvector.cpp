#include "ksymp/kvector.hpp"

#include <cmath>

#include "ksymp/errors.hpp"

namespace ksymp {

KVectorField KVectorField::zero(const FieldModel& m, Space s) {
    KVectorField f;
    f.space = s;
    f.coords = m.coords(s);
    f.comps.assign(m.k, std::vector<Expr>(f.coords.size(), Expr::constant(0.0)));
    return f;
}

std::vector<double> KVectorField::eval_at(int a, const Bindings& b) const {
    std::vector<double> out(coords.size(), 0.0);
    for (std::size_t c = 0; c < coords.size(); ++c) {
        double value = 0.0;
        const Expr& e = comps[a][c];
        out[c] = e.is_constant(&value) ? value : e.eval(b);
    }
    return out;
}

KCoeffs KVectorField::eval_all(const std::vector<double>& flat) const {
    if (flat.size() != coords.size())
        throw ModelError("point dimension does not match the field's space");
    Bindings b;
    b.reserve(coords.size());
    for (std::size_t i = 0; i < coords.size(); ++i)
        b.emplace(coords[i], flat[i]);
    KCoeffs out;
    out.reserve(comps.size());
    for (std::size_t a = 0; a < comps.size(); ++a)
        out.push_back(eval_at(static_cast<int>(a), b));
    return out;
}

bool is_sopde(const FieldModel& m, const KVectorField& x,
              const std::vector<LagPoint>& samples, double tol) {
    if (x.space != Space::Lagrangian)
        throw ModelError("second-order check applies to velocity-space fields");
    for (const auto& sample : samples) {
        const KCoeffs c = x.eval_all(m.flatten(sample));
        for (int a = 0; a < m.k; ++a)
            for (int i = 0; i < m.n; ++i)
                if (std::fabs(c[a][i] - sample.vel(i, a, m.k)) > tol)
                    return false;
    }
    return true;
}

namespace {

std::vector<double> contract_impl(const TwoFormFamily& omega,
                                  const std::vector<std::vector<double>>& coeffs,
                                  const Bindings& at) {
    const int dim = static_cast<int>(omega.coords.size());
    std::vector<double> cov(dim, 0.0);
    for (std::size_t a = 0; a < omega.forms.size(); ++a) {
        if (static_cast<int>(coeffs[a].size()) != dim)
            throw ModelError("field and form live on different spaces");
        const Mat w = eval(omega.forms[a], at);
        const std::vector<double> part = mat_tvec(w, coeffs[a]);
        for (int j = 0; j < dim; ++j)
            cov[j] += part[j];
    }
    return cov;
}

} // namespace

std::vector<double> contract(const TwoFormFamily& omega, const KVectorField& x,
                             const Bindings& at) {
    if (x.space != omega.space)
        throw ModelError("field and form live on different spaces");
    std::vector<std::vector<double>> coeffs;
    coeffs.reserve(x.comps.size());
    for (std::size_t a = 0; a < x.comps.size(); ++a)
        coeffs.push_back(x.eval_at(static_cast<int>(a), at));
    return contract_impl(omega, coeffs, at);
}

std::vector<double> contract(const TwoFormFamily& omega, const KCoeffs& x,
                             const Bindings& at) {
    return contract_impl(omega, x, at);
}

std::vector<double> bracket_numeric(const KVectorField& x, int a, int b,
                                    const std::vector<double>& flat, double h) {
    const int dim = x.dim();
    std::vector<double> out(dim, 0.0);
    const KCoeffs at_point = x.eval_all(flat);

    // Directional derivative of the component functions of field `g` along
    // the value of field `f`, by central differences coordinate-wise.
    auto advect = [&](int f, int g, double sign) {
        std::vector<double> shifted = flat;
        for (int s = 0; s < dim; ++s) {
            shifted[s] = flat[s] + h;
            const KCoeffs plus = x.eval_all(shifted);
            shifted[s] = flat[s] - h;
            const KCoeffs minus = x.eval_all(shifted);
            shifted[s] = flat[s];
            const double fs = at_point[f][s];
            for (int c = 0; c < dim; ++c)
                out[c] += sign * fs * (plus[g][c] - minus[g][c]) / (2.0 * h);
        }
    };

    advect(a, b, +1.0);
    advect(b, a, -1.0);
    return out;
}

double bracket_max(const KVectorField& x, const std::vector<double>& flat, double h) {
    double worst = 0.0;
    const int k = static_cast<int>(x.comps.size());
    for (int a = 0; a < k; ++a)
        for (int b = a + 1; b < k; ++b)
            worst = std::max(worst, norm_inf(bracket_numeric(x, a, b, flat, h)));
    return worst;
}

} // namespace ksymp
