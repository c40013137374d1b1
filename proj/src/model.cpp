#include "ksymp/model.hpp"

#include <cstdio>

#include "ksymp/errors.hpp"

namespace ksymp {

std::string q_name(int i) { return "q" + std::to_string(i + 1); }

std::string v_name(int i, int a) {
    return "v" + std::to_string(i + 1) + "_" + std::to_string(a + 1);
}

std::string p_name(int a, int i) {
    return "p" + std::to_string(a + 1) + "_" + std::to_string(i + 1);
}

FieldModel::FieldModel(int k_in, int n_in, Expr lagrangian_in)
    : k(k_in), n(n_in), lagrangian(std::move(lagrangian_in)) {
    if (k < 1 || n < 1)
        throw ModelError("model requires k >= 1 and n >= 1");

    for (int i = 0; i < n; ++i)
        lag_coords_.push_back(q_name(i));
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < k; ++a)
            lag_coords_.push_back(v_name(i, a));

    for (int i = 0; i < n; ++i)
        ham_coords_.push_back(q_name(i));
    for (int a = 0; a < k; ++a)
        for (int i = 0; i < n; ++i)
            ham_coords_.push_back(p_name(a, i));

    uni_coords_ = lag_coords_;
    for (int a = 0; a < k; ++a)
        for (int i = 0; i < n; ++i)
            uni_coords_.push_back(p_name(a, i));

    for (const std::string& var : lagrangian.free_variables()) {
        bool known = false;
        for (const auto& c : lag_coords_)
            if (c == var) {
                known = true;
                break;
            }
        if (!known)
            throw ModelError("lagrangian uses unknown variable '" + var +
                             "' (allowed: q1..q" + std::to_string(n) + ", vI_A)");
    }

    lagrangian = lagrangian.simplified();

    dL_dq.reserve(n);
    for (int i = 0; i < n; ++i)
        dL_dq.push_back(lagrangian.diff(q_name(i)).simplified());

    dL_dv.reserve(vdim());
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < k; ++a)
            dL_dv.push_back(lagrangian.diff(v_name(i, a)).simplified());

    d2L_dvdv.reserve(static_cast<std::size_t>(vdim()) * vdim());
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < k; ++a)
            for (int j = 0; j < n; ++j)
                for (int b = 0; b < k; ++b)
                    d2L_dvdv.push_back(dL_dv[vflat(i, a)].diff(v_name(j, b)).simplified());

    d2L_dqdv.reserve(static_cast<std::size_t>(n) * vdim());
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            for (int a = 0; a < k; ++a)
                d2L_dqdv.push_back(dL_dv[vflat(i, a)].diff(q_name(j)).simplified());

    Expr e = Expr::constant(0.0);
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < k; ++a)
            e = e + Expr::variable(v_name(i, a)) * dL_dv[vflat(i, a)];
    energy_expr = (e - lagrangian).simplified();

    denergy.reserve(lag_dim());
    for (const auto& c : lag_coords_)
        denergy.push_back(energy_expr.diff(c).simplified());
}

const std::vector<std::string>& FieldModel::coords(Space s) const {
    switch (s) {
    case Space::Lagrangian:
        return lag_coords_;
    case Space::Hamiltonian:
        return ham_coords_;
    default:
        return uni_coords_;
    }
}

std::vector<double> FieldModel::flatten(const LagPoint& x) const {
    if (static_cast<int>(x.q.size()) != n || static_cast<int>(x.v.size()) != vdim())
        throw ModelError("point dimensions do not match the model");
    std::vector<double> s;
    s.reserve(lag_dim());
    s.insert(s.end(), x.q.begin(), x.q.end());
    s.insert(s.end(), x.v.begin(), x.v.end());
    return s;
}

std::vector<double> FieldModel::flatten(const HamPoint& y) const {
    if (static_cast<int>(y.q.size()) != n || static_cast<int>(y.p.size()) != vdim())
        throw ModelError("point dimensions do not match the model");
    std::vector<double> s;
    s.reserve(ham_dim());
    s.insert(s.end(), y.q.begin(), y.q.end());
    s.insert(s.end(), y.p.begin(), y.p.end());
    return s;
}

std::vector<double> FieldModel::flatten(const UnifiedPoint& w) const {
    if (static_cast<int>(w.q.size()) != n || static_cast<int>(w.v.size()) != vdim() ||
        static_cast<int>(w.p.size()) != vdim())
        throw ModelError("point dimensions do not match the model");
    std::vector<double> s;
    s.reserve(uni_dim());
    s.insert(s.end(), w.q.begin(), w.q.end());
    s.insert(s.end(), w.v.begin(), w.v.end());
    s.insert(s.end(), w.p.begin(), w.p.end());
    return s;
}

LagPoint FieldModel::unflatten_lag(const std::vector<double>& s) const {
    LagPoint x;
    x.q.assign(s.begin(), s.begin() + n);
    x.v.assign(s.begin() + n, s.begin() + lag_dim());
    return x;
}

HamPoint FieldModel::unflatten_ham(const std::vector<double>& s) const {
    HamPoint y;
    y.q.assign(s.begin(), s.begin() + n);
    y.p.assign(s.begin() + n, s.begin() + ham_dim());
    return y;
}

UnifiedPoint FieldModel::unflatten_uni(const std::vector<double>& s) const {
    UnifiedPoint w;
    w.q.assign(s.begin(), s.begin() + n);
    w.v.assign(s.begin() + n, s.begin() + lag_dim());
    w.p.assign(s.begin() + lag_dim(), s.begin() + uni_dim());
    return w;
}

Bindings FieldModel::bind(Space s, const std::vector<double>& flat) const {
    const auto& names = coords(s);
    if (names.size() != flat.size())
        throw ModelError("flat point does not match the coordinate count");
    Bindings b;
    b.reserve(names.size());
    for (std::size_t i = 0; i < names.size(); ++i)
        b.emplace(names[i], flat[i]);
    return b;
}

std::string FieldModel::hash() const {
    const std::string canon =
        "k=" + std::to_string(k) + ";n=" + std::to_string(n) + ";L=" + lagrangian.str();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : canon) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::uint64_t Rng::next_u64() {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

double Rng::uniform(double lo, double hi) {
    const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
}

std::vector<LagPoint> random_lag_points(const FieldModel& m, int count, std::uint64_t seed,
                                        double lo, double hi) {
    Rng rng(seed);
    std::vector<LagPoint> out;
    out.reserve(count);
    for (int s = 0; s < count; ++s) {
        LagPoint x;
        x.q.resize(m.n);
        x.v.resize(m.vdim());
        for (auto& q : x.q)
            q = rng.uniform(lo, hi);
        for (auto& v : x.v)
            v = rng.uniform(lo, hi);
        out.push_back(std::move(x));
    }
    return out;
}

std::vector<HamPoint> random_ham_points(const FieldModel& m, int count, std::uint64_t seed,
                                        double lo, double hi) {
    Rng rng(seed);
    std::vector<HamPoint> out;
    out.reserve(count);
    for (int s = 0; s < count; ++s) {
        HamPoint y;
        y.q.resize(m.n);
        y.p.resize(m.vdim());
        for (auto& q : y.q)
            q = rng.uniform(lo, hi);
        for (auto& p : y.p)
            p = rng.uniform(lo, hi);
        out.push_back(std::move(y));
    }
    return out;
}

} // namespace ksymp
