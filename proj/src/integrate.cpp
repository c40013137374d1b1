#include "ksymp/integrate.hpp"

#include <cmath>

#include "ksymp/errors.hpp"

namespace ksymp {

namespace {

// One classical 4th-order step of length h along slot `a` of the field.
void rk4_step(const KVectorField& x, int a, std::vector<double>& state, double h) {
    const std::size_t dim = state.size();
    const KCoeffs k1c = x.eval_all(state);
    std::vector<double> tmp(dim);

    for (std::size_t c = 0; c < dim; ++c)
        tmp[c] = state[c] + 0.5 * h * k1c[a][c];
    const KCoeffs k2c = x.eval_all(tmp);
    for (std::size_t c = 0; c < dim; ++c)
        tmp[c] = state[c] + 0.5 * h * k2c[a][c];
    const KCoeffs k3c = x.eval_all(tmp);
    for (std::size_t c = 0; c < dim; ++c)
        tmp[c] = state[c] + h * k3c[a][c];
    const KCoeffs k4c = x.eval_all(tmp);

    for (std::size_t c = 0; c < dim; ++c)
        state[c] += h / 6.0 *
                    (k1c[a][c] + 2.0 * k2c[a][c] + 2.0 * k3c[a][c] + k4c[a][c]);
}

} // namespace

IntegrationResult integrate_section(const FieldModel& m, const KVectorField& x,
                                    const LagPoint& x0, const Grid& grid,
                                    const IntegrateOptions& opts) {
    if (x.space != Space::Lagrangian)
        throw ModelError("section integration expects a velocity-space field");
    if (grid.k() != m.k)
        throw ModelError("grid parameter count does not match the model");
    if (opts.substeps < 1)
        throw ModelError("substeps must be >= 1");

    std::vector<int> order = opts.axis_order;
    if (order.empty()) {
        order.resize(grid.k());
        for (int a = 0; a < grid.k(); ++a)
            order[a] = a;
    }

    IntegrationResult result;
    Section& s = result.section;
    s.grid = grid;
    s.coord_names = m.lag_coords();
    s.dim = m.lag_dim();
    const int total = grid.node_count();
    s.values.assign(static_cast<std::size_t>(total) * s.dim,
                    std::numeric_limits<double>::quiet_NaN());
    s.valid.assign(total, 0);

    const std::vector<int> origin = grid.origin_index();
    const std::vector<double> start = m.flatten(x0);

    auto write_node = [&](const std::vector<int>& mi, const std::vector<double>& state) {
        const int node = grid.index_of(mi);
        for (int c = 0; c < s.dim; ++c)
            s.values[static_cast<std::size_t>(node) * s.dim + c] = state[c];
        s.valid[node] = 1;
    };

    auto read_node = [&](const std::vector<int>& mi) {
        const int node = grid.index_of(mi);
        std::vector<double> state(s.dim);
        for (int c = 0; c < s.dim; ++c)
            state[c] = s.values[static_cast<std::size_t>(node) * s.dim + c];
        return state;
    };

    write_node(origin, start);

    // Sweep one line along `axis` from the origin index outward in both
    // directions, starting from the already-filled node at mi[axis] =
    // origin[axis]. Returns false on blow-up.
    auto sweep_line = [&](std::vector<int> mi, int axis) -> bool {
        const Axis& ax = grid.axes[axis];
        const double h = ax.step / opts.substeps;
        for (int dir : {+1, -1}) {
            mi[axis] = origin[axis];
            std::vector<double> state = read_node(mi);
            while (true) {
                const int next = mi[axis] + dir;
                if (next < 0 || next >= ax.count)
                    break;
                for (int sub = 0; sub < opts.substeps; ++sub)
                    rk4_step(x, axis, state, dir * h);
                double worst = 0.0;
                for (double v : state)
                    worst = std::max(worst, std::fabs(v));
                if (!(worst <= opts.blowup)) {
                    result.truncated = true;
                    result.diagnostic = "state norm exceeded " +
                                        format_double(opts.blowup) +
                                        " while sweeping axis t" +
                                        std::to_string(axis + 1);
                    return false;
                }
                mi[axis] = next;
                write_node(mi, state);
            }
        }
        return true;
    };

    // After processing `stage` axes of `order`, all nodes whose remaining
    // axes sit at the origin index are filled; each stage extends them along
    // the next axis.
    bool ok = true;
    for (std::size_t stage = 0; stage < order.size() && ok; ++stage) {
        const int axis = order[stage];
        // Enumerate filled base nodes: axes from earlier stages range over
        // their full extent, all others pinned to the origin.
        std::vector<int> mi(grid.k());
        for (int a = 0; a < grid.k(); ++a)
            mi[a] = origin[a];
        std::vector<int> free_axes(order.begin(), order.begin() + stage);

        std::function<bool(std::size_t)> recurse = [&](std::size_t level) -> bool {
            if (level == free_axes.size())
                return sweep_line(mi, axis);
            const int fa = free_axes[level];
            for (int idx = 0; idx < grid.axes[fa].count; ++idx) {
                mi[fa] = idx;
                if (!recurse(level + 1))
                    return false;
            }
            mi[fa] = origin[fa];
            return true;
        };
        ok = recurse(0);
    }

    bool all_valid = true;
    for (int node = 0; node < total; ++node)
        if (!s.valid[node])
            all_valid = false;
    if (all_valid)
        s.valid.clear();
    s.truncated = result.truncated;
    s.diagnostic = result.diagnostic;
    return result;
}

double path_independence(const FieldModel& m, const KVectorField& x, const LagPoint& x0,
                         const Grid& grid, const IntegrateOptions& opts) {
    IntegrateOptions asc = opts;
    asc.axis_order.clear();
    IntegrateOptions desc = opts;
    desc.axis_order.resize(grid.k());
    for (int a = 0; a < grid.k(); ++a)
        desc.axis_order[a] = grid.k() - 1 - a;

    const IntegrationResult fwd = integrate_section(m, x, x0, grid, asc);
    const IntegrationResult rev = integrate_section(m, x, x0, grid, desc);

    double worst = 0.0;
    const int total = grid.node_count();
    for (int node = 0; node < total; ++node) {
        if (!fwd.section.node_valid(node) || !rev.section.node_valid(node))
            continue;
        for (int c = 0; c < fwd.section.dim; ++c)
            worst = std::max(worst,
                             std::fabs(fwd.section.value(node, c) - rev.section.value(node, c)));
    }
    return worst;
}

Section pushforward_section(const FieldModel& m, const Section& psi) {
    if (psi.dim != m.lag_dim())
        throw ModelError("pushforward expects a velocity-space section");
    Section out;
    out.grid = psi.grid;
    out.coord_names = m.ham_coords();
    out.dim = m.ham_dim();
    const int total = psi.grid.node_count();
    out.values.resize(static_cast<std::size_t>(total) * out.dim);
    LagPoint x;
    x.q.resize(m.n);
    x.v.resize(m.vdim());
    for (int node = 0; node < total; ++node) {
        for (int i = 0; i < m.n; ++i)
            x.q[i] = psi.value(node, i);
        for (int c = 0; c < m.vdim(); ++c)
            x.v[c] = psi.value(node, m.n + c);
        const HamPoint y = legendre(m, x);
        for (int i = 0; i < m.n; ++i)
            out.values[static_cast<std::size_t>(node) * out.dim + i] = y.q[i];
        for (int c = 0; c < m.vdim(); ++c)
            out.values[static_cast<std::size_t>(node) * out.dim + m.n + c] = y.p[c];
    }
    out.valid = psi.valid;
    out.truncated = psi.truncated;
    out.diagnostic = psi.diagnostic;
    out.compute_fd_derivatives(false);
    return out;
}

} // namespace ksymp
