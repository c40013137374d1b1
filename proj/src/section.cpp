#include "ksymp/section.hpp"

#include <cmath>
#include <cstdio>

#include "ksymp/errors.hpp"

namespace ksymp {

Axis Grid::make_axis(double start, double stop, double step) {
    if (!(step > 0.0))
        throw ModelError("grid step must be positive");
    if (!(stop > start))
        throw ModelError("grid stop must exceed start");
    const double raw = (stop - start) / step;
    const int count = static_cast<int>(std::lround(raw)) + 1;
    if (std::fabs(raw - std::lround(raw)) > 1e-6)
        throw ModelError("grid span is not an integral number of steps");
    return Axis{start, stop, step, count};
}

Grid Grid::make(const std::vector<Axis>& axes) {
    if (axes.empty())
        throw ModelError("grid needs at least one axis");
    Grid g;
    g.axes = axes;
    return g;
}

Grid Grid::parse(const std::string& text) {
    std::vector<Axis> axes;
    std::vector<int> seen;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find(',', pos);
        if (end == std::string::npos)
            end = text.size();
        const std::string part = text.substr(pos, end - pos);
        pos = end + 1;
        if (part.empty())
            continue;
        const std::size_t eq = part.find('=');
        if (eq == std::string::npos || part[0] != 't')
            throw ModelError("grid axis must look like t1=start:stop:step, got '" + part + "'");
        int axis_no = 0;
        try {
            axis_no = std::stoi(part.substr(1, eq - 1));
        } catch (...) {
            throw ModelError("bad grid axis name in '" + part + "'");
        }
        const std::string spec = part.substr(eq + 1);
        double nums[3];
        std::size_t p = 0;
        for (int fields = 0; fields < 3; ++fields) {
            std::size_t colon = fields < 2 ? spec.find(':', p) : spec.size();
            if (colon == std::string::npos)
                throw ModelError("grid axis needs start:stop:step in '" + part + "'");
            try {
                nums[fields] = std::stod(spec.substr(p, colon - p));
            } catch (...) {
                throw ModelError("bad number in grid axis '" + part + "'");
            }
            p = colon + 1;
        }
        if (static_cast<int>(axes.size()) < axis_no)
            axes.resize(axis_no);
        seen.resize(axes.size(), 0);
        axes[axis_no - 1] = make_axis(nums[0], nums[1], nums[2]);
        seen[axis_no - 1] = 1;
    }
    for (std::size_t i = 0; i < axes.size(); ++i)
        if (i >= seen.size() || !seen[i])
            throw ModelError("grid is missing axis t" + std::to_string(i + 1));
    return make(axes);
}

int Grid::node_count() const {
    int total = 1;
    for (const auto& ax : axes)
        total *= ax.count;
    return total;
}

int Grid::index_of(const std::vector<int>& mi) const {
    int idx = 0;
    for (std::size_t a = 0; a < axes.size(); ++a)
        idx = idx * axes[a].count + mi[a];
    return idx;
}

std::vector<int> Grid::multi_index(int node) const {
    std::vector<int> mi(axes.size(), 0);
    for (int a = static_cast<int>(axes.size()) - 1; a >= 0; --a) {
        mi[a] = node % axes[a].count;
        node /= axes[a].count;
    }
    return mi;
}

std::vector<double> Grid::t_of(const std::vector<int>& mi) const {
    std::vector<double> t(axes.size());
    for (std::size_t a = 0; a < axes.size(); ++a)
        t[a] = axes[a].start + mi[a] * axes[a].step;
    return t;
}

std::vector<double> Grid::t_of_node(int node) const { return t_of(multi_index(node)); }

std::vector<int> Grid::origin_index() const {
    std::vector<int> mi(axes.size());
    for (std::size_t a = 0; a < axes.size(); ++a) {
        const double raw = -axes[a].start / axes[a].step;
        const int idx = static_cast<int>(std::lround(raw));
        if (idx < 0 || idx >= axes[a].count || std::fabs(raw - idx) > 1e-6)
            throw ModelError("grid must contain the origin t = 0");
        mi[a] = idx;
    }
    return mi;
}

bool Grid::is_interior(const std::vector<int>& mi) const {
    for (std::size_t a = 0; a < axes.size(); ++a)
        if (mi[a] == 0 || mi[a] == axes[a].count - 1)
            return false;
    return true;
}

namespace {

// First-derivative stencil along one axis applied to an arbitrary per-node
// field. `get(node, c)` reads the field, `put(node, a, c, value)` stores.
void fd_axis(const Grid& grid, int dim, int axis,
             const std::function<double(int, int)>& get,
             const std::function<void(int, int, double)>& put) {
    const int total = grid.node_count();
    const int count = grid.axes[axis].count;
    const double h = grid.axes[axis].step;
    // Stride of one step along `axis` in node numbering.
    int stride = 1;
    for (int a = grid.k() - 1; a > axis; --a)
        stride *= grid.axes[a].count;

    for (int node = 0; node < total; ++node) {
        const int pos = (node / stride) % count;
        for (int c = 0; c < dim; ++c) {
            double val = 0.0;
            if (count < 2) {
                val = 0.0;
            } else if (pos == 0) {
                val = (get(node + stride, c) - get(node, c)) / h;
            } else if (pos == count - 1) {
                val = (get(node, c) - get(node - stride, c)) / h;
            } else if (count < 5) {
                val = (get(node + stride, c) - get(node - stride, c)) / (2.0 * h);
            } else if (pos == 1) {
                // 4th-order biased stencil over offsets -1..3
                val = (-3.0 * get(node - stride, c) - 10.0 * get(node, c) +
                       18.0 * get(node + stride, c) - 6.0 * get(node + 2 * stride, c) +
                       get(node + 3 * stride, c)) /
                      (12.0 * h);
            } else if (pos == count - 2) {
                val = (3.0 * get(node + stride, c) + 10.0 * get(node, c) -
                       18.0 * get(node - stride, c) + 6.0 * get(node - 2 * stride, c) -
                       get(node - 3 * stride, c)) /
                      (12.0 * h);
            } else {
                val = (get(node - 2 * stride, c) - 8.0 * get(node - stride, c) +
                       8.0 * get(node + stride, c) - get(node + 2 * stride, c)) /
                      (12.0 * h);
            }
            put(node, c, val);
        }
    }
}

} // namespace

void Section::compute_fd_derivatives(bool second) {
    const int k = grid.k();
    const int total = grid.node_count();
    d1.assign(static_cast<std::size_t>(total) * k * dim, 0.0);
    for (int a = 0; a < k; ++a) {
        fd_axis(
            grid, dim, a, [&](int node, int c) { return value(node, c); },
            [&](int node, int c, double val) {
                d1[(static_cast<std::size_t>(node) * k + a) * dim + c] = val;
            });
    }
    has_d1 = true;
    if (!second)
        return;
    d2.assign(static_cast<std::size_t>(total) * k * k * dim, 0.0);
    for (int a = 0; a < k; ++a) {
        for (int b = 0; b < k; ++b) {
            fd_axis(
                grid, dim, b, [&](int node, int c) { return deriv(node, a, c); },
                [&](int node, int c, double val) {
                    d2[((static_cast<std::size_t>(node) * k + a) * k + b) * dim + c] = val;
                });
        }
    }
    has_d2 = true;
}

Section make_section(const Grid& grid, std::vector<std::string> coord_names,
                     const std::function<std::vector<double>(const std::vector<double>&)>& f,
                     const std::function<std::vector<double>(const std::vector<double>&, int)>& df,
                     const std::function<std::vector<double>(const std::vector<double>&, int, int)>& d2f) {
    Section s;
    s.grid = grid;
    s.coord_names = std::move(coord_names);
    s.dim = static_cast<int>(s.coord_names.size());
    const int total = grid.node_count();
    const int k = grid.k();
    s.values.resize(static_cast<std::size_t>(total) * s.dim);
    if (df) {
        s.d1.resize(static_cast<std::size_t>(total) * k * s.dim);
        s.has_d1 = true;
    }
    if (d2f) {
        s.d2.resize(static_cast<std::size_t>(total) * k * k * s.dim);
        s.has_d2 = true;
    }
    for (int node = 0; node < total; ++node) {
        const std::vector<double> t = s.grid.t_of_node(node);
        const std::vector<double> v = f(t);
        for (int c = 0; c < s.dim; ++c)
            s.values[static_cast<std::size_t>(node) * s.dim + c] = v[c];
        if (df)
            for (int a = 0; a < k; ++a) {
                const std::vector<double> d = df(t, a);
                for (int c = 0; c < s.dim; ++c)
                    s.d1[(static_cast<std::size_t>(node) * k + a) * s.dim + c] = d[c];
            }
        if (d2f)
            for (int a = 0; a < k; ++a)
                for (int b = 0; b < k; ++b) {
                    const std::vector<double> d = d2f(t, a, b);
                    for (int c = 0; c < s.dim; ++c)
                        s.d2[((static_cast<std::size_t>(node) * k + a) * k + b) * s.dim + c] =
                            d[c];
                }
    }
    return s;
}

Section prolong(const FieldModel& m, const Section& phi) {
    if (phi.dim != m.n)
        throw ModelError("prolongation expects a base-manifold section");
    Section src = phi;
    if (!src.has_d1)
        src.compute_fd_derivatives(false);

    Section out;
    out.grid = src.grid;
    out.coord_names = m.lag_coords();
    out.dim = m.lag_dim();
    const int total = src.grid.node_count();
    const int k = src.grid.k();
    out.values.resize(static_cast<std::size_t>(total) * out.dim);
    for (int node = 0; node < total; ++node) {
        for (int i = 0; i < m.n; ++i)
            out.values[static_cast<std::size_t>(node) * out.dim + i] = src.value(node, i);
        for (int i = 0; i < m.n; ++i)
            for (int a = 0; a < k; ++a)
                out.values[static_cast<std::size_t>(node) * out.dim + m.n + m.vflat(i, a)] =
                    src.deriv(node, a, i);
    }
    // Derivatives of the prolonged section come from (d1, d2) of the base.
    if (src.has_d2) {
        out.d1.resize(static_cast<std::size_t>(total) * k * out.dim);
        out.has_d1 = true;
        for (int node = 0; node < total; ++node)
            for (int a = 0; a < k; ++a) {
                for (int i = 0; i < m.n; ++i)
                    out.d1[(static_cast<std::size_t>(node) * k + a) * out.dim + i] =
                        src.deriv(node, a, i);
                for (int i = 0; i < m.n; ++i)
                    for (int b = 0; b < k; ++b)
                        out.d1[(static_cast<std::size_t>(node) * k + a) * out.dim + m.n +
                               m.vflat(i, b)] = src.deriv2(node, b, a, i);
            }
    }
    out.valid = src.valid;
    out.truncated = src.truncated;
    out.diagnostic = src.diagnostic;
    return out;
}

double holonomy_check(const FieldModel& m, const Section& psi, bool interior_only) {
    if (psi.dim != m.lag_dim())
        throw ModelError("holonomy check expects a velocity-space section");
    Section q_part;
    q_part.grid = psi.grid;
    q_part.dim = m.n;
    const int total = psi.grid.node_count();
    q_part.values.resize(static_cast<std::size_t>(total) * m.n);
    for (int node = 0; node < total; ++node)
        for (int i = 0; i < m.n; ++i)
            q_part.values[static_cast<std::size_t>(node) * m.n + i] = psi.value(node, i);
    q_part.compute_fd_derivatives(false);

    double worst = 0.0;
    for (int node = 0; node < total; ++node) {
        if (!psi.node_valid(node))
            continue;
        if (interior_only && !psi.grid.is_interior(psi.grid.multi_index(node)))
            continue;
        for (int i = 0; i < m.n; ++i)
            for (int a = 0; a < psi.grid.k(); ++a) {
                const double v = psi.value(node, m.n + m.vflat(i, a));
                const double dq = q_part.deriv(node, a, i);
                worst = std::max(worst, std::fabs(v - dq));
            }
    }
    return worst;
}

namespace {

void append_f17(std::string& out, double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    out += buf;
}

} // namespace

std::string section_csv(const Section& s) {
    std::string out;
    for (int a = 0; a < s.grid.k(); ++a) {
        if (a)
            out += ',';
        out += "t" + std::to_string(a + 1);
    }
    for (const auto& name : s.coord_names) {
        out += ',';
        out += name;
    }
    out += '\n';
    const int total = s.grid.node_count();
    for (int node = 0; node < total; ++node) {
        const std::vector<double> t = s.grid.t_of_node(node);
        for (int a = 0; a < s.grid.k(); ++a) {
            if (a)
                out += ',';
            append_f17(out, t[a]);
        }
        for (int c = 0; c < s.dim; ++c) {
            out += ',';
            append_f17(out, s.value(node, c));
        }
        out += '\n';
    }
    return out;
}

std::string section_json(const Section& s,
                         const std::vector<std::pair<std::string, std::string>>& extra) {
    std::string out = "{";
    out += "\"kind\":\"section\",";
    out += "\"k\":" + std::to_string(s.grid.k()) + ",";
    out += "\"dim\":" + std::to_string(s.dim) + ",";
    out += "\"coords\":[";
    for (std::size_t i = 0; i < s.coord_names.size(); ++i) {
        if (i)
            out += ',';
        out += '"' + s.coord_names[i] + '"';
    }
    out += "],\"grid\":[";
    for (std::size_t a = 0; a < s.grid.axes.size(); ++a) {
        if (a)
            out += ',';
        const Axis& ax = s.grid.axes[a];
        out += "{\"start\":";
        append_f17(out, ax.start);
        out += ",\"stop\":";
        append_f17(out, ax.stop);
        out += ",\"step\":";
        append_f17(out, ax.step);
        out += ",\"count\":" + std::to_string(ax.count) + "}";
    }
    out += "],\"node_order\":\"row-major, first axis slowest\",";
    out += std::string("\"truncated\":") + (s.truncated ? "true" : "false") + ",";
    if (!extra.empty()) {
        out += "\"metadata\":{";
        for (std::size_t i = 0; i < extra.size(); ++i) {
            if (i)
                out += ',';
            out += '"' + extra[i].first + "\":" + extra[i].second;
        }
        out += "},";
    }
    out += "\"values\":[";
    const int total = s.grid.node_count();
    for (int node = 0; node < total; ++node) {
        if (node)
            out += ',';
        out += '[';
        for (int c = 0; c < s.dim; ++c) {
            if (c)
                out += ',';
            append_f17(out, s.value(node, c));
        }
        out += ']';
    }
    out += "]}";
    return out;
}

} // namespace ksymp
