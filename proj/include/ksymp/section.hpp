#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ksymp/model.hpp"

namespace ksymp {

struct Axis {
    double start = 0.0;
    double stop = 0.0;
    double step = 0.0;
    int count = 0;
};

/// Rectangular parameter grid in R^k. `make` validates step > 0, stop >
/// start, and an integral number of steps.
struct Grid {
    std::vector<Axis> axes;

    static Axis make_axis(double start, double stop, double step);
    static Grid make(const std::vector<Axis>& axes);
    /// Parse "t1=0:1:0.01,t2=-1:1:0.1"; axes may appear in any order but all
    /// of t1..tk must be present.
    static Grid parse(const std::string& text);

    int k() const { return static_cast<int>(axes.size()); }
    int node_count() const;
    /// Node order is row-major with the first axis slowest.
    int index_of(const std::vector<int>& mi) const;
    std::vector<int> multi_index(int node) const;
    std::vector<double> t_of(const std::vector<int>& mi) const;
    std::vector<double> t_of_node(int node) const;
    /// Index of the node with t = 0 on every axis; throws if the origin is
    /// not a grid node.
    std::vector<int> origin_index() const;
    bool is_interior(const std::vector<int>& mi) const;
};

/// Discrete map from a parameter grid into a phase space (or the base
/// manifold). Values are stored node-major in the canonical coordinate
/// order; derivative arrays are optional and either supplied analytically or
/// computed by finite differences.
struct Section {
    Grid grid;
    std::vector<std::string> coord_names;
    int dim = 0;

    std::vector<double> values; // [node*dim + c]
    bool has_d1 = false;
    std::vector<double> d1;     // [(node*k + a)*dim + c]
    bool has_d2 = false;
    std::vector<double> d2;     // [((node*k + a)*k + b)*dim + c]

    std::vector<std::uint8_t> valid; // per node; empty means all valid
    bool truncated = false;
    std::string diagnostic;

    double value(int node, int c) const { return values[static_cast<std::size_t>(node) * dim + c]; }
    double deriv(int node, int a, int c) const {
        return d1[(static_cast<std::size_t>(node) * grid.k() + a) * dim + c];
    }
    double deriv2(int node, int a, int b, int c) const {
        return d2[((static_cast<std::size_t>(node) * grid.k() + a) * grid.k() + b) * dim + c];
    }
    bool node_valid(int node) const { return valid.empty() || valid[node] != 0; }

    /// First derivatives by finite differences: 4th-order central stencils in
    /// the interior where five points exist, 2nd-order central otherwise,
    /// one-sided at the boundary. Second derivatives (when requested)
    /// difference the first-derivative field with the same stencils.
    void compute_fd_derivatives(bool second = false);
};

/// Build a section from analytic callbacks. `f` maps a parameter point to a
/// state vector; `df(t, a)` and `d2f(t, a, b)` attach exact derivative data
/// when given.
Section make_section(const Grid& grid, std::vector<std::string> coord_names,
                     const std::function<std::vector<double>(const std::vector<double>&)>& f,
                     const std::function<std::vector<double>(const std::vector<double>&, int)>& df = nullptr,
                     const std::function<std::vector<double>(const std::vector<double>&, int, int)>& d2f = nullptr);

/// Attach velocities: a base-manifold section phi (with first-derivative
/// data) becomes a velocity-space section with v^i_A = d phi^i / d t^A; the
/// prolonged section's derivative data is (d1, d2) of phi when present.
Section prolong(const FieldModel& m, const Section& phi);

/// Max over nodes (interior only by default) of |v^i_A - d(q^i)/dt^A| with
/// the q-derivative recomputed by finite differences.
double holonomy_check(const FieldModel& m, const Section& psi, bool interior_only = true);

/// CSV rendering: header, then one row per node with t-coordinates followed
/// by state coordinates in canonical order. Floats carry 17 significant
/// digits.
std::string section_csv(const Section& s);

/// JSON document embedding grid metadata and node values (same order as the
/// CSV). `extra` pairs land in a "metadata" object.
std::string section_json(const Section& s,
                         const std::vector<std::pair<std::string, std::string>>& extra = {});

} // namespace ksymp
