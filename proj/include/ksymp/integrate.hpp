#pragma once

#include "ksymp/kvector.hpp"
#include "ksymp/section.hpp"

namespace ksymp {

struct IntegrateOptions {
    /// Classical one-step substeps per grid interval.
    int substeps = 1;
    /// Truncation threshold on the state infinity norm.
    double blowup = 1e12;
    /// Axis sweep order; empty means ascending t^1, t^2, ...
    std::vector<int> axis_order;
};

struct IntegrationResult {
    Section section;
    bool truncated = false;
    std::string diagnostic;
};

/// Integral section of a second-order field on the velocity space by
/// composed one-parameter legs: sweep the first axis through the origin with
/// the flow of X_1 (classical 4th-order steps), then from every node of that
/// line sweep the second axis with X_2, and so on. For involutive fields the
/// result is order-independent; `path_independence` measures the failure.
/// The grid must contain t = 0, where the datum x0 is imposed.
IntegrationResult integrate_section(const FieldModel& m, const KVectorField& x,
                                    const LagPoint& x0, const Grid& grid,
                                    const IntegrateOptions& opts = {});

/// Max node-wise distance between ascending- and descending-order sweeps.
double path_independence(const FieldModel& m, const KVectorField& x, const LagPoint& x0,
                         const Grid& grid, const IntegrateOptions& opts = {});

/// Node-wise Legendre image of a velocity-space section; derivative data is
/// recomputed by finite differences on the image.
Section pushforward_section(const FieldModel& m, const Section& psi);

} // namespace ksymp
