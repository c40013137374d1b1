#include "ksymp/verify.hpp"

#include <algorithm>
#include <cmath>

#include "ksymp/errors.hpp"
#include "ksymp/jsonwriter.hpp"

namespace ksymp {

namespace {

constexpr double kTolAlgebraic = 1e-9;
constexpr double kTolIntegration = 1e-5;

StageResult skipped_stage(const std::string& name, const std::string& claim, double tol) {
    StageResult s;
    s.name = name;
    s.claim = claim;
    s.tolerance = tol;
    s.ran = false;
    s.pass = false;
    s.note = "skipped: earlier stage failed";
    return s;
}

double max_abs(const std::vector<double>& v) { return norm_inf(v); }

} // namespace

EquivalenceReport equivalence_report(const FieldModel& m, const LagPoint& x0,
                                     const Grid& grid, const VerifyOptions& opts) {
    EquivalenceReport report;
    report.model_hash = m.hash();

    {
        const RegularityReport reg = is_regular(m, {x0}, 1e-9);
        if (!reg.regular)
            throw ModelError("model is singular at the datum; use the constraint pathway");
    }

    std::vector<LagPoint> probes = random_lag_points(m, opts.samples, opts.seed);
    probes.push_back(x0);

    // Stage 1: second-order solution of the velocity-space field equation.
    StageResult s1;
    s1.name = "sopde_solution";
    s1.claim = "geometric_el_equation";
    s1.tolerance = kTolAlgebraic;
    s1.ran = true;

    std::vector<SopdeAnsatz> candidates;
    if (opts.ansatz == "symmetric")
        candidates = {SopdeAnsatz::Symmetric};
    else if (opts.ansatz == "uniform")
        candidates = {SopdeAnsatz::Uniform};
    else
        candidates = {SopdeAnsatz::Symmetric, SopdeAnsatz::Uniform};

    KVectorField field;
    bool have_field = false;
    for (SopdeAnsatz cand : candidates) {
        KVectorField trial;
        try {
            trial = sopde_field(m, cand);
        } catch (const std::exception& e) {
            s1.note = std::string("construction failed: ") + e.what();
            continue;
        }
        double worst = 0.0;
        bool eval_ok = true;
        try {
            for (const auto& x : probes)
                worst = std::max(worst, max_abs(lag_geoeq_residual(m, trial, x)));
        } catch (const std::exception& e) {
            s1.note = std::string("evaluation failed: ") + e.what();
            eval_ok = false;
        }
        if (!eval_ok || worst > kTolAlgebraic) {
            if (eval_ok)
                s1.note = "candidate residual above tolerance";
            continue;
        }
        // Integrability probe at the datum: a commuting pair is required for
        // the leg-composed section to mean anything.
        const double br = m.k > 1 ? bracket_max(trial, m.flatten(x0)) : 0.0;
        if (br > 1e-6) {
            s1.note = "candidate rejected: bracket at datum = " + format_double(br);
            continue;
        }
        field = trial;
        have_field = true;
        s1.max_residual = worst;
        report.ansatz = (cand == SopdeAnsatz::Symmetric) ? "symmetric" : "uniform";
        s1.note.clear();
        break;
    }
    s1.pass = have_field && s1.max_residual <= s1.tolerance;
    report.stages.push_back(s1);

    auto abort_after = [&](std::size_t) {
        const char* names[] = {"integration",    "euler_lagrange", "hdw_equations",
                               "unified_lift",   "field_operator", "field_operator_integral"};
        const char* claims[] = {"integral_section_holonomy", "el_field_equations",
                                "legendre_pushforward_hdw",  "unified_equation_on_graph",
                                "field_operator_conditions", "field_operator_sections"};
        const double tols[] = {kTolIntegration, kTolIntegration, kTolIntegration,
                               kTolAlgebraic,   kTolAlgebraic,   kTolIntegration};
        for (std::size_t i = report.stages.size() - 1; i < 6; ++i)
            report.stages.push_back(skipped_stage(names[i], claims[i], tols[i]));
        report.all_pass = false;
        return report;
    };

    if (!have_field || !s1.pass)
        return abort_after(1);

    // Stage 2: integrate and check holonomy of the section.
    StageResult s2;
    s2.name = "integration";
    s2.claim = "integral_section_holonomy";
    s2.tolerance = kTolIntegration;
    s2.ran = true;
    IntegrateOptions iopts;
    iopts.substeps = opts.substeps;
    IntegrationResult integ = integrate_section(m, field, x0, grid, iopts);
    if (integ.truncated) {
        s2.pass = false;
        s2.note = integ.diagnostic;
        report.stages.push_back(s2);
        return abort_after(2);
    }
    const Section& psi = integ.section;
    s2.max_residual = holonomy_check(m, psi);
    s2.pass = s2.max_residual <= s2.tolerance;
    report.stages.push_back(s2);
    if (!s2.pass)
        return abort_after(2);

    const int total = grid.node_count();

    // Stage 3: Euler-Lagrange residual of the projected base section, with
    // first derivatives read off the section and second derivatives supplied
    // by the field's acceleration components.
    StageResult s3;
    s3.name = "euler_lagrange";
    s3.claim = "el_field_equations";
    s3.tolerance = kTolIntegration;
    s3.ran = true;
    {
        Section phi;
        phi.grid = grid;
        phi.dim = m.n;
        for (int i = 0; i < m.n; ++i)
            phi.coord_names.push_back(q_name(i));
        phi.values.resize(static_cast<std::size_t>(total) * m.n);
        phi.d1.resize(static_cast<std::size_t>(total) * m.k * m.n);
        phi.d2.resize(static_cast<std::size_t>(total) * m.k * m.k * m.n);
        phi.has_d1 = phi.has_d2 = true;
        std::vector<double> flat(m.lag_dim());
        for (int node = 0; node < total; ++node) {
            for (int c = 0; c < m.lag_dim(); ++c)
                flat[c] = psi.value(node, c);
            const Bindings b = m.bind(Space::Lagrangian, flat);
            for (int i = 0; i < m.n; ++i)
                phi.values[static_cast<std::size_t>(node) * m.n + i] = flat[i];
            for (int a = 0; a < m.k; ++a)
                for (int i = 0; i < m.n; ++i)
                    phi.d1[(static_cast<std::size_t>(node) * m.k + a) * m.n + i] =
                        flat[m.n + m.vflat(i, a)];
            for (int a = 0; a < m.k; ++a)
                for (int bb = 0; bb < m.k; ++bb)
                    for (int i = 0; i < m.n; ++i)
                        phi.d2[((static_cast<std::size_t>(node) * m.k + a) * m.k + bb) * m.n +
                               i] = field.comps[a][m.n + m.vflat(i, bb)].eval(b);
        }
        double worst = 0.0;
        for (const auto& node_res : el_residual(m, phi))
            worst = std::max(worst, max_abs(node_res));
        s3.max_residual = worst;
    }
    s3.pass = s3.max_residual <= s3.tolerance;
    report.stages.push_back(s3);
    if (!s3.pass)
        return abort_after(3);

    // Stage 4: push the section through the Legendre map and check the
    // Hamilton-De Donder-Weyl equations.
    StageResult s4;
    s4.name = "hdw_equations";
    s4.claim = "legendre_pushforward_hdw";
    s4.tolerance = kTolIntegration;
    s4.ran = true;
    {
        const Section psi_h = pushforward_section(m, psi);
        const HamFunction h = opts.hamiltonian
                                  ? HamFunction::explicit_expr(m, *opts.hamiltonian)
                                  : HamFunction::implicit_energy(m);
        s4.max_residual = hdw_residual(h, psi_h).max_interior;
    }
    s4.pass = s4.max_residual <= s4.tolerance;
    report.stages.push_back(s4);
    if (!s4.pass)
        return abort_after(4);

    // Stage 5: lift to the product space; tangency plus the unified equation
    // along the section.
    StageResult s5;
    s5.name = "unified_lift";
    s5.claim = "unified_equation_on_graph";
    s5.tolerance = kTolAlgebraic;
    s5.ran = true;
    {
        const KVectorField z = lift_from_lagrangian(m, field);
        const UnifiedSystem sys = make_unified_system(m);
        double worst = 0.0;
        UnifiedPoint w;
        w.q.resize(m.n);
        w.v.resize(m.vdim());
        for (int node = 0; node < total; ++node) {
            LagPoint x;
            x.q.resize(m.n);
            x.v.resize(m.vdim());
            for (int i = 0; i < m.n; ++i)
                x.q[i] = psi.value(node, i);
            for (int c = 0; c < m.vdim(); ++c)
                x.v[c] = psi.value(node, m.n + c);
            const HamPoint y = legendre(m, x);
            w.q = x.q;
            w.v = x.v;
            w.p = y.p;
            worst = std::max(worst, max_abs(tangency_residual(m, z, w)));
            worst = std::max(worst, max_abs(unified_geoeq_residual(m, sys, z, w)));
        }
        s5.max_residual = worst;
    }
    s5.pass = s5.max_residual <= s5.tolerance;
    report.stages.push_back(s5);
    if (!s5.pass)
        return abort_after(5);

    // Stage 6: field-operator conditions for the composed operator.
    StageResult s6;
    s6.name = "field_operator";
    s6.claim = "field_operator_conditions";
    s6.tolerance = kTolAlgebraic;
    s6.ran = true;
    const FieldOperatorK kop = k_from_sopde(m, field);
    {
        const VerifyKReport vk = verify_k(m, kop, probes);
        s6.max_residual =
            std::max({vk.max_field_eq, vk.max_second_order, vk.max_slot_trace});
    }
    s6.pass = s6.max_residual <= s6.tolerance;
    report.stages.push_back(s6);
    if (!s6.pass)
        return abort_after(6);

    // Stage 7: the integrated section is an integral section of the operator
    // (derivatives by finite differences, so this is not circular).
    StageResult s7;
    s7.name = "field_operator_integral";
    s7.claim = "field_operator_sections";
    s7.tolerance = kTolIntegration;
    s7.ran = true;
    {
        Section fd_psi = psi;
        fd_psi.compute_fd_derivatives(false);
        s7.max_residual = k_integral_residual(m, kop, fd_psi).max_interior;
    }
    s7.pass = s7.max_residual <= s7.tolerance;
    report.stages.push_back(s7);

    report.all_pass = true;
    for (const auto& st : report.stages)
        report.all_pass = report.all_pass && st.pass;
    return report;
}

SingularReport singular_report(const FieldModel& m, const std::vector<LagPoint>& samples,
                               const SingularOptions& opts) {
    SingularReport report;
    report.model_hash = m.hash();

    {
        const RegularityReport reg = is_regular(m, samples, 1e-9);
        if (reg.regular)
            throw ModelError("model is regular on the samples; use the equivalence pathway");
    }

    std::vector<UnifiedPoint> graph_samples;
    graph_samples.reserve(samples.size());
    for (const auto& x : samples) {
        const HamPoint y = legendre(m, x);
        UnifiedPoint w;
        w.q = x.q;
        w.v = x.v;
        w.p = y.p;
        graph_samples.push_back(std::move(w));
    }

    report.constraints = constraint_algorithm(m, graph_samples, opts.max_levels, opts.tol);
    if (!report.constraints.stabilized)
        return report;

    // Momentum-side constraints: final constraints with no velocity
    // dependence describe the image of the Legendre map.
    const std::vector<Expr>& final_constraints =
        report.constraints.levels.back().active_constraints;
    for (const Expr& c : final_constraints) {
        bool ham_only = true;
        for (const std::string& var : c.free_variables()) {
            if (var[0] == 'v') {
                ham_only = false;
                break;
            }
        }
        if (ham_only)
            report.momentum_constraints.push_back(c);
    }

    const TwoFormFamily omega0 = canonical_two_forms(m);
    const ExprMat jac_expr = legendre_jacobian(m);
    const double fd_step = 1e-6;

    auto h0_value = [&](const HamPoint& y, const LagPoint& warm) -> double {
        if (opts.h0)
            return opts.h0->eval(m.bind(y));
        return energy(m, invert_legendre_ls(m, y, warm).x);
    };

    report.rows.resize(samples.size());
    for (std::size_t idx = 0; idx < samples.size(); ++idx) {
        const LagPoint& x = samples[idx];
        const HamPoint y = legendre(m, x);
        const Bindings by = m.bind(y);

        // Tangent basis of the momentum-side constraint set at y.
        Mat cjac(static_cast<int>(report.momentum_constraints.size()), m.ham_dim());
        for (std::size_t r = 0; r < report.momentum_constraints.size(); ++r)
            for (int c = 0; c < m.ham_dim(); ++c)
                cjac(static_cast<int>(r), c) =
                    report.momentum_constraints[r].diff(m.ham_coords()[c]).eval(by);
        const Mat tangent = nullspace(cjac, 1e-10);
        const int r = tangent.cols;

        // Tangential gradient of the restricted Hamiltonian.
        std::vector<double> g(r, 0.0);
        const std::vector<double> yflat = m.flatten(y);
        for (int j = 0; j < r; ++j) {
            std::vector<double> plus = yflat, minus = yflat;
            for (int c = 0; c < m.ham_dim(); ++c) {
                plus[c] += fd_step * tangent(c, j);
                minus[c] -= fd_step * tangent(c, j);
            }
            g[j] = (h0_value(m.unflatten_ham(plus), x) - h0_value(m.unflatten_ham(minus), x)) /
                   (2.0 * fd_step);
        }

        // Reduced 2-forms and the restricted equation in the tangent frame.
        std::vector<Mat> reduced(m.k);
        for (int a = 0; a < m.k; ++a)
            reduced[a] = matmul(tangent.transposed(), matmul(eval(omega0.forms[a], by), tangent));
        Mat sys(r, m.k * r);
        for (int a = 0; a < m.k; ++a)
            for (int s = 0; s < r; ++s)
                for (int j = 0; j < r; ++j)
                    sys(j, a * r + s) = reduced[a](s, j);
        const LstsqResult ls = lstsq_min_norm(sys, g, 1e-10);
        report.rows[idx].heo_residual = ls.residual;

        // Candidate field in ambient coordinates, composed with the Legendre
        // map at the sample.
        KCoeffs kvals(m.k, std::vector<double>(m.ham_dim(), 0.0));
        for (int a = 0; a < m.k; ++a)
            for (int c = 0; c < m.ham_dim(); ++c) {
                double s = 0.0;
                for (int j = 0; j < r; ++j)
                    s += tangent(c, j) * ls.x[a * r + j];
                kvals[a][c] = s;
            }

        // Field-equation condition pulled back to the velocity space.
        const Bindings bx = m.bind(x);
        std::vector<double> cov(m.ham_dim(), 0.0);
        for (int a = 0; a < m.k; ++a) {
            const std::vector<double> part = mat_tvec(eval(omega0.forms[a], by), kvals[a]);
            for (int c = 0; c < m.ham_dim(); ++c)
                cov[c] += part[c];
        }
        const std::vector<double> pulled = mat_tvec(eval(jac_expr, bx), cov);
        double fe = 0.0;
        for (int c = 0; c < m.lag_dim(); ++c)
            fe = std::max(fe, std::fabs(pulled[c] - m.denergy[c].eval(bx)));
        report.rows[idx].field_eq_residual = fe;

        double so = 0.0;
        for (int a = 0; a < m.k; ++a)
            for (int i = 0; i < m.n; ++i)
                so = std::max(so, std::fabs(kvals[a][i] - x.vel(i, a, m.k)));
        report.rows[idx].second_order_residual = so;
    }

    for (const auto& row : report.rows) {
        report.field_eq_max = std::max(report.field_eq_max, row.field_eq_residual);
        report.second_order_max = std::max(report.second_order_max, row.second_order_residual);
    }
    report.field_eq_ok = report.field_eq_max <= kTolAlgebraic;
    report.second_order_ok = report.second_order_max <= kTolAlgebraic;
    report.pass = report.constraints.stabilized && report.structural_ok && report.field_eq_ok;
    return report;
}

CheckReport check_report(const FieldModel& m, int samples, std::uint64_t seed,
                         double pullback_tol) {
    if (samples < 1)
        throw ModelError("sample count must be positive");
    CheckReport r;
    r.model_hash = m.hash();
    r.samples = samples;
    r.seed = seed;
    r.pullback_tol = pullback_tol;

    const std::vector<LagPoint> pts = random_lag_points(m, samples, seed);
    const RegularityReport reg = is_regular(m, pts, 1e-9);
    r.regular = reg.regular;
    r.hessian_dets = reg.dets;

    for (const auto& x : pts)
        for (double res : pullback_check(m, x))
            r.pullback_max = std::max(r.pullback_max, res);

    const FieldOperatorK kop = default_k(m);
    const VerifyKReport vk = verify_k(m, kop, pts);
    r.slot_trace_max = vk.max_slot_trace;
    r.second_order_max = vk.max_second_order;
    r.field_eq_max = vk.max_field_eq;

    r.pass = r.pullback_max <= r.pullback_tol && r.slot_trace_max <= r.identity_tol &&
             r.second_order_max <= r.identity_tol && r.field_eq_max <= r.field_eq_tol;
    return r;
}

namespace {

void stage_json(JsonWriter& w, const StageResult& s) {
    w.begin_object();
    w.key("name").value(s.name);
    w.key("paper_ref").value(s.claim);
    w.key("max_residual");
    if (s.ran)
        w.value(s.max_residual);
    else
        w.null();
    w.key("tolerance").value(s.tolerance);
    w.key("pass").value(s.pass);
    if (!s.note.empty())
        w.key("note").value(s.note);
    w.end_object();
}

void levels_json(JsonWriter& w, const ConstraintReport& r) {
    w.key("stabilized").value(r.stabilized);
    w.key("final_level").value(r.final_level);
    w.key("levels").begin_array();
    for (std::size_t l = 0; l < r.levels.size(); ++l) {
        const ConstraintLevel& lv = r.levels[l];
        w.begin_object();
        w.key("level").value(static_cast<int>(l));
        w.key("constraints").begin_array();
        for (const Expr& c : lv.active_constraints)
            w.value(c.str());
        w.end_array();
        w.key("new_constraints").value(lv.new_count);
        w.key("rows").begin_array();
        for (const auto& row : lv.rows) {
            w.begin_object();
            w.key("sample").value(row.sample);
            w.key("rank").value(row.rank);
            w.key("residual").value(row.solve_residual);
            w.key("retained").value(row.retained);
            w.end_object();
        }
        w.end_array();
        w.end_object();
    }
    w.end_array();
}

} // namespace

std::string equivalence_json(const EquivalenceReport& r) {
    JsonWriter w;
    w.begin_object();
    w.key("model_hash").value(r.model_hash);
    w.key("pathway").value("equivalence");
    w.key("ansatz").value(r.ansatz);
    w.key("stages").begin_array();
    for (const auto& s : r.stages)
        stage_json(w, s);
    w.end_array();
    w.key("all_pass").value(r.all_pass);
    w.end_object();
    return w.str();
}

std::string singular_json(const SingularReport& r) {
    JsonWriter w;
    w.begin_object();
    w.key("model_hash").value(r.model_hash);
    w.key("pathway").value("constraint");
    levels_json(w, r.constraints);
    w.key("momentum_constraints").begin_array();
    for (const Expr& c : r.momentum_constraints)
        w.value(c.str());
    w.end_array();
    w.key("samples").begin_array();
    for (const auto& row : r.rows) {
        w.begin_object();
        w.key("heo_residual").value(row.heo_residual);
        w.key("field_eq_residual").value(row.field_eq_residual);
        w.key("second_order_residual").value(row.second_order_residual);
        w.end_object();
    }
    w.end_array();
    w.key("conditions").begin_object();
    w.key("structural").value(r.structural_ok);
    w.key("field_equation").begin_object();
    w.key("max_residual").value(r.field_eq_max);
    w.key("tolerance").value(kTolAlgebraic);
    w.key("pass").value(r.field_eq_ok);
    w.end_object();
    w.key("second_order").begin_object();
    w.key("max_residual").value(r.second_order_max);
    w.key("tolerance").value(kTolAlgebraic);
    w.key("pass").value(r.second_order_ok);
    w.end_object();
    w.end_object();
    w.key("all_pass").value(r.pass);
    w.end_object();
    return w.str();
}

std::string check_json(const CheckReport& r) {
    JsonWriter w;
    w.begin_object();
    w.key("model_hash").value(r.model_hash);
    w.key("samples").value(r.samples);
    w.key("seed").value(static_cast<unsigned long long>(r.seed));
    w.key("regular").value(r.regular);
    w.key("hessian_dets").begin_array();
    for (double d : r.hessian_dets)
        w.value(d);
    w.end_array();
    w.key("pullback").begin_object();
    w.key("max_residual").value(r.pullback_max);
    w.key("tolerance").value(r.pullback_tol);
    w.key("pass").value(r.pullback_max <= r.pullback_tol);
    w.end_object();
    w.key("slot_trace").begin_object();
    w.key("max_residual").value(r.slot_trace_max);
    w.key("tolerance").value(r.identity_tol);
    w.key("pass").value(r.slot_trace_max <= r.identity_tol);
    w.end_object();
    w.key("second_order").begin_object();
    w.key("max_residual").value(r.second_order_max);
    w.key("tolerance").value(r.identity_tol);
    w.key("pass").value(r.second_order_max <= r.identity_tol);
    w.end_object();
    w.key("field_equation").begin_object();
    w.key("max_residual").value(r.field_eq_max);
    w.key("tolerance").value(r.field_eq_tol);
    w.key("pass").value(r.field_eq_max <= r.field_eq_tol);
    w.end_object();
    w.key("pass").value(r.pass);
    w.end_object();
    return w.str();
}

std::string constraint_json(const std::string& model_hash, const ConstraintReport& r,
                            int samples, std::uint64_t seed) {
    JsonWriter w;
    w.begin_object();
    w.key("model_hash").value(model_hash);
    w.key("samples").value(samples);
    w.key("seed").value(static_cast<unsigned long long>(seed));
    levels_json(w, r);
    w.end_object();
    return w.str();
}

} // namespace ksymp
