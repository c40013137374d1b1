#include <doctest.h>

#include <cmath>

#include "corpus.hpp"
#include "ksymp/verify.hpp"

using namespace ksymp;
using namespace corpus;

namespace {

Grid quick_grid() {
    return Grid::make({Grid::make_axis(0, 0.5, 0.02), Grid::make_axis(0, 0.5, 0.02)});
}

} // namespace

TEST_CASE("equivalence pipeline on the harmonic model") {
    const FieldModel m = harmonic();
    VerifyOptions opts;
    opts.samples = 25;
    opts.hamiltonian = Expr::parse("0.5*(p1_1^2 + p2_1^2) + q1^2");
    const EquivalenceReport r =
        equivalence_report(m, lag_point({0.0}, {1.0, 1.0}), quick_grid(), opts);
    CHECK(r.all_pass);
    CHECK(r.ansatz == "uniform"); // symmetric gauge is rejected by the bracket probe
    REQUIRE(r.stages.size() == 7);
    for (const auto& s : r.stages) {
        CHECK(s.ran);
        CHECK(s.pass);
        CHECK(s.max_residual <= s.tolerance);
    }
}

TEST_CASE("equivalence pipeline with the implicit hamiltonian") {
    const FieldModel m = harmonic();
    VerifyOptions opts;
    opts.samples = 10;
    const Grid g = Grid::make({Grid::make_axis(0, 0.3, 0.03), Grid::make_axis(0, 0.3, 0.03)});
    const EquivalenceReport r = equivalence_report(m, lag_point({0.0}, {1.0, 1.0}), g, opts);
    CHECK(r.all_pass);
}

TEST_CASE("equivalence pipeline on the free model keeps the symmetric gauge") {
    const FieldModel fr = free22();
    VerifyOptions opts;
    opts.samples = 10;
    const EquivalenceReport r =
        equivalence_report(fr, lag_point({0.1, -0.2}, {0.3, 0.1, 0.0, 0.2}), quick_grid(), opts);
    CHECK(r.all_pass);
    CHECK(r.ansatz == "symmetric");
}

TEST_CASE("equivalence pipeline on coupled two-field oscillators") {
    const FieldModel m = coupled22();
    VerifyOptions opts;
    opts.samples = 10;
    const Grid g = Grid::make({Grid::make_axis(0, 0.4, 0.02), Grid::make_axis(0, 0.4, 0.02)});
    // The symmetric mode q1 = q2 travels as sin(t1 + t2).
    const EquivalenceReport r =
        equivalence_report(m, lag_point({0.0, 0.0}, {1.0, 1.0, 1.0, 1.0}), g, opts);
    CHECK(r.all_pass);
}

TEST_CASE("equivalence pipeline with a position-dependent metric") {
    // L = (1 + q^2) v^2 / 2 makes the Legendre map genuinely nonlinear, so
    // stage 4 exercises the Newton-implicit Hamiltonian route for real.
    const FieldModel m(1, 1, Expr::parse("0.5*(1 + q1^2)*v1_1^2"));
    const Grid g = Grid::make({Grid::make_axis(0, 1, 0.005)});
    VerifyOptions opts;
    opts.samples = 15;

    const EquivalenceReport implicit_h =
        equivalence_report(m, lag_point({0.2}, {0.8}), g, opts);
    CHECK(implicit_h.all_pass);

    opts.hamiltonian = Expr::parse("0.5*p1_1^2/(1 + q1^2)");
    const EquivalenceReport explicit_h =
        equivalence_report(m, lag_point({0.2}, {0.8}), g, opts);
    CHECK(explicit_h.all_pass);
}

TEST_CASE("worker count does not change reports") {
    const FieldModel m = half_vsq();
    const auto samples = random_graph_points(m, 12, 3);
    setenv("KSYMP_THREADS", "3", 1);
    const ConstraintReport a = constraint_algorithm(m, samples);
    setenv("KSYMP_THREADS", "1", 1);
    const ConstraintReport b = constraint_algorithm(m, samples);
    unsetenv("KSYMP_THREADS");
    CHECK(constraint_json(m.hash(), a, 12, 3) == constraint_json(m.hash(), b, 12, 3));
}

TEST_CASE("equivalence pipeline on the k=1 oscillator") {
    const FieldModel osc = oscillator();
    VerifyOptions opts;
    opts.samples = 25;
    opts.hamiltonian = Expr::parse("0.5*p1_1^2 + 0.5*q1^2");
    const Grid g = Grid::make({Grid::make_axis(0, 2, 0.005)});
    const EquivalenceReport r = equivalence_report(osc, lag_point({1.0}, {0.0}), g, opts);
    CHECK(r.all_pass);
}

TEST_CASE("a failing stage is pinpointed and the rest skipped") {
    // Forcing the symmetric gauge on the harmonic model trips the
    // integrability probe in stage 1; the report must say so rather than
    // run the later stages on a field that cannot be integrated.
    const FieldModel m = harmonic();
    VerifyOptions opts;
    opts.samples = 10;
    opts.ansatz = "symmetric";
    const EquivalenceReport r =
        equivalence_report(m, lag_point({0.0}, {1.0, 1.0}), quick_grid(), opts);
    CHECK_FALSE(r.all_pass);
    REQUIRE(r.stages.size() == 7);
    CHECK(r.stages[0].ran);
    CHECK_FALSE(r.stages[0].pass);
    CHECK(r.stages[0].note.find("bracket") != std::string::npos);
    for (std::size_t s = 1; s < r.stages.size(); ++s) {
        CHECK_FALSE(r.stages[s].ran);
        CHECK_FALSE(r.stages[s].pass);
    }
    // Skipped stages serialize with a null residual.
    const std::string json = equivalence_json(r);
    CHECK(json.find("\"max_residual\":null") != std::string::npos);
    CHECK(json.find("\"all_pass\":false") != std::string::npos);
}

TEST_CASE("pathway guards") {
    const FieldModel sing = half_vsq();
    CHECK_THROWS_AS(
        equivalence_report(sing, lag_point({0.0}, {1.0, 0.0}), quick_grid(), {}),
        ModelError);

    const FieldModel reg = harmonic();
    CHECK_THROWS_AS(singular_report(reg, {lag_point({0.0}, {1.0, 1.0})}, {}), ModelError);
}

TEST_CASE("singular pathway on the dead-slot model") {
    const FieldModel m = half_vsq();
    SingularOptions opts;
    opts.h0 = Expr::parse("0.5*p1_1^2");

    SUBCASE("adapted samples satisfy all three conditions") {
        const std::vector<LagPoint> samples{lag_point({0.2}, {0.7, 0.0}),
                                            lag_point({-0.4}, {1.1, 0.0}),
                                            lag_point({0.9}, {-0.3, 0.0})};
        const SingularReport r = singular_report(m, samples, opts);
        CHECK(r.constraints.stabilized);
        CHECK(r.structural_ok);
        CHECK(r.field_eq_ok);
        CHECK(r.second_order_ok);
        CHECK(r.pass);
        REQUIRE(r.momentum_constraints.size() == 1);
        CHECK(r.momentum_constraints[0].str() == "p2_1");
    }

    SUBCASE("generic samples break only the second-order condition") {
        const std::vector<LagPoint> samples{lag_point({0.2}, {0.7, 0.5}),
                                            lag_point({-0.4}, {1.1, -0.8})};
        const SingularReport r = singular_report(m, samples, opts);
        CHECK(r.constraints.stabilized);
        CHECK(r.field_eq_ok);
        CHECK_FALSE(r.second_order_ok);
        CHECK(r.second_order_max == doctest::Approx(0.8));
        CHECK(r.pass); // the second-order condition is reported, not required
    }

    SUBCASE("the implicit fiber energy replaces a missing h0") {
        SingularOptions implicit;
        const std::vector<LagPoint> samples{lag_point({0.2}, {0.7, 0.0}),
                                            lag_point({-0.4}, {1.1, 0.0})};
        const SingularReport r = singular_report(m, samples, implicit);
        CHECK(r.field_eq_ok);
        CHECK(r.second_order_ok);
    }
}

TEST_CASE("singular pathway on the affine model") {
    const FieldModel m = linear_v();
    SingularOptions opts;
    opts.h0 = Expr::constant(0.0);

    SUBCASE("rest samples pass everything") {
        const std::vector<LagPoint> samples{lag_point({0.3}, {0.0, 0.0}),
                                            lag_point({-0.6}, {0.0, 0.0})};
        const SingularReport r = singular_report(m, samples, opts);
        CHECK(r.constraints.stabilized);
        CHECK(r.field_eq_ok);
        CHECK(r.second_order_ok);
    }

    SUBCASE("moving samples fail the second-order condition only") {
        const std::vector<LagPoint> samples{lag_point({0.3}, {0.9, 0.4})};
        const SingularReport r = singular_report(m, samples, opts);
        CHECK(r.field_eq_ok);
        CHECK_FALSE(r.second_order_ok);
        CHECK(r.second_order_max == doctest::Approx(0.9));
    }
}

TEST_CASE("integrated sections pass the operator and field checks together") {
    // On integrated harmonic sections the integral-section residual of the
    // induced operator and the second-order/holonomy check succeed or fail
    // together.
    const FieldModel m = harmonic();
    const KVectorField field = sopde_field(m, SopdeAnsatz::Uniform);
    const FieldOperatorK kop = k_from_sopde(m, field);
    const Grid g = Grid::make({Grid::make_axis(0, 0.5, 0.01), Grid::make_axis(0, 0.5, 0.01)});
    IntegrationResult r = integrate_section(m, field, lag_point({0.0}, {1.0, 1.0}), g);
    Section psi = r.section;
    psi.compute_fd_derivatives(false);

    CHECK(k_integral_residual(m, kop, psi).max_interior < 1e-8);
    CHECK(holonomy_check(m, psi) < 1e-8);

    // Corrupt the velocity data: both checks must flag it.
    Section broken = psi;
    for (int node = 0; node < g.node_count(); ++node)
        broken.values[static_cast<std::size_t>(node) * broken.dim + 1] += 0.3;
    broken.compute_fd_derivatives(false);
    CHECK(k_integral_residual(m, kop, broken).max_interior > 0.1);
    CHECK(holonomy_check(m, broken) > 0.1);
}

TEST_CASE("check report") {
    const CheckReport good = check_report(harmonic(), 40, 11);
    CHECK(good.regular);
    CHECK(good.pass);
    CHECK(good.pullback_max < 1e-10);

    const CheckReport sing = check_report(bilinear(), 40, 11);
    CHECK_FALSE(sing.regular);
    CHECK(sing.pass); // identities hold regardless of regularity

    CHECK_THROWS_AS(check_report(harmonic(), 0, 1), ModelError);
}

TEST_CASE("reports serialize deterministically") {
    const FieldModel m = harmonic();
    VerifyOptions opts;
    opts.samples = 10;
    const Grid g = Grid::make({Grid::make_axis(0, 0.2, 0.02), Grid::make_axis(0, 0.2, 0.02)});
    const std::string a =
        equivalence_json(equivalence_report(m, lag_point({0.0}, {1.0, 1.0}), g, opts));
    const std::string b =
        equivalence_json(equivalence_report(m, lag_point({0.0}, {1.0, 1.0}), g, opts));
    CHECK(a == b);
    CHECK(a.find("\"model_hash\"") != std::string::npos);
    CHECK(a.find("\"paper_ref\"") != std::string::npos);
    CHECK(a.find("\"all_pass\":true") != std::string::npos);

    const std::string c1 = check_json(check_report(m, 10, 42));
    const std::string c2 = check_json(check_report(m, 10, 42));
    CHECK(c1 == c2);
    // different seeds change the samples, not the verdict
    const std::string c3 = check_json(check_report(m, 10, 43));
    CHECK(c3 != c1);
}
