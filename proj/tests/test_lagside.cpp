#include <doctest.h>

#include <cmath>

#include "corpus.hpp"
#include "ksymp/lagside.hpp"

using namespace ksymp;
using namespace corpus;

namespace {

Grid small_grid() {
    return Grid::make({Grid::make_axis(0.0, 0.5, 0.05), Grid::make_axis(0.0, 0.5, 0.05)});
}

Section sine_wave_base(const FieldModel& m, const Grid& g) {
    auto f = [&](const std::vector<double>& t) {
        return std::vector<double>{std::sin(t[0] + t[1])};
    };
    auto df = [&](const std::vector<double>& t, int) {
        return std::vector<double>{std::cos(t[0] + t[1])};
    };
    auto d2f = [&](const std::vector<double>& t, int, int) {
        return std::vector<double>{-std::sin(t[0] + t[1])};
    };
    return make_section(g, {q_name(0)}, f, df, d2f);
}

} // namespace

TEST_CASE("euler-lagrange residual with analytic derivative data") {
    const FieldModel m = harmonic();
    const Grid g = small_grid();

    SUBCASE("sine wave solves the field equations") {
        const Section phi = sine_wave_base(m, g);
        for (const auto& node : el_residual(m, phi))
            CHECK(std::fabs(node[0]) < 1e-12);
    }

    SUBCASE("linear sections solve the free model exactly") {
        const FieldModel fr = free22();
        auto f = [&](const std::vector<double>& t) {
            return std::vector<double>{0.3 * t[0] - t[1], 0.5 * t[1]};
        };
        auto df = [&](const std::vector<double>&, int a) {
            return a == 0 ? std::vector<double>{0.3, 0.0} : std::vector<double>{-1.0, 0.5};
        };
        auto d2f = [&](const std::vector<double>&, int, int) {
            return std::vector<double>{0.0, 0.0};
        };
        const Section phi = make_section(g, {q_name(0), q_name(1)}, f, df, d2f);
        for (const auto& node : el_residual(fr, phi))
            CHECK(norm_inf(node) == 0.0);
    }

    SUBCASE("a non-solution is detected with the predicted defect") {
        auto f = [&](const std::vector<double>& t) {
            return std::vector<double>{t[0] * t[1]};
        };
        auto df = [&](const std::vector<double>& t, int a) {
            return std::vector<double>{a == 0 ? t[1] : t[0]};
        };
        auto d2f = [&](const std::vector<double>&, int a, int b) {
            return std::vector<double>{a != b ? 1.0 : 0.0};
        };
        const Section phi = make_section(g, {q_name(0)}, f, df, d2f);
        const auto res = el_residual(m, phi);
        const int total = g.node_count();
        for (int node = 0; node < total; ++node) {
            const auto t = g.t_of_node(node);
            CHECK(res[node][0] == doctest::Approx(2.0 * t[0] * t[1]));
        }
    }
}

TEST_CASE("pointwise acceleration solve") {
    SUBCASE("harmonic symmetric minimum norm") {
        const FieldModel m = harmonic();
        const LagPoint x = lag_point({0.7}, {0.2, -0.4});
        const SopdeSolution sol = sopde_solve(m, x);
        CHECK(sol.consistent);
        CHECK(sol.at(0, 0, 0, m.k) == doctest::Approx(-0.7));
        CHECK(sol.at(0, 1, 1, m.k) == doctest::Approx(-0.7));
        CHECK(sol.at(0, 0, 1, m.k) == doctest::Approx(0.0));
        CHECK(sol.at(0, 1, 0, m.k) == doctest::Approx(0.0));
    }

    SUBCASE("free model: homogeneous system, zero solution") {
        const FieldModel fr = free22();
        const SopdeSolution sol = sopde_solve(fr, lag_point({0.3, 0.4}, {1, 2, 3, 4}));
        CHECK(sol.consistent);
        CHECK(norm_inf(sol.accel) == doctest::Approx(0.0));
    }

    SUBCASE("k=1 oscillator recovers the second-order law") {
        const FieldModel osc = oscillator();
        const SopdeSolution sol = sopde_solve(osc, lag_point({0.9}, {0.1}));
        CHECK(sol.consistent);
        CHECK(sol.at(0, 0, 0, osc.k) == doctest::Approx(-0.9));
    }

    SUBCASE("an inconsistent system is reported, not thrown") {
        // Zero Hessian with a nonvanishing gradient leaves no acceleration
        // to balance the equation.
        const FieldModel m(1, 1, Expr::parse("q1*v1_1 + q1^2"));
        const SopdeSolution sol = sopde_solve(m, lag_point({0.5}, {0.2}));
        CHECK_FALSE(sol.consistent);
        CHECK(sol.residual == doctest::Approx(1.0)); // |dL/dq - d2L/dqdv v| = |2 q1|
    }

    SUBCASE("uniform gauge on the harmonic model fills every slot") {
        const FieldModel m = harmonic();
        const SopdeSolution sol =
            sopde_solve(m, lag_point({0.25}, {1.0, 0.0}), SopdeAnsatz::Uniform);
        CHECK(sol.consistent);
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                CHECK(sol.at(0, a, b, m.k) == doctest::Approx(-0.25));
    }
}

TEST_CASE("state-dependent hessian") {
    // L = (1 + q^2) v^2 / 2: the acceleration is -q v^2 / (1 + q^2).
    const FieldModel m(1, 1, Expr::parse("0.5*(1 + q1^2)*v1_1^2"));
    const KVectorField f = sopde_field(m, SopdeAnsatz::Symmetric);

    for (const auto& x : random_lag_points(m, 25, 71)) {
        const double q = x.q[0], v = x.v[0];
        const double expected = -q * v * v / (1.0 + q * q);
        const SopdeSolution sol = sopde_solve(m, x);
        CHECK(sol.consistent);
        CHECK(sol.at(0, 0, 0, 1) == doctest::Approx(expected).epsilon(1e-12));
        const KCoeffs c = f.eval_all(m.flatten(x));
        CHECK(c[0][1] == doctest::Approx(expected).epsilon(1e-12));
        CHECK(norm_inf(lag_geoeq_residual(m, f, x)) < 1e-12);
    }
}

TEST_CASE("symbolic field matches the pointwise solve") {
    for (SopdeAnsatz ansatz : {SopdeAnsatz::Symmetric, SopdeAnsatz::Uniform}) {
        for (const FieldModel& m : {harmonic(), oscillator(), free22()}) {
            const KVectorField f = sopde_field(m, ansatz);
            for (const auto& x : random_lag_points(m, 10, 31)) {
                const SopdeSolution sol = sopde_solve(m, x, ansatz);
                const KCoeffs c = f.eval_all(m.flatten(x));
                for (int a = 0; a < m.k; ++a)
                    for (int i = 0; i < m.n; ++i)
                        for (int b = 0; b < m.k; ++b)
                            CHECK(c[a][m.n + m.vflat(i, b)] ==
                                  doctest::Approx(sol.at(i, a, b, m.k)).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("geometric equation residual") {
    const FieldModel m = harmonic();

    SUBCASE("constructed solutions satisfy the equation") {
        for (SopdeAnsatz ansatz : {SopdeAnsatz::Symmetric, SopdeAnsatz::Uniform}) {
            const KVectorField f = sopde_field(m, ansatz);
            for (const auto& x : random_lag_points(m, 50, 41))
                CHECK(norm_inf(lag_geoeq_residual(m, f, x)) < 1e-10);
        }
    }

    SUBCASE("the zero field misses by exactly dE_L") {
        const KVectorField zero = KVectorField::zero(m, Space::Lagrangian);
        const LagPoint x = lag_point({0.5}, {1.0, 2.0});
        const auto res = lag_geoeq_residual(m, zero, x);
        const Bindings b = m.bind(x);
        bool nonzero = false;
        for (int c = 0; c < m.lag_dim(); ++c) {
            CHECK(res[c] == doctest::Approx(-m.denergy[c].eval(b)));
            nonzero = nonzero || std::fabs(res[c]) > 1e-6;
        }
        CHECK(nonzero);
    }

    SUBCASE("for regular models every solution is second-order") {
        for (const FieldModel& model : {harmonic(), oscillator(), free22()}) {
            for (const auto& x : random_lag_points(model, 10, 51)) {
                const KCoeffs sol = solve_lag_geoeq_full(model, x);
                for (int a = 0; a < model.k; ++a)
                    for (int i = 0; i < model.n; ++i)
                        CHECK(sol[a][i] ==
                              doctest::Approx(x.vel(i, a, model.k)).epsilon(1e-9));
            }
        }
    }

    SUBCASE("zero acceleration solves models without field dependence") {
        const FieldModel fr = free22();
        KVectorField f = KVectorField::zero(fr, Space::Lagrangian);
        for (int a = 0; a < fr.k; ++a)
            for (int i = 0; i < fr.n; ++i)
                f.comps[a][i] = Expr::variable(v_name(i, a));
        for (const auto& x : random_lag_points(fr, 20, 61))
            CHECK(norm_inf(lag_geoeq_residual(fr, f, x)) == 0.0);
    }
}
