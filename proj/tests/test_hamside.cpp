#include <doctest.h>

#include <cmath>

#include "corpus.hpp"
#include "ksymp/hamside.hpp"
#include "ksymp/lagside.hpp"

using namespace ksymp;
using namespace corpus;

TEST_CASE("hdw residual") {
    SUBCASE("harmonic sine data solves the equations") {
        const FieldModel m = harmonic();
        const HamFunction h =
            HamFunction::explicit_expr(m, Expr::parse("0.5*(p1_1^2 + p2_1^2) + q1^2"));
        const Grid g =
            Grid::make({Grid::make_axis(0, 0.5, 0.05), Grid::make_axis(0, 0.5, 0.05)});
        auto f = [&](const std::vector<double>& t) {
            const double s = t[0] + t[1];
            return std::vector<double>{std::sin(s), std::cos(s), std::cos(s)};
        };
        auto df = [&](const std::vector<double>& t, int) {
            const double s = t[0] + t[1];
            return std::vector<double>{std::cos(s), -std::sin(s), -std::sin(s)};
        };
        const Section psi = make_section(g, m.ham_coords(), f, df);
        const HdwResidual r = hdw_residual(h, psi);
        CHECK(r.max_all < 1e-12);
    }

    SUBCASE("zero hamiltonian keeps constant sections") {
        const FieldModel m = harmonic();
        const HamFunction h = HamFunction::explicit_expr(m, Expr::constant(0.0));
        const Grid g = Grid::make({Grid::make_axis(0, 1, 0.25), Grid::make_axis(0, 1, 0.25)});
        auto f = [&](const std::vector<double>&) {
            return std::vector<double>{0.4, -0.3, 0.9};
        };
        auto df = [&](const std::vector<double>&, int) {
            return std::vector<double>{0.0, 0.0, 0.0};
        };
        const Section psi = make_section(g, m.ham_coords(), f, df);
        CHECK(hdw_residual(h, psi).max_all == 0.0);
    }

    SUBCASE("free particle straight line") {
        const FieldModel osc = oscillator();
        const HamFunction h = HamFunction::explicit_expr(osc, Expr::parse("0.5*p1_1^2"));
        const Grid g = Grid::make({Grid::make_axis(0, 1, 0.1)});
        auto f = [&](const std::vector<double>& t) { return std::vector<double>{t[0], 1.0}; };
        auto df = [&](const std::vector<double>&, int) { return std::vector<double>{1.0, 0.0}; };
        const Section psi = make_section(g, osc.ham_coords(), f, df);
        CHECK(hdw_residual(h, psi).max_all < 1e-15);
    }
}

TEST_CASE("geometric hamiltonian equation residual") {
    const FieldModel m = harmonic();
    const HamFunction h =
        HamFunction::explicit_expr(m, Expr::parse("0.5*(p1_1^2 + p2_1^2) + q1^2"));

    SUBCASE("coordinate conditions define a solution") {
        KVectorField x = KVectorField::zero(m, Space::Hamiltonian);
        // base components dH/dp, momentum components splitting -dH/dq
        x.comps[0][0] = Expr::parse("p1_1");
        x.comps[1][0] = Expr::parse("p2_1");
        x.comps[0][m.n + m.pflat(0, 0)] = Expr::parse("-q1");
        x.comps[1][m.n + m.pflat(1, 0)] = Expr::parse("-q1");
        for (const auto& xp : random_lag_points(m, 25, 71)) {
            const HamPoint y = legendre(m, xp);
            CHECK(norm_inf(ham_geoeq_residual(h, x, y)) < 1e-12);
        }
    }

    SUBCASE("zero field, constant hamiltonian") {
        const HamFunction h0 = HamFunction::explicit_expr(m, Expr::constant(3.0));
        const KVectorField zero = KVectorField::zero(m, Space::Hamiltonian);
        const HamPoint y{{0.2}, {0.3, -0.4}};
        CHECK(norm_inf(ham_geoeq_residual(h0, zero, y)) == 0.0);
    }
}

TEST_CASE("legendre inversion") {
    SUBCASE("identity-hessian model converges in one step") {
        const FieldModel m = harmonic();
        const HamPoint y{{0.3}, {1.0, 2.0}};
        const LagPoint x = invert_legendre(m, y);
        CHECK(x.v[0] == doctest::Approx(1.0));
        CHECK(x.v[1] == doctest::Approx(2.0));
    }

    SUBCASE("quartic kinetic term") {
        const FieldModel q = quartic();
        HamPoint y{{0.0}, {8.0}};
        LagPoint guess;
        guess.q = {0.0};
        guess.v = {1.0};
        const LagPoint x = invert_legendre(q, y, guess, 1e-12, 100);
        CHECK(x.v[0] == doctest::Approx(2.0).epsilon(1e-12));
    }

    SUBCASE("points off the image fail") {
        const FieldModel lv = linear_v();
        HamPoint y{{0.0}, {1.0, 0.5}}; // p2_1 must be 0 on the image
        CHECK_THROWS_AS(invert_legendre(lv, y), NumericError);
    }

    SUBCASE("round trip on regular models") {
        const FieldModel cross(1, 2,
                               Expr::parse("0.5*(v1_1^2 + v2_1^2) + 0.5*v1_1*v2_1"));
        for (const FieldModel& m : {harmonic(), oscillator(), free22(), cross}) {
            for (const auto& x : random_lag_points(m, 100, 81)) {
                const HamPoint y = legendre(m, x);
                const LagPoint back = invert_legendre(m, y);
                for (int c = 0; c < m.vdim(); ++c)
                    CHECK(std::fabs(back.v[c] - x.v[c]) < 1e-10);
            }
        }
    }

    SUBCASE("least-squares variant reports the defect off the image") {
        const FieldModel lv = linear_v();
        HamPoint y{{0.0}, {1.0, 0.5}};
        const FiberPoint fp = invert_legendre_ls(lv, y);
        CHECK(fp.residual == doctest::Approx(0.5));
    }
}

TEST_CASE("implicit hamiltonian composes to the energy") {
    for (const FieldModel& m : {harmonic(), oscillator()}) {
        const HamFunction h = HamFunction::implicit_energy(m);
        for (const auto& x : random_lag_points(m, 20, 91)) {
            const HamPoint y = legendre(m, x);
            CHECK(std::fabs(h.value(y) - energy(m, x)) < 1e-10);
            const auto grad = h.gradient(y);
            const Bindings b = m.bind(x);
            // momentum derivatives recover the velocities, field derivatives
            // the negated lagrangian gradient
            for (int a = 0; a < m.k; ++a)
                for (int i = 0; i < m.n; ++i)
                    CHECK(grad[m.n + m.pflat(a, i)] ==
                          doctest::Approx(x.vel(i, a, m.k)).epsilon(1e-7));
            for (int i = 0; i < m.n; ++i)
                CHECK(grad[i] == doctest::Approx(-m.dL_dq[i].eval(b)).epsilon(1e-7));
        }
    }
}

TEST_CASE("pushforward of velocity-space solutions") {
    SUBCASE("harmonic model") {
        const FieldModel m = harmonic();
        const HamFunction h =
            HamFunction::explicit_expr(m, Expr::parse("0.5*(p1_1^2 + p2_1^2) + q1^2"));
        const KVectorField xl = sopde_field(m, SopdeAnsatz::Symmetric);
        for (const auto& xp : random_lag_points(m, 50, 101)) {
            const HamPoint y = legendre(m, xp);
            const Pushforward pf = pushforward_xh(m, xl, y);
            CHECK(pf.coeffs[0][0] == doctest::Approx(y.p[0]).epsilon(1e-9));
            CHECK(pf.coeffs[1][0] == doctest::Approx(y.p[1]).epsilon(1e-9));
            const double slot_sum = pf.coeffs[0][m.n + m.pflat(0, 0)] +
                                    pf.coeffs[1][m.n + m.pflat(1, 0)];
            CHECK(slot_sum == doctest::Approx(-2.0 * y.q[0]).epsilon(1e-9));
            CHECK(norm_inf(ham_geoeq_residual(h, pf.coeffs, y)) < 1e-10);
        }
    }

    SUBCASE("zero field pushes to zero") {
        const FieldModel m = harmonic();
        const KVectorField zero = KVectorField::zero(m, Space::Lagrangian);
        const HamPoint y{{0.1}, {0.4, -0.2}};
        const Pushforward pf = pushforward_xh(m, zero, y);
        for (int a = 0; a < m.k; ++a)
            CHECK(norm_inf(pf.coeffs[a]) == 0.0);
    }

    SUBCASE("k=1 oscillator gives the standard hamiltonian field") {
        const FieldModel osc = oscillator();
        const KVectorField xl = sopde_field(osc, SopdeAnsatz::Symmetric);
        const HamPoint y{{0.6}, {-0.8}};
        const Pushforward pf = pushforward_xh(osc, xl, y);
        CHECK(pf.coeffs[0][0] == doctest::Approx(-0.8));
        CHECK(pf.coeffs[0][1] == doctest::Approx(-0.6));
    }
}

TEST_CASE("fl-related solutions solve their equations together") {
    const FieldModel m = harmonic();
    const HamFunction h =
        HamFunction::explicit_expr(m, Expr::parse("0.5*(p1_1^2 + p2_1^2) + q1^2"));
    const KVectorField xl = sopde_field(m, SopdeAnsatz::Symmetric);
    for (const auto& xp : random_lag_points(m, 25, 111)) {
        const double lag_res = norm_inf(lag_geoeq_residual(m, xl, xp));
        const HamPoint y = legendre(m, xp);
        const Pushforward pf = pushforward_xh(m, xl, y);
        const double ham_res = norm_inf(ham_geoeq_residual(h, pf.coeffs, y));
        CHECK(lag_res < 1e-9);
        CHECK(ham_res < 1e-9);
    }
}

TEST_CASE("restricted residual on a constraint set") {
    const FieldModel m = half_vsq();
    const std::vector<Expr> constraints{Expr::parse("p2_1")};
    const HamFunction h0 = HamFunction::explicit_expr(m, Expr::parse("0.5*p1_1^2"));

    SUBCASE("the adapted field is tangentially exact") {
        const HamPoint y{{0.4}, {0.9, 0.0}};
        KCoeffs x0(m.k, std::vector<double>(m.ham_dim(), 0.0));
        x0[0][0] = y.p[0]; // (X_1)^q = p1_1
        const RestrictedResidual r = restricted_ham_residual(m, constraints, h0, x0, y);
        CHECK(r.jacobian_rank == 1);
        CHECK_FALSE(r.rank_deficient);
        CHECK(norm_inf(r.tangent_residual) < 1e-10);
    }

    SUBCASE("no constraints reduces to the plain residual") {
        const FieldModel osc = oscillator();
        const HamFunction h = HamFunction::explicit_expr(osc, Expr::parse("0.5*p1_1^2"));
        KCoeffs x0(1, std::vector<double>(osc.ham_dim(), 0.0));
        x0[0][0] = 0.7;
        const HamPoint y{{0.0}, {0.7}};
        const RestrictedResidual r = restricted_ham_residual(osc, {}, h, x0, y);
        const auto plain = ham_geoeq_residual(h, x0, y);
        // same residual up to the orthonormal change of frame
        CHECK(norm2(r.tangent_residual) == doctest::Approx(norm2(plain)).epsilon(1e-12));
    }

    SUBCASE("points off the constraint set are rejected") {
        const HamPoint y{{0.4}, {0.9, 0.3}};
        KCoeffs x0(m.k, std::vector<double>(m.ham_dim(), 0.0));
        CHECK_THROWS_AS(restricted_ham_residual(m, constraints, h0, x0, y), ModelError);
    }
}
