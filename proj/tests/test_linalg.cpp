#include <doctest.h>

#include <cmath>

#include "ksymp/errors.hpp"
#include "ksymp/linalg.hpp"
#include "ksymp/model.hpp"

using namespace ksymp;

namespace {

Mat random_mat(Rng& rng, int r, int c) {
    Mat m(r, c);
    for (double& x : m.a)
        x = rng.uniform(-2.0, 2.0);
    return m;
}

double max_abs_diff(const Mat& a, const Mat& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.a.size(); ++i)
        worst = std::max(worst, std::fabs(a.a[i] - b.a[i]));
    return worst;
}

} // namespace

TEST_CASE("determinant") {
    Mat m(2, 2);
    m(0, 0) = 1;
    m(0, 1) = 2;
    m(1, 0) = 3;
    m(1, 1) = 4;
    CHECK(det(m) == doctest::Approx(-2.0));
    CHECK(det(Mat::identity(5)) == doctest::Approx(1.0));

    Mat z(3, 3); // rank 1
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            z(i, j) = (i + 1) * (j + 1);
    CHECK(det(z) == doctest::Approx(0.0));
}

TEST_CASE("square solve") {
    Mat m(2, 2);
    m(0, 0) = 2;
    m(0, 1) = 1;
    m(1, 0) = 1;
    m(1, 1) = 3;
    const auto x = solve_square(m, {5.0, 10.0});
    CHECK(x[0] == doctest::Approx(1.0));
    CHECK(x[1] == doctest::Approx(3.0));

    Mat s(2, 2);
    s(0, 0) = 1;
    s(0, 1) = 2;
    s(1, 0) = 2;
    s(1, 1) = 4;
    CHECK_THROWS_AS(solve_square(s, {1.0, 1.0}), NumericError);
}

TEST_CASE("svd reconstructs and is orthonormal") {
    Rng rng(5);
    for (const auto [r, c] : {std::pair{4, 4}, {6, 3}, {3, 6}, {5, 2}}) {
        const Mat a = random_mat(rng, r, c);
        const Svd s = svd(a);
        // u diag(sigma) v^T == a
        Mat us(s.u.rows, static_cast<int>(s.sigma.size()));
        for (int i = 0; i < us.rows; ++i)
            for (int j = 0; j < us.cols; ++j)
                us(i, j) = s.u(i, j) * s.sigma[j];
        CHECK(max_abs_diff(matmul(us, s.v.transposed()), a) < 1e-10);
        // columns orthonormal
        const Mat utu = matmul(s.u.transposed(), s.u);
        const Mat vtv = matmul(s.v.transposed(), s.v);
        CHECK(max_abs_diff(utu, Mat::identity(utu.rows)) < 1e-10);
        CHECK(max_abs_diff(vtv, Mat::identity(vtv.rows)) < 1e-10);
        // sigma descending
        for (std::size_t i = 1; i < s.sigma.size(); ++i)
            CHECK(s.sigma[i - 1] >= s.sigma[i]);
    }
}

TEST_CASE("minimum-norm least squares") {
    // Underdetermined consistent system: x + y = 2 has min-norm solution (1,1).
    Mat a(1, 2);
    a(0, 0) = 1;
    a(0, 1) = 1;
    const LstsqResult r = lstsq_min_norm(a, {2.0});
    CHECK(r.rank == 1);
    CHECK(r.residual == doctest::Approx(0.0));
    CHECK(r.x[0] == doctest::Approx(1.0));
    CHECK(r.x[1] == doctest::Approx(1.0));

    // Inconsistent system reports its defect.
    Mat b(2, 1);
    b(0, 0) = 1;
    b(1, 0) = 1;
    const LstsqResult r2 = lstsq_min_norm(b, {0.0, 2.0});
    CHECK(r2.x[0] == doctest::Approx(1.0));
    CHECK(r2.residual == doctest::Approx(std::sqrt(2.0)));

    // Zero matrix: minimum norm is zero, rank 0.
    Mat z(2, 3);
    const LstsqResult r3 = lstsq_min_norm(z, {1.0, 1.0});
    CHECK(r3.rank == 0);
    CHECK(norm_inf(r3.x) == doctest::Approx(0.0));
}

TEST_CASE("nullspace bases") {
    // Wide matrix [1 1 0]: nullspace dimension 2, orthonormal, orthogonal to rows.
    Mat a(1, 3);
    a(0, 0) = 1;
    a(0, 1) = 1;
    const Mat ns = nullspace(a);
    REQUIRE(ns.cols == 2);
    for (int j = 0; j < ns.cols; ++j) {
        double row_dot = 0.0, norm = 0.0;
        for (int i = 0; i < 3; ++i) {
            row_dot += a(0, i) * ns(i, j);
            norm += ns(i, j) * ns(i, j);
        }
        CHECK(std::fabs(row_dot) < 1e-12);
        CHECK(norm == doctest::Approx(1.0));
    }

    // Tall full-rank matrix has trivial nullspace.
    Rng rng(9);
    const Mat t = random_mat(rng, 5, 3);
    CHECK(nullspace(t).cols == 0);

    // Empty constraint set spans everything.
    Mat none(0, 4);
    CHECK(nullspace(none).cols == 4);
}

TEST_CASE("numeric rank") {
    Mat m(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            m(i, j) = (i + 1) * (j + 1);
    CHECK(numeric_rank(m) == 1);
    CHECK(numeric_rank(Mat::identity(4)) == 4);
}
