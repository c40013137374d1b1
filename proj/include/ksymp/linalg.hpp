#pragma once

#include <vector>

namespace ksymp {

/// Dense row-major matrix of doubles. Sized for the small systems this
/// toolkit assembles (dimensions rarely exceed a few dozen).
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

    double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }

    static Mat identity(int n);
    Mat transposed() const;
};

Mat matmul(const Mat& a, const Mat& b);
std::vector<double> matvec(const Mat& m, const std::vector<double>& x);
/// (M^T x)_j = sum_i x_i M_ij
std::vector<double> mat_tvec(const Mat& m, const std::vector<double>& x);

double norm_inf(const std::vector<double>& v);
double norm2(const std::vector<double>& v);
double dot(const std::vector<double>& a, const std::vector<double>& b);

/// Determinant via LU with partial pivoting.
double det(Mat m);

/// Solve the square system m x = b by LU with partial pivoting.
/// Throws NumericError on a numerically singular pivot.
std::vector<double> solve_square(Mat m, std::vector<double> b);

/// Thin singular value decomposition a = u diag(sigma) v^T computed by
/// one-sided Jacobi rotations. u is rows x p and v is cols x p with
/// p = min(rows, cols); sigma is descending.
struct Svd {
    Mat u;
    std::vector<double> sigma;
    Mat v;
};

Svd svd(const Mat& a);

struct LstsqResult {
    std::vector<double> x;
    int rank = 0;
    double residual = 0.0; // ||a x - b||_2
};

/// Minimum-norm least-squares solution with singular values below
/// rank_tol * sigma_max (floored at 1e-14) treated as zero.
LstsqResult lstsq_min_norm(const Mat& a, const std::vector<double>& b,
                           double rank_tol = 1e-10);

int numeric_rank(const Mat& a, double rank_tol = 1e-10);

/// Orthonormal basis of the nullspace of `a` as matrix columns
/// (cols x nullity). Works for any shape.
Mat nullspace(const Mat& a, double rank_tol = 1e-10);

} // namespace ksymp
