#include "ksymp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ksymp/errors.hpp"

namespace ksymp {

Mat Mat::identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i)
        m(i, i) = 1.0;
    return m;
}

Mat Mat::transposed() const {
    Mat t(cols, rows);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            t(j, i) = (*this)(i, j);
    return t;
}

Mat matmul(const Mat& a, const Mat& b) {
    Mat c(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i)
        for (int k = 0; k < a.cols; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0)
                continue;
            for (int j = 0; j < b.cols; ++j)
                c(i, j) += aik * b(k, j);
        }
    return c;
}

std::vector<double> matvec(const Mat& m, const std::vector<double>& x) {
    std::vector<double> y(m.rows, 0.0);
    for (int i = 0; i < m.rows; ++i) {
        double s = 0.0;
        for (int j = 0; j < m.cols; ++j)
            s += m(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

std::vector<double> mat_tvec(const Mat& m, const std::vector<double>& x) {
    std::vector<double> y(m.cols, 0.0);
    for (int i = 0; i < m.rows; ++i) {
        const double xi = x[i];
        if (xi == 0.0)
            continue;
        for (int j = 0; j < m.cols; ++j)
            y[j] += xi * m(i, j);
    }
    return y;
}

double norm_inf(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v)
        m = std::max(m, std::fabs(x));
    return m;
}

double norm2(const std::vector<double>& v) { return std::sqrt(dot(v, v)); }

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

double det(Mat m) {
    const int n = m.rows;
    double sign = 1.0;
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::fabs(m(r, col)) > std::fabs(m(pivot, col)))
                pivot = r;
        if (m(pivot, col) == 0.0)
            return 0.0;
        if (pivot != col) {
            for (int j = 0; j < n; ++j)
                std::swap(m(pivot, j), m(col, j));
            sign = -sign;
        }
        for (int r = col + 1; r < n; ++r) {
            const double f = m(r, col) / m(col, col);
            for (int j = col; j < n; ++j)
                m(r, j) -= f * m(col, j);
        }
    }
    double d = sign;
    for (int i = 0; i < n; ++i)
        d *= m(i, i);
    return d;
}

std::vector<double> solve_square(Mat m, std::vector<double> b) {
    const int n = m.rows;
    double scale = 0.0;
    for (double x : m.a)
        scale = std::max(scale, std::fabs(x));
    if (scale == 0.0)
        scale = 1.0;
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::fabs(m(r, col)) > std::fabs(m(pivot, col)))
                pivot = r;
        if (std::fabs(m(pivot, col)) < 1e-13 * scale)
            throw NumericError("singular linear system");
        if (pivot != col) {
            for (int j = 0; j < n; ++j)
                std::swap(m(pivot, j), m(col, j));
            std::swap(b[pivot], b[col]);
        }
        for (int r = col + 1; r < n; ++r) {
            const double f = m(r, col) / m(col, col);
            if (f == 0.0)
                continue;
            for (int j = col; j < n; ++j)
                m(r, j) -= f * m(col, j);
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int j = i + 1; j < n; ++j)
            s -= m(i, j) * x[j];
        x[i] = s / m(i, i);
    }
    return x;
}

namespace {

// One-sided Jacobi on a matrix with rows >= cols: orthogonalizes the columns
// of `w`, accumulating rotations into `v` (cols x cols).
void jacobi_orthogonalize(Mat& w, Mat& v) {
    const int n = w.cols;
    const int m = w.rows;
    v = Mat::identity(n);
    const int max_sweeps = 60;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double alpha = 0.0, beta = 0.0, gamma = 0.0;
                for (int i = 0; i < m; ++i) {
                    const double wp = w(i, p), wq = w(i, q);
                    alpha += wp * wp;
                    beta += wq * wq;
                    gamma += wp * wq;
                }
                if (std::fabs(gamma) <= 1e-30 ||
                    std::fabs(gamma) <= 1e-15 * std::sqrt(alpha * beta))
                    continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (int i = 0; i < m; ++i) {
                    const double wp = w(i, p), wq = w(i, q);
                    w(i, p) = c * wp - s * wq;
                    w(i, q) = s * wp + c * wq;
                }
                for (int i = 0; i < n; ++i) {
                    const double vp = v(i, p), vq = v(i, q);
                    v(i, p) = c * vp - s * vq;
                    v(i, q) = s * vp + c * vq;
                }
            }
        }
        if (!rotated)
            break;
    }
}

Svd svd_tall(const Mat& a) {
    Mat w = a;
    Mat v;
    jacobi_orthogonalize(w, v);
    const int n = a.cols;
    std::vector<double> sigma(n, 0.0);
    for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int i = 0; i < a.rows; ++i)
            s += w(i, j) * w(i, j);
        sigma[j] = std::sqrt(s);
    }
    // Sort descending, permuting columns of w and v.
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return sigma[i] > sigma[j]; });
    Svd out;
    out.u = Mat(a.rows, n);
    out.v = Mat(n, n);
    out.sigma.resize(n);
    for (int j = 0; j < n; ++j) {
        const int src = order[j];
        out.sigma[j] = sigma[src];
        const double inv = sigma[src] > 0.0 ? 1.0 / sigma[src] : 0.0;
        for (int i = 0; i < a.rows; ++i)
            out.u(i, j) = w(i, src) * inv;
        for (int i = 0; i < n; ++i)
            out.v(i, j) = v(i, src);
    }
    return out;
}

double rank_threshold(const std::vector<double>& sigma, double rank_tol) {
    const double smax = sigma.empty() ? 0.0 : sigma.front();
    return std::max(1e-14, rank_tol * smax);
}

} // namespace

Svd svd(const Mat& a) {
    if (a.rows >= a.cols)
        return svd_tall(a);
    Svd st = svd_tall(a.transposed());
    return Svd{std::move(st.v), std::move(st.sigma), std::move(st.u)};
}

LstsqResult lstsq_min_norm(const Mat& a, const std::vector<double>& b, double rank_tol) {
    LstsqResult r;
    r.x.assign(a.cols, 0.0);
    if (a.rows == 0) {
        return r; // no constraints: minimum norm is zero
    }
    Svd s = svd(a);
    const double thresh = rank_threshold(s.sigma, rank_tol);
    for (std::size_t j = 0; j < s.sigma.size(); ++j) {
        if (s.sigma[j] <= thresh)
            continue;
        ++r.rank;
        double uj_b = 0.0;
        for (int i = 0; i < s.u.rows; ++i)
            uj_b += s.u(i, static_cast<int>(j)) * b[i];
        const double coeff = uj_b / s.sigma[j];
        for (int i = 0; i < s.v.rows; ++i)
            r.x[i] += coeff * s.v(i, static_cast<int>(j));
    }
    std::vector<double> ax = matvec(a, r.x);
    for (int i = 0; i < a.rows; ++i)
        ax[i] -= b[i];
    r.residual = norm2(ax);
    return r;
}

int numeric_rank(const Mat& a, double rank_tol) {
    if (a.rows == 0 || a.cols == 0)
        return 0;
    Svd s = svd(a);
    const double thresh = rank_threshold(s.sigma, rank_tol);
    int rank = 0;
    for (double sig : s.sigma)
        if (sig > thresh)
            ++rank;
    return rank;
}

Mat nullspace(const Mat& a, double rank_tol) {
    const int n = a.cols;
    if (a.rows == 0) {
        return Mat::identity(n);
    }
    Svd s = svd(a);
    const double thresh = rank_threshold(s.sigma, rank_tol);

    if (a.rows >= a.cols) {
        // v is full n x n: kernel columns are those with tiny sigma.
        int nullity = 0;
        for (double sig : s.sigma)
            if (sig <= thresh)
                ++nullity;
        Mat out(n, nullity);
        int col = 0;
        for (std::size_t j = 0; j < s.sigma.size(); ++j) {
            if (s.sigma[j] > thresh)
                continue;
            for (int i = 0; i < n; ++i)
                out(i, col) = s.v(i, static_cast<int>(j));
            ++col;
        }
        return out;
    }

    // Wide case: v is thin (n x rows); complete the row-space basis to an
    // orthonormal basis of R^n by pivoted Gram-Schmidt over unit vectors.
    std::vector<std::vector<double>> basis;
    for (std::size_t j = 0; j < s.sigma.size(); ++j) {
        if (s.sigma[j] <= thresh)
            continue;
        std::vector<double> col(n);
        for (int i = 0; i < n; ++i)
            col[i] = s.v(i, static_cast<int>(j));
        basis.push_back(std::move(col));
    }
    const int rank = static_cast<int>(basis.size());
    std::vector<std::vector<double>> null_basis;
    while (static_cast<int>(null_basis.size()) < n - rank) {
        int best = -1;
        double best_norm = 0.0;
        std::vector<double> best_vec;
        for (int cand = 0; cand < n; ++cand) {
            std::vector<double> r(n, 0.0);
            r[cand] = 1.0;
            for (const auto& q : basis) {
                const double proj = dot(q, r);
                for (int i = 0; i < n; ++i)
                    r[i] -= proj * q[i];
            }
            for (const auto& q : null_basis) {
                const double proj = dot(q, r);
                for (int i = 0; i < n; ++i)
                    r[i] -= proj * q[i];
            }
            const double nr = norm2(r);
            if (nr > best_norm) {
                best_norm = nr;
                best = cand;
                best_vec = std::move(r);
            }
        }
        if (best < 0 || best_norm < 1e-12)
            break;
        for (double& x : best_vec)
            x /= best_norm;
        null_basis.push_back(std::move(best_vec));
    }
    Mat out(n, static_cast<int>(null_basis.size()));
    for (int j = 0; j < out.cols; ++j)
        for (int i = 0; i < n; ++i)
            out(i, j) = null_basis[j][i];
    return out;
}

} // namespace ksymp
