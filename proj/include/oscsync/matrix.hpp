#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace oscsync {

using Vec = std::vector<double>;
using Complex = std::complex<double>;
using ComplexVec = std::vector<Complex>;

/// Dense row-major matrix of doubles. All binary operations check
/// dimensions and throw std::invalid_argument on mismatch.
class Mat {
public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    Mat(std::initializer_list<std::initializer_list<double>> init)
        : rows_(init.size()), cols_(init.size() ? init.begin()->size() : 0) {
        data_.reserve(rows_ * cols_);
        for (const auto& row : init) {
            if (row.size() != cols_)
                throw std::invalid_argument("Mat: ragged initializer list");
            data_.insert(data_.end(), row.begin(), row.end());
        }
    }

    static Mat identity(std::size_t n) {
        Mat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }
    bool square() const { return rows_ == cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    const std::vector<double>& data() const { return data_; }

    Mat transpose() const {
        Mat t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    Mat block(std::size_t row0, std::size_t col0, std::size_t nrows, std::size_t ncols) const {
        if (row0 + nrows > rows_ || col0 + ncols > cols_)
            throw std::invalid_argument("Mat::block: out of range");
        Mat b(nrows, ncols);
        for (std::size_t i = 0; i < nrows; ++i)
            for (std::size_t j = 0; j < ncols; ++j) b(i, j) = (*this)(row0 + i, col0 + j);
        return b;
    }

    void set_block(std::size_t row0, std::size_t col0, const Mat& b) {
        if (row0 + b.rows() > rows_ || col0 + b.cols() > cols_)
            throw std::invalid_argument("Mat::set_block: out of range");
        for (std::size_t i = 0; i < b.rows(); ++i)
            for (std::size_t j = 0; j < b.cols(); ++j) (*this)(row0 + i, col0 + j) = b(i, j);
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : data_) m = std::max(m, std::abs(v));
        return m;
    }

    double max_abs_row(std::size_t i) const {
        double m = 0.0;
        for (std::size_t j = 0; j < cols_; ++j) m = std::max(m, std::abs((*this)(i, j)));
        return m;
    }

    double max_abs_col(std::size_t j) const {
        double m = 0.0;
        for (std::size_t i = 0; i < rows_; ++i) m = std::max(m, std::abs((*this)(i, j)));
        return m;
    }

    double trace() const {
        double t = 0.0;
        for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
        return t;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline Mat operator+(const Mat& a, const Mat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("Mat+: dimension mismatch");
    Mat c(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) + b(i, j);
    return c;
}

inline Mat operator-(const Mat& a, const Mat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("Mat-: dimension mismatch");
    Mat c(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) - b(i, j);
    return c;
}

inline Mat operator*(const Mat& a, const Mat& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("Mat*Mat: dimension mismatch");
    Mat c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

inline Mat operator*(double s, const Mat& a) {
    Mat c(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = s * a(i, j);
    return c;
}

inline Mat operator*(const Mat& a, double s) { return s * a; }

inline Mat operator-(const Mat& a) { return -1.0 * a; }

inline Vec operator*(const Mat& a, const Vec& x) {
    if (a.cols() != x.size()) throw std::invalid_argument("Mat*Vec: dimension mismatch");
    Vec y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

inline double max_abs_diff(const Mat& a, const Mat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("max_abs_diff: dimension mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
    return m;
}

// --- small vector helpers -------------------------------------------------

inline void check_same_size(const Vec& a, const Vec& b, const char* what) {
    if (a.size() != b.size()) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

inline double dot(const Vec& a, const Vec& b) {
    check_same_size(a, b, "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vec& v) { return std::sqrt(dot(v, v)); }

inline double norm_inf(const Vec& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline Vec vec_add(const Vec& a, const Vec& b) {
    check_same_size(a, b, "vec_add");
    Vec c(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
    return c;
}

inline Vec vec_sub(const Vec& a, const Vec& b) {
    check_same_size(a, b, "vec_sub");
    Vec c(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] - b[i];
    return c;
}

inline Vec vec_scale(double s, const Vec& a) {
    Vec c(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) c[i] = s * a[i];
    return c;
}

/// y += s * x
inline void vec_axpy(double s, const Vec& x, Vec& y) {
    check_same_size(x, y, "vec_axpy");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += s * x[i];
}

/// x' A x
inline double quadratic_form(const Vec& x, const Mat& a) {
    return dot(x, a * x);
}

// --- LU factorization (partial pivoting) ----------------------------------

class SingularMatrixError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// PA = LU with row pivoting; solve() and determinant() reuse the factors.
class LuDecomposition {
public:
    static LuDecomposition compute(const Mat& a) {
        if (!a.square()) throw std::invalid_argument("LuDecomposition: matrix not square");
        LuDecomposition d;
        d.lu_ = a;
        const std::size_t n = a.rows();
        d.piv_.resize(n);
        d.parity_ = 1.0;
        for (std::size_t k = 0; k < n; ++k) {
            std::size_t p = k;
            double best = std::abs(d.lu_(k, k));
            for (std::size_t i = k + 1; i < n; ++i) {
                const double v = std::abs(d.lu_(i, k));
                if (v > best) { best = v; p = i; }
            }
            if (best == 0.0) throw SingularMatrixError("LuDecomposition: matrix is singular");
            d.piv_[k] = p;
            if (p != k) {
                for (std::size_t j = 0; j < n; ++j) std::swap(d.lu_(k, j), d.lu_(p, j));
                d.parity_ = -d.parity_;
            }
            const double pivot = d.lu_(k, k);
            for (std::size_t i = k + 1; i < n; ++i) {
                const double f = d.lu_(i, k) / pivot;
                d.lu_(i, k) = f;
                for (std::size_t j = k + 1; j < n; ++j) d.lu_(i, j) -= f * d.lu_(k, j);
            }
        }
        return d;
    }

    Vec solve(Vec b) const {
        const std::size_t n = lu_.rows();
        if (b.size() != n) throw std::invalid_argument("LuDecomposition::solve: dimension mismatch");
        for (std::size_t k = 0; k < n; ++k) std::swap(b[k], b[piv_[k]]);
        for (std::size_t i = 1; i < n; ++i)
            for (std::size_t j = 0; j < i; ++j) b[i] -= lu_(i, j) * b[j];
        for (std::size_t ii = n; ii-- > 0;) {
            for (std::size_t j = ii + 1; j < n; ++j) b[ii] -= lu_(ii, j) * b[j];
            b[ii] /= lu_(ii, ii);
        }
        return b;
    }

    double determinant() const {
        double d = parity_;
        for (std::size_t i = 0; i < lu_.rows(); ++i) d *= lu_(i, i);
        return d;
    }

private:
    Mat lu_;
    std::vector<std::size_t> piv_;
    double parity_ = 1.0;
};

inline Vec solve_linear(const Mat& a, const Vec& b) {
    return LuDecomposition::compute(a).solve(b);
}

inline double determinant(const Mat& a) {
    try {
        return LuDecomposition::compute(a).determinant();
    } catch (const SingularMatrixError&) {
        return 0.0;
    }
}

// --- Cholesky --------------------------------------------------------------

/// Lower-triangular factor of a symmetric positive definite matrix, or
/// nullopt if a nonpositive pivot shows the matrix is not PD. Only the
/// lower triangle of the input is read.
inline std::optional<Mat> cholesky_lower(const Mat& a) {
    if (!a.square()) throw std::invalid_argument("cholesky_lower: matrix not square");
    const std::size_t n = a.rows();
    Mat l(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            if (i == j) {
                if (s <= 0.0 || !std::isfinite(s)) return std::nullopt;
                l(i, i) = std::sqrt(s);
            } else {
                l(i, j) = s / l(j, j);
            }
        }
    }
    return l;
}

/// Solve L L' x = b given the lower Cholesky factor.
inline Vec cholesky_solve(const Mat& l, Vec b) {
    const std::size_t n = l.rows();
    if (b.size() != n) throw std::invalid_argument("cholesky_solve: dimension mismatch");
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) b[i] -= l(i, j) * b[j];
        b[i] /= l(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
        for (std::size_t j = ii + 1; j < n; ++j) b[ii] -= l(j, ii) * b[j];
        b[ii] /= l(ii, ii);
    }
    return b;
}

inline bool is_symmetric(const Mat& a, double tol) {
    if (!a.square()) return false;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = i + 1; j < a.cols(); ++j)
            if (std::abs(a(i, j) - a(j, i)) > tol) return false;
    return true;
}

// --- dense nonsymmetric eigenvalues ----------------------------------------

class EigenConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

/// Diagonal similarity scaling by powers of two (exact in floating point)
/// until every row/column norm pair is roughly even; cuts the error of the
/// QR iteration on badly scaled matrices. Eigenvalues are unchanged.
inline void balance_inplace(Mat& a) {
    const std::size_t n = a.rows();
    const double radix = 2.0;
    const double radix_sq = radix * radix;
    bool converged = false;
    while (!converged) {
        converged = true;
        for (std::size_t i = 0; i < n; ++i) {
            double col = 0.0, row = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                col += std::abs(a(j, i));
                row += std::abs(a(i, j));
            }
            if (col == 0.0 || row == 0.0) continue;
            const double total = col + row;
            double factor = 1.0;
            double g = row / radix;
            while (col < g) {
                factor *= radix;
                col *= radix_sq;
            }
            g = row * radix;
            while (col > g) {
                factor /= radix;
                col /= radix_sq;
            }
            if ((col + row) / factor < 0.95 * total) {
                converged = false;
                const double inv = 1.0 / factor;
                for (std::size_t j = 0; j < n; ++j) a(i, j) *= inv;
                for (std::size_t j = 0; j < n; ++j) a(j, i) *= factor;
            }
        }
    }
}

/// In-place Householder reduction to upper Hessenberg form.
inline void reduce_to_hessenberg(Mat& a) {
    const std::size_t n = a.rows();
    if (n < 3) return;
    std::vector<double> v;
    for (std::size_t k = 0; k + 2 < n; ++k) {
        const std::size_t len = n - k - 1;
        double scale = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) scale = std::max(scale, std::abs(a(i, k)));
        if (scale == 0.0) continue;
        v.assign(len, 0.0);
        double norm_sq = 0.0;
        for (std::size_t i = 0; i < len; ++i) {
            v[i] = a(k + 1 + i, k) / scale;
            norm_sq += v[i] * v[i];
        }
        const double alpha = (v[0] >= 0.0 ? -1.0 : 1.0) * std::sqrt(norm_sq);
        v[0] -= alpha;
        double vtv = 0.0;
        for (double vi : v) vtv += vi * vi;
        if (vtv == 0.0) continue;
        const double beta = 2.0 / vtv;
        // A <- (I - beta v v') A
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < len; ++i) s += v[i] * a(k + 1 + i, j);
            s *= beta;
            for (std::size_t i = 0; i < len; ++i) a(k + 1 + i, j) -= s * v[i];
        }
        // A <- A (I - beta v v')
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < len; ++j) s += a(i, k + 1 + j) * v[j];
            s *= beta;
            for (std::size_t j = 0; j < len; ++j) a(i, k + 1 + j) -= s * v[j];
        }
        a(k + 1, k) = alpha * scale;
        for (std::size_t i = k + 2; i < n; ++i) a(i, k) = 0.0;
    }
}

struct ComplexGivens {
    double c;
    Complex s;
};

/// Rotation with G [a; b] = [r; 0], G = [[c, s], [-conj(s), c]], c real.
inline ComplexGivens make_givens(Complex a, Complex b) {
    if (b == Complex(0.0, 0.0)) return {1.0, Complex(0.0, 0.0)};
    if (a == Complex(0.0, 0.0)) return {0.0, Complex(1.0, 0.0)};
    const double abs_a = std::abs(a);
    const double r = std::hypot(abs_a, std::abs(b));
    return {abs_a / r, (a / abs_a) * std::conj(b) / r};
}

inline std::pair<Complex, Complex> roots_of_2x2(Complex a, Complex b, Complex c, Complex d) {
    const Complex mean = 0.5 * (a + d);
    const Complex det = a * d - b * c;
    const Complex disc = std::sqrt(mean * mean - det);
    Complex r1 = mean + disc;
    Complex r2 = mean - disc;
    if (std::abs(r2) > std::abs(r1)) std::swap(r1, r2);
    // recompute the small root from the determinant to dodge cancellation
    if (std::abs(r1) > 0.0) r2 = det / r1;
    return {r1, r2};
}

/// Shifted QR iteration (complex Givens form) on an upper Hessenberg
/// matrix stored row-major in h. Deflates from the bottom; trailing 2x2
/// blocks are solved directly. Throws after iter_cap sweeps.
inline ComplexVec hessenberg_eigenvalues(std::vector<Complex>& h, int n, std::size_t iter_cap) {
    auto H = [&](int i, int j) -> Complex& { return h[static_cast<std::size_t>(i) * n + j]; };
    ComplexVec eig(static_cast<std::size_t>(n));
    if (n == 0) return eig;
    const double eps = std::numeric_limits<double>::epsilon();
    double anorm = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = std::max(0, i - 1); j < n; ++j) anorm += std::abs(H(i, j));

    int hi = n - 1;
    std::size_t sweeps = 0;
    int since_deflation = 0;
    while (hi >= 0) {
        // scan for a negligible subdiagonal entry above hi
        int lo = hi;
        while (lo > 0) {
            double s = std::abs(H(lo - 1, lo - 1)) + std::abs(H(lo, lo));
            if (s == 0.0) s = anorm;
            if (std::abs(H(lo, lo - 1)) <= eps * s) {
                H(lo, lo - 1) = Complex(0.0, 0.0);
                break;
            }
            --lo;
        }
        if (lo == hi) {
            eig[hi] = H(hi, hi);
            --hi;
            since_deflation = 0;
            continue;
        }
        if (lo == hi - 1) {
            const auto [r1, r2] = roots_of_2x2(H(lo, lo), H(lo, hi), H(hi, lo), H(hi, hi));
            eig[hi] = r1;
            eig[lo] = r2;
            hi = lo - 1;
            since_deflation = 0;
            continue;
        }
        if (sweeps >= iter_cap)
            throw EigenConvergenceError("eigenvalues: QR iteration exceeded " +
                                        std::to_string(iter_cap) + " sweeps");
        ++sweeps;
        ++since_deflation;

        Complex shift;
        if (since_deflation % 10 == 0) {
            // stagnation: deterministic exceptional shift
            shift = H(hi, hi) + 0.75 * std::abs(H(hi, hi - 1));
        } else {
            const Complex d = H(hi, hi);
            const auto [r1, r2] = roots_of_2x2(H(hi - 1, hi - 1), H(hi - 1, hi), H(hi, hi - 1), d);
            shift = (std::abs(r1 - d) < std::abs(r2 - d)) ? r1 : r2;
        }

        // implicit single-shift sweep on the active block [lo, hi]
        Complex x = H(lo, lo) - shift;
        Complex y = H(lo + 1, lo);
        for (int k = lo; k < hi; ++k) {
            const ComplexGivens g = make_givens(x, y);
            const Complex cs = std::conj(g.s);
            for (int j = (k > lo ? k - 1 : lo); j <= hi; ++j) {
                const Complex t1 = H(k, j), t2 = H(k + 1, j);
                H(k, j) = g.c * t1 + g.s * t2;
                H(k + 1, j) = -cs * t1 + g.c * t2;
            }
            const int rmax = std::min(hi, k + 2);
            for (int i = lo; i <= rmax; ++i) {
                const Complex t1 = H(i, k), t2 = H(i, k + 1);
                H(i, k) = g.c * t1 + cs * t2;
                H(i, k + 1) = -g.s * t1 + g.c * t2;
            }
            if (k + 1 < hi) {
                x = H(k + 1, k);
                y = H(k + 2, k);
            }
        }
    }
    return eig;
}

}  // namespace detail

/// All eigenvalues of a real square matrix, via balancing, Hessenberg
/// reduction and shifted QR. Order is unspecified. The sweep budget is
/// iter_cap_per_dim * dim; exceeding it raises EigenConvergenceError.
inline ComplexVec eigenvalues(const Mat& a, std::size_t iter_cap_per_dim = 100) {
    if (!a.square()) throw std::invalid_argument("eigenvalues: matrix not square");
    const std::size_t n = a.rows();
    if (n == 0) return {};
    Mat h = a;
    detail::balance_inplace(h);
    detail::reduce_to_hessenberg(h);
    std::vector<Complex> hc(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) hc[i * n + j] = Complex(h(i, j), 0.0);
    return detail::hessenberg_eigenvalues(hc, static_cast<int>(n), iter_cap_per_dim * n);
}

// --- printing ---------------------------------------------------------------

inline std::string format_full(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string to_pretty_string(const Mat& a, int width = 12) {
    std::ostringstream os;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        os << (i == 0 ? "[" : " ");
        for (std::size_t j = 0; j < a.cols(); ++j) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%*.6g", width, a(i, j));
            os << buf;
        }
        os << (i + 1 == a.rows() ? " ]" : "") << '\n';
    }
    return os.str();
}

inline std::string to_csv_string(const Mat& a) {
    std::ostringstream os;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            if (j) os << ',';
            os << format_full(a(i, j));
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace oscsync
