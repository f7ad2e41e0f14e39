#include "mirrorforge/numeric.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <sstream>

namespace mf {

std::string to_string(const Rational& r) {
    std::ostringstream os;
    os << r;
    return os.str();
}

std::string to_string(const QC& z) {
    std::ostringstream os;
    os << to_string(z.re);
    if (z.im != 0) os << (z.im > 0 ? "+" : "") << to_string(z.im) << "i";
    return os.str();
}

IntMat int_mat(std::size_t rows, std::size_t cols) {
    return IntMat(rows, IntVec(cols, Int(0)));
}

IntMat identity_mat(std::size_t n) {
    IntMat m = int_mat(n, n);
    for (std::size_t i = 0; i < n; ++i) m[i][i] = 1;
    return m;
}

IntMat mat_mul(const IntMat& a, const IntMat& b) {
    std::size_t n = a.size(), k = b.size(), m = b.empty() ? 0 : b[0].size();
    IntMat r = int_mat(n, m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t l = 0; l < k; ++l)
            if (a[i][l] != 0)
                for (std::size_t j = 0; j < m; ++j) r[i][j] += a[i][l] * b[l][j];
    return r;
}

IntVec mat_apply(const IntMat& a, const IntVec& v) {
    IntVec r(a.size(), Int(0));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j) r[i] += a[i][j] * v[j];
    return r;
}

Int dot(const IntVec& a, const IntVec& b) {
    Int s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

Int det(const IntMat& a) {
    // Bareiss fraction-free elimination.
    std::size_t n = a.size();
    if (n == 0) return 1;
    IntMat m = a;
    Int prev = 1;
    int sign = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (m[k][k] == 0) {
            std::size_t p = k + 1;
            while (p < n && m[p][k] == 0) ++p;
            if (p == n) return 0;
            std::swap(m[k], m[p]);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i)
            for (std::size_t j = k + 1; j < n; ++j)
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
        prev = m[k][k];
    }
    return sign > 0 ? m[n - 1][n - 1] : -m[n - 1][n - 1];
}

namespace {

// Column-style Hermite reduction: returns (H, U) with a * U = H and U unimodular.
void hermite_columns(const IntMat& a, IntMat& h, IntMat& u) {
    std::size_t rows = a.size(), cols = a.empty() ? 0 : a[0].size();
    h = a;
    u = identity_mat(cols);
    std::size_t pivot_col = 0;
    for (std::size_t r = 0; r < rows && pivot_col < cols; ++r) {
        // gcd-reduce columns pivot_col..cols-1 on row r
        while (true) {
            std::size_t nz = cols;
            for (std::size_t c = pivot_col; c < cols; ++c)
                if (h[r][c] != 0 && (nz == cols || boost::multiprecision::abs(h[r][c]) <
                                                       boost::multiprecision::abs(h[r][nz]))) {
                    nz = c;
                }
            if (nz == cols) break;  // row r all zero in active block
            if (nz != pivot_col) {
                for (std::size_t i = 0; i < rows; ++i) std::swap(h[i][nz], h[i][pivot_col]);
                for (std::size_t i = 0; i < cols; ++i) std::swap(u[i][nz], u[i][pivot_col]);
            }
            bool reduced = true;
            for (std::size_t c = pivot_col + 1; c < cols; ++c) {
                if (h[r][c] == 0) continue;
                Int q = h[r][c] / h[r][pivot_col];
                if (q != 0) {
                    for (std::size_t i = 0; i < rows; ++i) h[i][c] -= q * h[i][pivot_col];
                    for (std::size_t i = 0; i < cols; ++i) u[i][c] -= q * u[i][pivot_col];
                }
                if (h[r][c] != 0) reduced = false;
            }
            if (reduced) break;
        }
        if (h[r][pivot_col] != 0) ++pivot_col;
    }
}

}  // namespace

IntMat integer_kernel(const IntMat& a) {
    std::size_t cols = a.empty() ? 0 : a[0].size();
    IntMat h, u;
    hermite_columns(a, h, u);
    // kernel = columns of u whose h-column is zero
    IntMat ker;
    for (std::size_t c = 0; c < cols; ++c) {
        bool zero = true;
        for (std::size_t r = 0; r < a.size(); ++r)
            if (h[r][c] != 0) {
                zero = false;
                break;
            }
        if (zero) {
            IntVec col(cols);
            for (std::size_t i = 0; i < cols; ++i) col[i] = u[i][c];
            ker.push_back(std::move(col));
        }
    }
    return ker;  // each entry is one kernel basis vector
}

std::optional<IntVec> solve_integer(const IntMat& a, const IntVec& b) {
    std::size_t rows = a.size(), cols = a.empty() ? 0 : a[0].size();
    IntMat h, u;
    hermite_columns(a, h, u);
    IntVec x(cols, Int(0));
    IntVec rem = b;
    // h is lower-staircase by construction; forward substitute column by column.
    std::size_t c = 0;
    for (std::size_t r = 0; r < rows && c < cols; ++r) {
        if (h[r][c] == 0) continue;
        if (rem[r] % h[r][c] != 0) return std::nullopt;
        Int q = rem[r] / h[r][c];
        for (std::size_t rr = 0; rr < rows; ++rr) rem[rr] -= q * h[rr][c];
        x[c] = q;
        ++c;
    }
    for (std::size_t r = 0; r < rows; ++r)
        if (rem[r] != 0) return std::nullopt;
    // translate back through u
    IntVec sol(cols, Int(0));
    for (std::size_t i = 0; i < cols; ++i)
        for (std::size_t j = 0; j < cols; ++j) sol[i] += u[i][j] * x[j];
    return sol;
}

std::array<int, 3> signature(const IntMat& sym) {
    // Congruence diagonalization over the rationals.
    std::size_t n = sym.size();
    std::vector<std::vector<Rational>> m(n, std::vector<Rational>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m[i][j] = Rational(sym[i][j]);
    int pos = 0, neg = 0, zero = 0;
    std::size_t k = 0;
    while (k < n) {
        if (m[k][k] == 0) {
            std::size_t p = k;
            for (std::size_t i = k; i < n; ++i)
                if (m[i][i] != 0) {
                    p = i;
                    break;
                }
            if (m[p][p] == 0) {
                // find off-diagonal nonzero and mix
                std::size_t a = k, b = k;
                bool found = false;
                for (std::size_t i = k; i < n && !found; ++i)
                    for (std::size_t j = i + 1; j < n && !found; ++j)
                        if (m[i][j] != 0) {
                            a = i;
                            b = j;
                            found = true;
                        }
                if (!found) {
                    zero += int(n - k);
                    break;
                }
                // row/col a += row/col b
                for (std::size_t j = 0; j < n; ++j) m[a][j] += m[b][j];
                for (std::size_t i = 0; i < n; ++i) m[i][a] += m[i][b];
                continue;
            }
            std::swap(m[k], m[p]);
            for (std::size_t i = 0; i < n; ++i) std::swap(m[i][k], m[i][p]);
        }
        Rational piv = m[k][k];
        if (piv > 0)
            ++pos;
        else
            ++neg;
        for (std::size_t i = k + 1; i < n; ++i) {
            if (m[i][k] == 0) continue;
            Rational f = m[i][k] / piv;
            for (std::size_t j = 0; j < n; ++j) m[i][j] -= f * m[k][j];
            for (std::size_t j = 0; j < n; ++j) m[j][i] -= f * m[j][k];
        }
        ++k;
    }
    return {pos, neg, zero};
}

Mat2 Mat2::inverse() const {
    Int d = det();
    if (d != 1 && d != -1) throw std::domain_error("Mat2::inverse: determinant not ±1");
    Mat2 r = Mat2::of(m[1][1], -m[0][1], -m[1][0], m[0][0]);
    if (d == -1)
        for (auto& row : r.m)
            for (auto& e : row) e = -e;
    return r;
}

Int shear_divisibility(const Mat2& m) {
    Int g = 0;
    Mat2 d = m;
    d(0, 0) -= 1;
    d(1, 1) -= 1;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) g = boost::multiprecision::gcd(g, d(i, j));
    return g;
}

bool is_parabolic(const Mat2& m) {
    if (m.trace() != 2) return false;
    if (m == Mat2::id()) return false;
    Mat2 d = m;
    d(0, 0) -= 1;
    d(1, 1) -= 1;
    Mat2 sq = d * d;
    return sq(0, 0) == 0 && sq(0, 1) == 0 && sq(1, 0) == 0 && sq(1, 1) == 0;
}

std::string to_string(const Mat2& m) {
    std::ostringstream os;
    os << "[[" << m(0, 0) << "," << m(0, 1) << "],[" << m(1, 0) << "," << m(1, 1) << "]]";
    return os.str();
}

}  // namespace mf
