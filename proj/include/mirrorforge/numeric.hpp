#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mf {

using Int = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }
inline double to_double(const Int& n) { return n.convert_to<double>(); }

// Exact complex number with rational real/imaginary parts.
struct QC {
    Rational re{0};
    Rational im{0};

    QC() = default;
    QC(Rational r) : re(std::move(r)) {}
    QC(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}
    QC(long r) : re(r) {}
    QC(long r, long i) : re(r), im(i) {}

    bool is_zero() const { return re == 0 && im == 0; }

    friend QC operator+(const QC& a, const QC& b) { return {a.re + b.re, a.im + b.im}; }
    friend QC operator-(const QC& a, const QC& b) { return {a.re - b.re, a.im - b.im}; }
    friend QC operator-(const QC& a) { return {-a.re, -a.im}; }
    friend QC operator*(const QC& a, const QC& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend QC operator/(const QC& a, const QC& b) {
        Rational n = b.re * b.re + b.im * b.im;
        if (n == 0) throw std::domain_error("QC: division by zero");
        return {(a.re * b.re + a.im * b.im) / n, (a.im * b.re - a.re * b.im) / n};
    }
    friend bool operator==(const QC& a, const QC& b) { return a.re == b.re && a.im == b.im; }
    friend bool operator!=(const QC& a, const QC& b) { return !(a == b); }

    QC& operator+=(const QC& o) { return *this = *this + o; }
    QC& operator-=(const QC& o) { return *this = *this - o; }
    QC& operator*=(const QC& o) { return *this = *this * o; }

    std::complex<double> approx() const { return {to_double(re), to_double(im)}; }
};

inline QC qc_pow(QC base, long e) {
    if (e < 0) return QC{1} / qc_pow(base, -e);
    QC out{1};
    while (e > 0) {
        if (e & 1) out *= base;
        base *= base;
        e >>= 1;
    }
    return out;
}

std::string to_string(const Rational& r);
std::string to_string(const QC& z);

// ---------------------------------------------------------------------------
// Small exact linear algebra used by the lattice modules.
// ---------------------------------------------------------------------------

using IntVec = std::vector<Int>;
using IntMat = std::vector<IntVec>;  // row major

IntMat int_mat(std::size_t rows, std::size_t cols);
IntMat identity_mat(std::size_t n);
IntMat mat_mul(const IntMat& a, const IntMat& b);
IntVec mat_apply(const IntMat& a, const IntVec& v);
Int dot(const IntVec& a, const IntVec& b);
Int det(const IntMat& a);  // exact, Bareiss

// Basis of the integer kernel of `a` (columns are the unknowns).
IntMat integer_kernel(const IntMat& a);

// Solve a*x = b over the integers; returns nullopt if no integral solution.
std::optional<IntVec> solve_integer(const IntMat& a, const IntVec& b);

// Signature (n_plus, n_minus, n_zero) of a symmetric matrix, exact.
std::array<int, 3> signature(const IntMat& sym);

// 2x2 integer matrices (monodromy / gluing bookkeeping).
struct Mat2 {
    std::array<std::array<Int, 2>, 2> m{{{1, 0}, {0, 1}}};

    static Mat2 id() { return {}; }
    static Mat2 of(Int a, Int b, Int c, Int d) {
        Mat2 r;
        r.m = {{{std::move(a), std::move(b)}, {std::move(c), std::move(d)}}};
        return r;
    }
    Int& operator()(int i, int j) { return m[i][j]; }
    const Int& operator()(int i, int j) const { return m[i][j]; }

    friend Mat2 operator*(const Mat2& a, const Mat2& b) {
        Mat2 r;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                r.m[i][j] = a.m[i][0] * b.m[0][j] + a.m[i][1] * b.m[1][j];
        return r;
    }
    friend bool operator==(const Mat2& a, const Mat2& b) { return a.m == b.m; }

    Int trace() const { return m[0][0] + m[1][1]; }
    Int det() const { return m[0][0] * m[1][1] - m[0][1] * m[1][0]; }
    Mat2 inverse() const;  // requires det = ±1

    std::array<Int, 2> apply(const std::array<Int, 2>& v) const {
        return {m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]};
    }
};

// gcd of |entries| of M - I; 0 if M = I.
Int shear_divisibility(const Mat2& m);
bool is_parabolic(const Mat2& m);  // trace 2, not identity, (M-I)^2 = 0

std::string to_string(const Mat2& m);

}  // namespace mf
