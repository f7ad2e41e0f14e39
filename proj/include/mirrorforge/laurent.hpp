#pragma once

#include "mirrorforge/numeric.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>

namespace mf {

// Exponent vector in Z^2.
using Exp2 = std::pair<long, long>;

// Laurent polynomial in x, y with exact integer coefficients.
struct Laurent {
    std::map<Exp2, Int> terms;  // no zero coefficients stored

    static Laurent zero() { return {}; }
    static Laurent constant(Int c);
    static Laurent monomial(long ex, long ey, Int c = Int(1));

    bool is_zero() const { return terms.empty(); }
    Int coeff(long ex, long ey) const;
    void add_term(Exp2 e, const Int& c);

    friend Laurent operator+(const Laurent& a, const Laurent& b);
    friend Laurent operator-(const Laurent& a, const Laurent& b);
    friend Laurent operator*(const Laurent& a, const Laurent& b);
    friend bool operator==(const Laurent& a, const Laurent& b) { return a.terms == b.terms; }

    Laurent pow(long e) const;  // e >= 0

    // Monomial change of variables: exponent vector v maps to g*v.
    Laurent apply_gl2(const Mat2& g) const;

    std::string str() const;  // paper-style x,y notation, deterministic order
};

// Quotient of Laurent polynomials; wall-crossing substitution rules produce
// these before the exact-divisibility step.
struct LaurentRat {
    Laurent num = Laurent::constant(Int(1));
    Laurent den = Laurent::constant(Int(1));

    static LaurentRat of(Laurent n, Laurent d = Laurent::constant(Int(1)));
    friend LaurentRat operator*(const LaurentRat& a, const LaurentRat& b);
    friend LaurentRat operator+(const LaurentRat& a, const LaurentRat& b);
    LaurentRat pow(long e) const;  // any integer e (den must be nonzero)
};

// Exact division a/b; nullopt if not exactly divisible in the Laurent ring.
std::optional<Laurent> divide_exact(const Laurent& a, const Laurent& b);

// Parse "x", "y", integers, + - * / ^ and parentheses into a LaurentRat.
LaurentRat parse_laurent_expr(const std::string& text);

}  // namespace mf
