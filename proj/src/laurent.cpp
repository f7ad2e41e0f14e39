#include "mirrorforge/laurent.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace mf {

Laurent Laurent::constant(Int c) {
    Laurent l;
    if (c != 0) l.terms[{0, 0}] = std::move(c);
    return l;
}

Laurent Laurent::monomial(long ex, long ey, Int c) {
    Laurent l;
    if (c != 0) l.terms[{ex, ey}] = std::move(c);
    return l;
}

Int Laurent::coeff(long ex, long ey) const {
    auto it = terms.find({ex, ey});
    return it == terms.end() ? Int(0) : it->second;
}

void Laurent::add_term(Exp2 e, const Int& c) {
    if (c == 0) return;
    auto [it, inserted] = terms.emplace(e, c);
    if (!inserted) {
        it->second += c;
        if (it->second == 0) terms.erase(it);
    }
}

Laurent operator+(const Laurent& a, const Laurent& b) {
    Laurent r = a;
    for (const auto& [e, c] : b.terms) r.add_term(e, c);
    return r;
}

Laurent operator-(const Laurent& a, const Laurent& b) {
    Laurent r = a;
    for (const auto& [e, c] : b.terms) r.add_term(e, -c);
    return r;
}

Laurent operator*(const Laurent& a, const Laurent& b) {
    Laurent r;
    for (const auto& [ea, ca] : a.terms)
        for (const auto& [eb, cb] : b.terms)
            r.add_term({ea.first + eb.first, ea.second + eb.second}, ca * cb);
    return r;
}

Laurent Laurent::pow(long e) const {
    if (e < 0) throw std::invalid_argument("Laurent::pow: negative exponent");
    Laurent out = Laurent::constant(Int(1));
    Laurent base = *this;
    while (e > 0) {
        if (e & 1) out = out * base;
        base = base * base;
        e >>= 1;
    }
    return out;
}

Laurent Laurent::apply_gl2(const Mat2& g) const {
    Laurent r;
    for (const auto& [e, c] : terms) {
        Int nx = g(0, 0) * e.first + g(0, 1) * e.second;
        Int ny = g(1, 0) * e.first + g(1, 1) * e.second;
        r.add_term({nx.convert_to<long>(), ny.convert_to<long>()}, c);
    }
    return r;
}

std::string Laurent::str() const {
    if (terms.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [e, c] : terms) {
        Int a = c;
        if (first) {
            if (a < 0) os << "-";
        } else {
            os << (a < 0 ? " - " : " + ");
        }
        first = false;
        a = boost::multiprecision::abs(a);
        bool has_var = e.first != 0 || e.second != 0;
        if (a != 1 || !has_var) os << a;
        auto var = [&](const char* name, long p) {
            if (p == 0) return;
            os << name;
            if (p != 1) os << "^" << p;
        };
        var("x", e.first);
        var("y", e.second);
    }
    return os.str();
}

LaurentRat LaurentRat::of(Laurent n, Laurent d) {
    if (d.is_zero()) throw std::invalid_argument("LaurentRat: zero denominator");
    LaurentRat r;
    r.num = std::move(n);
    r.den = std::move(d);
    return r;
}

LaurentRat operator*(const LaurentRat& a, const LaurentRat& b) {
    return LaurentRat::of(a.num * b.num, a.den * b.den);
}

LaurentRat operator+(const LaurentRat& a, const LaurentRat& b) {
    return LaurentRat::of(a.num * b.den + b.num * a.den, a.den * b.den);
}

LaurentRat LaurentRat::pow(long e) const {
    if (e >= 0) return LaurentRat::of(num.pow(e), den.pow(e));
    if (num.is_zero()) throw std::domain_error("LaurentRat::pow: inverse of zero");
    return LaurentRat::of(den.pow(-e), num.pow(-e));
}

namespace {

// lex leading term (largest exponent pair)
std::pair<Exp2, Int> leading(const Laurent& p) {
    auto it = std::prev(p.terms.end());
    return {it->first, it->second};
}

}  // namespace

std::optional<Laurent> divide_exact(const Laurent& a, const Laurent& b) {
    if (b.is_zero()) throw std::invalid_argument("divide_exact: zero divisor");
    if (a.is_zero()) return Laurent::zero();
    Laurent rem = a;
    Laurent quot;
    auto [eb, cb] = leading(b);
    // In the Laurent ring monomials are units, so the usual lex division can
    // descend forever.  An exact quotient has all terms lex-between
    // lexmin(a)-lexmin(b) and LT(a)-LT(b); stop when we drop below.
    Exp2 lo_a = a.terms.begin()->first;
    Exp2 lo_b = b.terms.begin()->first;
    Exp2 lo_bound{lo_a.first - lo_b.first, lo_a.second - lo_b.second};
    while (!rem.is_zero()) {
        auto [ea, ca] = leading(rem);
        if (ca % cb != 0) return std::nullopt;
        Exp2 eq{ea.first - eb.first, ea.second - eb.second};
        if (eq < lo_bound) return std::nullopt;
        Laurent t = Laurent::monomial(eq.first, eq.second, ca / cb);
        quot = quot + t;
        rem = rem - t * b;
    }
    return quot;
}

// ---------------------------------------------------------------------------
// Tiny recursive-descent parser for Laurent rational expressions.
// ---------------------------------------------------------------------------

namespace {

struct Parser {
    const std::string& s;
    std::size_t i = 0;

    explicit Parser(const std::string& text) : s(text) {}

    void skip() {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    }
    bool eat(char c) {
        skip();
        if (i < s.size() && s[i] == c) {
            ++i;
            return true;
        }
        return false;
    }
    [[noreturn]] void fail(const std::string& what) {
        throw std::invalid_argument("parse error at position " + std::to_string(i) + ": " + what);
    }

    LaurentRat expr() {
        LaurentRat v = term();
        while (true) {
            skip();
            if (eat('+'))
                v = v + term();
            else if (eat('-'))
                v = v + LaurentRat::of(Laurent::constant(Int(-1))) * term();
            else
                return v;
        }
    }
    LaurentRat term() {
        LaurentRat v = factor();
        while (true) {
            skip();
            if (eat('*'))
                v = v * factor();
            else if (eat('/'))
                v = v * factor().pow(-1);
            else
                return v;
        }
    }
    LaurentRat factor() {
        LaurentRat v = atom();
        skip();
        if (eat('^')) {
            skip();
            bool neg = eat('-');
            long e = 0;
            bool any = false;
            while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
                e = e * 10 + (s[i] - '0');
                ++i;
                any = true;
            }
            if (!any) fail("expected integer exponent");
            v = v.pow(neg ? -e : e);
        }
        return v;
    }
    LaurentRat atom() {
        skip();
        if (i >= s.size()) fail("unexpected end of input");
        char c = s[i];
        if (c == '(') {
            ++i;
            LaurentRat v = expr();
            if (!eat(')')) fail("expected ')'");
            return v;
        }
        if (c == '-') {
            ++i;
            return LaurentRat::of(Laurent::constant(Int(-1))) * atom();
        }
        if (c == 'x') {
            ++i;
            return LaurentRat::of(Laurent::monomial(1, 0));
        }
        if (c == 'y') {
            ++i;
            return LaurentRat::of(Laurent::monomial(0, 1));
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            Int n = 0;
            while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
                n = n * 10 + (s[i] - '0');
                ++i;
            }
            return LaurentRat::of(Laurent::constant(n));
        }
        fail(std::string("unexpected character '") + c + "'");
    }
};

}  // namespace

LaurentRat parse_laurent_expr(const std::string& text) {
    Parser p(text);
    LaurentRat v = p.expr();
    p.skip();
    if (p.i != text.size()) p.fail("trailing input");
    return v;
}

}  // namespace mf
