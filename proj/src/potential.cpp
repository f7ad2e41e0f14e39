#include "mirrorforge/potential.hpp"

#include <stdexcept>

namespace mf {

MonotoneFanData MonotoneFanData::of(std::vector<Vec2> normals) {
    if (normals.size() < 3) throw std::invalid_argument("MonotoneFanData: need >= 3 normals");
    for (const auto& v : normals)
        if (!primitive(v)) throw std::invalid_argument("MonotoneFanData: normal not primitive");
    for (std::size_t i = 0; i < normals.size(); ++i)
        if (cross(normals[i], normals[(i + 1) % normals.size()]) < 1)
            throw std::invalid_argument("MonotoneFanData: normals not counterclockwise");
    MonotoneFanData f;
    f.normals = std::move(normals);
    return f;
}

Int corner_multiplicity(const Vec2& v, const Vec2& w) {
    if (!primitive(v) || !primitive(w))
        throw std::invalid_argument("corner_multiplicity: vectors must be primitive");
    Int d = cross(v, w);
    if (d <= 0) throw std::invalid_argument("corner_multiplicity: ordering error (det <= 0)");
    return d;
}

namespace {

Int binomial(const Int& n, const Int& k) {
    Int r = 1;
    for (Int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
    return r;
}

}  // namespace

Laurent disc_potential(const MonotoneFanData& fan) {
    Laurent w;
    std::size_t p = fan.size();
    for (std::size_t i = 0; i < p; ++i) {
        const Vec2& v = fan.normals[i];
        w.add_term({v.x.convert_to<long>(), v.y.convert_to<long>()}, Int(1));
        const Vec2& vn = fan.normals[(i + 1) % p];
        Int n = corner_multiplicity(v, vn);
        for (Int j = 1; j < n; ++j) {
            Vec2 num = (n - j) * v + j * vn;
            if (num.x % n != 0 || num.y % n != 0)
                throw std::domain_error("disc_potential: non-integral interior exponent");
            Vec2 u{num.x / n, num.y / n};
            w.add_term({u.x.convert_to<long>(), u.y.convert_to<long>()}, binomial(n, j));
        }
    }
    return w;
}

Laurent wall_crossing_substitute(const Laurent& w, const WallCrossingRule& rule) {
    LaurentRat acc = LaurentRat::of(Laurent::zero());
    for (const auto& [e, c] : w.terms) {
        LaurentRat t = LaurentRat::of(Laurent::constant(c));
        t = t * rule.x_expr.pow(e.first);
        t = t * rule.y_expr.pow(e.second);
        acc = acc + t;
    }
    auto q = divide_exact(acc.num, acc.den);
    if (!q)
        throw std::domain_error(
            "wall_crossing_substitute: inexact division; not a cluster-type "
            "transformation for this potential");
    return *q;
}

namespace {

std::vector<PotentialFixture> build_fixtures() {
    auto L = [](const char* s) {
        LaurentRat r = parse_laurent_expr(s);
        auto q = divide_exact(r.num, r.den);
        if (!q) throw std::logic_error("fixture expression not a Laurent polynomial");
        return *q;
    };
    auto F = [](std::vector<Vec2> v) { return MonotoneFanData::of(std::move(v)); };
    std::vector<PotentialFixture> fx;
    fx.push_back({"dP9", F({{1, 0}, {0, 1}, {-1, -1}}), L("x + y + 1/(x*y)")});
    fx.push_back({"dP8", F({{1, 0}, {0, 1}, {-1, -1}, {0, -1}}), L("x + y + 1/y + 1/(x*y)")});
    fx.push_back({"dP8p", F({{1, 0}, {0, 1}, {-1, 0}, {0, -1}}), L("x + y + 1/x + 1/y")});
    fx.push_back({"dP7", F({{1, 0}, {0, 1}, {-1, 0}, {-1, -1}, {0, -1}}),
                  L("x + y + 1/x + 1/y + 1/(x*y)")});
    fx.push_back({"dP6", F({{1, 0}, {1, 1}, {0, 1}, {-1, 0}, {-1, -1}, {0, -1}}),
                  L("x + y + x*y + 1/x + 1/y + 1/(x*y)")});
    fx.push_back({"dP5", F({{1, 1}, {-1, 1}, {-1, 0}, {0, -1}, {1, -1}}),
                  L("x*y + y/x + x/y + 1/x + 1/y + 2*x + 2*y")});
    fx.push_back({"dP4", F({{1, 1}, {-2, 1}, {0, -1}, {1, -1}}),
                  L("x*y + x/y + 1/y + y/x^2 + 2*x + 2/x + 3*y + 3*y/x")});
    fx.push_back({"dP4p", F({{1, 1}, {-1, 1}, {-1, -1}, {1, -1}}),
                  L("x*y + x/y + y/x + 1/(x*y) + 2*(x + y + 1/x + 1/y)")});
    fx.push_back({"dP3", F({{1, 1}, {-2, 1}, {1, -2}}),
                  L("x*y + y/x^2 + x/y^2 + 3*(x + x/y + y + y/x + 1/x + 1/y)")});
    return fx;
}

}  // namespace

const std::vector<PotentialFixture>& potential_fixtures() {
    static const std::vector<PotentialFixture> fx = build_fixtures();
    return fx;
}

std::vector<TableRowResult> verify_table() {
    std::vector<TableRowResult> out;
    for (const auto& f : potential_fixtures()) {
        Laurent w = disc_potential(f.fan);
        out.push_back({f.name, w == f.expected, w.str(), f.expected.str()});
    }
    return out;
}

}  // namespace mf
