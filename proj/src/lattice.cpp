#include "mirrorforge/lattice.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace mf {

bool primitive(const Vec2& v) {
    if (v.x == 0 && v.y == 0) return false;
    return boost::multiprecision::gcd(boost::multiprecision::abs(v.x),
                                      boost::multiprecision::abs(v.y)) == 1;
}

Vec2 make_primitive(const Vec2& v) {
    Int g = boost::multiprecision::gcd(boost::multiprecision::abs(v.x),
                                       boost::multiprecision::abs(v.y));
    if (g == 0) throw std::invalid_argument("make_primitive: zero vector");
    return {v.x / g, v.y / g};
}

bool QVec2::integral() const {
    return boost::multiprecision::denominator(x) == 1 &&
           boost::multiprecision::denominator(y) == 1;
}

Vec2 QVec2::round_exact() const {
    if (!integral()) throw std::domain_error("QVec2: not integral");
    return {Int(boost::multiprecision::numerator(x)), Int(boost::multiprecision::numerator(y))};
}

namespace {

// canonical form: counterclockwise, starting at the lexicographically
// smallest vertex
void canonicalize(std::vector<Vec2>& vs) {
    if (vs.size() < 3) return;
    Int area2 = 0;
    for (std::size_t i = 0; i < vs.size(); ++i)
        area2 += cross(vs[i], vs[(i + 1) % vs.size()]);
    if (area2 < 0) std::reverse(vs.begin(), vs.end());
    auto smallest = std::min_element(vs.begin(), vs.end());
    std::rotate(vs.begin(), smallest, vs.end());
}

}  // namespace

Polytope Polytope::from_points(std::vector<Vec2> pts) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) throw std::invalid_argument("Polytope: need at least 3 distinct points");
    // Andrew monotone chain, strict turns only (no collinear hull points kept)
    auto build = [&](bool lower) {
        std::vector<Vec2> h;
        auto run = pts;
        if (!lower) std::reverse(run.begin(), run.end());
        for (const auto& p : run) {
            while (h.size() >= 2 && cross(h.back() - h[h.size() - 2], p - h.back()) <= 0)
                h.pop_back();
            h.push_back(p);
        }
        return h;
    };
    std::vector<Vec2> lo = build(true), hi = build(false);
    lo.pop_back();
    hi.pop_back();
    lo.insert(lo.end(), hi.begin(), hi.end());
    if (lo.size() < 3) throw std::invalid_argument("Polytope: degenerate (not full-dimensional)");
    Polytope p;
    p.vertices = std::move(lo);
    canonicalize(p.vertices);
    return p;
}

bool Polytope::contains_origin_interior() const {
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        const Vec2& a = vertices[i];
        const Vec2& b = vertices[(i + 1) % vertices.size()];
        if (cross(b - a, -a) <= 0) return false;  // origin not strictly left of edge
    }
    return true;
}

bool Polytope::is_reflexive() const {
    if (!contains_origin_interior()) return false;
    return dual_polytope(*this).reflexive;
}

std::vector<Vec2> Polytope::boundary_lattice_points() const {
    std::vector<Vec2> pts;
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        Vec2 a = vertices[i], b = vertices[(i + 1) % vertices.size()];
        Vec2 d = b - a;
        Int g = boost::multiprecision::gcd(boost::multiprecision::abs(d.x),
                                           boost::multiprecision::abs(d.y));
        Vec2 step{d.x / g, d.y / g};
        for (Int k = 0; k < g; ++k) pts.push_back(a + k * step);
    }
    return pts;
}

Polytope DualResult::as_polytope() const {
    if (!reflexive) throw std::domain_error("dual polytope is not integral");
    std::vector<Vec2> vs;
    vs.reserve(vertices.size());
    for (const auto& v : vertices) vs.push_back(v.round_exact());
    return Polytope::from_points(std::move(vs));
}

DualResult dual_polytope(const Polytope& delta) {
    if (!delta.contains_origin_interior())
        throw std::invalid_argument("dual_polytope: origin not strictly interior");
    DualResult out;
    const auto& vs = delta.vertices;
    std::size_t n = vs.size();
    // A vertex of the dual for each edge (v_i, v_{i+1}): solve <n,v_i> = <n,v_{i+1}> = -1.
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& a = vs[i];
        const Vec2& b = vs[(i + 1) % n];
        Int d = cross(a, b);
        if (d == 0) throw std::invalid_argument("dual_polytope: degenerate edge");
        // n = (-(b.y - a.y), b.x - a.x) / cross(a,b)
        QVec2 v;
        v.x = Rational(-(b.y - a.y), d);
        v.y = Rational(b.x - a.x, d);
        out.vertices.push_back(v);
    }
    // counterclockwise and canonical start (rational lex order)
    Rational area2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = out.vertices[i];
        const auto& q = out.vertices[(i + 1) % n];
        area2 += p.x * q.y - p.y * q.x;
    }
    if (area2 < 0) std::reverse(out.vertices.begin(), out.vertices.end());
    auto less = [](const QVec2& p, const QVec2& q) {
        return p.x != q.x ? p.x < q.x : p.y < q.y;
    };
    auto smallest = std::min_element(out.vertices.begin(), out.vertices.end(), less);
    std::rotate(out.vertices.begin(), smallest, out.vertices.end());
    out.reflexive = std::all_of(out.vertices.begin(), out.vertices.end(),
                                [](const QVec2& v) { return v.integral(); });
    return out;
}

Fan Fan::from_rays(std::vector<Vec2> rays) {
    if (rays.size() < 3) throw std::invalid_argument("Fan: need at least 3 rays");
    for (auto& r : rays) r = make_primitive(r);
    std::sort(rays.begin(), rays.end());
    rays.erase(std::unique(rays.begin(), rays.end()), rays.end());
    // sort counterclockwise by angle, exactly: half-plane class then cross product
    auto half = [](const Vec2& v) { return (v.y > 0 || (v.y == 0 && v.x > 0)) ? 0 : 1; };
    std::sort(rays.begin(), rays.end(), [&](const Vec2& a, const Vec2& b) {
        if (half(a) != half(b)) return half(a) < half(b);
        return cross(a, b) > 0;
    });
    Fan f;
    f.rays = std::move(rays);
    // completeness: consecutive rays must turn by < pi, i.e. positive cross
    for (std::size_t i = 0; i < f.rays.size(); ++i)
        if (f.cone_det(i) <= 0)
            throw std::invalid_argument("Fan: rays do not positively span the plane");
    // canonical start at lexicographically smallest ray
    auto smallest = std::min_element(f.rays.begin(), f.rays.end());
    std::rotate(f.rays.begin(), smallest, f.rays.end());
    return f;
}

Int Fan::cone_det(std::size_t i) const {
    return cross(rays[i], rays[(i + 1) % rays.size()]);
}

bool Fan::smooth() const {
    for (std::size_t i = 0; i < rays.size(); ++i)
        if (cone_det(i) != 1) return false;
    return true;
}

Fan normal_fan(const Polytope& delta) {
    const auto& vs = delta.vertices;
    if (vs.size() < 3) throw std::invalid_argument("normal_fan: degenerate polytope");
    std::vector<Vec2> rays;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        Vec2 d = vs[(i + 1) % vs.size()] - vs[i];
        rays.push_back(make_primitive(Vec2{-d.y, d.x}));  // inward for ccw polygon
    }
    return Fan::from_rays(std::move(rays));
}

HomogeneousMonomial homogenize_section(const Vec2& n, const Fan& fan) {
    HomogeneousMonomial h;
    h.exponents.reserve(fan.size());
    for (const auto& r : fan.rays) {
        Int e = dot(n, r) + 1;
        if (e < 0) throw std::invalid_argument("homogenize_section: not an anticanonical section");
        h.exponents.push_back(e);
    }
    return h;
}

}  // namespace mf
