#include "mirrorforge/toric.hpp"

#include <algorithm>
#include <sstream>

namespace mf {

Laurent superpotential_from_polytope(const Polytope& nabla) {
    Laurent w;
    for (const auto& v : nabla.vertices)
        w.add_term({v.x.convert_to<long>(), v.y.convert_to<long>()}, Int(1));
    return w;
}

AvoidanceReport check_fixed_point_avoidance(const Laurent& w, const Fan& fan) {
    if (w.is_zero()) throw std::invalid_argument("check_fixed_point_avoidance: zero section");
    AvoidanceReport rep;
    for (std::size_t i = 0; i < fan.size(); ++i) {
        const Vec2& rho = fan.rays[i];
        const Vec2& mu = fan.rays[(i + 1) % fan.size()];
        // Normalize W in the chart of cone(rho, mu): the fixed point is hit by
        // the closure of {W=0} iff the corner coefficient vanishes, i.e. no
        // unique support point minimizes <.,rho> and <.,mu> simultaneously.
        Int min_r, min_m;
        bool first = true;
        for (const auto& [e, c] : w.terms) {
            Vec2 n{e.first, e.second};
            Int vr = dot(n, rho), vm = dot(n, mu);
            if (first || vr < min_r) min_r = vr;
            if (first || vm < min_m) min_m = vm;
            first = false;
        }
        Int corner = 0;
        for (const auto& [e, c] : w.terms) {
            Vec2 n{e.first, e.second};
            if (dot(n, rho) == min_r && dot(n, mu) == min_m) corner += c;
        }
        ConeReport cr;
        cr.cone_index = i;
        cr.ray_a = rho;
        cr.ray_b = mu;
        cr.pass = corner != 0;
        cr.note = cr.pass ? "corner coefficient nonzero"
                          : "restriction vanishes at the fixed point";
        if (!cr.pass) rep.all_pass = false;
        rep.cones.push_back(std::move(cr));
    }
    return rep;
}

DivisorRestriction boundary_intersection_point(const Laurent& w, const Fan& fan,
                                               std::size_t ray_index) {
    if (ray_index >= fan.size())
        throw std::invalid_argument("boundary_intersection_point: bad ray index");
    const Vec2& rho = fan.rays[ray_index];
    std::vector<std::pair<Vec2, Int>> survivors;
    for (const auto& [e, c] : w.terms) {
        Vec2 n{e.first, e.second};
        if (dot(n, rho) == -1) survivors.push_back({n, c});
    }
    if (survivors.size() != 2)
        throw std::domain_error(
            "boundary_intersection_point: restriction does not have exactly two "
            "monomials (non-Fano or non-smooth input)");
    std::sort(survivors.begin(), survivors.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    Vec2 q1 = survivors[1].first, q2 = survivors[0].first;
    Vec2 diff = q1 - q2;
    if (!primitive(diff))
        throw std::domain_error(
            "boundary_intersection_point: exponent difference is not a primitive "
            "generator of the divisor lattice");
    // c1 s + c2 = 0 in the divisor coordinate s = t^(q1-q2)
    DivisorRestriction out;
    out.ray = rho;
    out.exponent_a = q1;
    out.exponent_b = q2;
    out.root = QC{Rational(-survivors[0].second, survivors[1].second)};
    return out;
}

namespace {

std::vector<Vec2> read_points(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<Vec2> pts;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream ls(line);
        long x, y;
        if (ls >> x >> y) pts.push_back(Vec2{x, y});
    }
    return pts;
}

}  // namespace

Polytope read_polytope_text(const std::string& text) {
    return Polytope::from_points(read_points(text));
}

Fan read_fan_text(const std::string& text) { return Fan::from_rays(read_points(text)); }

}  // namespace mf
