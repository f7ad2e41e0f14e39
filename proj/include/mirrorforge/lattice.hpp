#pragma once

#include "mirrorforge/numeric.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace mf {

// Point of the rank-2 lattice N ≅ Z^2 (or its dual M).
struct Vec2 {
    Int x{0}, y{0};

    Vec2() = default;
    Vec2(Int a, Int b) : x(std::move(a)), y(std::move(b)) {}
    Vec2(long a, long b) : x(a), y(b) {}

    friend Vec2 operator+(const Vec2& a, const Vec2& b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(const Vec2& a, const Vec2& b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }
    friend Vec2 operator*(const Int& c, const Vec2& a) { return {c * a.x, c * a.y}; }
    friend bool operator==(const Vec2& a, const Vec2& b) { return a.x == b.x && a.y == b.y; }
    friend bool operator!=(const Vec2& a, const Vec2& b) { return !(a == b); }
    friend bool operator<(const Vec2& a, const Vec2& b) {
        return a.x != b.x ? a.x < b.x : a.y < b.y;
    }
};

inline Int dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline Int cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
bool primitive(const Vec2& v);
Vec2 make_primitive(const Vec2& v);  // divide by gcd (v != 0)

// Exact rational point, used for dual-polytope vertices before the
// reflexivity test.
struct QVec2 {
    Rational x{0}, y{0};
    bool integral() const;
    Vec2 round_exact() const;  // requires integral()
};

// Convex lattice polygon, vertices counterclockwise, canonicalized to start
// at the lexicographically smallest vertex.
struct Polytope {
    std::vector<Vec2> vertices;

    static Polytope from_points(std::vector<Vec2> pts);  // convex hull + canonicalize
    std::size_t size() const { return vertices.size(); }
    bool contains_origin_interior() const;
    bool is_reflexive() const;  // dual has integral vertices
    std::vector<Vec2> boundary_lattice_points() const;
    friend bool operator==(const Polytope& a, const Polytope& b) {
        return a.vertices == b.vertices;
    }
};

struct DualResult {
    std::vector<QVec2> vertices;  // counterclockwise
    bool reflexive = false;
    Polytope as_polytope() const;  // requires reflexive
};

// Polar dual {n : <n,v> >= -1 for all vertices v}.  Pre: origin interior.
DualResult dual_polytope(const Polytope& delta);

// Complete fan in Z^2: primitive rays counterclockwise, maximal cones are
// consecutive pairs.
struct Fan {
    std::vector<Vec2> rays;

    static Fan from_rays(std::vector<Vec2> rays);  // primitivize + sort ccw + validate
    std::size_t size() const { return rays.size(); }
    bool smooth() const;  // every adjacent pair has |det| = 1
    Int cone_det(std::size_t i) const;  // det(ray_i, ray_{i+1})
};

// Inward primitive facet normals of a full-dimensional polygon, as a fan.
Fan normal_fan(const Polytope& delta);

// Laurent polynomial in two variables with exact integer coefficients.
struct Laurent;  // see laurent.hpp

// Anticanonical-section exponents: one entry per fan ray, value <n,ray>+1.
struct HomogeneousMonomial {
    std::vector<Int> exponents;
};

HomogeneousMonomial homogenize_section(const Vec2& n, const Fan& fan);

struct ConeReport {
    std::size_t cone_index;
    Vec2 ray_a, ray_b;
    bool pass;
    std::string note;
};

struct AvoidanceReport {
    bool all_pass = true;
    std::vector<ConeReport> cones;
};

struct DivisorRestriction {
    Vec2 ray;
    Vec2 exponent_a, exponent_b;  // the two support points with <n,ray> = -1
    QC root;                      // unique zero of the restriction, in the divisor coordinate
};

}  // namespace mf
