#pragma once

#include "mirrorforge/lattice.hpp"
#include "mirrorforge/laurent.hpp"

namespace mf {

// W = sum of t^n over the vertices of nabla.  Pre: integral vertices.
Laurent superpotential_from_polytope(const Polytope& nabla);

// For every maximal cone of `fan`, check that the closure of {W = 0} misses
// the corresponding torus fixed point.  The test normalizes W in the cone
// chart and inspects the corner coefficient.
AvoidanceReport check_fixed_point_avoidance(const Laurent& w, const Fan& fan);

// Restrict W to the toric divisor of ray `ray_index`: exactly two monomials
// with <n,ray> = -1 must survive; returns the unique root of their ratio in
// the divisor coordinate s = t^(q1-q2).  Throws if the support is not of
// this shape or q1-q2 is not primitive.
DivisorRestriction boundary_intersection_point(const Laurent& w, const Fan& fan,
                                               std::size_t ray_index);

// Text format: one `x y` pair per line, `#` comments.
Polytope read_polytope_text(const std::string& text);
Fan read_fan_text(const std::string& text);

}  // namespace mf
