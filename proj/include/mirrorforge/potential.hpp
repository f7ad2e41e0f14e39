#pragma once

#include "mirrorforge/lattice.hpp"
#include "mirrorforge/laurent.hpp"

#include <string>
#include <vector>

namespace mf {

// Primitive inward facet normals of a monotone toric surface, counterclockwise.
struct MonotoneFanData {
    std::vector<Vec2> normals;

    static MonotoneFanData of(std::vector<Vec2> normals);  // validates ordering/primitivity
    std::size_t size() const { return normals.size(); }
};

// det(v, w); requires primitivity and positive orientation.
Int corner_multiplicity(const Vec2& v, const Vec2& w);

// W = sum_i z^{v_i} + sum_i sum_{j=1..n_i-1} C(n_i,j) z^{((n_i-j)v_i + j v_{i+1})/n_i}.
Laurent disc_potential(const MonotoneFanData& fan);

// Substitution rules x -> expr, y -> expr (expressions in the new variables).
// The result must clear denominators exactly, else throws.
struct WallCrossingRule {
    LaurentRat x_expr = LaurentRat::of(Laurent::monomial(1, 0));
    LaurentRat y_expr = LaurentRat::of(Laurent::monomial(0, 1));
};

Laurent wall_crossing_substitute(const Laurent& w, const WallCrossingRule& rule);

// Bundled fixtures reproducing the standard table of disc potentials for the
// del Pezzo monotone tori.
struct PotentialFixture {
    std::string name;
    MonotoneFanData fan;
    Laurent expected;
};

const std::vector<PotentialFixture>& potential_fixtures();

struct TableRowResult {
    std::string name;
    bool match;
    std::string computed, expected;
};

std::vector<TableRowResult> verify_table();

}  // namespace mf
