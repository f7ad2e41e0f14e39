#pragma once

#include "mirrorforge/numeric.hpp"

#include <array>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace mf::elliptic {

using C = std::complex<double>;

// Fibration W = t1 + t2 + 1/t1 + 1/t2 over the q-plane.  The ramification
// quartic in the t2-projection is
//   P(t) = (t^2 + 1 - q t)^2 - 4 t^2 = (t^2 - (q+2) t + 1)(t^2 - (q-2) t + 1),
// a monic product over its four roots.  The identity is validated at
// construction for the given q.
struct Roots {
    C q;
    std::array<C, 4> r;  // [0],[1]: factor t^2-(q+2)t+1;  [2],[3]: t^2-(q-2)t+1
    int factor_of(int i) const { return i < 2 ? 0 : 1; }
};

Roots ramification_roots(C q);

struct RamificationSet {
    C q;
    struct Point {
        C t;
        int factor;  // 0 or 1
    };
    std::vector<Point> points;  // sorted by (factor, argument)
    bool collision = false;     // roots within 1e-9 of each other
};

RamificationSet ramification_points(C q);

// Critical values of W: discriminant zeros of the two factors; 0 carries
// multiplicity two (the I2 fibre).
struct CriticalValues {
    std::array<double, 3> values{-4.0, 0.0, 4.0};
    double multiplicity_two = 0.0;
};
CriticalValues critical_values();

// ---------------------------------------------------------------------------
// Cycles: the double lift of an oriented path between two ramification
// points, with a branch seed fixing the sheet.
// ---------------------------------------------------------------------------

struct Cycle {
    C q;
    std::array<C, 4> roots;
    std::vector<C> pts;   // pts.front() = roots[head], pts.back() = roots[tail]
    int head = 0, tail = 1;
    int seed_index = 1;   // interior vertex carrying the branch seed
    C seed_value;         // continued sqrt(P) at pts[seed_index]
    int sign = 1;         // orientation multiplier

    double min_root_separation() const;
};

struct QuadResult {
    C value{0.0, 0.0};
    double err = 0.0;
    bool converged = false;
    std::size_t evals = 0;
};

struct Tolerances {
    double quad_tol = 1e-11;   // inner quadrature (absolute + relative)
    double path_tol = 1e-10;   // outer q-integration
    double delta_min = 1e-3;   // clearance floor for non-endpoint roots
};

// D(cycle) = integral over the boundary cycle of the q-contraction of the
// holomorphic 2-form:  sign * 2 * sum_segments  i dt / sqrt(P_q(t)).
QuadResult cycle_period_derivative(const Cycle& c, const Tolerances& tol = {});
// Same, split into contributions of segment groups [breaks] (for the
// piecewise sign checks).
std::vector<C> cycle_period_derivative_pieces(const Cycle& c, const std::vector<int>& breaks,
                                              const Tolerances& tol = {});

// Derived per-segment sheet labels: +1 where the continued branch agrees with
// the principal square root at the segment midpoint.
std::vector<int> sheet_labels(const Cycle& c);

// ---------------------------------------------------------------------------
// Canonical frame (a, b) and transport
// ---------------------------------------------------------------------------

struct Frame {
    Cycle a, b;
    C q() const { return a.q; }
};

// Canonical frame on the segment (-4, 0): a joins the (q+2)-factor pair
// through the right crossing, b through the left crossing; orientations
// pinned by  D_a < 0 (real)  and  Re of the b-thimble near -4 from the upper
// half plane > 0.
Frame base_frame(double q0 = -2.0, const Tolerances& tol = {});

// Single similarity step; returns false when the step must be halved.
bool transport_step(Cycle& c, C q_new, const Tolerances& tol = {});
const char* transport_step_failure();  // reason of the last rejected step
// Adaptive march along a straight q-leg; throws on step underflow.
void march(Cycle& c, C q_to, const Tolerances& tol = {});
void march(Frame& f, C q_to, const Tolerances& tol = {});
void march_polyline(Frame& f, const std::vector<C>& waypoints, const Tolerances& tol = {});

// Canonical route from the base point to q (upper half plane convention).
std::vector<C> canonical_route(C q);
Frame frame_at(C q, const Tolerances& tol = {});

// ---------------------------------------------------------------------------
// Period continuation along q-paths
// ---------------------------------------------------------------------------

struct PeriodRecord {
    std::string cycle;           // e.g. "a", "-a+b"
    std::vector<C> q_path;
    C value{0.0, 0.0};           // V = -int_{path} D dq  (thimble integral)
    double err = 0.0;
    bool converged = false;
};

// Integrates m_a * D_a + m_b * D_b along the polyline; the path may start at
// a critical value (one-sided limit).  `start` supplies the frame at the
// first regular point when given, else the canonical frame is used.
PeriodRecord continue_period(const std::vector<C>& q_path, int m_a, int m_b,
                             const Tolerances& tol = {});

// Affine coordinates of the SYZ base: x_gamma = -Im V_gamma with reference
// point at the origin; x = x_{a-b}, y = x_{a+b}.
struct AffineSample {
    C q;
    double x = 0, y = 0;
    bool converged = false;
};

// Cumulative sweep: V at each `params` position along the polyline (values
// in [0,1] parameterizing arc length of the full polyline).
std::vector<PeriodRecord> sweep_periods(const std::vector<C>& q_path,
                                        const std::vector<double>& params, int m_a, int m_b,
                                        const Tolerances& tol = {});

// Canonical q-path from the reference point O = 0 to q through the closed
// upper half plane (straight legs, lifted over the critical values).
std::vector<C> reference_path(C q);

AffineSample affine_coordinates(C q, const Tolerances& tol = {});

// ---------------------------------------------------------------------------
// Monodromy and intersections
// ---------------------------------------------------------------------------

struct MonodromyResult {
    Mat2 matrix;           // new (a,b) coordinates in the old frame, columns
    double residual = 0;   // pre-rounding distance to the integer matrix
    bool ok = false;
};

// Transport the frame around center + radius * exp(i theta) counterclockwise
// and express the result in the original basis.
MonodromyResult monodromy_circle(C center, double radius, const Tolerances& tol = {});
MonodromyResult monodromy_polyline(const std::vector<C>& closed_loop,
                                   const Tolerances& tol = {});

// Signed intersection number of two cycles over the same q, with the fibre
// oriented so that <a, b> = -2 in the canonical frame.
int intersection_number(const Cycle& c1, const Cycle& c2);

// ---------------------------------------------------------------------------
// Local model of the nodal degeneration xy = t  (section-3 asymptotics)
// ---------------------------------------------------------------------------

// (i/2) * integral over {xy=t, |x|^2+|y|^2 < eps} of |f|^2 (dx/x)^(1,1);
// diverges like -2 pi log t as t -> 0.
double degeneration_area(double t, double eps,
                         const std::function<C(C, C)>& f = nullptr);

// Circle integral of f around the vanishing cycle at radius |x0| = sqrt(t).
C vanishing_cycle_period(double t, const std::function<C(C, C)>& f);

// ---------------------------------------------------------------------------
// Appendix-area decomposition of a at q = i x: arc(eps) + real segment + arc(R)
// ---------------------------------------------------------------------------

struct LargeQDecomposition {
    Cycle cycle;                // -a homotopy representative at q = i x
    std::vector<int> breaks;    // piece boundaries (3 pieces)
};

LargeQDecomposition large_q_a_cycle(double x);

}  // namespace mf::elliptic
