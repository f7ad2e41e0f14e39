#pragma once

#include "mirrorforge/lattice.hpp"
#include "mirrorforge/numeric.hpp"

#include <optional>
#include <random>
#include <string>
#include <vector>

namespace mf {

// Truncated formal series sum a_i T^{A_i}, exact rational exponents, exact
// complex-rational coefficients.  Terms with exponent >= cutoff are dropped;
// no cutoff means the element is known exactly.
class NovikovScalar {
  public:
    struct Term {
        Rational exp;
        QC coeff;
    };

    NovikovScalar() = default;
    static NovikovScalar zero() { return {}; }
    static NovikovScalar one() { return monomial(Rational(0), QC{1}); }
    static NovikovScalar monomial(Rational e, QC c);
    // Real-exponent entry point for numeric pipelines: IEEE doubles are exact
    // rationals, so this stays in the exact representation.
    static NovikovScalar monomial_from_double(double e, double c);

    const std::vector<Term>& terms() const { return terms_; }
    const std::optional<Rational>& cutoff() const { return cutoff_; }
    NovikovScalar truncated(Rational new_cutoff) const;

    bool known_zero() const { return terms_.empty() && !cutoff_; }
    bool zero_up_to_cutoff() const { return terms_.empty(); }

    // Valuation; nullopt means "no term below the cutoff" (zero or too coarse).
    std::optional<Rational> val() const;
    QC coeff_at(const Rational& e) const;

    bool in_Lambda0() const;          // val >= 0
    bool is_unit() const;             // val == 0
    bool in_Lambda_plus() const;      // val > 0
    bool in_one_plus_unit() const;    // val(x - 1) == 0, x in Lambda0

    friend NovikovScalar operator+(const NovikovScalar& a, const NovikovScalar& b);
    friend NovikovScalar operator-(const NovikovScalar& a, const NovikovScalar& b);
    friend NovikovScalar operator-(const NovikovScalar& a);
    friend NovikovScalar operator*(const NovikovScalar& a, const NovikovScalar& b);

    NovikovScalar inverse() const;  // requires finite val; tracks cutoff budget
    NovikovScalar pow(long e) const;

    // Equality on the common guaranteed prefix.
    friend bool agree_up_to_cutoff(const NovikovScalar& a, const NovikovScalar& b);
    // Structural equality of terms and cutoff.
    friend bool operator==(const NovikovScalar& a, const NovikovScalar& b);

    // Merge terms whose exponents differ by less than eps (numeric pipelines).
    NovikovScalar merged_close_exponents(const Rational& eps) const;

    std::string str() const;       // literal syntax, e.g. "2T^0 + 1T^1/2 - 3T^2"
    static NovikovScalar parse(const std::string& text);

  private:
    std::vector<Term> terms_;           // strictly increasing exponents, nonzero coeffs
    std::optional<Rational> cutoff_;

    void normalize();
    friend std::optional<Rational> mul_cutoff(const NovikovScalar&, const NovikovScalar&);
};

// ---------------------------------------------------------------------------
// A_{n-1} chart atlas: sphere charts 1..n plus one torus chart, glued by
//   v_i = u_{i+1}^{-1},  u_i = u_{i+1}^2 v_{i+1},   w = u_1, z = u_1 v_1 - 1.
// ---------------------------------------------------------------------------

struct ChartPair {
    NovikovScalar first, second;
};

// chart i+1 -> chart i.  Pre: u unit.
ChartPair transition_sphere_to_sphere(const NovikovScalar& u, const NovikovScalar& v);
// chart i -> chart i+1.  Pre: v unit.
ChartPair transition_sphere_to_sphere_inv(const NovikovScalar& u, const NovikovScalar& v);
// sphere chart 1 -> torus chart (w, z).
ChartPair transition_sphere_to_torus(const NovikovScalar& u1, const NovikovScalar& v1);
// torus chart -> sphere chart 1.  Pre: w unit.
ChartPair transition_torus_to_sphere(const NovikovScalar& w, const NovikovScalar& z);

struct AnAtlas {
    int n = 1;  // number of sphere charts; resolves the A_{n-1} point uv = ztilde^n
};

struct BlowdownImage {
    NovikovScalar u, v, ztilde;
};

// Blow-down image of a point in sphere chart `j` (1-based).
BlowdownImage blowdown(const AnAtlas& atlas, int j, const NovikovScalar& uj,
                       const NovikovScalar& vj);

struct Membership {
    std::vector<int> sphere_charts;  // 1-based chart indices containing the point
    bool torus_chart = false;
    bool exceptional_locus = false;  // u = v = ztilde = 0: meets every chart
};

// Pre: uv = ztilde^n up to cutoff, u,v in Lambda0.
Membership membership(const AnAtlas& atlas, const NovikovScalar& u, const NovikovScalar& v,
                      const NovikovScalar& ztilde);

struct C2Report {
    int samples = 0;
    int failures = 0;
    std::vector<std::string> witnesses;
    bool pass() const { return failures == 0; }
};

// Sampled check of  {(u,v,zt) in Lambda0^2 x (1+Lambda0^x) : uv = zt}
//                  = (C^2 - {uv=1}) + Lambda_+^2.
C2Report verify_C2_decomposition(int samples_per_stratum, std::uint64_t seed);

// Point of P^1 over the Novikov field, kept as a canonical representative.
struct P1Lambda {
    NovikovScalar a, b;  // (a : b), not both zero up to cutoff
};

bool blowup_incidence(const ChartPair& point, const ChartPair& center, const P1Lambda& line);

// Valuation image of { u_j v_j = ztilde } over all charts, val ztilde = s > 0.
struct Skeleton {
    Rational s;
    int n;
    // global chain: n segments joining consecutive vertices below
    std::vector<std::pair<Rational, Rational>> chain_vertices;  // (val u, val v), size n+1
    // per-chart local images, each the segment (0,s) -> (s,0)
    std::vector<std::array<std::pair<Rational, Rational>, 2>> chart_segments;
};

Skeleton skeleton_valuation_image(const AnAtlas& atlas, const Rational& s);

// Chart bookkeeping for the del Pezzo mirror atlas: one torus chart plus an
// A_{n_i-1} sphere chain at the special point z_i = -1 of each toric divisor.
struct DelPezzoChartAtlas {
    struct Corner {
        Vec2 v, v_next;
        Int multiplicity;        // det(v, v_next)
        Vec2 holonomy_direction; // primitive, orthogonal to the corner edge sum
    };
    std::vector<Corner> corners;
    Int sphere_chart_count{0};
    Int total_chart_count{0};  // spheres + 1 torus
};

DelPezzoChartAtlas del_pezzo_chart_atlas(const std::vector<Vec2>& normals);

// Deterministic sampler used by the property suites.
class NovikovSampler {
  public:
    explicit NovikovSampler(std::uint64_t seed) : rng_(seed) {}
    Rational small_rational(int max_num = 6, int max_den = 4);
    QC nonzero_coeff();
    QC coeff();
    // random series with val >= lo (strict > if strict), up to `max_terms` terms
    NovikovScalar series(const Rational& lo, bool strict, int max_terms, Rational cutoff);
    NovikovScalar unit(Rational cutoff);          // val = 0
    NovikovScalar lambda_plus(Rational cutoff);   // val > 0
    std::mt19937_64& rng() { return rng_; }

  private:
    std::mt19937_64 rng_;
};

}  // namespace mf
