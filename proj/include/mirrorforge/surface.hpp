#pragma once

#include "mirrorforge/lattice.hpp"
#include "mirrorforge/numeric.hpp"

#include <map>
#include <string>
#include <vector>

namespace mf {

// Picard-lattice bookkeeping for blowups of rational surfaces.  Classes are
// integer vectors in an abstract basis carrying an exact Gram matrix.
class SurfaceLattice {
  public:
    static SurfaceLattice toric(const Fan& fan);   // pre: smooth complete
    static SurfaceLattice projective_plane();      // basis (H)
    static SurfaceLattice quadric();               // basis (F1, F2)
    static SurfaceLattice hirzebruch(int a);       // basis (fiber, -a section)

    std::size_t rank() const { return basis_names_.size(); }
    const IntMat& gram() const { return gram_; }
    const std::vector<std::string>& basis_names() const { return basis_names_; }

    Int pair(const IntVec& a, const IntVec& b) const;
    IntVec canonical_class() const { return k_; }
    Int k_squared() const { return pair(k_, k_); }
    Int picard_determinant() const { return det(gram_); }
    std::array<int, 3> gram_signature() const { return signature(gram_); }

    // Named curve classes currently tracked (boundary components, exceptional
    // curves, auxiliary curves).
    const std::map<std::string, IntVec>& classes() const { return classes_; }
    const IntVec& cls(const std::string& name) const;
    void track(const std::string& name, IntVec v);
    const std::vector<std::string>& boundary() const { return boundary_; }
    void set_boundary(std::vector<std::string> names) { boundary_ = std::move(names); }

    struct StepRecord {
        std::string description;
        bool center_at_minus_one = false;
    };
    const std::vector<StepRecord>& history() const { return history_; }
    int blowup_count() const { return blowups_; }

    // Blow up an interior point of the named class: new exceptional class
    // `e_name`, strict transform subtracts E from `on`.
    void blowup_interior(const std::string& on, const std::string& e_name, bool at_minus_one);
    // Blow up the intersection point of two named classes (infinitely-near
    // centers): E is subtracted from both.
    void blowup_intersection(const std::string& c1, const std::string& c2,
                             const std::string& e_name, bool at_minus_one);
    // Contract a (-1)-curve: Castelnuovo check, then pass to its orthogonal
    // complement; all tracked classes are pushed forward.
    void contract(const std::string& name);

  private:
    std::vector<std::string> basis_names_;
    IntMat gram_;
    IntVec k_;
    std::map<std::string, IntVec> classes_;
    std::vector<std::string> boundary_;
    std::vector<StepRecord> history_;
    int blowups_ = 0;

    void append_exceptional(const std::string& e_name);
};

struct IdCycleReport {
    bool pass = false;
    int components = 0;
    std::vector<std::string> problems;
};

// Kodaira I_d boundary check: d components, each square -2 (d >= 2), cyclic
// adjacency, sum = -K with square 0.  d = 1 expects a single nodal curve of
// class -K and square 0; d = 2 expects the two components to meet twice.
IdCycleReport verify_Id_cycle(const SurfaceLattice& s);

// Euler numbers: I_n -> n, I*_n -> n+6, II* -> 10, III* -> 9, IV* -> 8.
int fiber_euler_number(const std::string& fiber_type);
bool euler_configuration_check(const std::vector<std::string>& config);

struct AppendixAResult {
    int d = 0;
    SurfaceLattice lattice;
    IdCycleReport cycle;
    Int k_squared{0};
    Int picard_det{0};
    int blowups = 0;
    bool all_centers_minus_one = false;
    std::string configuration;        // named singular configuration, if any
    bool euler_ok = false;
};

// Scripted constructions of the rational elliptic surfaces with an I_d fibre
// and trivial period, d = 1..5.
AppendixAResult run_appendix_A(int d);

// Script text format: `blowup interior D1@-1`, `blowup infnear E3^D2`,
// `contract E1`.  Lines starting with # are comments.
void run_script_line(SurfaceLattice& s, const std::string& line);

}  // namespace mf
