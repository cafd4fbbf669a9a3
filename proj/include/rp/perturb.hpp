#pragma once

#include <optional>
#include <vector>

#include "rp/analysis.hpp"
#include "rp/functional.hpp"
#include "rp/sewing.hpp"

namespace rp {

// ============================================================================
// Regularity witnesses and perturbation spaces
// ============================================================================

/// Certificate that a functional (or increment path) obeys the level-wise
/// bound ||H^j_{s,t}|| <= K w(s,t)^phi with phi in (1 - 1/p, 1]. For almost
/// multiplicative elements theta > 1 certifies the defect bound as well.
struct RegularityWitness {
    double p = 2.0;
    double phi = 1.0;
    std::optional<double> theta;
    double K = 0.0;
    Control control;

    void validate_exponents() const;
};

/// Perturbation-space element: a multiplicative functional all of whose
/// levels obey the witness bound.
struct HElement {
    GridFunctional functional;
    RegularityWitness witness;
};

/// Same shape, but the functional is only theta-almost multiplicative.
struct AlmostHElement {
    GridFunctional functional;
    RegularityWitness witness;
};

/// Increment-space element: a grid path t -> I_t in T^(n) with zero scalar
/// level and I_{t_0} = 0, whose level-wise increments obey the witness bound
/// (the top level additionally obeys the k/p-exponent bound when n equals
/// floor(p)).
struct IncrementPath {
    std::shared_ptr<const TimeGrid> grid;
    int dim = 0;
    int level = 0;
    std::vector<TruncatedTensor> values;
    RegularityWitness witness;

    [[nodiscard]] GridFunctional as_functional() const;
};

/// Worst bound violations; zero when the element is valid.
double h_element_violation(const HElement& h, double mult_tol = 1e-8);
double increment_path_violation(const IncrementPath& i);

IncrementPath add_paths(const IncrementPath& a, const IncrementPath& b);
IncrementPath scale_path(double lambda, const IncrementPath& a);
IncrementPath zero_path(std::shared_ptr<const TimeGrid> grid, int dim, int level,
                        double p, const Control& w);

// ============================================================================
// Membership, development, lift
// ============================================================================

struct HMembership {
    bool ok = false;
    double phi = 0.0;            // largest admissible exponent on the 1e-3 lattice
    double K = 0.0;              // sup ||H^j|| / w^phi at that exponent
    double phi_envelope = 0.0;   // scaling exponent estimated across dyadic spans
    std::vector<double> qj;      // level-wise exponents j / phi
};

/// Fits the largest phi in (1 - 1/p, 1] whose constant is stable under grid
/// refinement. The scaling exponent of each level envelope is estimated by a
/// log-log regression over dyadic pair spans; phi is the largest lattice
/// point below the envelope exponent, and membership additionally requires
/// the truncations H(j) to have finite q_j-variation.
[[nodiscard]] HMembership h_membership(const GridFunctional& H, const Control& w, double p);

/// Per-level innovation of H relative to the extension of its lower levels:
/// level 1 copies H^1 and level j+1 is H^{j+1} - Ext_j(H(j))^{j+1}. The
/// result is additive per level and is returned as the increment path
/// t -> dev(H)_{t_0, t}.
[[nodiscard]] IncrementPath develop(const HElement& h);

/// Recursive lift: level 1 is I^1 and level j is Ext_{j-1}(lift(I(j-1)))^j + I^j.
/// Inverse of develop.
[[nodiscard]] HElement lift(const IncrementPath& i);

// ============================================================================
// The perturbation operation and scalar action
// ============================================================================

/// X [+] H := sewing of X (+) H at theta = phi + 1/p under the combined
/// control w_X + w_H. Also equals the sewing of the pointwise product X (x) H.
[[nodiscard]] GridFunctional perturb(const GridFunctional& X, const Control& w_x,
                                     double p, const HElement& h);
[[nodiscard]] GridFunctional perturb(const GridFunctional& X, const Control& w_x,
                                     double p, const AlmostHElement& h);

/// a (.) H := lift(a * develop(H)), the scalar action transported from
/// increment space.
[[nodiscard]] HElement scale_perturbation(double a, const HElement& h);

struct AssocCheck {
    GridFunctional lhs;   // (X [+] H) [+] H~
    GridFunctional rhs;   // X [+] (H [+] H~)
    double max_delta = 0.0;
};

[[nodiscard]] AssocCheck perturb_assoc_check(const GridFunctional& X, const Control& w_x,
                                             double p, const HElement& h,
                                             const HElement& ht);

struct KernelCheck {
    bool fixed = false;       // X [+] H == X within tol
    bool h_is_unit = false;   // H == unit within tol
    bool consistent = false;  // the two agree (trivial kernel)
    double deviation = 0.0;   // max pair distance of X [+] H from X
};

[[nodiscard]] KernelCheck kernel_check(const GridFunctional& X, const Control& w_x,
                                       double p, const HElement& h, double tol);

struct DisplacementCheck {
    double sewing_delta = 0.0;        // || S(H~) - S(H^) ||
    double displacement_delta = 0.0;  // || X[+]H~ - X[+]H^ ||
    double vs_sewn_delta = 0.0;       // || X[+]H~ - X[+]S(H~) ||
    bool forward_ok = false;
    bool converse_ok = false;
};

/// Displacements of X depend only on the sewing of the (almost) perturbation:
/// equal sewings force equal X [+] ., and conversely equal displacements
/// force equal sewings.
[[nodiscard]] DisplacementCheck almost_displacement_check(const GridFunctional& X,
                                                          const Control& w_x, double p,
                                                          const AlmostHElement& ht,
                                                          const AlmostHElement& hh,
                                                          double tol);

}  // namespace rp
