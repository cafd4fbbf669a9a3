#pragma once

#include <memory>
#include <vector>

#include "rp/grid.hpp"

namespace rp {

// ============================================================================
// Scalar analysis: generalized factorial, beta(p), neo-classical inequality
// ============================================================================

/// Generalized factorial x! := Gamma(x+1), defined for x > -1.
[[nodiscard]] double gfact(double x);

/// The p-variation normalization constant
///   beta(p) = p (1 + sum_{r>=3} (2/(r-2))^((floor(p)+1)/p)).
/// The series is summed until the term drops below 1e-15 of the partial sum
/// (capped at 1e6 terms) and the integral tail bound is added, which keeps
/// the truncation error far below 1e-9 relative.
[[nodiscard]] double beta_constant(double p);

struct NeoClassicalResult {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

/// Checks (1/p) sum_i s^(i/p) t^((n-i)/p) / ((i/p)! ((n-i)/p)!)
///        <= (s+t)^(n/p) / (n/p)!  at tolerance 1e-12.
[[nodiscard]] NeoClassicalResult neoclassical_check(double p, int n, double s, double t);

// ============================================================================
// Control functions on the grid simplex
// ============================================================================

/// Superadditive, continuous, null-diagonal function w(s,t) restricted to
/// grid pairs. Three families:
///   Affine(c):        c * (t - s)
///   PVarOfPath(x, p): grid p-variation control of the level-1 path,
///                     sup over subpartitions of sum ||dx||^p (dynamic
///                     program, memoized over all pairs at construction)
///   Sum:              componentwise sum of controls (convex cone)
/// Immutable after construction; reads are thread-safe.
class Control {
public:
    enum class Family { Affine, PVar, Sum };

    /// Empty control; must be assigned from a factory before use.
    Control() = default;

    static Control affine(std::shared_ptr<const TimeGrid> grid, double c);
    static Control pvar(const PathSample& path, double p);
    static Control sum(std::vector<Control> terms);

    /// Evaluation at grid indices i <= j.
    [[nodiscard]] double operator()(int i, int j) const;

    /// Evaluation at on-grid times s <= t; off-grid or s > t is a domain error.
    [[nodiscard]] double eval(double s, double t) const;

    [[nodiscard]] Family family() const noexcept { return family_; }
    [[nodiscard]] const std::shared_ptr<const TimeGrid>& grid() const noexcept { return grid_; }
    [[nodiscard]] double affine_rate() const noexcept { return c_; }
    [[nodiscard]] double pvar_exponent() const noexcept { return p_; }
    [[nodiscard]] const PathSample& pvar_path() const { return path_; }
    [[nodiscard]] const std::vector<Control>& terms() const noexcept { return terms_; }

    /// Max superadditivity violation w(s,u)+w(u,t)-w(s,t) over grid triples.
    [[nodiscard]] double superadditivity_defect() const;

private:
    Family family_ = Family::Affine;
    std::shared_ptr<const TimeGrid> grid_;
    double c_ = 0.0;                  // Affine
    double p_ = 1.0;                  // PVar
    PathSample path_;                 // PVar
    std::vector<double> pvar_table_;  // PVar: (N+1)x(N+1) row-major, upper part
    std::vector<Control> terms_;      // Sum
};

}  // namespace rp
