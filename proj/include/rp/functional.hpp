#pragma once

#include <array>
#include <functional>
#include <memory>
#include <vector>

#include "rp/analysis.hpp"
#include "rp/grid.hpp"
#include "rp/tensor.hpp"

namespace rp {

// ============================================================================
// GridFunctional: two-parameter map X_{s,t} on the grid simplex
// ============================================================================

/// Two-parameter functional on grid index pairs (i, j), i <= j, with values
/// in T^(n)(R^d). Storage kinds:
///   Increments: adjacent increments X_{t_{j-1}, t_j}; non-adjacent pairs are
///               chained with the tensor product (multiplicative by
///               construction). Scalar level 1.
///   Dense:      explicit upper-triangular table of all pairs.
///   Additive:   per-point path values I_t; X_{s,t} = I_t - I_s level-wise.
///               Scalar level 0.
///   Closure:    pure evaluation rule.
/// Immutable after construction.
class GridFunctional {
public:
    enum class Kind { Increments, Dense, Additive, Closure };

    using EvalFn = std::function<TruncatedTensor(int, int)>;

    /// Empty functional; must be assigned from a factory before use.
    GridFunctional() = default;

    static GridFunctional from_increments(std::shared_ptr<const TimeGrid> grid,
                                          int dim, int level,
                                          std::vector<TruncatedTensor> adjacent);
    static GridFunctional dense(std::shared_ptr<const TimeGrid> grid,
                                int dim, int level,
                                std::vector<TruncatedTensor> upper_triangular);
    static GridFunctional additive_path(std::shared_ptr<const TimeGrid> grid,
                                        int dim, int level,
                                        std::vector<TruncatedTensor> point_values);
    static GridFunctional closure(std::shared_ptr<const TimeGrid> grid,
                                  int dim, int level, bool unit_scalar, EvalFn fn);

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] const std::shared_ptr<const TimeGrid>& grid() const noexcept { return grid_; }
    [[nodiscard]] int dim() const noexcept { return dim_; }
    [[nodiscard]] int level() const noexcept { return level_; }
    [[nodiscard]] int intervals() const noexcept { return grid_->intervals(); }
    [[nodiscard]] bool unit_scalar() const noexcept { return unit_scalar_; }

    /// Value over (t_i, t_j); i == j gives the unit (or zero, if additive).
    [[nodiscard]] TruncatedTensor eval(int i, int j) const;

    /// Adjacent increment over (t_{j-1}, t_j), j in 1..N.
    [[nodiscard]] TruncatedTensor adjacent(int j) const;

    /// Dense-materialized copy of this functional (all pairs precomputed).
    [[nodiscard]] GridFunctional materialized() const;

    /// Zero-copy access for Dense functionals.
    [[nodiscard]] const TruncatedTensor& dense_at(int i, int j) const;

    /// Raw storage (adjacent list, dense table, or path values).
    [[nodiscard]] const std::vector<TruncatedTensor>& data() const noexcept { return data_; }

private:
    [[nodiscard]] std::size_t dense_index(int i, int j) const;

    Kind kind_ = Kind::Dense;
    std::shared_ptr<const TimeGrid> grid_;
    int dim_ = 0;
    int level_ = 0;
    bool unit_scalar_ = true;
    std::vector<TruncatedTensor> data_;
    EvalFn fn_;
};

// ============================================================================
// Multiplicative defect and membership fits
// ============================================================================

struct DefectReport {
    std::vector<double> max_defect_per_level;  // levels 1..n
    std::array<int, 3> worst_triple{0, 0, 0};
    double worst_defect = 0.0;
    // scaling fit of the defect against the affine control (t - s):
    // defect ~ K_fit * (t-s)^theta_fit over triples with nonzero defect
    double theta_fit = 0.0;
    double K_fit = 0.0;
};

struct MultiplicativityResult {
    bool multiplicative = false;
    DefectReport report;
};

struct AlmostMultFit {
    double K = 0.0;
    bool ok = false;
    std::array<int, 3> worst_triple{0, 0, 0};
};

struct PvarFit {
    double K = 0.0;
    bool finite = false;
    std::array<int, 2> worst_pair{0, 0};
};

/// Multiplicative defect X_{s,u} (x) X_{u,t} - X_{s,t} at grid indices.
[[nodiscard]] TruncatedTensor defect(const GridFunctional& X, int i, int u, int j);

/// Max defect level-norm over all grid triples, compared against tol.
[[nodiscard]] MultiplicativityResult is_multiplicative(const GridFunctional& X, double tol);

/// K = sup over triples and levels of ||defect^i|| / w(s,t)^theta. Pairs with
/// w = 0 are skipped when the defect vanishes too; a nonzero defect over a
/// null-control pair makes the fit infinite (ok = false).
[[nodiscard]] AlmostMultFit almost_mult_fit(const GridFunctional& X, const Control& w,
                                            double theta);

/// K = sup over pairs and levels i of ||X^i_{s,t}|| beta(p) (i/p)! / w(s,t)^(i/p).
[[nodiscard]] PvarFit pvar_fit(const GridFunctional& X, const Control& w, double p);

// ============================================================================
// Constructions
// ============================================================================

/// Exact signature of the piecewise-linear interpolant of a sampled path:
/// the adjacent increment over [t_{j-1}, t_j] is exp of the displacement,
/// with levels w, w(x)w/2!, ..., w^(x)n/n!. Multiplicative by construction.
[[nodiscard]] GridFunctional signature(const PathSample& path, int level);

/// Grid path t -> I_t (zero scalar level) viewed as the additive functional
/// X_{s,t} = I_t - I_s.
[[nodiscard]] GridFunctional path_to_increments(std::shared_ptr<const TimeGrid> grid,
                                                std::vector<TruncatedTensor> point_values);

/// Inverse of path_to_increments: requires additivity within tol.
[[nodiscard]] std::vector<TruncatedTensor> increments_to_path(const GridFunctional& I,
                                                              double tol = 1e-10);

/// Pointwise unit-preserving sum (X (+) H)_{s,t} = X_{s,t} (+) H_{s,t}, dense.
[[nodiscard]] GridFunctional oplus(const GridFunctional& X, const GridFunctional& H);

/// Pointwise tensor product (X (x) H)_{s,t} = X_{s,t} (x) H_{s,t}, dense.
[[nodiscard]] GridFunctional otimes_pointwise(const GridFunctional& X,
                                              const GridFunctional& H);

/// Level truncation applied pairwise (adjacent increments for Increments kind).
[[nodiscard]] GridFunctional truncate_functional(const GridFunctional& X, int k);

/// Max over pairs and levels of ||X^k_{s,t} - Y^k_{s,t}||.
[[nodiscard]] double max_pair_distance(const GridFunctional& X, const GridFunctional& Y);

/// Level-2 group-likeness surrogate: max over pairs of
/// || Sym(X^2_{s,t}) - X^1_{s,t} (x) X^1_{s,t} / 2 ||.
[[nodiscard]] double level2_geometricity_defect(const GridFunctional& X);

/// Max additivity defect over triples: || (X_{s,u} + X_{u,t}) - X_{s,t} ||.
[[nodiscard]] double additivity_defect(const GridFunctional& X);

}  // namespace rp
