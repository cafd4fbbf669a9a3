#pragma once

#include <array>
#include <vector>

#include "rp/analysis.hpp"
#include "rp/functional.hpp"

namespace rp {

// ============================================================================
// Rough sewing on the grid
// ============================================================================

/// Result of upgrading an almost multiplicative functional to a
/// multiplicative one.
struct SewingResult {
    GridFunctional output;                     // multiplicative, Increments kind
    double closeness_K = 0.0;                  // sup ||out^i - in^i|| / w^theta
    std::vector<double> per_level_convergence; // full- vs half-partition deltas
};

struct SewOptions {
    bool check_preconditions = true;   // almost multiplicativity + p-variation fits
    bool check_output = true;          // assert the dense limit is multiplicative
    double output_mult_tol = 1e-8;
};

/// The rough sewing map realized on the grid: for m = 0..k-1, level m+1 of
/// the output is the value of (1, out^1, ..., out^m, in^{m+1}) chained over
/// the finest grid partition of [s, t]. Levels other than m+1 are carried
/// over between stages. The partition limit on a finite grid is the
/// superproduct over all adjacent intervals, which makes the map idempotent
/// on multiplicative inputs and independent of (p, theta, w); the witness
/// parameters enter the precondition checks and the fitted closeness
/// constant only.
[[nodiscard]] SewingResult sew(const GridFunctional& X, const Control& w,
                               double theta, double p, const SewOptions& opts = {});

/// The upgrading sequence X^(0), ..., X^(k) of the construction. Re-sewing
/// any X^(m) reproduces the same final output.
[[nodiscard]] std::vector<GridFunctional> sew_stepwise_trace(const GridFunctional& X,
                                                             const Control& w,
                                                             double theta, double p);

/// One-level extension of a multiplicative functional: each adjacent
/// increment a is extended to exp_{n+1}(zero_pad(log_n(a))), the limit of
/// sewing the zero-padded trivial embedding over within-segment refinements
/// of the log-linear interpolant. Exponent-independent: p only gates the
/// domain p < n + 1.
[[nodiscard]] GridFunctional ext(const GridFunctional& X, double p,
                                 double mult_tol = 1e-8);

struct ClosePairResult {
    bool bound_holds = false;     // ||Y^j - X^j|| <= K w^theta on all pairs
    std::array<int, 2> worst_pair{0, 0};
    double worst_excess = 0.0;    // max ||Y^j - X^j|| - K w^theta
    bool same_sewing = false;     // sew(X) == sew(Y) within tol
    double sewing_delta = 0.0;
};

/// Checks the closeness hypothesis ||Y^j - X^j|| <= K w(s,t)^theta and that
/// the two sewings coincide (within 1e-8 per level).
[[nodiscard]] ClosePairResult sew_close_pair_check(const GridFunctional& X,
                                                   const GridFunctional& Y,
                                                   const Control& w, double theta,
                                                   double K, double p);

}  // namespace rp
