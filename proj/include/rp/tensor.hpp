#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rp {

// ============================================================================
// TruncatedTensor: element of the truncated tensor algebra T^(n)(R^d)
// ============================================================================

/// Dense element (a^0, a^1, ..., a^n) of T^(n)(R^d). Level k is stored as a
/// row-major array of d^k doubles; the flat index of (i_1,...,i_k) is
/// sum_j i_j * d^(k-j). Values are immutable in normal use: operations below
/// are pure and return fresh tensors.
class TruncatedTensor {
public:
    TruncatedTensor() = default;

    /// Zero tensor of the given shape (all levels zero, including level 0).
    TruncatedTensor(int dim, int level);

    /// Algebra unit (1, 0, ..., 0).
    static TruncatedTensor unit(int dim, int level);

    [[nodiscard]] int dim() const noexcept { return dim_; }
    [[nodiscard]] int level() const noexcept {
        return static_cast<int>(levels_.size()) - 1;
    }

    /// Number of entries at level k, i.e. d^k.
    [[nodiscard]] std::size_t level_size(int k) const;

    [[nodiscard]] std::span<const double> at(int k) const;
    [[nodiscard]] std::span<double> at(int k);

    [[nodiscard]] double scalar() const { return levels_[0][0]; }
    double& scalar() { return levels_[0][0]; }

    [[nodiscard]] bool has_unit_scalar(double tol = 1e-12) const;
    [[nodiscard]] bool all_finite() const;
    [[nodiscard]] bool same_shape(const TruncatedTensor& other) const noexcept;

private:
    int dim_ = 0;
    std::vector<std::vector<double>> levels_;
};

// ============================================================================
// Algebra operations
// ============================================================================

/// Truncated tensor product: level k of the result is sum_{i+j=k} a^i (x) b^j.
[[nodiscard]] TruncatedTensor otimes(const TruncatedTensor& a, const TruncatedTensor& b);

/// In-place variant a <- a (x) b for chaining loops.
void otimes_in_place(TruncatedTensor& a, const TruncatedTensor& b);

/// Unit-preserving sum a + b - 1 on unit tensors (level 0 stays 1).
[[nodiscard]] TruncatedTensor oplus(const TruncatedTensor& a, const TruncatedTensor& b);

/// Unit-preserving scaling 1 + lambda (a - 1): level 0 stays 1, levels >= 1 scale.
[[nodiscard]] TruncatedTensor unit_scale(double lambda, const TruncatedTensor& a);

/// Group inverse of a unit tensor: sum_{k=0}^n (1 - a)^{(x)k}.
[[nodiscard]] TruncatedTensor group_inverse(const TruncatedTensor& a);

/// exp of a tensor with zero scalar part (nilpotent series, terminates at n).
[[nodiscard]] TruncatedTensor tensor_exp(const TruncatedTensor& x);

/// log of a unit tensor (nilpotent series, terminates at n).
[[nodiscard]] TruncatedTensor tensor_log(const TruncatedTensor& a);

// componentwise vector operations (no unit bookkeeping)
[[nodiscard]] TruncatedTensor add(const TruncatedTensor& a, const TruncatedTensor& b);
[[nodiscard]] TruncatedTensor sub(const TruncatedTensor& a, const TruncatedTensor& b);
[[nodiscard]] TruncatedTensor scale(double lambda, const TruncatedTensor& a);
void add_in_place(TruncatedTensor& a, const TruncatedTensor& b);

// ============================================================================
// Norms, truncation, comparison
// ============================================================================

/// Frobenius norm of level k. Permutation-isometric and submultiplicative,
/// so it is an admissible family of tensor norms.
[[nodiscard]] double level_norm(const TruncatedTensor& a, int k);

/// Max of level_norm over levels 1..n (level 0 excluded).
[[nodiscard]] double max_level_norm(const TruncatedTensor& a);

/// Drop levels above k.
[[nodiscard]] TruncatedTensor truncate(const TruncatedTensor& a, int k);

/// Append zero levels up to n.
[[nodiscard]] TruncatedTensor zero_pad(const TruncatedTensor& a, int n);

/// Per-level comparison: ||a^k - b^k|| <= atol + rtol * max(||a^k||, ||b^k||).
[[nodiscard]] bool approx_equal(const TruncatedTensor& a, const TruncatedTensor& b,
                                double rtol = 1e-9, double atol = 1e-12);

/// Max over all levels of ||a^k - b^k||.
[[nodiscard]] double max_diff_norm(const TruncatedTensor& a, const TruncatedTensor& b);

/// Per-level norms of a (x) b - c without allocating the defect tensor.
/// `out` must have c.level()+1 entries; scratch is resized as needed.
void defect_norms(const TruncatedTensor& a, const TruncatedTensor& b,
                  const TruncatedTensor& c, std::vector<double>& scratch,
                  std::span<double> out);

}  // namespace rp
