#pragma once

#include <memory>
#include <vector>

namespace rp {

// ============================================================================
// TimeGrid: ordered sample times on J = [S, T]
// ============================================================================

/// Strictly increasing times t_0 = S < ... < t_N = T. Two-parameter
/// functionals live on the simplex of index pairs (i, j) with i <= j.
class TimeGrid {
public:
    explicit TimeGrid(std::vector<double> times);

    /// Uniform grid with n_intervals steps on [s, t].
    static std::shared_ptr<const TimeGrid> uniform(double s, double t, int n_intervals);

    [[nodiscard]] int intervals() const noexcept { return static_cast<int>(times_.size()) - 1; }
    [[nodiscard]] int points() const noexcept { return static_cast<int>(times_.size()); }
    [[nodiscard]] double time(int i) const { return times_.at(static_cast<std::size_t>(i)); }
    [[nodiscard]] const std::vector<double>& times() const noexcept { return times_; }
    [[nodiscard]] double start() const noexcept { return times_.front(); }
    [[nodiscard]] double end() const noexcept { return times_.back(); }
    [[nodiscard]] double span() const noexcept { return end() - start(); }

    /// Index of an on-grid time; throws std::domain_error if t is off-grid.
    [[nodiscard]] int index_of(double t) const;

    [[nodiscard]] bool same_times(const TimeGrid& other, double tol = 0.0) const;

private:
    std::vector<double> times_;
};

// ============================================================================
// PathSample: a sampled path in R^d on a grid
// ============================================================================

struct PathSample {
    int dim = 0;
    std::shared_ptr<const TimeGrid> grid;
    std::vector<std::vector<double>> values;  // one R^d point per grid time

    [[nodiscard]] std::vector<double> displacement(int i, int j) const;
    void validate() const;
};

}  // namespace rp
