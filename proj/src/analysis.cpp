#include "rp/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rp {

// ---------------------------------------------------------------------------
// TimeGrid / PathSample
// ---------------------------------------------------------------------------

TimeGrid::TimeGrid(std::vector<double> times) : times_(std::move(times)) {
    if (times_.size() < 2)
        throw std::invalid_argument("TimeGrid: need at least two times");
    for (std::size_t i = 1; i < times_.size(); ++i)
        if (!(times_[i] > times_[i - 1]))
            throw std::invalid_argument("TimeGrid: times must be strictly increasing");
}

std::shared_ptr<const TimeGrid> TimeGrid::uniform(double s, double t, int n_intervals) {
    if (n_intervals < 1 || !(t > s))
        throw std::invalid_argument("TimeGrid::uniform: bad interval");
    std::vector<double> ts(static_cast<std::size_t>(n_intervals) + 1);
    for (int i = 0; i <= n_intervals; ++i)
        ts[i] = s + (t - s) * static_cast<double>(i) / n_intervals;
    ts.back() = t;
    return std::make_shared<const TimeGrid>(std::move(ts));
}

int TimeGrid::index_of(double t) const {
    auto it = std::lower_bound(times_.begin(), times_.end(), t);
    const double tol = 1e-12 * std::max(1.0, std::abs(span()));
    if (it != times_.end() && std::abs(*it - t) <= tol)
        return static_cast<int>(it - times_.begin());
    if (it != times_.begin() && std::abs(*(it - 1) - t) <= tol)
        return static_cast<int>(it - times_.begin()) - 1;
    throw std::domain_error("TimeGrid: time " + std::to_string(t) + " is off-grid");
}

bool TimeGrid::same_times(const TimeGrid& other, double tol) const {
    if (times_.size() != other.times_.size()) return false;
    for (std::size_t i = 0; i < times_.size(); ++i)
        if (std::abs(times_[i] - other.times_[i]) > tol) return false;
    return true;
}

std::vector<double> PathSample::displacement(int i, int j) const {
    std::vector<double> w(static_cast<std::size_t>(dim));
    for (int c = 0; c < dim; ++c) w[c] = values[j][c] - values[i][c];
    return w;
}

void PathSample::validate() const {
    if (dim < 1) throw std::invalid_argument("PathSample: dim must be positive");
    if (!grid) throw std::invalid_argument("PathSample: missing grid");
    if (values.size() != static_cast<std::size_t>(grid->points()))
        throw std::invalid_argument("PathSample: one value per grid time required");
    for (const auto& v : values)
        if (v.size() != static_cast<std::size_t>(dim))
            throw std::invalid_argument("PathSample: value dimension mismatch");
}

// ---------------------------------------------------------------------------
// gfact / beta / neo-classical
// ---------------------------------------------------------------------------

double gfact(double x) {
    if (!(x > -1.0))
        throw std::domain_error("gfact: requires x > -1, got " + std::to_string(x));
    return std::tgamma(x + 1.0);
}

double beta_constant(double p) {
    if (!(p >= 1.0))
        throw std::domain_error("beta_constant: requires p >= 1, got " + std::to_string(p));
    const double e = (std::floor(p) + 1.0) / p;  // > 1, so the series converges
    double partial = 1.0;
    std::size_t m = 1;
    const std::size_t m_cap = 1'000'000;
    for (; m <= m_cap; ++m) {
        const double term = std::pow(2.0 / static_cast<double>(m), e);
        partial += term;
        if (term < 1e-15 * partial) break;
    }
    // integral tail: sum_{k>m} (2/k)^e <= 2^e m^(1-e) / (e-1)
    const double tail =
        std::pow(2.0, e) * std::pow(static_cast<double>(m), 1.0 - e) / (e - 1.0);
    return p * (partial + tail);
}

NeoClassicalResult neoclassical_check(double p, int n, double s, double t) {
    if (!(p >= 1.0)) throw std::domain_error("neoclassical_check: requires p >= 1");
    if (n < 0) throw std::domain_error("neoclassical_check: requires n >= 0");
    if (s < 0.0 || t < 0.0) throw std::domain_error("neoclassical_check: requires s,t >= 0");
    NeoClassicalResult r;
    for (int i = 0; i <= n; ++i) {
        const double a = static_cast<double>(i) / p;
        const double b = static_cast<double>(n - i) / p;
        r.lhs += std::pow(s, a) * std::pow(t, b) / (gfact(a) * gfact(b));
    }
    r.lhs /= p;
    r.rhs = std::pow(s + t, static_cast<double>(n) / p) / gfact(static_cast<double>(n) / p);
    r.holds = r.lhs <= r.rhs + 1e-12;
    return r;
}

// ---------------------------------------------------------------------------
// Control
// ---------------------------------------------------------------------------

Control Control::affine(std::shared_ptr<const TimeGrid> grid, double c) {
    if (!grid) throw std::invalid_argument("Control::affine: missing grid");
    if (c < 0.0) throw std::invalid_argument("Control::affine: rate must be >= 0");
    Control w;
    w.family_ = Family::Affine;
    w.grid_ = std::move(grid);
    w.c_ = c;
    return w;
}

Control Control::pvar(const PathSample& path, double p) {
    path.validate();
    if (!(p >= 1.0)) throw std::invalid_argument("Control::pvar: requires p >= 1");
    Control w;
    w.family_ = Family::PVar;
    w.grid_ = path.grid;
    w.p_ = p;
    w.path_ = path;

    const int np = path.grid->points();
    // ||x_j - x_i||^p for all pairs
    std::vector<double> dp(static_cast<std::size_t>(np) * np, 0.0);
    for (int i = 0; i < np; ++i)
        for (int j = i + 1; j < np; ++j) {
            double s = 0.0;
            for (int c = 0; c < path.dim; ++c) {
                const double d = path.values[j][c] - path.values[i][c];
                s += d * d;
            }
            dp[static_cast<std::size_t>(i) * np + j] = std::pow(std::sqrt(s), p);
        }

    // One DP sweep per start index a gives the p-variation over [a, j] for
    // every j >= a: V(j) = max_{a <= i < j} V(i) + ||x_j - x_i||^p.
    w.pvar_table_.assign(static_cast<std::size_t>(np) * np, 0.0);
    std::vector<double> v(static_cast<std::size_t>(np));
    for (int a = 0; a < np; ++a) {
        v[a] = 0.0;
        for (int j = a + 1; j < np; ++j) {
            double best = 0.0;
            for (int i = a; i < j; ++i)
                best = std::max(best, v[i] + dp[static_cast<std::size_t>(i) * np + j]);
            v[j] = best;
            w.pvar_table_[static_cast<std::size_t>(a) * np + j] = best;
        }
    }
    return w;
}

Control Control::sum(std::vector<Control> terms) {
    if (terms.empty()) throw std::invalid_argument("Control::sum: empty term list");
    for (std::size_t i = 1; i < terms.size(); ++i)
        if (!terms[i].grid()->same_times(*terms[0].grid()))
            throw std::invalid_argument("Control::sum: terms live on different grids");
    Control w;
    w.family_ = Family::Sum;
    w.grid_ = terms[0].grid();
    w.terms_ = std::move(terms);
    return w;
}

double Control::operator()(int i, int j) const {
    const int np = grid_->points();
    if (i < 0 || j >= np || i > j)
        throw std::domain_error("Control: bad index pair (" + std::to_string(i) + "," +
                                std::to_string(j) + ")");
    switch (family_) {
        case Family::Affine:
            return c_ * (grid_->time(j) - grid_->time(i));
        case Family::PVar:
            return pvar_table_[static_cast<std::size_t>(i) * np + j];
        case Family::Sum: {
            double s = 0.0;
            for (const auto& t : terms_) s += t(i, j);
            return s;
        }
    }
    return 0.0;
}

double Control::eval(double s, double t) const {
    if (s > t) throw std::domain_error("Control::eval: requires s <= t");
    return (*this)(grid_->index_of(s), grid_->index_of(t));
}

double Control::superadditivity_defect() const {
    const int np = grid_->points();
    double worst = 0.0;
    for (int i = 0; i < np; ++i)
        for (int u = i; u < np; ++u)
            for (int j = u; j < np; ++j)
                worst = std::max(worst, (*this)(i, u) + (*this)(u, j) - (*this)(i, j));
    return worst;
}

}  // namespace rp
