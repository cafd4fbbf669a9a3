#include "rp/functional.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace rp {

namespace {

void require_pair(const GridFunctional& X, int i, int j, const char* op) {
    if (i < 0 || j > X.intervals() || i > j)
        throw std::domain_error(std::string(op) + ": bad index pair (" + std::to_string(i) +
                                "," + std::to_string(j) + ")");
}

void require_compatible(const GridFunctional& X, const GridFunctional& H, const char* op) {
    if (X.dim() != H.dim() || X.level() != H.level())
        throw std::invalid_argument(std::string(op) + ": dimension/level mismatch");
    if (!X.grid()->same_times(*H.grid()))
        throw std::invalid_argument(std::string(op) + ": functionals live on different grids");
}

}  // namespace

// ---------------------------------------------------------------------------
// GridFunctional
// ---------------------------------------------------------------------------

GridFunctional GridFunctional::from_increments(std::shared_ptr<const TimeGrid> grid,
                                               int dim, int level,
                                               std::vector<TruncatedTensor> adjacent) {
    if (!grid) throw std::invalid_argument("GridFunctional: missing grid");
    if (adjacent.size() != static_cast<std::size_t>(grid->intervals()))
        throw std::invalid_argument("GridFunctional: need one increment per interval");
    for (const auto& a : adjacent) {
        if (a.dim() != dim || a.level() != level)
            throw std::invalid_argument("GridFunctional: increment shape mismatch");
        if (!a.has_unit_scalar())
            throw std::domain_error("GridFunctional: increments must have unit scalar");
    }
    GridFunctional f;
    f.kind_ = Kind::Increments;
    f.grid_ = std::move(grid);
    f.dim_ = dim;
    f.level_ = level;
    f.unit_scalar_ = true;
    f.data_ = std::move(adjacent);
    return f;
}

GridFunctional GridFunctional::dense(std::shared_ptr<const TimeGrid> grid,
                                     int dim, int level,
                                     std::vector<TruncatedTensor> upper_triangular) {
    if (!grid) throw std::invalid_argument("GridFunctional: missing grid");
    const int np = grid->points();
    const std::size_t need = static_cast<std::size_t>(np) * (np + 1) / 2;
    if (upper_triangular.size() != need)
        throw std::invalid_argument("GridFunctional: dense table needs " +
                                    std::to_string(need) + " entries, got " +
                                    std::to_string(upper_triangular.size()));
    GridFunctional f;
    f.kind_ = Kind::Dense;
    f.grid_ = std::move(grid);
    f.dim_ = dim;
    f.level_ = level;
    f.unit_scalar_ = upper_triangular.front().has_unit_scalar();
    f.data_ = std::move(upper_triangular);
    return f;
}

GridFunctional GridFunctional::additive_path(std::shared_ptr<const TimeGrid> grid,
                                             int dim, int level,
                                             std::vector<TruncatedTensor> point_values) {
    if (!grid) throw std::invalid_argument("GridFunctional: missing grid");
    if (point_values.size() != static_cast<std::size_t>(grid->points()))
        throw std::invalid_argument("GridFunctional: need one value per grid time");
    for (const auto& v : point_values)
        if (v.dim() != dim || v.level() != level)
            throw std::invalid_argument("GridFunctional: path value shape mismatch");
    GridFunctional f;
    f.kind_ = Kind::Additive;
    f.grid_ = std::move(grid);
    f.dim_ = dim;
    f.level_ = level;
    f.unit_scalar_ = false;
    f.data_ = std::move(point_values);
    return f;
}

GridFunctional GridFunctional::closure(std::shared_ptr<const TimeGrid> grid,
                                       int dim, int level, bool unit_scalar, EvalFn fn) {
    if (!grid) throw std::invalid_argument("GridFunctional: missing grid");
    GridFunctional f;
    f.kind_ = Kind::Closure;
    f.grid_ = std::move(grid);
    f.dim_ = dim;
    f.level_ = level;
    f.unit_scalar_ = unit_scalar;
    f.fn_ = std::move(fn);
    return f;
}

std::size_t GridFunctional::dense_index(int i, int j) const {
    const std::size_t np = static_cast<std::size_t>(grid_->points());
    const std::size_t ui = static_cast<std::size_t>(i);
    // row i starts after rows 0..i-1, row r holding np - r entries
    return ui * np - ui * (ui - 1) / 2 + static_cast<std::size_t>(j - i);
}

TruncatedTensor GridFunctional::eval(int i, int j) const {
    require_pair(*this, i, j, "GridFunctional::eval");
    switch (kind_) {
        case Kind::Increments: {
            if (i == j) return TruncatedTensor::unit(dim_, level_);
            TruncatedTensor acc = data_[static_cast<std::size_t>(i)];
            for (int k = i + 2; k <= j; ++k)
                otimes_in_place(acc, data_[static_cast<std::size_t>(k - 1)]);
            return acc;
        }
        case Kind::Dense:
            return data_[dense_index(i, j)];
        case Kind::Additive:
            return sub(data_[static_cast<std::size_t>(j)], data_[static_cast<std::size_t>(i)]);
        case Kind::Closure:
            return fn_(i, j);
    }
    throw std::logic_error("GridFunctional::eval: bad kind");
}

TruncatedTensor GridFunctional::adjacent(int j) const {
    if (j < 1 || j > intervals())
        throw std::domain_error("GridFunctional::adjacent: index out of range");
    if (kind_ == Kind::Increments) return data_[static_cast<std::size_t>(j - 1)];
    return eval(j - 1, j);
}

GridFunctional GridFunctional::materialized() const {
    const int np = grid_->points();
    std::vector<TruncatedTensor> table;
    table.reserve(static_cast<std::size_t>(np) * (np + 1) / 2);
    if (kind_ == Kind::Increments) {
        // prefix chaining per row keeps materialization at O(N^2) products
        for (int i = 0; i < np; ++i) {
            table.push_back(TruncatedTensor::unit(dim_, level_));
            TruncatedTensor acc = TruncatedTensor::unit(dim_, level_);
            for (int j = i + 1; j < np; ++j) {
                otimes_in_place(acc, data_[static_cast<std::size_t>(j - 1)]);
                table.push_back(acc);
            }
        }
    } else {
        for (int i = 0; i < np; ++i)
            for (int j = i; j < np; ++j) table.push_back(eval(i, j));
    }
    auto f = dense(grid_, dim_, level_, std::move(table));
    f.unit_scalar_ = unit_scalar_;
    return f;
}

const TruncatedTensor& GridFunctional::dense_at(int i, int j) const {
    if (kind_ != Kind::Dense)
        throw std::logic_error("GridFunctional::dense_at: not materialized");
    require_pair(*this, i, j, "GridFunctional::dense_at");
    return data_[dense_index(i, j)];
}

// ---------------------------------------------------------------------------
// Defect and fits
// ---------------------------------------------------------------------------

TruncatedTensor defect(const GridFunctional& X, int i, int u, int j) {
    require_pair(X, i, u, "defect");
    require_pair(X, u, j, "defect");
    return sub(otimes(X.eval(i, u), X.eval(u, j)), X.eval(i, j));
}

MultiplicativityResult is_multiplicative(const GridFunctional& X, double tol) {
    const auto Xd = X.kind() == GridFunctional::Kind::Dense ? X : X.materialized();
    const int np = Xd.grid()->points();
    const int n = Xd.level();

    MultiplicativityResult res;
    res.report.max_defect_per_level.assign(static_cast<std::size_t>(n), 0.0);

    std::vector<double> scratch;
    std::vector<double> norms(static_cast<std::size_t>(n) + 1);
    double sum_lx = 0.0, sum_ly = 0.0, sum_lxx = 0.0, sum_lxy = 0.0;
    std::size_t n_fit = 0;

    for (int i = 0; i < np; ++i)
        for (int u = i + 1; u < np; ++u)
            for (int j = u + 1; j < np; ++j) {
                defect_norms(Xd.dense_at(i, u), Xd.dense_at(u, j), Xd.dense_at(i, j),
                             scratch, norms);
                double worst = 0.0;
                for (int k = 1; k <= n; ++k) {
                    res.report.max_defect_per_level[k - 1] =
                        std::max(res.report.max_defect_per_level[k - 1], norms[k]);
                    worst = std::max(worst, norms[k]);
                }
                if (worst > res.report.worst_defect) {
                    res.report.worst_defect = worst;
                    res.report.worst_triple = {i, u, j};
                }
                if (worst > 1e-300) {
                    const double lx = std::log(Xd.grid()->time(j) - Xd.grid()->time(i));
                    const double ly = std::log(worst);
                    sum_lx += lx;
                    sum_ly += ly;
                    sum_lxx += lx * lx;
                    sum_lxy += lx * ly;
                    ++n_fit;
                }
            }

    // least-squares scaling fit of the defect against the affine control (t - s)
    if (n_fit >= 2) {
        const double det = static_cast<double>(n_fit) * sum_lxx - sum_lx * sum_lx;
        if (std::abs(det) > 1e-300) {
            res.report.theta_fit =
                (static_cast<double>(n_fit) * sum_lxy - sum_lx * sum_ly) / det;
            res.report.K_fit = std::exp(
                (sum_ly - res.report.theta_fit * sum_lx) / static_cast<double>(n_fit));
        }
    }
    res.multiplicative = res.report.worst_defect <= tol;
    return res;
}

AlmostMultFit almost_mult_fit(const GridFunctional& X, const Control& w, double theta) {
    if (!(theta > 1.0)) throw std::domain_error("almost_mult_fit: requires theta > 1");
    if (!w.grid()->same_times(*X.grid()))
        throw std::invalid_argument("almost_mult_fit: control grid mismatch");
    const auto Xd = X.kind() == GridFunctional::Kind::Dense ? X : X.materialized();
    const int np = Xd.grid()->points();
    const int n = Xd.level();
    constexpr double atol = 1e-13;

    AlmostMultFit fit;
    fit.ok = true;
    std::vector<double> scratch;
    std::vector<double> norms(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i < np; ++i)
        for (int j = i + 2; j < np; ++j) {
            const double wij = w(i, j);
            const double denom = wij > 0.0 ? std::pow(wij, theta) : 0.0;
            for (int u = i + 1; u < j; ++u) {
                defect_norms(Xd.dense_at(i, u), Xd.dense_at(u, j), Xd.dense_at(i, j),
                             scratch, norms);
                double worst = 0.0;
                for (int k = 1; k <= n; ++k) worst = std::max(worst, norms[k]);
                if (wij <= 0.0) {
                    if (worst > atol) {
                        fit.ok = false;
                        fit.K = std::numeric_limits<double>::infinity();
                        fit.worst_triple = {i, u, j};
                        return fit;
                    }
                    continue;
                }
                const double ratio = worst / denom;
                if (ratio > fit.K) {
                    fit.K = ratio;
                    fit.worst_triple = {i, u, j};
                }
            }
        }
    return fit;
}

PvarFit pvar_fit(const GridFunctional& X, const Control& w, double p) {
    if (!(p >= 1.0)) throw std::domain_error("pvar_fit: requires p >= 1");
    if (!w.grid()->same_times(*X.grid()))
        throw std::invalid_argument("pvar_fit: control grid mismatch");
    const auto Xd = X.kind() == GridFunctional::Kind::Dense ? X : X.materialized();
    const int np = Xd.grid()->points();
    const int n = Xd.level();
    const double beta = beta_constant(p);
    constexpr double atol = 1e-13;

    std::vector<double> coeff(static_cast<std::size_t>(n) + 1, 0.0);
    for (int k = 1; k <= n; ++k) coeff[k] = beta * gfact(static_cast<double>(k) / p);

    PvarFit fit;
    fit.finite = true;
    for (int i = 0; i < np; ++i)
        for (int j = i + 1; j < np; ++j) {
            const double wij = w(i, j);
            const auto& x = Xd.dense_at(i, j);
            for (int k = 1; k <= n; ++k) {
                const double nk = level_norm(x, k);
                if (wij <= 0.0) {
                    if (nk > atol) {
                        fit.finite = false;
                        fit.K = std::numeric_limits<double>::infinity();
                        fit.worst_pair = {i, j};
                        return fit;
                    }
                    continue;
                }
                const double ratio = nk * coeff[k] / std::pow(wij, static_cast<double>(k) / p);
                if (ratio > fit.K) {
                    fit.K = ratio;
                    fit.worst_pair = {i, j};
                }
            }
        }
    return fit;
}

// ---------------------------------------------------------------------------
// Constructions
// ---------------------------------------------------------------------------

GridFunctional signature(const PathSample& path, int level) {
    path.validate();
    if (level < 1) throw std::invalid_argument("signature: level must be >= 1");
    const int n_int = path.grid->intervals();
    std::vector<TruncatedTensor> adjacent;
    adjacent.reserve(static_cast<std::size_t>(n_int));
    for (int j = 1; j <= n_int; ++j) {
        TruncatedTensor seg(path.dim, level);
        auto w = path.displacement(j - 1, j);
        auto lv1 = seg.at(1);
        for (int c = 0; c < path.dim; ++c) lv1[c] = w[c];
        adjacent.push_back(tensor_exp(seg));
    }
    return GridFunctional::from_increments(path.grid, path.dim, level, std::move(adjacent));
}

GridFunctional path_to_increments(std::shared_ptr<const TimeGrid> grid,
                                  std::vector<TruncatedTensor> point_values) {
    if (point_values.empty())
        throw std::invalid_argument("path_to_increments: empty path");
    if (std::abs(point_values.front().scalar()) > 1e-12)
        throw std::domain_error("path_to_increments: value at t_0 must have zero level 0");
    const int dim = point_values.front().dim();
    const int level = point_values.front().level();
    return GridFunctional::additive_path(std::move(grid), dim, level, std::move(point_values));
}

std::vector<TruncatedTensor> increments_to_path(const GridFunctional& I, double tol) {
    const double dft = additivity_defect(I);
    if (dft > tol)
        throw std::domain_error("increments_to_path: input is not additive (defect " +
                                std::to_string(dft) + " > " + std::to_string(tol) + ")");
    const int np = I.grid()->points();
    std::vector<TruncatedTensor> path;
    path.reserve(static_cast<std::size_t>(np));
    path.emplace_back(I.dim(), I.level());
    for (int j = 1; j < np; ++j) path.push_back(I.eval(0, j));
    return path;
}

GridFunctional oplus(const GridFunctional& X, const GridFunctional& H) {
    require_compatible(X, H, "oplus");
    const auto Xd = X.kind() == GridFunctional::Kind::Dense ? X : X.materialized();
    const auto Hd = H.kind() == GridFunctional::Kind::Dense ? H : H.materialized();
    const int np = Xd.grid()->points();
    std::vector<TruncatedTensor> table;
    table.reserve(static_cast<std::size_t>(np) * (np + 1) / 2);
    for (int i = 0; i < np; ++i)
        for (int j = i; j < np; ++j)
            table.push_back(oplus(Xd.dense_at(i, j), Hd.dense_at(i, j)));
    return GridFunctional::dense(X.grid(), X.dim(), X.level(), std::move(table));
}

GridFunctional otimes_pointwise(const GridFunctional& X, const GridFunctional& H) {
    require_compatible(X, H, "otimes_pointwise");
    const auto Xd = X.kind() == GridFunctional::Kind::Dense ? X : X.materialized();
    const auto Hd = H.kind() == GridFunctional::Kind::Dense ? H : H.materialized();
    const int np = Xd.grid()->points();
    std::vector<TruncatedTensor> table;
    table.reserve(static_cast<std::size_t>(np) * (np + 1) / 2);
    for (int i = 0; i < np; ++i)
        for (int j = i; j < np; ++j)
            table.push_back(otimes(Xd.dense_at(i, j), Hd.dense_at(i, j)));
    return GridFunctional::dense(X.grid(), X.dim(), X.level(), std::move(table));
}

GridFunctional truncate_functional(const GridFunctional& X, int k) {
    if (k < 0 || k > X.level())
        throw std::invalid_argument("truncate_functional: bad level " + std::to_string(k));
    if (X.kind() == GridFunctional::Kind::Increments) {
        std::vector<TruncatedTensor> adj;
        adj.reserve(static_cast<std::size_t>(X.intervals()));
        for (int j = 1; j <= X.intervals(); ++j) adj.push_back(truncate(X.adjacent(j), k));
        return GridFunctional::from_increments(X.grid(), X.dim(), k, std::move(adj));
    }
    const auto Xd = X.kind() == GridFunctional::Kind::Dense ? X : X.materialized();
    const int np = Xd.grid()->points();
    std::vector<TruncatedTensor> table;
    table.reserve(static_cast<std::size_t>(np) * (np + 1) / 2);
    for (int i = 0; i < np; ++i)
        for (int j = i; j < np; ++j) table.push_back(truncate(Xd.dense_at(i, j), k));
    return GridFunctional::dense(X.grid(), X.dim(), k, std::move(table));
}

double max_pair_distance(const GridFunctional& X, const GridFunctional& Y) {
    require_compatible(X, Y, "max_pair_distance");
    const auto Xd = X.kind() == GridFunctional::Kind::Dense ? X : X.materialized();
    const auto Yd = Y.kind() == GridFunctional::Kind::Dense ? Y : Y.materialized();
    const int np = Xd.grid()->points();
    double worst = 0.0;
    for (int i = 0; i < np; ++i)
        for (int j = i; j < np; ++j)
            worst = std::max(worst, max_diff_norm(Xd.dense_at(i, j), Yd.dense_at(i, j)));
    return worst;
}

double level2_geometricity_defect(const GridFunctional& X) {
    if (X.level() < 2)
        throw std::invalid_argument("level2_geometricity_defect: needs level >= 2");
    const auto Xd = X.kind() == GridFunctional::Kind::Dense ? X : X.materialized();
    const int np = Xd.grid()->points();
    const int d = Xd.dim();
    double worst = 0.0;
    for (int i = 0; i < np; ++i)
        for (int j = i + 1; j < np; ++j) {
            const auto& x = Xd.dense_at(i, j);
            auto lv1 = x.at(1);
            auto lv2 = x.at(2);
            double s = 0.0;
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b) {
                    const double sym = 0.5 * (lv2[a * d + b] + lv2[b * d + a]);
                    const double dd = sym - 0.5 * lv1[a] * lv1[b];
                    s += dd * dd;
                }
            worst = std::max(worst, std::sqrt(s));
        }
    return worst;
}

double additivity_defect(const GridFunctional& X) {
    const auto Xd = X.kind() == GridFunctional::Kind::Dense ? X : X.materialized();
    const int np = Xd.grid()->points();
    double worst = 0.0;
    for (int i = 0; i < np; ++i)
        for (int u = i + 1; u < np; ++u)
            for (int j = u + 1; j < np; ++j) {
                const auto s = add(Xd.dense_at(i, u), Xd.dense_at(u, j));
                worst = std::max(worst, max_diff_norm(s, Xd.dense_at(i, j)));
            }
    return worst;
}

}  // namespace rp
