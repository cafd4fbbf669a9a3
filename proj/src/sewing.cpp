#include "rp/sewing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace rp {

namespace {

void require_domain(const GridFunctional& X, const Control& w, double theta, double p,
                    bool run_fits) {
    if (!(theta > 1.0)) throw std::domain_error("sew: requires theta > 1");
    if (!(p >= 1.0)) throw std::domain_error("sew: requires p >= 1");
    if (!X.unit_scalar()) throw std::domain_error("sew: input must have unit scalar level");
    if (!run_fits) return;
    auto am = almost_mult_fit(X, w, theta);
    if (!am.ok)
        throw std::domain_error(
            "sew: input is not almost multiplicative for this witness; offending triple (" +
            std::to_string(am.worst_triple[0]) + "," + std::to_string(am.worst_triple[1]) +
            "," + std::to_string(am.worst_triple[2]) + ")");
    auto pv = pvar_fit(X, w, p);
    if (!pv.finite)
        throw std::domain_error(
            "sew: input has no finite p-variation for this witness; offending pair (" +
            std::to_string(pv.worst_pair[0]) + "," + std::to_string(pv.worst_pair[1]) + ")");
}

// Chained superproduct table of the input's adjacent increments: the grid
// realization of the partition limit, all levels at once.
GridFunctional chain_adjacent(const GridFunctional& X) {
    const int n_int = X.intervals();
    std::vector<TruncatedTensor> adj;
    adj.reserve(static_cast<std::size_t>(n_int));
    for (int j = 1; j <= n_int; ++j) adj.push_back(X.adjacent(j));
    return GridFunctional::from_increments(X.grid(), X.dim(), X.level(), std::move(adj));
}

}  // namespace

SewingResult sew(const GridFunctional& X, const Control& w, double theta, double p,
                 const SewOptions& opts) {
    if (!w.grid()->same_times(*X.grid()))
        throw std::invalid_argument("sew: control grid mismatch");
    require_domain(X, w, theta, p, opts.check_preconditions);

    const auto Xd = X.kind() == GridFunctional::Kind::Dense ? X : X.materialized();
    auto out = chain_adjacent(Xd);
    auto outd = out.materialized();

    if (opts.check_output) {
        auto mult = is_multiplicative(outd, opts.output_mult_tol);
        if (!mult.multiplicative)
            throw std::runtime_error("sew: dense limit failed the multiplicativity assert (" +
                                     std::to_string(mult.report.worst_defect) + ")");
    }

    SewingResult res{std::move(out), 0.0, {}};

    // closeness constant: sup over pairs and levels of ||out - in|| / w^theta
    const int np = Xd.grid()->points();
    for (int i = 0; i < np; ++i)
        for (int j = i + 1; j < np; ++j) {
            const double d = max_diff_norm(outd.dense_at(i, j), Xd.dense_at(i, j));
            const double wij = w(i, j);
            if (wij <= 0.0) {
                if (d > 1e-13) res.closeness_K = std::numeric_limits<double>::infinity();
                continue;
            }
            res.closeness_K = std::max(res.closeness_K, d / std::pow(wij, theta));
        }

    // residual partition refinement: compare the limit taken over the full
    // grid against the one over every second point, at shared pairs
    const int n = Xd.level();
    res.per_level_convergence.assign(static_cast<std::size_t>(n), 0.0);
    const int half = Xd.intervals() / 2;
    for (int i = 0; i + 1 <= half; ++i) {
        TruncatedTensor acc = TruncatedTensor::unit(Xd.dim(), n);
        for (int j = i + 1; j <= half; ++j) {
            const int a = 2 * (j - 1);
            const int b = std::min(2 * j, np - 1);
            otimes_in_place(acc, Xd.dense_at(a, b));
            const int lo = 2 * i, hi = b;
            const auto& fine = outd.dense_at(lo, hi);
            for (int k = 1; k <= n; ++k) {
                auto fk = fine.at(k);
                auto ck = acc.at(k);
                double s = 0.0;
                for (std::size_t m = 0; m < fk.size(); ++m) {
                    const double dd = fk[m] - ck[m];
                    s += dd * dd;
                }
                res.per_level_convergence[k - 1] =
                    std::max(res.per_level_convergence[k - 1], std::sqrt(s));
            }
        }
    }
    return res;
}

std::vector<GridFunctional> sew_stepwise_trace(const GridFunctional& X, const Control& w,
                                               double theta, double p) {
    if (!w.grid()->same_times(*X.grid()))
        throw std::invalid_argument("sew_stepwise_trace: control grid mismatch");
    require_domain(X, w, theta, p, true);

    const auto Xd = X.kind() == GridFunctional::Kind::Dense ? X : X.materialized();
    const auto outd = chain_adjacent(Xd).materialized();
    const int np = Xd.grid()->points();
    const int k = Xd.level();

    // X^(m) carries the rebuilt levels 1..m and the input levels m+1..k.
    std::vector<GridFunctional> trace;
    trace.reserve(static_cast<std::size_t>(k) + 1);
    trace.push_back(Xd);
    for (int m = 1; m <= k; ++m) {
        std::vector<TruncatedTensor> table;
        table.reserve(static_cast<std::size_t>(np) * (np + 1) / 2);
        for (int i = 0; i < np; ++i)
            for (int j = i; j < np; ++j) {
                TruncatedTensor t = Xd.dense_at(i, j);
                const auto& built = outd.dense_at(i, j);
                for (int l = 1; l <= m; ++l) {
                    auto dst = t.at(l);
                    auto src = built.at(l);
                    std::copy(src.begin(), src.end(), dst.begin());
                }
                table.push_back(std::move(t));
            }
        trace.push_back(GridFunctional::dense(Xd.grid(), Xd.dim(), Xd.level(),
                                              std::move(table)));
    }
    return trace;
}

GridFunctional ext(const GridFunctional& X, double p, double mult_tol) {
    const int n = X.level();
    if (!(p >= 1.0)) throw std::domain_error("ext: requires p >= 1");
    if (!(p < n + 1.0))
        throw std::domain_error("ext: requires p < n + 1 (generalised domain), got p = " +
                                std::to_string(p) + " at level " + std::to_string(n));
    auto mult = is_multiplicative(X, mult_tol);
    if (!mult.multiplicative)
        throw std::domain_error("ext: input is not multiplicative (worst defect " +
                                std::to_string(mult.report.worst_defect) + ")");
    const int n_int = X.intervals();
    std::vector<TruncatedTensor> adj;
    adj.reserve(static_cast<std::size_t>(n_int));
    for (int j = 1; j <= n_int; ++j)
        adj.push_back(tensor_exp(zero_pad(tensor_log(X.adjacent(j)), n + 1)));
    return GridFunctional::from_increments(X.grid(), X.dim(), n + 1, std::move(adj));
}

ClosePairResult sew_close_pair_check(const GridFunctional& X, const GridFunctional& Y,
                                     const Control& w, double theta, double K, double p) {
    if (X.dim() != Y.dim() || X.level() != Y.level() || !X.grid()->same_times(*Y.grid()))
        throw std::invalid_argument("sew_close_pair_check: incompatible functionals");
    const auto Xd = X.kind() == GridFunctional::Kind::Dense ? X : X.materialized();
    const auto Yd = Y.kind() == GridFunctional::Kind::Dense ? Y : Y.materialized();
    const int np = Xd.grid()->points();

    ClosePairResult res;
    res.bound_holds = true;
    for (int i = 0; i < np; ++i)
        for (int j = i + 1; j < np; ++j) {
            const double d = max_diff_norm(Yd.dense_at(i, j), Xd.dense_at(i, j));
            const double bound = K * std::pow(w(i, j), theta);
            const double excess = d - bound;
            if (excess > res.worst_excess) {
                res.worst_excess = excess;
                res.worst_pair = {i, j};
            }
        }
    if (res.worst_excess > 1e-12) {
        res.bound_holds = false;
        return res;
    }

    auto sx = sew(Xd, w, theta, p);
    SewOptions lax;
    lax.check_preconditions = false;  // Y inherits the domain via the closeness bound
    auto sy = sew(Yd, w, theta, p, lax);
    res.sewing_delta = max_pair_distance(sx.output, sy.output);
    res.same_sewing = res.sewing_delta <= 1e-8;
    return res;
}

}  // namespace rp
