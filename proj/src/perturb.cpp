#include "rp/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace rp {

namespace {

constexpr double kPhiLattice = 1e-3;

// sup over pairs and levels 1..n of ||F^j_{s,t}|| / w^phi; infinite when the
// control vanishes on a pair with nonzero value
double sup_ratio(const GridFunctional& F, const Control& w, double phi) {
    const auto Fd = F.kind() == GridFunctional::Kind::Dense ? F : F.materialized();
    const int np = Fd.grid()->points();
    double K = 0.0;
    for (int i = 0; i < np; ++i)
        for (int j = i + 1; j < np; ++j) {
            const double nrm = max_level_norm(Fd.dense_at(i, j));
            const double wij = w(i, j);
            if (wij <= 0.0) {
                if (nrm > 1e-13) return std::numeric_limits<double>::infinity();
                continue;
            }
            K = std::max(K, nrm / std::pow(wij, phi));
        }
    return K;
}

double combined_phi(const RegularityWitness& a, const RegularityWitness& b) {
    return std::min(a.phi, b.phi);
}

}  // namespace

// ---------------------------------------------------------------------------
// Witnesses and space elements
// ---------------------------------------------------------------------------

void RegularityWitness::validate_exponents() const {
    if (!(p >= 1.0))
        throw std::domain_error("RegularityWitness: requires p >= 1");
    if (!(phi > 1.0 - 1.0 / p) || !(phi <= 1.0))
        throw std::domain_error("RegularityWitness: phi must lie in (1 - 1/p, 1], got " +
                                std::to_string(phi));
    if (theta && !(*theta > 1.0))
        throw std::domain_error("RegularityWitness: theta must exceed 1");
    if (K < 0.0) throw std::domain_error("RegularityWitness: K must be >= 0");
}

GridFunctional IncrementPath::as_functional() const {
    return GridFunctional::additive_path(grid, dim, level, values);
}

double h_element_violation(const HElement& h, double mult_tol) {
    h.witness.validate_exponents();
    auto mult = is_multiplicative(h.functional, mult_tol);
    double worst = std::max(0.0, mult.report.worst_defect - mult_tol);
    const auto Hd = h.functional.kind() == GridFunctional::Kind::Dense
                        ? h.functional
                        : h.functional.materialized();
    const int np = Hd.grid()->points();
    const double cap = h.witness.K * (1.0 + 1e-9);
    for (int i = 0; i < np; ++i)
        for (int j = i + 1; j < np; ++j) {
            const double nrm = max_level_norm(Hd.dense_at(i, j));
            const double bound = cap * std::pow(h.witness.control(i, j), h.witness.phi);
            worst = std::max(worst, nrm - bound);
        }
    return worst;
}

double increment_path_violation(const IncrementPath& ip) {
    ip.witness.validate_exponents();
    if (ip.values.size() != static_cast<std::size_t>(ip.grid->points()))
        throw std::invalid_argument("IncrementPath: one value per grid time required");
    double worst = max_level_norm(ip.values.front());  // I_{t_0} = 0
    for (const auto& v : ip.values) worst = std::max(worst, std::abs(v.scalar()));

    const int np = ip.grid->points();
    const int k = ip.level;
    const double cap = ip.witness.K * (1.0 + 1e-9);
    const bool top_bound = k == static_cast<int>(std::floor(ip.witness.p));
    for (int i = 0; i < np; ++i)
        for (int j = i + 1; j < np; ++j) {
            const double wij = ip.witness.control(i, j);
            for (int l = 1; l <= k; ++l) {
                double s = 0.0;
                auto vi = ip.values[static_cast<std::size_t>(i)].at(l);
                auto vj = ip.values[static_cast<std::size_t>(j)].at(l);
                for (std::size_t m = 0; m < vi.size(); ++m) {
                    const double d = vj[m] - vi[m];
                    s += d * d;
                }
                const double nrm = std::sqrt(s);
                double bound = cap * std::pow(wij, ip.witness.phi);
                if (l == k && top_bound)
                    bound = std::min(bound,
                                     cap * std::pow(wij, static_cast<double>(k) /
                                                             ip.witness.p));
                worst = std::max(worst, nrm - bound);
            }
        }
    return worst;
}

IncrementPath add_paths(const IncrementPath& a, const IncrementPath& b) {
    if (a.dim != b.dim || a.level != b.level || !a.grid->same_times(*b.grid))
        throw std::invalid_argument("add_paths: incompatible increment paths");
    IncrementPath out = a;
    for (std::size_t i = 0; i < out.values.size(); ++i)
        add_in_place(out.values[i], b.values[i]);
    out.witness.phi = combined_phi(a.witness, b.witness);
    out.witness.K = a.witness.K + b.witness.K;
    out.witness.control = Control::sum({a.witness.control, b.witness.control});
    return out;
}

IncrementPath scale_path(double lambda, const IncrementPath& a) {
    IncrementPath out = a;
    for (auto& v : out.values) v = scale(lambda, v);
    out.witness.K = std::abs(lambda) * a.witness.K;
    return out;
}

IncrementPath zero_path(std::shared_ptr<const TimeGrid> grid, int dim, int level,
                        double p, const Control& w) {
    IncrementPath ip;
    ip.dim = dim;
    ip.level = level;
    ip.values.assign(static_cast<std::size_t>(grid->points()),
                     TruncatedTensor(dim, level));
    ip.grid = std::move(grid);
    ip.witness = RegularityWitness{p, 1.0, std::nullopt, 0.0, w};
    return ip;
}

// ---------------------------------------------------------------------------
// Membership
// ---------------------------------------------------------------------------

HMembership h_membership(const GridFunctional& H, const Control& w, double p) {
    if (!(p >= 1.0)) throw std::domain_error("h_membership: requires p >= 1");
    auto mult = is_multiplicative(H, 1e-8);
    if (!mult.multiplicative)
        throw std::domain_error("h_membership: input is not multiplicative (defect " +
                                std::to_string(mult.report.worst_defect) + ")");
    const auto Hd = H.kind() == GridFunctional::Kind::Dense ? H : H.materialized();
    const int np = Hd.grid()->points();
    const int k = Hd.level();
    const double phi_floor = 1.0 - 1.0 / p;

    HMembership res;

    // scaling exponent of each level envelope across fine dyadic spans:
    // regress log(max ||H^j||) against log(max w) over spans 1, 2, 4, ...
    // up to an eighth of the grid. Coarse spans are excluded: cancellation
    // there says nothing about the w -> 0 exponent the bound is made of.
    const int span_cap = std::max(4, (np - 1) / 8);
    double phi_env = std::numeric_limits<double>::infinity();
    bool any_content = false;
    for (int l = 1; l <= k; ++l) {
        std::vector<std::pair<double, double>> pts;
        for (int span = 1; span <= span_cap; span *= 2) {
            double m = 0.0, wm = 0.0;
            for (int i = 0; i + span < np; ++i) {
                m = std::max(m, level_norm(Hd.dense_at(i, i + span), l));
                wm = std::max(wm, w(i, i + span));
            }
            if (m > 1e-300 && wm > 0.0) pts.emplace_back(std::log(wm), std::log(m));
        }
        if (pts.size() < 2) continue;  // level has no usable content
        any_content = true;
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (auto [x, y] : pts) {
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double nfit = static_cast<double>(pts.size());
        const double det = nfit * sxx - sx * sx;
        if (std::abs(det) < 1e-300) continue;
        const double slope = (nfit * sxy - sx * sy) / det;
        phi_env = std::min(phi_env, slope);
    }
    if (!any_content) {
        // the zero perturbation: any exponent works
        res.ok = true;
        res.phi = 1.0;
        res.phi_envelope = 1.0;
        res.K = 0.0;
        res.qj.assign(static_cast<std::size_t>(k), 0.0);
        for (int j = 1; j <= k; ++j) res.qj[j - 1] = static_cast<double>(j);
        return res;
    }
    res.phi_envelope = phi_env;

    // largest lattice point at or below the envelope exponent (half-step slack
    // absorbs regression roundoff), capped at 1
    double phi = std::min(1.0, std::floor((phi_env + 0.5 * kPhiLattice) / kPhiLattice) *
                                   kPhiLattice);
    if (!(phi > phi_floor + 1e-12)) {
        res.ok = false;
        res.phi = phi;
        return res;
    }
    res.phi = phi;
    res.K = sup_ratio(Hd, w, phi);
    if (!std::isfinite(res.K)) {
        res.ok = false;
        return res;
    }

    // level-wise exponents q_j = j / phi, with q_j = p from floor(p) upward;
    // each truncation must have finite q_j-variation
    res.qj.assign(static_cast<std::size_t>(k), 0.0);
    const int kprime = std::min(k, static_cast<int>(std::floor(p)) - 1);
    res.ok = true;
    for (int j = 1; j <= k; ++j) {
        double qj = static_cast<double>(j) / phi;
        if (j > kprime) qj = p;
        res.qj[j - 1] = qj;
        auto fit = pvar_fit(truncate_functional(Hd, j), w, qj);
        if (!fit.finite) res.ok = false;
    }
    return res;
}

// ---------------------------------------------------------------------------
// develop / lift
// ---------------------------------------------------------------------------

IncrementPath develop(const HElement& h) {
    h.witness.validate_exponents();
    const auto& H = h.functional;
    const int k = H.level();
    const int np = H.grid()->points();
    const double phi = h.witness.phi;

    // innovations as additive functionals: F^1 = H^1, F^{j+1} = H^{j+1} - E^{j+1}
    const auto Hd = H.kind() == GridFunctional::Kind::Dense ? H : H.materialized();
    std::vector<GridFunctional> exts;  // ext of H(j) for j = 1..k-1, materialized
    for (int j = 1; j <= k - 1; ++j) {
        const double qj = static_cast<double>(j) / phi;
        exts.push_back(ext(truncate_functional(Hd, j), qj).materialized());
    }

    std::vector<TruncatedTensor> values;
    values.reserve(static_cast<std::size_t>(np));
    for (int t = 0; t < np; ++t) {
        TruncatedTensor v(H.dim(), k);
        const auto& h0t = Hd.dense_at(0, t);
        {
            auto dst = v.at(1);
            auto src = h0t.at(1);
            std::copy(src.begin(), src.end(), dst.begin());
        }
        for (int j = 1; j <= k - 1; ++j) {
            const auto& e = exts[static_cast<std::size_t>(j - 1)].dense_at(0, t);
            auto dst = v.at(j + 1);
            auto hs = h0t.at(j + 1);
            auto es = e.at(j + 1);
            for (std::size_t m = 0; m < dst.size(); ++m) dst[m] = hs[m] - es[m];
        }
        values.push_back(std::move(v));
    }

    IncrementPath out;
    out.grid = H.grid();
    out.dim = H.dim();
    out.level = k;
    out.values = std::move(values);

    // additivity consistency: the functional H^{j+1} - E^{j+1} must agree with
    // the path-difference view on every pair
    double worst = 0.0;
    for (int i = 0; i < np; ++i)
        for (int j = i + 1; j < np; ++j) {
            TruncatedTensor direct(H.dim(), k);
            const auto& hij = Hd.dense_at(i, j);
            {
                auto dst = direct.at(1);
                auto src = hij.at(1);
                std::copy(src.begin(), src.end(), dst.begin());
            }
            for (int l = 1; l <= k - 1; ++l) {
                const auto& e = exts[static_cast<std::size_t>(l - 1)].dense_at(i, j);
                auto dst = direct.at(l + 1);
                auto hs = hij.at(l + 1);
                auto es = e.at(l + 1);
                for (std::size_t m = 0; m < dst.size(); ++m) dst[m] = hs[m] - es[m];
            }
            auto viadiff = sub(out.values[static_cast<std::size_t>(j)],
                               out.values[static_cast<std::size_t>(i)]);
            worst = std::max(worst, max_diff_norm(direct, viadiff));
        }
    if (worst > 1e-8)
        throw std::runtime_error("develop: innovation failed the additivity check (" +
                                 std::to_string(worst) + ")");

    out.witness = h.witness;
    out.witness.theta.reset();
    out.witness.K = sup_ratio(out.as_functional(), h.witness.control, h.witness.phi);
    if (!std::isfinite(out.witness.K))
        throw std::runtime_error("develop: witness bound violated on a null-control pair");
    return out;
}

HElement lift(const IncrementPath& ip) {
    const double viol = increment_path_violation(ip);
    if (viol > 1e-9)
        throw std::domain_error("lift: increment path violates its witness by " +
                                std::to_string(viol));
    const int k = ip.level;
    const int n_int = ip.grid->intervals();
    const double phi = ip.witness.phi;

    // level 1
    std::vector<TruncatedTensor> adj;
    adj.reserve(static_cast<std::size_t>(n_int));
    for (int j = 1; j <= n_int; ++j) {
        TruncatedTensor t = TruncatedTensor::unit(ip.dim, 1);
        auto dst = t.at(1);
        auto hi = ip.values[static_cast<std::size_t>(j)].at(1);
        auto lo = ip.values[static_cast<std::size_t>(j - 1)].at(1);
        for (std::size_t m = 0; m < dst.size(); ++m) dst[m] = hi[m] - lo[m];
        adj.push_back(std::move(t));
    }
    auto cur = GridFunctional::from_increments(ip.grid, ip.dim, 1, std::move(adj));

    // extend one level at a time, adding the innovation at the new top level
    for (int l = 2; l <= k; ++l) {
        const double q = static_cast<double>(l - 1) / phi;
        auto e = ext(cur, q, 1e-7);
        std::vector<TruncatedTensor> next;
        next.reserve(static_cast<std::size_t>(n_int));
        for (int j = 1; j <= n_int; ++j) {
            TruncatedTensor t = e.adjacent(j);
            auto dst = t.at(l);
            auto hi = ip.values[static_cast<std::size_t>(j)].at(l);
            auto lo = ip.values[static_cast<std::size_t>(j - 1)].at(l);
            for (std::size_t m = 0; m < dst.size(); ++m) dst[m] += hi[m] - lo[m];
            next.push_back(std::move(t));
        }
        cur = GridFunctional::from_increments(ip.grid, ip.dim, l, std::move(next));
    }

    HElement out{std::move(cur), ip.witness};
    out.witness.theta.reset();
    out.witness.K = sup_ratio(out.functional, ip.witness.control, phi);
    if (!std::isfinite(out.witness.K)) {
        const auto Hd = out.functional.materialized();
        const int np = ip.grid->points();
        double worst_w = 0.0;
        int wi = 0, wj = 0;
        for (int i = 0; i < np; ++i)
            for (int j = i + 1; j < np; ++j)
                if (ip.witness.control(i, j) <= 0.0 &&
                    max_level_norm(Hd.dense_at(i, j)) > worst_w) {
                    worst_w = max_level_norm(Hd.dense_at(i, j));
                    wi = i;
                    wj = j;
                }
        throw std::runtime_error("lift: output violates the regularity witness at pair (" +
                                 std::to_string(wi) + "," + std::to_string(wj) + ")");
    }
    return out;
}

// ---------------------------------------------------------------------------
// perturb and the scalar action
// ---------------------------------------------------------------------------

namespace {

GridFunctional perturb_impl(const GridFunctional& X, const Control& w_x, double p,
                            const GridFunctional& H, const RegularityWitness& witness) {
    witness.validate_exponents();
    if (!(p >= 1.0)) throw std::domain_error("perturb: requires p >= 1");
    double theta = witness.phi + 1.0 / p;
    if (witness.theta) theta = std::min(theta, *witness.theta);
    if (!(theta > 1.0))
        throw std::domain_error("perturb: phi + 1/p must exceed 1, got " +
                                std::to_string(theta));
    auto w = Control::sum({w_x, witness.control});
    auto S = oplus(X, H);
    return sew(S, w, theta, p).output;
}

}  // namespace

GridFunctional perturb(const GridFunctional& X, const Control& w_x, double p,
                       const HElement& h) {
    return perturb_impl(X, w_x, p, h.functional, h.witness);
}

GridFunctional perturb(const GridFunctional& X, const Control& w_x, double p,
                       const AlmostHElement& h) {
    return perturb_impl(X, w_x, p, h.functional, h.witness);
}

HElement scale_perturbation(double a, const HElement& h) {
    return lift(scale_path(a, develop(h)));
}

AssocCheck perturb_assoc_check(const GridFunctional& X, const Control& w_x, double p,
                               const HElement& h, const HElement& ht) {
    // single combined control, as in the normalization w = w_X + w_H + w_H~
    auto w_all = Control::sum({w_x, h.witness.control, ht.witness.control});

    auto xh = perturb(X, w_all, p, h);
    auto lhs = perturb(xh, w_all, p, ht);

    auto hht_fun = perturb(h.functional, h.witness.control, p, ht);
    HElement hht;
    hht.functional = hht_fun;
    hht.witness = h.witness;
    hht.witness.phi = combined_phi(h.witness, ht.witness);
    hht.witness.control = Control::sum({h.witness.control, ht.witness.control});
    hht.witness.K = sup_ratio(hht_fun, hht.witness.control, hht.witness.phi);
    auto rhs = perturb(X, w_all, p, hht);

    AssocCheck res{std::move(lhs), std::move(rhs), 0.0};
    res.max_delta = max_pair_distance(res.lhs, res.rhs);
    return res;
}

KernelCheck kernel_check(const GridFunctional& X, const Control& w_x, double p,
                         const HElement& h, double tol) {
    KernelCheck res;
    auto moved = perturb(X, w_x, p, h);
    res.deviation = max_pair_distance(moved, X);
    res.fixed = res.deviation <= tol;

    const auto Hd = h.functional.kind() == GridFunctional::Kind::Dense
                        ? h.functional
                        : h.functional.materialized();
    double hnorm = 0.0;
    const int np = Hd.grid()->points();
    for (int i = 0; i < np; ++i)
        for (int j = i; j < np; ++j)
            hnorm = std::max(hnorm, max_level_norm(Hd.dense_at(i, j)));
    res.h_is_unit = hnorm <= tol;
    res.consistent = res.fixed == res.h_is_unit;
    return res;
}

DisplacementCheck almost_displacement_check(const GridFunctional& X, const Control& w_x,
                                            double p, const AlmostHElement& ht,
                                            const AlmostHElement& hh, double tol) {
    DisplacementCheck res;
    const double theta_t = ht.witness.theta.value_or(ht.witness.phi + 1.0 / p);
    const double theta_h = hh.witness.theta.value_or(hh.witness.phi + 1.0 / p);

    auto st = sew(ht.functional, ht.witness.control, theta_t, p);
    auto sh = sew(hh.functional, hh.witness.control, theta_h, p);
    res.sewing_delta = max_pair_distance(st.output, sh.output);

    auto d_t = perturb(X, w_x, p, ht);
    auto d_h = perturb(X, w_x, p, hh);
    res.displacement_delta = max_pair_distance(d_t, d_h);

    HElement sewn;
    sewn.functional = st.output;
    sewn.witness = ht.witness;
    sewn.witness.theta.reset();
    sewn.witness.K = sup_ratio(st.output, ht.witness.control, ht.witness.phi);
    auto d_s = perturb(X, w_x, p, sewn);
    res.vs_sewn_delta = max_pair_distance(d_t, d_s);

    res.forward_ok = res.sewing_delta > tol ||
                     (res.displacement_delta <= tol && res.vs_sewn_delta <= tol);
    res.converse_ok = res.displacement_delta > tol || res.sewing_delta <= tol;
    return res;
}

}  // namespace rp
