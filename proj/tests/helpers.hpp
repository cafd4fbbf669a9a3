#pragma once

#include <cmath>
#include <random>

#include "rp/analysis.hpp"
#include "rp/functional.hpp"
#include "rp/perturb.hpp"

namespace rp::testing {

inline PathSample random_path(std::mt19937_64& gen, int dim, int n_intervals,
                              double amp = 1.0) {
    std::uniform_real_distribution<double> u(-amp, amp);
    PathSample p;
    p.dim = dim;
    p.grid = TimeGrid::uniform(0.0, 1.0, n_intervals);
    p.values.assign(static_cast<std::size_t>(n_intervals) + 1,
                    std::vector<double>(dim, 0.0));
    for (int i = 1; i <= n_intervals; ++i)
        for (int c = 0; c < dim; ++c) p.values[i][c] = p.values[i - 1][c] + u(gen);
    return p;
}

/// deterministic smooth driver in R^2, refinable at any resolution
inline PathSample smooth_path(int n_intervals, double amp = 1.0) {
    PathSample p;
    p.dim = 2;
    p.grid = TimeGrid::uniform(0.0, 1.0, n_intervals);
    p.values.resize(static_cast<std::size_t>(n_intervals) + 1);
    for (int i = 0; i <= n_intervals; ++i) {
        const double t = p.grid->time(i);
        p.values[i] = {amp * std::cos(2.0 * t) - amp, amp * std::sin(3.0 * t)};
    }
    return p;
}

/// multiplicative H with nonzero level 1: signature of a second smooth driver
/// (Young regularity, so it sits in H-space with phi = 1 for affine controls)
inline GridFunctional young_h(std::shared_ptr<const TimeGrid> grid, int level,
                              double amp = 0.5) {
    PathSample p;
    p.dim = 2;
    p.grid = grid;
    p.values.resize(static_cast<std::size_t>(grid->points()));
    for (int i = 0; i < grid->points(); ++i) {
        const double t = grid->time(i);
        p.values[i] = {amp * std::sin(5.0 * t), amp * (std::cos(2.0 * t) - 1.0 + 0.3 * t)};
    }
    return signature(p, level);
}

/// pure area functional (1, 0, A, 0, ...) with A_{s,t} = a (t-s) (e1 x e2 - e2 x e1)
inline GridFunctional pure_area(std::shared_ptr<const TimeGrid> grid, int level, double a) {
    auto fn = [grid, level, a](int i, int j) {
        TruncatedTensor t = TruncatedTensor::unit(2, level);
        const double dt = grid->time(j) - grid->time(i);
        t.at(2)[0 * 2 + 1] = a * dt;
        t.at(2)[1 * 2 + 0] = -a * dt;
        return t;
    };
    return GridFunctional::closure(grid, 2, level, true, fn).materialized();
}

/// deterministic Weierstrass-type driver whose increments scale like dt^h
inline PathSample rough_path_sample(int n_intervals, double h, double amp = 1.0) {
    PathSample p;
    p.dim = 2;
    p.grid = TimeGrid::uniform(0.0, 1.0, n_intervals);
    p.values.resize(static_cast<std::size_t>(n_intervals) + 1);
    const int scales = 14;
    for (int i = 0; i <= n_intervals; ++i) {
        const double t = p.grid->time(i);
        double x = 0.0, y = 0.0;
        for (int j = 0; j < scales; ++j) {
            const double freq = std::pow(2.0, j);
            const double a = amp * std::pow(2.0, -j * h);
            x += a * std::cos(2.0 * M_PI * freq * t + 0.7 * j);
            y += a * std::sin(2.0 * M_PI * freq * t + 1.3 * j);
        }
        p.values[i] = {x, y};
    }
    for (int i = n_intervals; i >= 0; --i)
        for (int c = 0; c < 2; ++c) p.values[i][c] -= p.values[0][c];
    return p;
}

/// refits the witness constant so the increment path certifies exactly
inline void fit_increment_witness(IncrementPath& ip) {
    const int np = ip.grid->points();
    const int k = ip.level;
    const bool top = k == static_cast<int>(std::floor(ip.witness.p));
    double K = 0.0;
    for (int i = 0; i < np; ++i)
        for (int j = i + 1; j < np; ++j) {
            const double wij = ip.witness.control(i, j);
            if (wij <= 0.0) continue;
            for (int l = 1; l <= k; ++l) {
                double s = 0.0;
                auto vi = ip.values[static_cast<std::size_t>(i)].at(l);
                auto vj = ip.values[static_cast<std::size_t>(j)].at(l);
                for (std::size_t m = 0; m < vi.size(); ++m) {
                    const double d = vj[m] - vi[m];
                    s += d * d;
                }
                const double nrm = std::sqrt(s);
                double denom = std::pow(wij, ip.witness.phi);
                if (l == k && top)
                    denom = std::min(denom, std::pow(wij, static_cast<double>(k) /
                                                              ip.witness.p));
                K = std::max(K, nrm / denom);
            }
        }
    ip.witness.K = K;
}

/// random piecewise-linear increment path (Young regularity, phi = 1)
inline IncrementPath random_increment_path(std::mt19937_64& gen,
                                           std::shared_ptr<const TimeGrid> grid,
                                           int dim, int level, double p,
                                           double amp = 0.5) {
    std::uniform_real_distribution<double> u(-amp, amp);
    IncrementPath ip;
    ip.dim = dim;
    ip.level = level;
    ip.values.reserve(static_cast<std::size_t>(grid->points()));
    TruncatedTensor acc(dim, level);
    ip.values.push_back(acc);
    for (int i = 1; i < grid->points(); ++i) {
        const double dt = grid->time(i) - grid->time(i - 1);
        for (int l = 1; l <= level; ++l)
            for (double& x : acc.at(l)) x += u(gen) * dt;
        ip.values.push_back(acc);
    }
    ip.witness =
        RegularityWitness{p, 1.0, std::nullopt, 0.0, Control::affine(grid, 1.0)};
    ip.grid = std::move(grid);
    fit_increment_witness(ip);
    return ip;
}

/// wraps a multiplicative functional as an H-space element with phi = 1
inline HElement as_h_element(const GridFunctional& H, double p, double phi = 1.0) {
    HElement h;
    h.functional = H;
    auto w = Control::affine(H.grid(), 1.0);
    const auto Hd = H.kind() == GridFunctional::Kind::Dense ? H : H.materialized();
    double K = 0.0;
    const int np = H.grid()->points();
    for (int i = 0; i < np; ++i)
        for (int j = i + 1; j < np; ++j)
            K = std::max(K, max_level_norm(Hd.dense_at(i, j)) / std::pow(w(i, j), phi));
    h.witness = RegularityWitness{p, phi, std::nullopt, K, w};
    return h;
}

}  // namespace rp::testing
