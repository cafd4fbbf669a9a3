#include "rp/generate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rp {

// ---------------------------------------------------------------------------
// Rng
// ---------------------------------------------------------------------------

std::uint64_t Rng::mix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t Rng::next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double Rng::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

Rng Rng::fork(std::uint64_t tag) const {
    return Rng(mix(state_ ^ (tag * 0x9E3779B97F4A7C15ull)));
}

// ---------------------------------------------------------------------------
// Scenario
// ---------------------------------------------------------------------------

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// stream tags for the scenario components
constexpr std::uint64_t kDriverTag = 0x10;
constexpr std::uint64_t kPerturbTagBase = 0x100;

}  // namespace

void Scenario::validate() const {
    if (!is_power_of_two(grid_size))
        throw std::domain_error("Scenario: grid_size must be a power of two");
    if (level < 1 || level > 4) throw std::domain_error("Scenario: level must be in 1..4");
    if (dim < 1 || dim > 4) throw std::domain_error("Scenario: dim must be in 1..4");
    if (!(p >= 1.0)) throw std::domain_error("Scenario: p must be >= 1");
    if (driver.kind == DriverKind::MidpointRough && driver.hurst * p < 1.0)
        throw std::domain_error(
            "Scenario: midpoint driver too rough for this p (needs hurst >= 1/p)");
    if (driver.kind == DriverKind::PureArea && (level < 2 || dim < 2))
        throw std::domain_error("Scenario: pure-area driver needs level >= 2 and dim >= 2");
    for (const auto& ps : perturbations) {
        if (ps.kind == PerturbationKind::MidpointRough && !(ps.hurst > 1.0 - 1.0 / p))
            throw std::domain_error(
                "Scenario: midpoint perturbation too rough for H-space (needs hurst > 1 - 1/p)");
        if (ps.kind == PerturbationKind::PureArea && (level < 2 || dim < 2))
            throw std::domain_error(
                "Scenario: pure-area perturbation needs level >= 2 and dim >= 2");
    }
}

Scenario Scenario::default_scenario(int grid_size, std::uint64_t seed) {
    Scenario s;
    s.seed = seed;
    s.grid_size = grid_size;
    s.driver = DriverSpec{DriverKind::MidpointRough, 8, 0.45, 0.5, 0.8};
    s.perturbations = {
        PerturbationSpec{PerturbationKind::YoungPiecewiseLinear, 6, 0.75, 0.5},
        PerturbationSpec{PerturbationKind::PureArea, 6, 0.75, 0.6},
        PerturbationSpec{PerturbationKind::MidpointRough, 6, 0.75, 0.4},
    };
    return s;
}

// ---------------------------------------------------------------------------
// Drivers
// ---------------------------------------------------------------------------

PathSample midpoint_rough_path(const Rng& base, int dim, int n_intervals, double hurst,
                               double amplitude) {
    if (!is_power_of_two(n_intervals))
        throw std::domain_error("midpoint_rough_path: need a power-of-two grid");
    PathSample p;
    p.dim = dim;
    p.grid = TimeGrid::uniform(0.0, 1.0, n_intervals);
    p.values.assign(static_cast<std::size_t>(n_intervals) + 1,
                    std::vector<double>(dim, 0.0));

    // endpoint displacement from its own stream
    auto end_rng = base.fork(1);
    for (int c = 0; c < dim; ++c)
        p.values[static_cast<std::size_t>(n_intervals)][c] =
            amplitude * end_rng.uniform(-1.0, 1.0);

    // midpoint displacement: the node at depth d >= 1 and position k refines
    // the dyadic interval [k, k+1] / 2^(d-1). Its stream depends only on
    // (d, k), so coarse-grid values persist under refinement.
    const int depth_max = static_cast<int>(std::lround(std::log2(n_intervals)));
    for (int d = 1; d <= depth_max; ++d) {
        const int stride = n_intervals >> d;  // half-width of the refined interval
        const double amp = amplitude * std::pow(2.0, -static_cast<double>(d) * hurst);
        const int count = 1 << (d - 1);
        for (int k = 0; k < count; ++k) {
            const int lo = 2 * k * stride, hi = 2 * (k + 1) * stride;
            const int mid = (lo + hi) / 2;
            auto node = base.fork((static_cast<std::uint64_t>(d) << 32) |
                                  static_cast<std::uint64_t>(k + 2));
            for (int c = 0; c < dim; ++c)
                p.values[static_cast<std::size_t>(mid)][c] =
                    0.5 * (p.values[static_cast<std::size_t>(lo)][c] +
                           p.values[static_cast<std::size_t>(hi)][c]) +
                    amp * node.uniform(-1.0, 1.0);
        }
    }
    return p;
}

namespace {

PathSample linear_path(const Rng& base, int dim, int n_intervals, double amplitude) {
    auto rng = base.fork(1);
    std::vector<double> v(static_cast<std::size_t>(dim));
    for (double& x : v) x = amplitude * rng.uniform(-1.0, 1.0);
    PathSample p;
    p.dim = dim;
    p.grid = TimeGrid::uniform(0.0, 1.0, n_intervals);
    p.values.resize(static_cast<std::size_t>(n_intervals) + 1);
    for (int i = 0; i <= n_intervals; ++i) {
        const double t = p.grid->time(i);
        p.values[i].resize(static_cast<std::size_t>(dim));
        for (int c = 0; c < dim; ++c) p.values[i][c] = v[c] * t;
    }
    return p;
}

PathSample piecewise_linear_path(const Rng& base, int dim, int n_intervals, int segments,
                                 double amplitude) {
    auto rng = base.fork(1);
    // waypoints at segment boundaries, linearly interpolated to the grid
    std::vector<std::vector<double>> wp(static_cast<std::size_t>(segments) + 1,
                                        std::vector<double>(dim, 0.0));
    for (int s = 1; s <= segments; ++s)
        for (int c = 0; c < dim; ++c)
            wp[s][c] = wp[s - 1][c] + amplitude * rng.uniform(-1.0, 1.0);
    PathSample p;
    p.dim = dim;
    p.grid = TimeGrid::uniform(0.0, 1.0, n_intervals);
    p.values.resize(static_cast<std::size_t>(n_intervals) + 1);
    for (int i = 0; i <= n_intervals; ++i) {
        const double u = p.grid->time(i) * segments;
        const int s = std::min(static_cast<int>(u), segments - 1);
        const double frac = u - s;
        p.values[i].resize(static_cast<std::size_t>(dim));
        for (int c = 0; c < dim; ++c)
            p.values[i][c] = wp[s][c] + frac * (wp[s + 1][c] - wp[s][c]);
    }
    return p;
}

GridFunctional pure_area_functional(std::shared_ptr<const TimeGrid> grid, int dim,
                                    int level, double rate) {
    const int np = grid->points();
    std::vector<TruncatedTensor> table;
    table.reserve(static_cast<std::size_t>(np) * (np + 1) / 2);
    for (int i = 0; i < np; ++i)
        for (int j = i; j < np; ++j) {
            TruncatedTensor t = TruncatedTensor::unit(dim, level);
            const double dt = grid->time(j) - grid->time(i);
            t.at(2)[0 * dim + 1] = rate * dt;
            t.at(2)[1 * dim + 0] = -rate * dt;
            table.push_back(std::move(t));
        }
    return GridFunctional::dense(std::move(grid), dim, level, std::move(table));
}

// fits the witness constant so the increment path certifies exactly
void fit_increment_constant(IncrementPath& ip) {
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
                double denom = std::pow(wij, ip.witness.phi);
                if (l == k && top)
                    denom = std::min(denom,
                                     std::pow(wij, static_cast<double>(k) / ip.witness.p));
                K = std::max(K, std::sqrt(s) / denom);
            }
        }
    ip.witness.K = K;
}

IncrementPath young_pl_increments(const Rng& base, std::shared_ptr<const TimeGrid> grid,
                                  int dim, int level, double p, int segments,
                                  double scale) {
    IncrementPath ip;
    ip.dim = dim;
    ip.level = level;
    const int np = grid->points();
    ip.values.assign(static_cast<std::size_t>(np), TruncatedTensor(dim, level));

    // independent piecewise-linear waypoint path per tensor level
    for (int l = 1; l <= level; ++l) {
        auto rng = base.fork(static_cast<std::uint64_t>(l));
        const std::size_t width = ip.values[0].level_size(l);
        std::vector<std::vector<double>> wp(static_cast<std::size_t>(segments) + 1,
                                            std::vector<double>(width, 0.0));
        for (int s = 1; s <= segments; ++s)
            for (std::size_t c = 0; c < width; ++c)
                wp[s][c] = wp[s - 1][c] + scale * rng.uniform(-1.0, 1.0);
        for (int i = 0; i < np; ++i) {
            const double u = grid->time(i) * segments;
            const int s = std::min(static_cast<int>(u), segments - 1);
            const double frac = u - s;
            auto dst = ip.values[static_cast<std::size_t>(i)].at(l);
            for (std::size_t c = 0; c < width; ++c)
                dst[c] = wp[s][c] + frac * (wp[s + 1][c] - wp[s][c]);
        }
    }
    ip.witness = RegularityWitness{p, 1.0, std::nullopt, 0.0, Control::affine(grid, 1.0)};
    ip.grid = std::move(grid);
    fit_increment_constant(ip);
    return ip;
}

IncrementPath pure_area_increments(std::shared_ptr<const TimeGrid> grid, int dim,
                                   int level, double p, double rate) {
    IncrementPath ip;
    ip.dim = dim;
    ip.level = level;
    const int np = grid->points();
    ip.values.assign(static_cast<std::size_t>(np), TruncatedTensor(dim, level));
    for (int i = 0; i < np; ++i) {
        const double t = grid->time(i);
        auto lv2 = ip.values[static_cast<std::size_t>(i)].at(2);
        lv2[0 * dim + 1] = rate * t;
        lv2[1 * dim + 0] = -rate * t;
    }
    // the canonical exponent 2/p certifies the pure area element for p in [2, 3)
    const double phi = (p >= 2.0 && p < 3.0) ? 2.0 / p : 1.0;
    ip.witness = RegularityWitness{p, phi, std::nullopt, 0.0, Control::affine(grid, 1.0)};
    ip.grid = std::move(grid);
    fit_increment_constant(ip);
    return ip;
}

IncrementPath midpoint_increments(const Rng& base, std::shared_ptr<const TimeGrid> grid,
                                  int dim, int level, double p, double hurst,
                                  double scale) {
    auto rough = midpoint_rough_path(base, dim, grid->intervals(), hurst, scale);
    IncrementPath ip;
    ip.dim = dim;
    ip.level = level;
    const int np = grid->points();
    ip.values.assign(static_cast<std::size_t>(np), TruncatedTensor(dim, level));
    for (int i = 0; i < np; ++i) {
        auto lv1 = ip.values[static_cast<std::size_t>(i)].at(1);
        for (int c = 0; c < dim; ++c) lv1[c] = rough.values[i][c] - rough.values[0][c];
    }
    ip.witness =
        RegularityWitness{p, hurst, std::nullopt, 0.0, Control::affine(grid, 1.0)};
    ip.grid = std::move(grid);
    fit_increment_constant(ip);
    return ip;
}

}  // namespace

Generated generate(const Scenario& s) {
    s.validate();
    Rng base(Rng::mix(s.seed));

    Generated out;
    std::shared_ptr<const TimeGrid> grid;

    switch (s.driver.kind) {
        case DriverKind::Linear:
            out.driver_path =
                linear_path(base.fork(kDriverTag), s.dim, s.grid_size, s.driver.amplitude);
            break;
        case DriverKind::PiecewiseLinear:
            out.driver_path = piecewise_linear_path(base.fork(kDriverTag), s.dim,
                                                    s.grid_size, s.driver.segments,
                                                    s.driver.amplitude);
            break;
        case DriverKind::MidpointRough:
            out.driver_path = midpoint_rough_path(base.fork(kDriverTag), s.dim,
                                                  s.grid_size, s.driver.hurst,
                                                  s.driver.amplitude);
            break;
        case DriverKind::PureArea:
            out.driver_path.dim = s.dim;
            out.driver_path.grid = TimeGrid::uniform(0.0, 1.0, s.grid_size);
            break;
    }

    if (s.driver.kind == DriverKind::PureArea) {
        grid = out.driver_path.grid;
        out.X = pure_area_functional(grid, s.dim, s.level, s.driver.area_rate);
        out.omega_x = Control::affine(grid, 1.0);
    } else {
        grid = out.driver_path.grid;
        out.X = signature(out.driver_path, s.level);
        out.omega_x = Control::pvar(out.driver_path, s.p);
    }

    for (std::size_t k = 0; k < s.perturbations.size(); ++k) {
        const auto& ps = s.perturbations[k];
        auto stream = base.fork(kPerturbTagBase + k);
        IncrementPath ip;
        switch (ps.kind) {
            case PerturbationKind::YoungPiecewiseLinear:
                ip = young_pl_increments(stream, grid, s.dim, s.level, s.p, ps.segments,
                                         ps.scale);
                break;
            case PerturbationKind::PureArea:
                ip = pure_area_increments(grid, s.dim, s.level, s.p, ps.scale);
                break;
            case PerturbationKind::MidpointRough:
                ip = midpoint_increments(stream, grid, s.dim, s.level, s.p, ps.hurst,
                                         ps.scale);
                break;
        }
        out.increments.push_back(ip);
        out.hs.push_back(lift(ip));
        out.increment_views.push_back(ip.as_functional());
    }

    if (s.tamper == "break_increment_additivity" && !out.increment_views.empty()) {
        // replace the first increment view by a dense table with one corrupted
        // entry, so it is no longer additive
        auto dense = out.increment_views.front().materialized();
        auto table = dense.data();
        const int np = grid->points();
        auto idx = static_cast<std::size_t>(np) + 1;  // entry (1, 2)
        for (double& x : table[idx].at(1)) x += 0.37;
        out.increment_views.front() =
            GridFunctional::dense(grid, s.dim, s.level, std::move(table));
    } else if (!s.tamper.empty() && s.tamper != "break_increment_additivity") {
        throw std::domain_error("Scenario: unknown tamper mode '" + s.tamper + "'");
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

namespace {

std::string driver_kind_name(DriverKind k) {
    switch (k) {
        case DriverKind::Linear: return "linear";
        case DriverKind::PiecewiseLinear: return "piecewise_linear";
        case DriverKind::MidpointRough: return "midpoint_rough";
        case DriverKind::PureArea: return "pure_area";
    }
    return "";
}

DriverKind driver_kind_from(const std::string& s) {
    if (s == "linear") return DriverKind::Linear;
    if (s == "piecewise_linear") return DriverKind::PiecewiseLinear;
    if (s == "midpoint_rough") return DriverKind::MidpointRough;
    if (s == "pure_area") return DriverKind::PureArea;
    throw std::invalid_argument("unknown driver kind '" + s + "'");
}

std::string perturbation_kind_name(PerturbationKind k) {
    switch (k) {
        case PerturbationKind::YoungPiecewiseLinear: return "young_pl";
        case PerturbationKind::PureArea: return "pure_area";
        case PerturbationKind::MidpointRough: return "midpoint_rough";
    }
    return "";
}

PerturbationKind perturbation_kind_from(const std::string& s) {
    if (s == "young_pl") return PerturbationKind::YoungPiecewiseLinear;
    if (s == "pure_area") return PerturbationKind::PureArea;
    if (s == "midpoint_rough") return PerturbationKind::MidpointRough;
    throw std::invalid_argument("unknown perturbation kind '" + s + "'");
}

}  // namespace

nlohmann::json scenario_to_json(const Scenario& s) {
    nlohmann::json perts = nlohmann::json::array();
    for (const auto& ps : s.perturbations)
        perts.push_back({{"kind", perturbation_kind_name(ps.kind)},
                         {"segments", ps.segments},
                         {"hurst", ps.hurst},
                         {"scale", ps.scale}});
    nlohmann::json j{{"seed", s.seed},
                     {"dim", s.dim},
                     {"level", s.level},
                     {"p", s.p},
                     {"grid_size", s.grid_size},
                     {"driver",
                      {{"kind", driver_kind_name(s.driver.kind)},
                       {"segments", s.driver.segments},
                       {"hurst", s.driver.hurst},
                       {"area_rate", s.driver.area_rate},
                       {"amplitude", s.driver.amplitude}}},
                     {"perturbations", std::move(perts)}};
    if (!s.tamper.empty()) j["tamper"] = s.tamper;
    return j;
}

Scenario scenario_from_json(const nlohmann::json& j) {
    Scenario s;
    s.seed = j.at("seed").get<std::uint64_t>();
    s.dim = j.at("dim").get<int>();
    s.level = j.at("level").get<int>();
    s.p = j.at("p").get<double>();
    s.grid_size = j.at("grid_size").get<int>();
    const auto& d = j.at("driver");
    s.driver.kind = driver_kind_from(d.at("kind").get<std::string>());
    if (d.contains("segments")) s.driver.segments = d.at("segments").get<int>();
    if (d.contains("hurst")) s.driver.hurst = d.at("hurst").get<double>();
    if (d.contains("area_rate")) s.driver.area_rate = d.at("area_rate").get<double>();
    if (d.contains("amplitude")) s.driver.amplitude = d.at("amplitude").get<double>();
    if (j.contains("perturbations"))
        for (const auto& pj : j.at("perturbations")) {
            PerturbationSpec ps;
            ps.kind = perturbation_kind_from(pj.at("kind").get<std::string>());
            if (pj.contains("segments")) ps.segments = pj.at("segments").get<int>();
            if (pj.contains("hurst")) ps.hurst = pj.at("hurst").get<double>();
            if (pj.contains("scale")) ps.scale = pj.at("scale").get<double>();
            s.perturbations.push_back(ps);
        }
    if (j.contains("tamper")) s.tamper = j.at("tamper").get<std::string>();
    return s;
}

}  // namespace rp
