#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "rp/perturb.hpp"

namespace rp {

// ============================================================================
// Deterministic random streams
// ============================================================================

/// splitmix64: a named, portable 64-bit generator (Steele-Lea-Flood mixing
/// constants). Streams are split by hashing the base seed with a tag, so a
/// component's stream does not depend on how much randomness its siblings
/// consumed: stream(tag) seeds from mix(seed ^ tag * 0x9E3779B97F4A7C15).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64();
    /// uniform double in [0, 1), built from the top 53 bits
    double next_double();
    double uniform(double lo, double hi);

    [[nodiscard]] Rng fork(std::uint64_t tag) const;
    static std::uint64_t mix(std::uint64_t x);

private:
    std::uint64_t state_;
};

// ============================================================================
// Scenarios
// ============================================================================

enum class DriverKind { Linear, PiecewiseLinear, MidpointRough, PureArea };

struct DriverSpec {
    DriverKind kind = DriverKind::MidpointRough;
    int segments = 8;       // PiecewiseLinear
    double hurst = 0.45;    // MidpointRough: per-scale amplitude 2^(-j h)
    double area_rate = 0.5; // PureArea
    double amplitude = 1.0;
};

enum class PerturbationKind { YoungPiecewiseLinear, PureArea, MidpointRough };

struct PerturbationSpec {
    PerturbationKind kind = PerturbationKind::YoungPiecewiseLinear;
    int segments = 6;       // YoungPiecewiseLinear
    double hurst = 0.75;    // MidpointRough (must exceed 1 - 1/p)
    double scale = 0.5;
};

struct Scenario {
    std::uint64_t seed = 1;
    int dim = 2;
    int level = 2;
    double p = 2.5;
    int grid_size = 128;     // number of intervals, a power of two
    DriverSpec driver;
    std::vector<PerturbationSpec> perturbations;
    std::string tamper;      // "", or "break_increment_additivity"

    void validate() const;
    static Scenario default_scenario(int grid_size = 128, std::uint64_t seed = 1);
};

/// Everything the verification suites consume.
struct Generated {
    PathSample driver_path;                     // empty values for PureArea driver
    GridFunctional X;                           // the base rough path
    Control omega_x;
    std::vector<IncrementPath> increments;      // generated perturbations
    std::vector<HElement> hs;                   // their lifts
    std::vector<GridFunctional> increment_views; // additive functionals (tamper target)
};

/// Deterministic in the scenario seed: identical scenarios give bit-identical
/// outputs. MidpointRough values at dyadic times are shared across grid
/// sizes: the per-node streams depend on the node's dyadic address only.
[[nodiscard]] Generated generate(const Scenario& s);

/// Midpoint-displacement path on [0, 1]: per-scale amplitude 2^(-j h).
[[nodiscard]] PathSample midpoint_rough_path(const Rng& base, int dim, int n_intervals,
                                             double hurst, double amplitude);

nlohmann::json scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const nlohmann::json& j);

}  // namespace rp
