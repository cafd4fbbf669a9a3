#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "rp/generate.hpp"

namespace rp {

// ============================================================================
// Theorem-verification suite
// ============================================================================

struct CheckResult {
    std::string name;
    std::string anchor;   // the statement the check certifies
    bool pass = false;
    double worst_error = 0.0;
    double tolerance = 0.0;
    double runtime_ms = 0.0;
    std::string note;
};

struct Report {
    nlohmann::json scenario;
    std::vector<CheckResult> checks;
    std::vector<int> sweep_grids;
    std::map<std::string, std::vector<double>> sweep_errors;

    [[nodiscard]] bool all_pass() const;
    /// a report entry without an anchor is malformed
    void validate() const;
};

struct VerifyOptions {
    std::vector<int> sweep_grids;  // empty: single-grid run
    int threads = 0;               // 0: RP_THREADS env var, else hardware
    int axiom_instances = 5;       // random instances per vector-space axiom
};

/// Runs the full suite against a scenario: Chen, sewing fixed point, witness
/// independence, extension uniqueness, dev/lift inverses, lift addition,
/// associativity, identity/kernel, vector-space axioms, product/sum sewing
/// agreement, almost-H displacement equivalence, and the scalar-analysis
/// sweeps. Deterministic in the scenario.
[[nodiscard]] Report verify_all(const Scenario& s, const VerifyOptions& opts = {});

/// tol(N) = max(10 * err_32, 1e-11) * (N / 32)^(-(theta - 1)), the sewing
/// closeness rate calibrated on the N = 32 baseline.
[[nodiscard]] double tolerance_schedule(double err32, double theta, int n);

[[nodiscard]] std::string report_to_markdown(const Report& r);
[[nodiscard]] nlohmann::json report_to_json(const Report& r);

/// Number of worker threads: explicit option, RP_THREADS, or hardware.
[[nodiscard]] int resolve_threads(int requested);

/// Worst-error measurements reused by the acceptance suite, each a pure
/// function of the scenario (generation included).
namespace measure {
double lift_addition(const Scenario& s);
double associativity(const Scenario& s);
double otimes_oplus(const Scenario& s);
double displacement(const Scenario& s);
double recursive_formula(const Scenario& s);
double geometric_perturb(const Scenario& s);
double vector_space_axioms(const Scenario& s, int instances);
}  // namespace measure

/// theta = phi + 1/p for the weakest perturbation exponent in the scenario.
[[nodiscard]] double closeness_exponent(const Scenario& s);

}  // namespace rp
