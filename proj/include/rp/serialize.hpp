#pragma once

#include <memory>
#include <string>

#include <json.hpp>

#include "rp/analysis.hpp"
#include "rp/functional.hpp"
#include "rp/perturb.hpp"

namespace rp {

// JSON encodings. Doubles are emitted with shortest round-trip formatting,
// which preserves at least 17 significant decimal digits.

nlohmann::json tensor_to_json(const TruncatedTensor& t);
TruncatedTensor tensor_from_json(const nlohmann::json& j);

nlohmann::json grid_to_json(const TimeGrid& g);
std::shared_ptr<const TimeGrid> grid_from_json(const nlohmann::json& j);

nlohmann::json path_to_json(const PathSample& p);
PathSample path_from_json(const nlohmann::json& j);

nlohmann::json control_to_json(const Control& w);
/// Controls are stored without their grid; the caller supplies the grid the
/// control lives on (the functional's grid for CLI inputs).
Control control_from_json(const nlohmann::json& j, std::shared_ptr<const TimeGrid> grid);

nlohmann::json functional_to_json(const GridFunctional& f);
GridFunctional functional_from_json(const nlohmann::json& j);

nlohmann::json witness_to_json(const RegularityWitness& w);
RegularityWitness witness_from_json(const nlohmann::json& j,
                                    std::shared_ptr<const TimeGrid> grid);

nlohmann::json h_element_to_json(const HElement& h);
HElement h_element_from_json(const nlohmann::json& j);

nlohmann::json increment_path_to_json(const IncrementPath& ip);
IncrementPath increment_path_from_json(const nlohmann::json& j);

}  // namespace rp
