#include "rp/serialize.hpp"

#include <stdexcept>

namespace rp {

using nlohmann::json;

json tensor_to_json(const TruncatedTensor& t) {
    json levels = json::array();
    for (int k = 0; k <= t.level(); ++k) {
        json lv = json::array();
        for (double x : t.at(k)) lv.push_back(x);
        levels.push_back(std::move(lv));
    }
    return json{{"dim", t.dim()}, {"level", t.level()}, {"data", std::move(levels)}};
}

TruncatedTensor tensor_from_json(const json& j) {
    const int dim = j.at("dim").get<int>();
    const int level = j.at("level").get<int>();
    TruncatedTensor t(dim, level);
    const auto& data = j.at("data");
    if (data.size() != static_cast<std::size_t>(level) + 1)
        throw std::invalid_argument("tensor_from_json: wrong number of levels");
    for (int k = 0; k <= level; ++k) {
        const auto& lv = data.at(static_cast<std::size_t>(k));
        auto dst = t.at(k);
        if (lv.size() != dst.size())
            throw std::invalid_argument("tensor_from_json: level " + std::to_string(k) +
                                        " has wrong size");
        for (std::size_t m = 0; m < dst.size(); ++m) dst[m] = lv.at(m).get<double>();
    }
    return t;
}

json grid_to_json(const TimeGrid& g) { return json{{"times", g.times()}}; }

std::shared_ptr<const TimeGrid> grid_from_json(const json& j) {
    return std::make_shared<const TimeGrid>(j.at("times").get<std::vector<double>>());
}

json path_to_json(const PathSample& p) {
    return json{{"dim", p.dim}, {"times", p.grid->times()}, {"values", p.values}};
}

PathSample path_from_json(const json& j) {
    PathSample p;
    p.dim = j.at("dim").get<int>();
    p.grid = std::make_shared<const TimeGrid>(j.at("times").get<std::vector<double>>());
    p.values = j.at("values").get<std::vector<std::vector<double>>>();
    p.validate();
    return p;
}

json control_to_json(const Control& w) {
    switch (w.family()) {
        case Control::Family::Affine:
            return json{{"family", "affine"}, {"c", w.affine_rate()}};
        case Control::Family::PVar:
            return json{{"family", "pvar"},
                        {"p", w.pvar_exponent()},
                        {"path", path_to_json(w.pvar_path())}};
        case Control::Family::Sum: {
            json terms = json::array();
            for (const auto& t : w.terms()) terms.push_back(control_to_json(t));
            return json{{"family", "sum"}, {"terms", std::move(terms)}};
        }
    }
    throw std::logic_error("control_to_json: bad family");
}

Control control_from_json(const json& j, std::shared_ptr<const TimeGrid> grid) {
    const auto family = j.at("family").get<std::string>();
    if (family == "affine") return Control::affine(std::move(grid), j.at("c").get<double>());
    if (family == "pvar") {
        auto path = path_from_json(j.at("path"));
        if (grid && !path.grid->same_times(*grid, 1e-12))
            throw std::invalid_argument("control_from_json: pvar path grid mismatch");
        return Control::pvar(path, j.at("p").get<double>());
    }
    if (family == "sum") {
        std::vector<Control> terms;
        for (const auto& t : j.at("terms")) terms.push_back(control_from_json(t, grid));
        return Control::sum(std::move(terms));
    }
    throw std::invalid_argument("control_from_json: unknown family '" + family + "'");
}

json functional_to_json(const GridFunctional& f) {
    const char* kind = nullptr;
    switch (f.kind()) {
        case GridFunctional::Kind::Increments: kind = "increments"; break;
        case GridFunctional::Kind::Dense: kind = "dense"; break;
        case GridFunctional::Kind::Additive: kind = "additive"; break;
        case GridFunctional::Kind::Closure:
            return functional_to_json(f.materialized());
    }
    json data = json::array();
    for (const auto& t : f.data()) data.push_back(tensor_to_json(t));
    return json{{"grid", grid_to_json(*f.grid())},
                {"dim", f.dim()},
                {"level", f.level()},
                {"kind", kind},
                {"data", std::move(data)}};
}

GridFunctional functional_from_json(const json& j) {
    auto grid = grid_from_json(j.at("grid"));
    const int dim = j.at("dim").get<int>();
    const int level = j.at("level").get<int>();
    const auto kind = j.at("kind").get<std::string>();
    std::vector<TruncatedTensor> data;
    for (const auto& t : j.at("data")) data.push_back(tensor_from_json(t));
    if (kind == "increments")
        return GridFunctional::from_increments(std::move(grid), dim, level, std::move(data));
    if (kind == "dense")
        return GridFunctional::dense(std::move(grid), dim, level, std::move(data));
    if (kind == "additive")
        return GridFunctional::additive_path(std::move(grid), dim, level, std::move(data));
    throw std::invalid_argument("functional_from_json: unknown kind '" + kind + "'");
}

json witness_to_json(const RegularityWitness& w) {
    json j{{"p", w.p}, {"phi", w.phi}, {"K", w.K}, {"control", control_to_json(w.control)}};
    if (w.theta) j["theta"] = *w.theta;
    return j;
}

RegularityWitness witness_from_json(const json& j, std::shared_ptr<const TimeGrid> grid) {
    RegularityWitness w;
    w.p = j.at("p").get<double>();
    w.phi = j.at("phi").get<double>();
    w.K = j.at("K").get<double>();
    if (j.contains("theta")) w.theta = j.at("theta").get<double>();
    w.control = control_from_json(j.at("control"), std::move(grid));
    return w;
}

json h_element_to_json(const HElement& h) {
    return json{{"functional", functional_to_json(h.functional)},
                {"witness", witness_to_json(h.witness)}};
}

HElement h_element_from_json(const json& j) {
    HElement h;
    h.functional = functional_from_json(j.at("functional"));
    h.witness = witness_from_json(j.at("witness"), h.functional.grid());
    return h;
}

json increment_path_to_json(const IncrementPath& ip) {
    json values = json::array();
    for (const auto& v : ip.values) values.push_back(tensor_to_json(v));
    return json{{"dim", ip.dim},
                {"level", ip.level},
                {"times", ip.grid->times()},
                {"values", std::move(values)},
                {"witness", witness_to_json(ip.witness)}};
}

IncrementPath increment_path_from_json(const json& j) {
    IncrementPath ip;
    ip.dim = j.at("dim").get<int>();
    ip.level = j.at("level").get<int>();
    ip.grid = std::make_shared<const TimeGrid>(j.at("times").get<std::vector<double>>());
    for (const auto& v : j.at("values")) ip.values.push_back(tensor_from_json(v));
    ip.witness = witness_from_json(j.at("witness"), ip.grid);
    return ip;
}

}  // namespace rp
