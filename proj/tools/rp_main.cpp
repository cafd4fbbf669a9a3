// rp: command-line front end for the rough-path perturbation library.
//
// Subcommands: sew, ext, lift, dev, perturb, verify, gen. All values move
// through JSON files; see README for the schemas. Exit codes: 0 success,
// 1 verification failure, 2 input error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "rp/serialize.hpp"
#include "rp/sewing.hpp"
#include "rp/verify.hpp"

namespace {

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

void write_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rough-path perturbation toolkit"};
    app.require_subcommand(1);

    // ---- sew ----
    std::string sew_in, sew_ctrl, sew_out;
    double sew_theta = 1.2, sew_p = 2.5;
    auto* sew_cmd = app.add_subcommand("sew", "upgrade an almost multiplicative functional");
    sew_cmd->add_option("--in", sew_in, "input functional JSON")->required();
    sew_cmd->add_option("--control", sew_ctrl, "control JSON")->required();
    sew_cmd->add_option("--theta", sew_theta, "defect exponent theta > 1")->required();
    sew_cmd->add_option("--p", sew_p, "variation exponent p >= 1")->required();
    sew_cmd->add_option("--out", sew_out, "output SewingResult JSON")->required();

    // ---- ext ----
    std::string ext_in, ext_out;
    double ext_p = 2.5;
    auto* ext_cmd = app.add_subcommand("ext", "extend a multiplicative functional one level");
    ext_cmd->add_option("--in", ext_in, "input functional JSON")->required();
    ext_cmd->add_option("--p", ext_p, "variation exponent (p < level + 1)")->required();
    ext_cmd->add_option("--out", ext_out, "output functional JSON")->required();

    // ---- lift ----
    std::string lift_in, lift_out;
    auto* lift_cmd = app.add_subcommand("lift", "lift an increment path to a rough path");
    lift_cmd->add_option("--in", lift_in, "input increment-path JSON")->required();
    lift_cmd->add_option("--out", lift_out, "output H-element JSON")->required();

    // ---- dev ----
    std::string dev_in, dev_out;
    auto* dev_cmd = app.add_subcommand("dev", "develop a rough path into its increments");
    dev_cmd->add_option("--in", dev_in, "input H-element JSON")->required();
    dev_cmd->add_option("--out", dev_out, "output increment-path JSON")->required();

    // ---- perturb ----
    std::string pert_x, pert_h, pert_out, pert_xctrl;
    auto* pert_cmd = app.add_subcommand("perturb", "apply an H-space perturbation to X");
    pert_cmd->set_help_flag("--help", "print help");  // frees --h for the element
    pert_cmd->add_option("--x", pert_x, "base functional JSON")->required();
    pert_cmd->add_option("--h", pert_h, "H-element JSON (witness included)")->required();
    pert_cmd->add_option("--x-control", pert_xctrl,
                         "control JSON for X (default: affine rate 1)");
    pert_cmd->add_option("--out", pert_out, "output functional JSON")->required();

    // ---- verify ----
    std::string ver_scenario, ver_report, ver_sweep;
    bool ver_markdown = false;
    int ver_grid = 0, ver_threads = 0;
    std::uint64_t ver_seed = 0;
    auto* ver_cmd = app.add_subcommand("verify", "run the theorem-verification suite");
    ver_cmd->add_option("--scenario", ver_scenario, "scenario JSON (default scenario if omitted)");
    ver_cmd->add_option("--sweep-grids", ver_sweep, "comma-separated grid sizes, e.g. 32,64,128,256");
    ver_cmd->add_option("--report", ver_report, "write the report JSON here");
    ver_cmd->add_flag("--markdown", ver_markdown, "print a markdown table");
    ver_cmd->add_option("--grid", ver_grid, "override the scenario grid size");
    ver_cmd->add_option("--seed", ver_seed, "override the scenario seed");
    ver_cmd->add_option("--threads", ver_threads, "worker threads (default RP_THREADS or hardware)");

    // ---- gen ----
    std::string gen_scenario, gen_out;
    auto* gen_cmd = app.add_subcommand("gen", "generate scenario inputs as JSON files");
    gen_cmd->add_option("--scenario", gen_scenario, "scenario JSON (default scenario if omitted)");
    gen_cmd->add_option("--out", gen_out, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sew_cmd) {
            auto X = rp::functional_from_json(read_json(sew_in));
            auto w = rp::control_from_json(read_json(sew_ctrl), X.grid());
            auto res = rp::sew(X, w, sew_theta, sew_p);
            nlohmann::json j{{"output", rp::functional_to_json(res.output)},
                             {"closeness_K", res.closeness_K},
                             {"per_level_convergence", res.per_level_convergence}};
            write_json(sew_out, j);
        } else if (*ext_cmd) {
            auto X = rp::functional_from_json(read_json(ext_in));
            write_json(ext_out, rp::functional_to_json(rp::ext(X, ext_p)));
        } else if (*lift_cmd) {
            auto I = rp::increment_path_from_json(read_json(lift_in));
            write_json(lift_out, rp::h_element_to_json(rp::lift(I)));
        } else if (*dev_cmd) {
            auto H = rp::h_element_from_json(read_json(dev_in));
            write_json(dev_out, rp::increment_path_to_json(rp::develop(H)));
        } else if (*pert_cmd) {
            auto X = rp::functional_from_json(read_json(pert_x));
            auto H = rp::h_element_from_json(read_json(pert_h));
            auto wx = pert_xctrl.empty()
                          ? rp::Control::affine(X.grid(), 1.0)
                          : rp::control_from_json(read_json(pert_xctrl), X.grid());
            auto Y = rp::perturb(X, wx, H.witness.p, H);
            write_json(pert_out, rp::functional_to_json(Y));
        } else if (*ver_cmd) {
            rp::Scenario s = ver_scenario.empty()
                                 ? rp::Scenario::default_scenario()
                                 : rp::scenario_from_json(read_json(ver_scenario));
            if (ver_grid > 0) s.grid_size = ver_grid;
            if (ver_seed != 0) s.seed = ver_seed;
            rp::VerifyOptions opts;
            opts.threads = ver_threads;
            if (!ver_sweep.empty()) {
                std::stringstream ss(ver_sweep);
                std::string tok;
                while (std::getline(ss, tok, ','))
                    opts.sweep_grids.push_back(std::stoi(tok));
            }
            auto report = rp::verify_all(s, opts);
            if (ver_markdown) std::cout << rp::report_to_markdown(report);
            if (!ver_report.empty()) write_json(ver_report, rp::report_to_json(report));
            if (!ver_markdown && ver_report.empty()) {
                for (const auto& c : report.checks)
                    std::cout << (c.pass ? "pass  " : "FAIL  ") << c.name << "  worst="
                              << c.worst_error << " tol=" << c.tolerance << "\n";
            }
            return report.all_pass() ? 0 : 1;
        } else if (*gen_cmd) {
            rp::Scenario s = gen_scenario.empty()
                                 ? rp::Scenario::default_scenario()
                                 : rp::scenario_from_json(read_json(gen_scenario));
            auto g = rp::generate(s);
            std::filesystem::create_directories(gen_out);
            const auto dir = std::filesystem::path(gen_out);
            write_json((dir / "scenario.json").string(), rp::scenario_to_json(s));
            write_json((dir / "X.json").string(), rp::functional_to_json(g.X));
            write_json((dir / "X_control.json").string(), rp::control_to_json(g.omega_x));
            if (!g.driver_path.values.empty())
                write_json((dir / "driver.json").string(), rp::path_to_json(g.driver_path));
            for (std::size_t k = 0; k < g.hs.size(); ++k) {
                write_json((dir / ("H" + std::to_string(k) + ".json")).string(),
                           rp::h_element_to_json(g.hs[k]));
                write_json((dir / ("I" + std::to_string(k) + ".json")).string(),
                           rp::increment_path_to_json(g.increments[k]));
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
