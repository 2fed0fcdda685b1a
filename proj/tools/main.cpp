#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "config.hpp"
#include "runner.hpp"
#include "toml.hpp"
#include "waveqed/errors.hpp"

using namespace waveqed;
using namespace waveqed::cli;

namespace {

#ifndef WAVEQED_CONFIG_DIR
#define WAVEQED_CONFIG_DIR "configs"
#endif

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

nlohmann::json load_tree(const std::string& path, const std::vector<std::string>& sets,
                         const std::string& mode) {
    nlohmann::json tree = parse_toml(slurp(path));
    for (const auto& s : sets) apply_override(tree, s);
    tree["mode"] = mode;
    return tree;
}

// one simulation subcommand (ground-state / scatter / sweep / oracle)
struct RunArgs {
    std::string config;
    std::string out;
    std::vector<std::string> sets;
};

RunArgs* add_run_command(CLI::App& app, const std::string& name, const std::string& help) {
    auto* args = new RunArgs; // lives for the whole process
    CLI::App* cmd = app.add_subcommand(name, help);
    cmd->add_option("config", args->config, "TOML config file")->required();
    cmd->add_option("--out", args->out, "output directory (overrides the config)");
    cmd->add_option("--set", args->sets, "override a config key, dotted.path=value")
        ->take_all();
    return args;
}

const std::vector<std::string> kFigureIds = {"fig1c",     "fig2a",     "fig2c", "fig3",
                                             "fig4_rwa",  "fig4_g020", "fig4_g030",
                                             "fig6"};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"few-photon scattering on a coupled-cavity waveguide"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    RunArgs* ground = add_run_command(app, "ground-state",
                                      "relax and dump the interacting ground state");
    RunArgs* scatter = add_run_command(app, "scatter",
                                       "full wavepacket scattering run");
    RunArgs* sweep = add_run_command(app, "sweep",
                                     "expand [sweep] axes and run every point");
    RunArgs* oracle = add_run_command(
        app, "oracle", "exact single-photon amplitudes for the same config");

    // compare two output directories table by table
    std::string cmp_a, cmp_b, cmp_report;
    std::vector<std::string> cmp_tols;
    CompareOptions cmp_opts;
    CLI::App* cmp = app.add_subcommand("compare", "diff the CSV tables of two runs");
    cmp->add_option("dir_a", cmp_a, "first run directory")->required();
    cmp->add_option("dir_b", cmp_b, "second run directory")->required();
    cmp->add_option("--tol", cmp_tols,
                    "per-column tolerance, column=v or file.csv:column=v")
        ->take_all();
    cmp->add_option("--default-tol", cmp_opts.default_tol,
                    "tolerance for columns without a --tol entry");
    cmp->add_option("--report", cmp_report, "write a JSON report here");

    // bundled configs by figure id
    std::string fig_id, fig_out, fig_dir = WAVEQED_CONFIG_DIR;
    std::vector<std::string> fig_sets;
    CLI::App* fig = app.add_subcommand("figures", "run a bundled config by id");
    fig->add_option("id", fig_id, "figure id, or fig4 for all three fig4 variants")
        ->required();
    fig->add_option("--out", fig_out, "output directory");
    fig->add_option("--set", fig_sets, "override a config key, dotted.path=value")
        ->take_all();
    fig->add_option("--configs", fig_dir, "directory holding the bundled configs");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*cmp) {
            for (const auto& entry : cmp_tols) {
                const auto eq = entry.rfind('=');
                if (eq == std::string::npos || eq == 0)
                    throw ConfigError("--tol expects column=value, got '" + entry + "'");
                try {
                    cmp_opts.tols[entry.substr(0, eq)] = std::stod(entry.substr(eq + 1));
                } catch (const std::exception&) {
                    throw ConfigError("--tol value in '" + entry + "' is not a number");
                }
            }
            cmp_opts.report_path = cmp_report;
            return compare_dirs(cmp_a, cmp_b, cmp_opts);
        }

        if (*fig) {
            std::vector<std::string> ids;
            if (fig_id == "fig4")
                ids = {"fig4_rwa", "fig4_g020", "fig4_g030"};
            else if (std::find(kFigureIds.begin(), kFigureIds.end(), fig_id) !=
                     kFigureIds.end())
                ids = {fig_id};
            else {
                std::string known;
                for (const auto& id : kFigureIds) known += " " + id;
                throw ConfigError("unknown figure id '" + fig_id + "'; known:" + known +
                                  " fig4");
            }
            int worst = 0;
            for (const auto& id : ids) {
                nlohmann::json tree = parse_toml(slurp(fig_dir + "/" + id + ".toml"));
                for (const auto& s : fig_sets) apply_override(tree, s);
                std::string out = fig_out.empty() ? "out/" + id : fig_out;
                if (ids.size() > 1) out = (fig_out.empty() ? "out" : fig_out) + "/" + id;
                worst = std::max(worst, run_config(tree, out));
            }
            return worst;
        }

        const RunArgs* args = nullptr;
        std::string mode;
        if (*app.get_subcommand("ground-state")) { args = ground; mode = "ground-state"; }
        else if (*app.get_subcommand("scatter"))  { args = scatter; mode = "scatter"; }
        else if (*app.get_subcommand("sweep"))    { args = sweep; mode = "sweep"; }
        else                                      { args = oracle; mode = "oracle"; }
        return run_config(load_tree(args->config, args->sets, mode), args->out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ResourceError& e) {
        std::cerr << "resource limit: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
