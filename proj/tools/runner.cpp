#include "runner.hpp"

#include <chrono>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include "csv.hpp"
#include "waveqed/errors.hpp"
#include "waveqed/oracle.hpp"

namespace waveqed::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void write_manifest(const std::string& dir, const json& body) {
    std::ofstream out(dir + "/manifest.json");
    if (!out) throw ConfigError("cannot write " + dir + "/manifest.json");
    out << body.dump(2) << '\n';
}

json base_manifest(const ExperimentConfig& cfg) {
    json m;
    m["version"] = kVersion;
    m["run_id"] = run_id(cfg.echo);
    m["config"] = cfg.echo;
    m["outputs"] = json::array();
    return m;
}

void add_output(json& manifest, const std::string& dir, const std::string& name,
                const CsvTable& table) {
    write_csv(dir + "/" + name, table);
    manifest["outputs"].push_back(name);
}

void write_ground_tables(json& manifest, const std::string& dir, const ModelSpec& spec,
                         const SiteLayout& layout, const GroundState& gs) {
    CsvTable density;
    density.columns = {"x", "n_x"};
    for (std::size_t n = 0; n < layout.n_sites; ++n)
        density.rows.push_back({double(layout.coordinate(n)), gs.photon_density[n]});
    add_output(manifest, dir, "ground_density.csv", density);

    if (!spec.scatterers.empty()) {
        CsvTable pops;
        pops.columns = {"scatterer", "position", "population"};
        for (std::size_t i = 0; i < spec.scatterers.size(); ++i)
            pops.rows.push_back(
                {double(i), double(spec.scatterers[i].position), gs.populations[i]});
        add_output(manifest, dir, "ground_populations.csv", pops);
    }

    manifest["ground"] = {{"energy", gs.energy},
                          {"total_quanta", gs.total_quanta},
                          {"sweeps", gs.energy_trace.size()}};
}

void write_scatter_tables(json& manifest, const std::string& dir,
                          const ExperimentConfig& cfg, const ScatteringResult& res) {
    const ModelSpec& spec = cfg.run.model;
    write_ground_tables(manifest, dir, spec, res.layout, res.ground);

    CsvTable momentum;
    momentum.columns = {"k", "nk_initial", "nk_final"};
    for (std::size_t m = 0; m < res.k_grid.size(); ++m)
        momentum.rows.push_back({res.k_grid[m], res.nk_initial[m], res.nk_final[m]});
    add_output(manifest, dir, "momentum.csv", momentum);

    CsvTable tr;
    tr.columns = {"k", "defined", "transmission", "reflection"};
    for (std::size_t m = 0; m < res.tr.k.size(); ++m)
        tr.rows.push_back({res.tr.k[m], res.tr.defined[m] ? 1.0 : 0.0,
                           res.tr.transmission[m], res.tr.reflection[m]});
    add_output(manifest, dir, "transmission.csv", tr);

    if (!res.elastic.k.empty()) {
        CsvTable el;
        el.columns = {"k", "defined", "re_t", "im_t", "re_r", "im_r", "t2",
                      "inelastic_raw"};
        for (std::size_t m = 0; m < res.elastic.k.size(); ++m)
            el.rows.push_back({res.elastic.k[m], res.elastic.defined[m] ? 1.0 : 0.0,
                               res.elastic.t[m].real(), res.elastic.t[m].imag(),
                               res.elastic.r[m].real(), res.elastic.r[m].imag(),
                               res.t2[m], res.inelastic_raw[m]});
        add_output(manifest, dir, "elastic.csv", el);
    }

    CsvTable density;
    density.columns = {"t", "x", "n_x"};
    for (const auto& snap : res.snapshots)
        for (std::size_t n = 0; n < snap.n_x.size(); ++n)
            density.rows.push_back(
                {snap.t, double(res.layout.coordinate(n)), snap.n_x[n]});
    add_output(manifest, dir, "density.csv", density);

    CsvTable energy;
    energy.columns = {"t", "energy", "quanta"};
    for (const auto& snap : res.snapshots)
        energy.rows.push_back({snap.t, snap.energy, snap.quanta});
    add_output(manifest, dir, "energy.csv", energy);

    const std::size_t n_sc = spec.scatterers.size();
    if (n_sc > 0) {
        CsvTable pops;
        pops.columns = {"t", "scatterer", "position", "delta_population"};
        for (const auto& snap : res.snapshots)
            for (std::size_t i = 0; i < n_sc; ++i)
                pops.rows.push_back({snap.t, double(i),
                                     double(spec.scatterers[i].position),
                                     snap.delta_pop[i]});
        add_output(manifest, dir, "populations.csv", pops);

        CsvTable corr;
        corr.columns = {"t", "i", "j", "re", "im"};
        for (const auto& snap : res.snapshots)
            for (std::size_t i = 0; i < n_sc; ++i)
                for (std::size_t j = 0; j < n_sc; ++j) {
                    const cx v = snap.correlators[i * n_sc + j];
                    corr.rows.push_back({snap.t, double(i), double(j), v.real(), v.imag()});
                }
        add_output(manifest, dir, "correlators.csv", corr);
    }

    if (!res.two_photon_abs2.empty()) {
        CsvTable map;
        map.columns = {"x1", "x2", "abs2"};
        const std::size_t N = res.layout.n_sites;
        for (std::size_t a = 0; a < N; ++a)
            for (std::size_t b = 0; b < N; ++b)
                map.rows.push_back({double(res.layout.coordinate(a)),
                                    double(res.layout.coordinate(b)),
                                    res.two_photon_abs2[a * N + b]});
        add_output(manifest, dir, "two_photon_map.csv", map);
    }

    manifest["result"] = {{"t_out", res.t_out},
                          {"injection_norm", res.injection_norm},
                          {"snapshots", res.snapshots.size()},
                          {"max_discard", res.diagnostics.max_discard},
                          {"discard_sum", res.diagnostics.discard_sum},
                          {"max_bond", res.diagnostics.max_bond}};
}

// Exact single-photon amplitudes in the same table schema as a finished run.
void write_oracle_tables(json& manifest, const std::string& dir,
                         const ExperimentConfig& cfg) {
    const ModelSpec& spec = cfg.run.model;
    const SiteLayout layout = make_layout(spec);
    const std::vector<cx> profile = gaussian_profile(spec, layout, cfg.run.packet);
    const double t_out = resolved_t_out(spec, cfg.run.packet, cfg.run.t_out, cfg.run.dt);

    const std::size_t N = layout.n_sites;
    const auto dft = [&](double k) {
        cx acc(0, 0);
        for (std::size_t n = 0; n < N; ++n)
            acc += std::exp(cx(0.0, -k * double(layout.coordinate(n)))) * profile[n];
        return acc / std::sqrt(double(N));
    };

    std::vector<double> grid = momentum_grid(N);
    const std::size_t c = N / 2;
    std::vector<double> ks;
    std::vector<bool> defined;
    std::vector<std::size_t> solve_rows;
    std::vector<double> solve_k;
    for (std::size_t m = 1; m + c < N; ++m) {
        ks.push_back(grid[c + m]);
        const bool ok = std::norm(dft(grid[c + m])) >= 1e-4;
        defined.push_back(ok);
        if (ok) {
            solve_rows.push_back(ks.size() - 1);
            solve_k.push_back(grid[c + m]);
        }
    }

    std::vector<cx> t(ks.size(), cx(0, 0)), r(ks.size(), cx(0, 0));
    bool quadratic = !spec.scatterers.empty();
    for (const auto& sc : spec.scatterers)
        if (sc.kind != ScattererKind::oscillator) quadratic = false;

    if (spec.coupling_mode == CouplingMode::rwa) {
        ElasticAmplitudes amps = single_excitation_solve(spec, solve_k);
        for (std::size_t i = 0; i < solve_rows.size(); ++i) {
            const cx phase = std::exp(cx(0.0, -dispersion(solve_k[i], spec) * t_out));
            t[solve_rows[i]] = amps.t[i] * phase;
            r[solve_rows[i]] = amps.r[i] * phase;
        }
        manifest["oracle"] = {{"route", "single-excitation"}, {"t_out", t_out}};
    } else if (quadratic) {
        LinearSolution sol = bogoliubov_diagonalize(spec);
        ElasticAmplitudes amps = single_photon_smatrix(sol, t_out, solve_k);
        for (std::size_t i = 0; i < solve_rows.size(); ++i) {
            t[solve_rows[i]] = amps.t[i];
            r[solve_rows[i]] = amps.r[i];
        }
        std::vector<double> cloud = ground_photon_density(sol);
        CsvTable density;
        density.columns = {"x", "n_x"};
        for (std::size_t n = 0; n < N; ++n)
            density.rows.push_back({double(layout.coordinate(n)), cloud[n]});
        add_output(manifest, dir, "ground_density.csv", density);
        manifest["oracle"] = {{"route", "bogoliubov"},
                              {"t_out", t_out},
                              {"ground_energy", sol.ground_energy}};
    } else {
        throw ConfigError(
            "oracle mode needs a number-conserving model or oscillator scatterers");
    }

    CsvTable el;
    el.columns = {"k", "defined", "re_t", "im_t", "re_r", "im_r", "t2", "inelastic_raw"};
    for (std::size_t m = 0; m < ks.size(); ++m)
        el.rows.push_back({ks[m], defined[m] ? 1.0 : 0.0, t[m].real(), t[m].imag(),
                           r[m].real(), r[m].imag(), 0.0, 0.0});
    add_output(manifest, dir, "elastic.csv", el);

    CsvTable tr;
    tr.columns = {"k", "defined", "transmission", "reflection"};
    for (std::size_t m = 0; m < ks.size(); ++m)
        tr.rows.push_back({ks[m], defined[m] ? 1.0 : 0.0, std::norm(t[m]),
                           std::norm(r[m])});
    add_output(manifest, dir, "transmission.csv", tr);
}

// run one resolved config into cfg.out; returns the exit code
int run_point(const ExperimentConfig& cfg) {
    fs::create_directories(cfg.out);
    json manifest = base_manifest(cfg);
    const auto t0 = std::chrono::steady_clock::now();

    int code = 0;
    try {
        if (cfg.mode == "ground-state") {
            GroundState gs = prepare_ground_state(cfg.run.model, cfg.run.ground);
            write_ground_tables(manifest, cfg.out, cfg.run.model,
                                make_layout(cfg.run.model), gs);
        } else if (cfg.mode == "oracle") {
            write_oracle_tables(manifest, cfg.out, cfg);
        } else { // scatter
            ScatteringResult res = run_scattering(cfg.run);
            write_scatter_tables(manifest, cfg.out, cfg, res);
        }
        manifest["status"] = "ok";
    } catch (const ResourceError& e) {
        manifest["status"] = "aborted";
        manifest["error"] = e.what();
        code = 3;
    } catch (const NumericError& e) {
        manifest["status"] = "failed";
        manifest["error"] = e.what();
        code = 1;
    } catch (const ConvergenceError& e) {
        manifest["status"] = "failed";
        manifest["error"] = e.what();
        code = 1;
    }

    const auto t1 = std::chrono::steady_clock::now();
    manifest["wall_seconds"] =
        std::chrono::duration_cast<std::chrono::duration<double>>(t1 - t0).count();
    write_manifest(cfg.out, manifest);
    if (code != 0)
        std::cerr << cfg.out << ": " << manifest["error"].get<std::string>() << "\n";
    return code;
}

} // namespace

int run_config(const json& tree, const std::string& out_override) {
    ExperimentConfig base = load_config(tree);
    if (!out_override.empty()) base.out = out_override;

    if (base.mode != "sweep") {
        if (tree.contains("sweep"))
            throw ConfigError("config field 'sweep': only valid with mode = \"sweep\"");
        return run_point(base);
    }

    if (!tree.contains("sweep"))
        throw ConfigError("config field 'sweep': required by mode = \"sweep\"");
    std::vector<SweepPoint> points = expand_sweep(tree);

    json manifest;
    manifest["version"] = kVersion;
    json norm = tree;
    norm["out"] = base.out;
    manifest["run_id"] = run_id(norm);
    manifest["config"] = norm;
    manifest["points"] = json::array();

    int worst = 0;
    fs::create_directories(base.out);
    for (auto& pt : points) {
        pt.config.mode = "scatter";
        pt.config.out = base.out + "/" + pt.name;
        pt.config.echo["mode"] = "scatter";
        pt.config.echo["out"] = pt.config.out;
        std::cout << "running " << pt.config.out << "\n";
        const int code = run_point(pt.config);
        manifest["points"].push_back(
            {{"name", pt.name}, {"dir", pt.name}, {"exit", code}});
        worst = std::max(worst, code);
    }
    manifest["status"] = worst == 0 ? "ok" : (worst == 3 ? "aborted" : "failed");
    write_manifest(base.out, manifest);
    return worst;
}

namespace {

double tol_for(const CompareOptions& opts, const std::string& file,
               const std::string& column) {
    auto it = opts.tols.find(file + ":" + column);
    if (it != opts.tols.end()) return it->second;
    it = opts.tols.find(column);
    if (it != opts.tols.end()) return it->second;
    it = opts.tols.find("*");
    if (it != opts.tols.end()) return it->second;
    return opts.default_tol;
}

std::set<std::string> csv_names(const std::string& dir) {
    std::set<std::string> names;
    if (!fs::is_directory(dir)) throw ConfigError(dir + " is not a directory");
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".csv")
            names.insert(entry.path().filename().string());
    return names;
}

// normalized L1 distance between two non-negative maps
double l1_map_distance(const CsvTable& a, const CsvTable& b, std::size_t col) {
    double ma = 0.0, mb = 0.0;
    for (std::size_t r = 0; r < a.rows.size(); ++r) {
        ma += a.rows[r][col];
        mb += b.rows[r][col];
    }
    if (ma <= 0.0 || mb <= 0.0) throw NumericError("two-photon map has no weight");
    double dist = 0.0;
    for (std::size_t r = 0; r < a.rows.size(); ++r)
        dist += std::abs(a.rows[r][col] / ma - b.rows[r][col] / mb);
    return dist;
}

} // namespace

int compare_dirs(const std::string& dir_a, const std::string& dir_b,
                 const CompareOptions& opts) {
    const std::set<std::string> in_a = csv_names(dir_a), in_b = csv_names(dir_b);
    json report;
    report["a"] = dir_a;
    report["b"] = dir_b;
    report["only_in_a"] = json::array();
    report["only_in_b"] = json::array();
    std::vector<std::string> shared;
    for (const auto& n : in_a) {
        if (in_b.count(n)) shared.push_back(n);
        else report["only_in_a"].push_back(n);
    }
    for (const auto& n : in_b)
        if (!in_a.count(n)) report["only_in_b"].push_back(n);
    if (shared.empty())
        throw ConfigError("no shared CSV tables between " + dir_a + " and " + dir_b);

    bool all_pass = true;
    report["files"] = json::object();
    for (const auto& name : shared) {
        CsvTable a = read_csv(dir_a + "/" + name), b = read_csv(dir_b + "/" + name);
        if (a.columns != b.columns)
            throw ConfigError(name + ": headers differ between the two runs");
        if (a.rows.size() != b.rows.size())
            throw ConfigError(name + ": row counts differ (" +
                              std::to_string(a.rows.size()) + " vs " +
                              std::to_string(b.rows.size()) + ")");
        json& file = report["files"][name];
        file["rows"] = a.rows.size();
        for (std::size_t c = 0; c < a.columns.size(); ++c) {
            double mx = 0.0, mean = 0.0;
            for (std::size_t r = 0; r < a.rows.size(); ++r) {
                const double d = std::abs(a.rows[r][c] - b.rows[r][c]);
                mx = std::max(mx, d);
                mean += d;
            }
            if (!a.rows.empty()) mean /= double(a.rows.size());
            const double tol = tol_for(opts, name, a.columns[c]);
            const bool pass = mx <= tol;
            all_pass = all_pass && pass;
            file["columns"][a.columns[c]] = {
                {"max", mx}, {"mean", mean}, {"tol", tol}, {"pass", pass}};
            std::cout << (pass ? "  ok  " : " FAIL ") << name << ":" << a.columns[c]
                      << "  max " << format_cell(mx) << "  mean " << format_cell(mean)
                      << "  tol " << format_cell(tol) << "\n";
        }
        if (name == "two_photon_map.csv") {
            std::size_t col = 0;
            for (std::size_t c = 0; c < a.columns.size(); ++c)
                if (a.columns[c] == "abs2") col = c;
            const double dist = l1_map_distance(a, b, col);
            const double tol = tol_for(opts, name, "l1");
            const bool pass = dist <= tol;
            all_pass = all_pass && pass;
            file["l1"] = {{"distance", dist}, {"tol", tol}, {"pass", pass}};
            std::cout << (pass ? "  ok  " : " FAIL ") << name << ":l1  " << format_cell(dist)
                      << "  tol " << format_cell(tol) << "\n";
        }
    }
    report["pass"] = all_pass;
    if (!opts.report_path.empty()) {
        std::ofstream out(opts.report_path);
        if (!out) throw ConfigError("cannot write " + opts.report_path);
        out << report.dump(2) << '\n';
    }
    std::cout << (all_pass ? "compare: PASS" : "compare: FAIL") << "\n";
    return all_pass ? 0 : 1;
}

} // namespace waveqed::cli
