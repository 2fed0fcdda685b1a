#include "config.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <set>

#include "toml.hpp"
#include "waveqed/errors.hpp"

namespace waveqed::cli {

using nlohmann::json;

const char* kVersion = "waveqed 0.1.0";

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& why) {
    throw ConfigError("config field '" + field + "': " + why);
}

void check_known_keys(const json& table, const std::string& where,
                      const std::set<std::string>& known) {
    for (auto it = table.begin(); it != table.end(); ++it)
        if (!known.count(it.key()))
            bad(where.empty() ? it.key() : where + "." + it.key(), "unknown key");
}

double get_num(const json& t, const std::string& where, const std::string& key,
               double fallback) {
    if (!t.contains(key)) return fallback;
    const json& v = t[key];
    if (!v.is_number()) bad(where + "." + key, "expected a number");
    return v.get<double>();
}

long get_int(const json& t, const std::string& where, const std::string& key,
             long fallback) {
    if (!t.contains(key)) return fallback;
    const json& v = t[key];
    if (!v.is_number_integer()) bad(where + "." + key, "expected an integer");
    return v.get<long>();
}

std::string get_str(const json& t, const std::string& where, const std::string& key,
                    const std::string& fallback) {
    if (!t.contains(key)) return fallback;
    const json& v = t[key];
    if (!v.is_string()) bad(where + "." + key, "expected a string");
    return v.get<std::string>();
}

bool get_bool(const json& t, const std::string& where, const std::string& key,
              bool fallback) {
    if (!t.contains(key)) return fallback;
    const json& v = t[key];
    if (!v.is_boolean()) bad(where + "." + key, "expected true or false");
    return v.get<bool>();
}

const json kEmpty = json::object();

const json& get_table(const json& t, const std::string& key) {
    if (!t.contains(key)) return kEmpty;
    if (!t[key].is_object()) bad(key, "expected a table");
    return t[key];
}

std::string fmt_g(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

ScattererSpec parse_scatterer(const json& t, const std::string& where) {
    check_known_keys(t, where, {"kind", "position", "delta", "g", "m", "levels"});
    ScattererSpec sc;
    const std::string kind = get_str(t, where, "kind", "qubit");
    if (kind == "qubit") sc.kind = ScattererKind::qubit_group;
    else if (kind == "oscillator") sc.kind = ScattererKind::oscillator;
    else bad(where + ".kind", "expected \"qubit\" or \"oscillator\"");
    sc.position = get_int(t, where, "position", 0);
    sc.delta = get_num(t, where, "delta", 1.0);
    sc.g = get_num(t, where, "g", 0.0);
    long m = get_int(t, where, "m", 1);
    if (m < 1) bad(where + ".m", "must be >= 1");
    sc.count = std::size_t(m);
    long levels = get_int(t, where, "levels", 4);
    if (levels < 1) bad(where + ".levels", "must be >= 1");
    sc.n_osc = std::size_t(levels);
    return sc;
}

json echo_scatterer(const ScattererSpec& sc) {
    json t;
    t["kind"] = sc.kind == ScattererKind::qubit_group ? "qubit" : "oscillator";
    t["position"] = sc.position;
    t["delta"] = sc.delta;
    t["g"] = sc.g;
    t["m"] = sc.count;
    t["levels"] = sc.n_osc;
    return t;
}

} // namespace

ExperimentConfig load_config(const json& tree) {
    check_known_keys(tree, "",
                     {"mode", "out", "model", "packet", "engine", "run", "ground", "sweep"});

    ExperimentConfig cfg;
    cfg.mode = get_str(tree, "", "mode", "");
    if (cfg.mode != "ground-state" && cfg.mode != "scatter" && cfg.mode != "sweep" &&
        cfg.mode != "oracle")
        bad("mode", "expected ground-state, scatter, sweep or oracle");
    cfg.out = get_str(tree, "", "out", "out/run");

    const json& model = get_table(tree, "model");
    check_known_keys(model, "model",
                     {"n_cav", "epsilon", "hopping", "coupling", "n_max", "dicke_cap",
                      "scatterer"});
    ModelSpec& spec = cfg.run.model;
    long n_cav = get_int(model, "model", "n_cav", 129);
    if (n_cav < 3 || n_cav % 2 == 0) bad("model.n_cav", "must be odd and >= 3");
    spec.n_cav = std::size_t(n_cav);
    spec.epsilon = get_num(model, "model", "epsilon", 1.0);
    spec.hopping = get_num(model, "model", "hopping", 1.0 / 3.14159265358979323846);
    const std::string coupling = get_str(model, "model", "coupling", "rwa");
    if (coupling == "rwa") spec.coupling_mode = CouplingMode::rwa;
    else if (coupling == "full") spec.coupling_mode = CouplingMode::full;
    else bad("model.coupling", "expected \"rwa\" or \"full\"");
    long n_max = get_int(model, "model", "n_max", 1);
    if (n_max < 1) bad("model.n_max", "must be >= 1");
    spec.n_max = std::size_t(n_max);
    long cap = get_int(model, "model", "dicke_cap", 0);
    if (cap < 0) bad("model.dicke_cap", "must be >= 0");
    spec.dicke_cap = std::size_t(cap);
    if (model.contains("scatterer")) {
        if (!model["scatterer"].is_array()) bad("model.scatterer", "expected a table array");
        for (std::size_t i = 0; i < model["scatterer"].size(); ++i)
            spec.scatterers.push_back(parse_scatterer(
                model["scatterer"][i], "model.scatterer[" + std::to_string(i) + "]"));
    }

    const json& packet = get_table(tree, "packet");
    check_known_keys(packet, "packet", {"x_in", "theta", "k_in", "n_photons"});
    Wavepacket& pk = cfg.run.packet;
    pk.x_in = get_int(packet, "packet", "x_in", -(n_cav / 4));
    pk.theta = get_num(packet, "packet", "theta", 2.0);
    pk.k_in = get_num(packet, "packet", "k_in", 1.5707963267948966);
    long n_ph = get_int(packet, "packet", "n_photons", 1);
    if (n_ph < 1) bad("packet.n_photons", "must be >= 1");
    pk.n_photons = std::size_t(n_ph);

    const json& engine = get_table(tree, "engine");
    check_known_keys(engine, "engine",
                     {"dt", "bond_cap", "discard_tolerance", "snapshot_stride"});
    cfg.run.dt = get_num(engine, "engine", "dt", 0.05);
    if (!(cfg.run.dt > 0.0)) bad("engine.dt", "must be positive");
    long bond = get_int(engine, "engine", "bond_cap", 64);
    if (bond < 1 || bond > 256) bad("engine.bond_cap", "must be in 1..256");
    cfg.run.trunc.max_rank = std::size_t(bond);
    cfg.run.trunc.discard_tolerance = get_num(engine, "engine", "discard_tolerance", 1e-8);
    if (cfg.run.trunc.discard_tolerance < 0.0)
        bad("engine.discard_tolerance", "must be >= 0");
    long stride = get_int(engine, "engine", "snapshot_stride", 20);
    if (stride < 0) bad("engine.snapshot_stride", "must be >= 0");
    cfg.run.snapshot_stride = std::size_t(stride);

    const json& runt = get_table(tree, "run");
    check_known_keys(runt, "run", {"t_out", "two_photon_map"});
    cfg.run.t_out = get_num(runt, "run", "t_out", 0.0);
    cfg.run.want_two_photon_map = get_bool(runt, "run", "two_photon_map", false);

    const json& ground = get_table(tree, "ground");
    check_known_keys(ground, "ground",
                     {"dt_start", "dt_floor", "halve_threshold", "converge_threshold",
                      "max_sweeps", "discard_tolerance"});
    ImagTimeConfig& gr = cfg.run.ground;
    gr.dt_start = get_num(ground, "ground", "dt_start", gr.dt_start);
    gr.dt_floor = get_num(ground, "ground", "dt_floor", gr.dt_floor);
    gr.halve_threshold = get_num(ground, "ground", "halve_threshold", gr.halve_threshold);
    gr.converge_threshold =
        get_num(ground, "ground", "converge_threshold", gr.converge_threshold);
    long sweeps = get_int(ground, "ground", "max_sweeps", long(gr.max_sweeps));
    if (sweeps < 1) bad("ground.max_sweeps", "must be >= 1");
    gr.max_sweeps = std::size_t(sweeps);
    gr.trunc.max_rank = cfg.run.trunc.max_rank;
    gr.trunc.discard_tolerance =
        get_num(ground, "ground", "discard_tolerance", gr.trunc.discard_tolerance);

    // canonical echo with every default materialized
    json echo;
    echo["mode"] = cfg.mode;
    echo["out"] = cfg.out;
    json& em = echo["model"];
    em["n_cav"] = spec.n_cav;
    em["epsilon"] = spec.epsilon;
    em["hopping"] = spec.hopping;
    em["coupling"] = coupling;
    em["n_max"] = spec.n_max;
    em["dicke_cap"] = spec.dicke_cap;
    em["scatterer"] = json::array();
    for (const auto& sc : spec.scatterers) em["scatterer"].push_back(echo_scatterer(sc));
    json& ep = echo["packet"];
    ep["x_in"] = pk.x_in;
    ep["theta"] = pk.theta;
    ep["k_in"] = pk.k_in;
    ep["n_photons"] = pk.n_photons;
    json& ee = echo["engine"];
    ee["dt"] = cfg.run.dt;
    ee["bond_cap"] = cfg.run.trunc.max_rank;
    ee["discard_tolerance"] = cfg.run.trunc.discard_tolerance;
    ee["snapshot_stride"] = cfg.run.snapshot_stride;
    json& er = echo["run"];
    er["t_out"] = cfg.run.t_out;
    er["two_photon_map"] = cfg.run.want_two_photon_map;
    json& eg = echo["ground"];
    eg["dt_start"] = gr.dt_start;
    eg["dt_floor"] = gr.dt_floor;
    eg["halve_threshold"] = gr.halve_threshold;
    eg["converge_threshold"] = gr.converge_threshold;
    eg["max_sweeps"] = gr.max_sweeps;
    eg["discard_tolerance"] = gr.trunc.discard_tolerance;
    cfg.echo = std::move(echo);
    return cfg;
}

namespace {

bool all_digits(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    return true;
}

} // namespace

void apply_override(json& tree, const std::string& assignment) {
    const std::size_t eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("override '" + assignment + "' is not key=value");
    const std::string path = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    json value;
    try {
        value = parse_toml_value(raw);
    } catch (const ConfigError&) {
        value = raw; // unquoted word on the command line reads as a string
    }

    std::vector<std::string> keys;
    std::size_t start = 0;
    for (;;) {
        const std::size_t dot = path.find('.', start);
        keys.push_back(path.substr(start, dot == std::string::npos ? dot : dot - start));
        if (keys.back().empty())
            throw ConfigError("override '" + assignment + "': empty key");
        if (dot == std::string::npos) break;
        start = dot + 1;
    }

    json* node = &tree;
    for (std::size_t i = 0; i < keys.size(); ++i) {
        const std::string& key = keys[i];
        const bool last = i + 1 == keys.size();
        if (node->is_array()) {
            // digits select an element; any other key applies to the last one
            if (all_digits(key)) {
                const std::size_t idx = std::stoul(key);
                if (idx >= node->size())
                    throw ConfigError("override '" + assignment + "': index " + key +
                                      " out of range (size " +
                                      std::to_string(node->size()) + ")");
                node = &(*node)[idx];
                if (last)
                    throw ConfigError("override '" + assignment +
                                      "': path ends on an array element, not a key");
                continue;
            }
            if (node->empty())
                throw ConfigError("override '" + assignment + "': array is empty");
            node = &node->back();
        }
        if (!node->is_object() && !node->is_null())
            throw ConfigError("override '" + assignment + "': '" + keys[i - 1] +
                              "' is a scalar");
        if (last) {
            (*node)[key] = std::move(value);
            return;
        }
        json& child = (*node)[key];
        if (child.is_null()) child = json::object();
        node = &child;
    }
}

namespace {

// one sweep axis applied to a raw config tree
struct Axis {
    std::string key;
    std::vector<json> values;
};

void require_scatterers(const json& tree, const std::string& axis) {
    if (!tree.contains("model") || !tree["model"].contains("scatterer") ||
        tree["model"]["scatterer"].empty())
        bad("sweep." + axis, "needs at least one [[model.scatterer]]");
}

void apply_axis(json& tree, const std::string& key, const json& v, double g_sqrt_m,
                bool have_gsm, std::string& name) {
    if (key == "n_photons") {
        if (!v.is_number_integer() || v.get<long>() < 1)
            bad("sweep.n_photons", "entries must be integers >= 1");
        tree["packet"]["n_photons"] = v;
        name += "n" + std::to_string(v.get<long>());
    } else if (key == "k_in") {
        if (!v.is_number()) bad("sweep.k_in", "entries must be numbers");
        tree["packet"]["k_in"] = v;
        name += "k" + fmt_g(v.get<double>());
    } else if (key == "g") {
        if (!v.is_number()) bad("sweep.g", "entries must be numbers");
        for (auto& sc : tree["model"]["scatterer"]) sc["g"] = v;
        name += "g" + fmt_g(v.get<double>());
    } else if (key == "m") {
        if (!v.is_number_integer() || v.get<long>() < 1)
            bad("sweep.m", "entries must be integers >= 1");
        const long m = v.get<long>();
        for (auto& sc : tree["model"]["scatterer"]) {
            sc["m"] = m;
            if (have_gsm) sc["g"] = g_sqrt_m / std::sqrt(double(m));
        }
        name += "m" + std::to_string(m);
    } else if (key == "scatterer") {
        if (!v.is_string()) bad("sweep.scatterer", "entries must be strings");
        const std::string tok = v.get<std::string>();
        for (auto& sc : tree["model"]["scatterer"]) {
            if (tok == "osc") {
                sc["kind"] = "oscillator";
                sc["m"] = 1;
                if (have_gsm) sc["g"] = g_sqrt_m;
            } else if (tok.size() > 1 && tok[0] == 'm') {
                const long m = std::strtol(tok.c_str() + 1, nullptr, 10);
                if (m < 1) bad("sweep.scatterer", "bad token '" + tok + "'");
                sc["kind"] = "qubit";
                sc["m"] = m;
                if (have_gsm) sc["g"] = g_sqrt_m / std::sqrt(double(m));
            } else {
                bad("sweep.scatterer", "expected \"m<count>\" or \"osc\", got '" + tok + "'");
            }
        }
        name += tok;
    } else if (key == "distance") {
        if (!v.is_number_integer() || v.get<long>() < 0)
            bad("sweep.distance", "entries must be integers >= 0");
        const long d = v.get<long>();
        json& scs = tree["model"]["scatterer"];
        if (scs.size() != 1) bad("sweep.distance", "needs exactly one [[model.scatterer]]");
        json base = scs[0];
        const long m = base.value("m", 1);
        if (d > 0 && m > 1) {
            // spread the group into m single constituents, same per-qubit g
            const long p = base.value("position", 0L);
            base["m"] = 1;
            json spread = json::array();
            for (long j = 0; j < m; ++j) {
                json sc = base;
                sc["position"] = p + j * d - ((m - 1) * d) / 2;
                spread.push_back(sc);
            }
            scs = std::move(spread);
        }
        name += "d" + std::to_string(d);
    } else {
        bad("sweep." + key, "unknown sweep axis");
    }
}

} // namespace

std::vector<SweepPoint> expand_sweep(const json& tree) {
    std::vector<SweepPoint> points;
    if (!tree.contains("sweep")) {
        points.push_back({"", load_config(tree)});
        return points;
    }
    const json& sweep = tree["sweep"];
    if (!sweep.is_object()) bad("sweep", "expected a table");
    check_known_keys(sweep, "sweep",
                     {"n_photons", "m", "g", "k_in", "distance", "scatterer", "g_sqrt_m"});
    if (sweep.contains("m") && sweep.contains("scatterer"))
        bad("sweep.m", "exclusive with sweep.scatterer");

    const bool have_gsm = sweep.contains("g_sqrt_m");
    double g_sqrt_m = 0.0;
    if (have_gsm) {
        if (!sweep["g_sqrt_m"].is_number()) bad("sweep.g_sqrt_m", "expected a number");
        g_sqrt_m = sweep["g_sqrt_m"].get<double>();
    }

    std::vector<Axis> axes;
    for (const char* key : {"scatterer", "m", "distance", "g", "k_in", "n_photons"}) {
        if (!sweep.contains(key)) continue;
        const json& vals = sweep[key];
        if (!vals.is_array() || vals.empty())
            bad(std::string("sweep.") + key, "expected a non-empty array");
        Axis ax;
        ax.key = key;
        for (const auto& v : vals) ax.values.push_back(v);
        if (ax.key == "m" || ax.key == "scatterer" || ax.key == "distance" || ax.key == "g")
            require_scatterers(tree, ax.key);
        axes.push_back(std::move(ax));
    }
    if (axes.empty()) bad("sweep", "no axes given");

    std::vector<std::size_t> idx(axes.size(), 0);
    for (;;) {
        json point = tree;
        point.erase("sweep");
        std::string name;
        for (std::size_t a = 0; a < axes.size(); ++a) {
            if (a > 0) name += "_";
            apply_axis(point, axes[a].key, axes[a].values[idx[a]], g_sqrt_m, have_gsm, name);
        }
        points.push_back({name, load_config(point)});

        std::size_t a = axes.size();
        while (a > 0) {
            --a;
            if (++idx[a] < axes[a].values.size()) break;
            idx[a] = 0;
            if (a == 0) return points;
        }
    }
}

std::string run_id(const json& echo) {
    const std::string text = echo.dump() + kVersion;
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace waveqed::cli
