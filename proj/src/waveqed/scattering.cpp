#include "waveqed/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <sstream>

#include "waveqed/errors.hpp"

namespace waveqed {

namespace {

constexpr double kPi = 3.14159265358979323846;

DenseTensor mat_mul(const DenseTensor& a, const DenseTensor& b) {
    const std::size_t n = a.extent(0), m = b.extent(1), k = a.extent(1);
    DenseTensor c({n, m});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t l = 0; l < k; ++l) {
            const cx v = a.at({i, l});
            if (v == cx(0, 0)) continue;
            for (std::size_t j = 0; j < m; ++j) c.at({i, j}) += v * b.at({l, j});
        }
    return c;
}

std::vector<DenseTensor> photon_ops(const SiteLayout& layout,
                                    DenseTensor (*op)(const SiteLayout&, std::size_t)) {
    std::vector<DenseTensor> ops;
    ops.reserve(layout.n_sites);
    for (std::size_t n = 0; n < layout.n_sites; ++n) ops.push_back(op(layout, n));
    return ops;
}

void merge_diagnostics(EvolveDiagnostics& into, const EvolveDiagnostics& d) {
    into.max_discard = std::max(into.max_discard, d.max_discard);
    into.discard_sum += d.discard_sum;
    into.max_bond = std::max(into.max_bond, d.max_bond);
    into.step_max_discard.insert(into.step_max_discard.end(), d.step_max_discard.begin(),
                                 d.step_max_discard.end());
    into.step_log_norm.insert(into.step_log_norm.end(), d.step_log_norm.begin(),
                              d.step_log_norm.end());
}

} // namespace

GroundState prepare_ground_state(const ModelSpec& model, const ImagTimeConfig& cfg) {
    const SiteLayout layout = make_layout(model);
    const ChainHamiltonian chain = build_terms(model);

    MPSState s = vacuum_state(layout.local_dims);
    double dt = cfg.dt_start;
    TrotterPlan plan = make_trotter_plan(chain, dt, EvolveMode::imaginary_time);
    EvolveOptions opts;
    opts.renormalize = true;

    GroundState out;
    double e_prev = chain_energy(s, chain);
    out.energy_trace.push_back(e_prev);
    bool converged = false;
    for (std::size_t sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
        evolve(s, plan, 1, cfg.trunc, opts);
        const double e = chain_energy(s, chain);
        out.energy_trace.push_back(e);
        const double rel = std::abs(e - e_prev) / std::max(std::abs(e), 1.0);
        e_prev = e;
        // a coarse step has its own fixed point, so convergence only counts
        // once the step has been walked down to the floor
        if (rel < cfg.converge_threshold && dt <= cfg.dt_floor) {
            converged = true;
            break;
        }
        if (rel < cfg.halve_threshold && dt > cfg.dt_floor) {
            dt *= 0.5;
            plan = make_trotter_plan(chain, dt, EvolveMode::imaginary_time);
        }
    }
    if (!converged) {
        std::ostringstream os;
        os << "imaginary-time relaxation did not converge in " << cfg.max_sweeps
           << " sweeps; last energies:";
        const std::size_t n = out.energy_trace.size();
        for (std::size_t i = n > 5 ? n - 5 : 0; i < n; ++i) {
            char buf[32];
            std::snprintf(buf, sizeof buf, " %.12g", out.energy_trace[i]);
            os << buf;
        }
        throw ConvergenceError(os.str());
    }

    normalize(s);
    s.log_norm = 0.0;
    out.state = std::move(s);
    out.energy = e_prev;
    out.photon_density = photon_density(out.state, layout);
    out.populations = scatterer_populations(out.state, model, layout);
    out.total_quanta = 0.0;
    for (double v : out.photon_density) out.total_quanta += v;
    for (double v : out.populations) out.total_quanta += v;
    return out;
}

std::vector<cx> gaussian_profile(const ModelSpec& model, const SiteLayout& layout,
                                 const Wavepacket& packet) {
    if (!(packet.theta > 0.0)) throw ConfigError("packet width must be positive");
    if (!(packet.k_in > 0.0 && packet.k_in < kPi))
        throw ConfigError("carrier momentum must lie in (0, pi)");
    if (packet.n_photons < 1) throw ConfigError("packet needs at least one photon");

    const long L = long(layout.half_length);
    const double margin = 3.0 * packet.theta;
    if (double(packet.x_in + L) < margin || double(L - packet.x_in) < margin)
        throw ConfigError("packet at x_in=" + std::to_string(packet.x_in) +
                          " does not fit 3 theta from the chain edge");
    for (const auto& sc : model.scatterers)
        if (std::abs(double(packet.x_in - sc.position)) < margin)
            throw ConfigError("packet at x_in=" + std::to_string(packet.x_in) +
                              " overlaps the scatterer at " + std::to_string(sc.position));

    std::vector<cx> phi(layout.n_sites);
    double nrm2 = 0.0;
    for (std::size_t n = 0; n < layout.n_sites; ++n) {
        const double x = double(layout.coordinate(n));
        const double dx = x - double(packet.x_in);
        const double env = std::exp(-dx * dx / (2.0 * packet.theta * packet.theta));
        phi[n] = env * std::exp(cx(0.0, packet.k_in * x));
        nrm2 += env * env;
    }
    const double inv = 1.0 / std::sqrt(nrm2);
    for (auto& v : phi) v *= inv;
    return phi;
}

InjectionResult inject_wavepacket(MPSState& s, const SiteLayout& layout,
                                  const std::vector<cx>& profile, std::size_t n_photons,
                                  const SvdTruncation& trunc) {
    if (profile.size() != layout.n_sites)
        throw DimensionError("profile must cover every cavity site");
    if (n_photons < 1) throw ArgumentError("need at least one photon");

    normalize(s);
    const double log0 = s.log_norm;
    std::vector<DenseTensor> ops = photon_ops(layout, photon_raising_op);

    InjectionResult res;
    for (std::size_t p = 0; p < n_photons; ++p)
        res.discarded += apply_local_operator_sum(s, ops, profile, trunc);
    normalize(s);
    res.norm_factor = std::exp(s.log_norm - log0);
    s.log_norm = 0.0;
    return res;
}

std::vector<double> momentum_grid(std::size_t n_cav) {
    const long L = long(n_cav / 2);
    std::vector<double> ks;
    ks.reserve(n_cav);
    for (long m = -L; m <= L; ++m) ks.push_back(2.0 * kPi * double(m) / double(n_cav));
    return ks;
}

std::vector<double> momentum_density(const MPSState& s, const SiteLayout& layout) {
    const std::size_t N = layout.n_sites;
    DenseTensor C = two_point_matrix(s, s, photon_ops(layout, photon_raising_op),
                                     photon_ops(layout, photon_lowering_op),
                                     photon_ops(layout, photon_number_op));
    double diag_sum = 0.0;
    for (std::size_t x = 0; x < N; ++x) diag_sum += C.at({x, x}).real();

    std::vector<double> ks = momentum_grid(N);
    std::vector<double> nk(ks.size());
    for (std::size_t ik = 0; ik < ks.size(); ++ik) {
        const double k = ks[ik];
        double acc = diag_sum;
        for (std::size_t x1 = 0; x1 < N; ++x1)
            for (std::size_t x2 = x1 + 1; x2 < N; ++x2) {
                const double dx = double(layout.coordinate(x1) - layout.coordinate(x2));
                acc += 2.0 * (std::exp(cx(0.0, k * dx)) * C.at({x1, x2})).real();
            }
        nk[ik] = acc / double(N);
    }
    return nk;
}

std::vector<double> photon_density(const MPSState& s, const SiteLayout& layout) {
    std::vector<cx> vals = local_expectations(s, s, photon_ops(layout, photon_number_op));
    std::vector<double> out(vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i) out[i] = vals[i].real();
    return out;
}

std::vector<double> scatterer_populations(const MPSState& s, const ModelSpec& spec,
                                          const SiteLayout& layout) {
    std::vector<double> out;
    for (const auto& sc : spec.scatterers) {
        const std::size_t n = layout.site_index(sc.position);
        LocalOp op{n, scatterer_number_op(layout, spec, n)};
        out.push_back(expectation_product(s, s, {op}).real());
    }
    return out;
}

std::vector<cx> scatterer_correlators(const MPSState& s, const ModelSpec& spec,
                                      const SiteLayout& layout) {
    const std::size_t ns = spec.scatterers.size();
    std::vector<cx> corr(ns * ns, cx(0, 0));
    for (std::size_t i = 0; i < ns; ++i) {
        const std::size_t ni = layout.site_index(spec.scatterers[i].position);
        for (std::size_t j = 0; j < ns; ++j) {
            const std::size_t nj = layout.site_index(spec.scatterers[j].position);
            if (i == j) {
                LocalOp op{ni, scatterer_number_op(layout, spec, ni)};
                corr[i * ns + j] = expectation_product(s, s, {op});
            } else {
                LocalOp up{ni, scatterer_raising_op(layout, spec, ni)};
                LocalOp dn{nj, scatterer_lowering_op(layout, spec, nj)};
                corr[i * ns + j] = expectation_product(s, s, {up, dn});
            }
        }
    }
    return corr;
}

double total_quanta(const MPSState& s, const ModelSpec& spec, const SiteLayout& layout) {
    double total = 0.0;
    for (double v : photon_density(s, layout)) total += v;
    for (double v : scatterer_populations(s, spec, layout)) total += v;
    return total;
}

TransmissionReflection transmission_reflection(const std::vector<double>& k_grid,
                                               const std::vector<double>& nk_in,
                                               const std::vector<double>& nk_out,
                                               double n_photons, double threshold_frac) {
    if (k_grid.size() != nk_in.size() || k_grid.size() != nk_out.size())
        throw DimensionError("momentum grids do not match");
    const std::size_t N = k_grid.size();
    const std::size_t c = N / 2; // k = 0 bin of the odd grid
    const double threshold = threshold_frac * n_photons;

    TransmissionReflection tr;
    bool any = false;
    for (std::size_t m = 1; m + c < N; ++m) {
        const std::size_t ip = c + m, in = c - m;
        tr.k.push_back(k_grid[ip]);
        const bool ok = nk_in[ip] >= threshold;
        tr.defined.push_back(ok);
        tr.transmission.push_back(ok ? nk_out[ip] / nk_in[ip] : 0.0);
        tr.reflection.push_back(ok ? nk_out[in] / nk_in[ip] : 0.0);
        if (ok) {
            any = true;
            tr.r_max = std::max(tr.r_max, tr.reflection.back());
        }
    }
    if (!any) throw NumericError("input momentum spectrum has no populated bins");
    return tr;
}

ElasticSpectra elastic_amplitudes(const MPSState& gs, const MPSState& out,
                                  const SiteLayout& layout, const std::vector<cx>& profile,
                                  double injection_norm, double threshold_frac) {
    if (profile.size() != layout.n_sites)
        throw DimensionError("profile must cover every cavity site");
    const std::size_t N = layout.n_sites;
    std::vector<cx> ax = local_expectations(gs, out, photon_ops(layout, photon_lowering_op));

    const auto dft = [&](const std::vector<cx>& v, double k) {
        cx acc(0, 0);
        for (std::size_t n = 0; n < N; ++n)
            acc += std::exp(cx(0.0, -k * double(layout.coordinate(n)))) * v[n];
        return acc / std::sqrt(double(N));
    };

    std::vector<double> ks = momentum_grid(N);
    const std::size_t c = N / 2;
    ElasticSpectra sp;
    for (std::size_t m = 1; m + c < N; ++m) {
        const double k = ks[c + m];
        const cx phi_k = dft(profile, k);
        sp.k.push_back(k);
        const bool ok = std::norm(phi_k) >= threshold_frac;
        sp.defined.push_back(ok);
        sp.t.push_back(ok ? injection_norm * dft(ax, k) / phi_k : cx(0, 0));
        sp.r.push_back(ok ? injection_norm * dft(ax, -k) / phi_k : cx(0, 0));
    }
    return sp;
}

std::vector<double> inelastic_weight(const ElasticSpectra& spectra) {
    std::vector<double> t2(spectra.k.size(), 0.0);
    for (std::size_t m = 0; m < spectra.k.size(); ++m) {
        if (!spectra.defined[m]) continue;
        const double v = 0.5 * (1.0 - std::norm(spectra.t[m]) - std::norm(spectra.r[m]));
        if (v < -2e-2)
            throw NumericError("inelastic weight " + std::to_string(v) + " at k=" +
                               std::to_string(spectra.k[m]) +
                               " is below tolerance: inconsistent amplitudes");
        t2[m] = v;
    }
    return t2;
}

cx nphoton_projector(const MPSState& gs, const MPSState& state, const SiteLayout& layout,
                     std::vector<long> positions) {
    if (positions.empty()) throw ArgumentError("need at least one position");
    std::sort(positions.begin(), positions.end());

    std::vector<LocalOp> ops;
    std::size_t i = 0;
    while (i < positions.size()) {
        std::size_t j = i;
        while (j < positions.size() && positions[j] == positions[i]) ++j;
        const std::size_t n = layout.site_index(positions[i]);
        DenseTensor op = photon_lowering_op(layout, n);
        DenseTensor acc = op;
        for (std::size_t p = i + 1; p < j; ++p) acc = mat_mul(acc, op);
        ops.push_back({n, std::move(acc)});
        i = j;
    }

    double fact = 1.0;
    for (std::size_t p = 2; p <= positions.size(); ++p) fact *= double(p);
    return expectation_product(gs, state, ops) / std::sqrt(fact);
}

DenseTensor two_photon_map(const MPSState& gs, const MPSState& state,
                           const SiteLayout& layout) {
    std::vector<DenseTensor> low = photon_ops(layout, photon_lowering_op);
    std::vector<DenseTensor> lowsq;
    lowsq.reserve(low.size());
    for (const auto& op : low) lowsq.push_back(mat_mul(op, op));

    DenseTensor C = two_point_matrix(gs, state, low, low, lowsq);
    const std::size_t N = layout.n_sites;
    const double inv = 1.0 / std::sqrt(2.0);
    DenseTensor map({N, N});
    for (std::size_t x1 = 0; x1 < N; ++x1) {
        map.at({x1, x1}) = C.at({x1, x1}) * inv;
        for (std::size_t x2 = x1 + 1; x2 < N; ++x2) {
            const cx v = C.at({x1, x2}) * inv;
            map.at({x1, x2}) = v;
            map.at({x2, x1}) = v; // bosonic symmetry, not conjugation
        }
    }
    return map;
}

double resolved_t_out(const ModelSpec& model, const Wavepacket& packet, double t_out,
                      double dt) {
    if (!(dt > 0.0)) throw ConfigError("time step must be positive");
    if (t_out <= 0.0) {
        const double v = 2.0 * model.hopping * std::sin(packet.k_in);
        const double L = double(model.n_cav / 2);
        t_out = (0.75 * L - double(packet.x_in)) / v;
    }
    std::size_t steps = std::size_t(std::llround(std::ceil(t_out / dt - 1e-9)));
    if (steps == 0) steps = 1;
    return double(steps) * dt;
}

ScatteringResult run_scattering(const ScatteringRun& run) {
    ScatteringResult res;
    res.layout = make_layout(run.model);
    res.profile = gaussian_profile(run.model, res.layout, run.packet);

    const double v = 2.0 * run.model.hopping * std::sin(run.packet.k_in);
    const double L = double(res.layout.half_length);
    res.t_out = resolved_t_out(run.model, run.packet, run.t_out, run.dt);
    const std::size_t steps = std::size_t(std::llround(res.t_out / run.dt));

    const double reach = double(run.packet.x_in) + v * res.t_out;
    if (reach > L - 3.0 * run.packet.theta)
        throw ConfigError("t_out=" + std::to_string(res.t_out) +
                          " drives the transmitted packet into the chain edge");

    res.ground = prepare_ground_state(run.model, run.ground);

    MPSState psi = res.ground.state;
    InjectionResult inj =
        inject_wavepacket(psi, res.layout, res.profile, run.packet.n_photons, run.trunc);
    res.injection_norm = inj.norm_factor;

    const ChainHamiltonian chain = build_terms(run.model);
    const TrotterPlan plan = make_trotter_plan(chain, run.dt, EvolveMode::real_time);
    EvolveOptions opts;

    const auto measure = [&](double t) {
        Snapshot snap;
        snap.t = t;
        snap.n_x = photon_density(psi, res.layout);
        snap.delta_pop = scatterer_populations(psi, run.model, res.layout);
        for (std::size_t i = 0; i < snap.delta_pop.size(); ++i)
            snap.delta_pop[i] -= res.ground.populations[i];
        snap.correlators = scatterer_correlators(psi, run.model, res.layout);
        snap.quanta = 0.0;
        for (double q : snap.n_x) snap.quanta += q;
        for (std::size_t i = 0; i < snap.delta_pop.size(); ++i)
            snap.quanta += snap.delta_pop[i] + res.ground.populations[i];
        snap.energy = chain_energy(psi, chain);
        return snap;
    };

    res.snapshots.push_back(measure(0.0));
    res.k_grid = momentum_grid(res.layout.n_sites);
    res.nk_initial = momentum_density(psi, res.layout);

    const std::size_t stride = run.snapshot_stride == 0 ? steps : run.snapshot_stride;
    std::size_t done = 0;
    while (done < steps) {
        const std::size_t chunk = std::min(stride, steps - done);
        EvolveDiagnostics d = evolve(psi, plan, chunk, run.trunc, opts);
        merge_diagnostics(res.diagnostics, d);
        done += chunk;
        res.snapshots.push_back(measure(double(done) * run.dt));
    }

    res.nk_final = momentum_density(psi, res.layout);
    res.tr = transmission_reflection(res.k_grid, res.nk_initial, res.nk_final,
                                     double(run.packet.n_photons));

    if (run.packet.n_photons == 1) {
        res.elastic = elastic_amplitudes(res.ground.state, psi, res.layout, res.profile,
                                         res.injection_norm);
        res.t2 = inelastic_weight(res.elastic);
        res.inelastic_raw.assign(res.elastic.k.size(), 0.0);
        for (std::size_t m = 0; m < res.elastic.k.size(); ++m)
            if (res.elastic.defined[m])
                res.inelastic_raw[m] =
                    1.0 - std::norm(res.elastic.t[m]) - std::norm(res.elastic.r[m]);
    }

    if (run.want_two_photon_map && run.packet.n_photons == 2) {
        DenseTensor map = two_photon_map(res.ground.state, psi, res.layout);
        const std::size_t N = res.layout.n_sites;
        res.two_photon_abs2.resize(N * N);
        for (std::size_t x1 = 0; x1 < N; ++x1)
            for (std::size_t x2 = 0; x2 < N; ++x2)
                res.two_photon_abs2[x1 * N + x2] = std::norm(map.at({x1, x2}));
    }
    return res;
}

} // namespace waveqed
