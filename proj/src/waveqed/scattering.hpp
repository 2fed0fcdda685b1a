#pragma once

#include <cstddef>
#include <vector>

#include "waveqed/model.hpp"
#include "waveqed/mps.hpp"
#include "waveqed/tensor.hpp"
#include "waveqed/trotter.hpp"

namespace waveqed {

// Gaussian N-photon input packet, phi_x ~ exp(-(x-x_in)^2 / (2 theta^2)) e^{i k_in x}.
struct Wavepacket {
    long x_in = 0;
    double theta = 2.0;
    double k_in = 1.5707963267948966; // pi/2, band center
    std::size_t n_photons = 1;
};

// Imaginary-time relaxation schedule. The step is halved once the energy
// stalls at the current resolution, so the final fixed point carries only
// the smallest step's bias; convergence is declared at the last step size.
struct ImagTimeConfig {
    double dt_start = 0.1;
    double dt_floor = 0.02;          // no halving below this
    double halve_threshold = 1e-7;   // relative per-sweep change that triggers halving
    double converge_threshold = 1e-9;
    std::size_t max_sweeps = 4000;
    SvdTruncation trunc{64, 1e-10};
};

struct GroundState {
    MPSState state;
    double energy = 0.0;
    std::vector<double> energy_trace;   // per sweep
    std::vector<double> photon_density; // <n_x> per cavity coordinate
    std::vector<double> populations;    // scatterer excitation counts
    double total_quanta = 0.0;          // photons + scatterer excitations
};

// Relax the vacuum to the ground state. Number-conserving couplings keep the
// vacuum exactly, so they converge on the first sweep.
GroundState prepare_ground_state(const ModelSpec& model, const ImagTimeConfig& cfg = {});

// Unit-norm packet profile on the cavity coordinates; throws ConfigError
// when the packet does not fit (3 theta from every scatterer and both edges)
// or the carrier lies outside (0, pi).
std::vector<cx> gaussian_profile(const ModelSpec& model, const SiteLayout& layout,
                                 const Wavepacket& packet);

// Apply (a^dag_phi)^N to the state and normalize. Returns the norm of the
// unnormalized result relative to the input (the "non-normalised state"
// prefactor), with the discarded compression weight.
struct InjectionResult {
    double norm_factor = 1.0;
    double discarded = 0.0;
};
InjectionResult inject_wavepacket(MPSState& s, const SiteLayout& layout,
                                  const std::vector<cx>& profile, std::size_t n_photons,
                                  const SvdTruncation& trunc);

// DFT momentum grid k_m = 2 pi m / N for m = -L..L, ascending.
std::vector<double> momentum_grid(std::size_t n_cav);

// <n_k> on the DFT grid from the cached-environment photon two-point matrix.
std::vector<double> momentum_density(const MPSState& s, const SiteLayout& layout);

// Photon density per cavity coordinate.
std::vector<double> photon_density(const MPSState& s, const SiteLayout& layout);

// Scatterer excitation counts and collective ladder correlators
// <B_i^dag B_j> (row-major n_sc x n_sc; the diagonal holds the counts).
std::vector<double> scatterer_populations(const MPSState& s, const ModelSpec& spec,
                                          const SiteLayout& layout);
std::vector<cx> scatterer_correlators(const MPSState& s, const ModelSpec& spec,
                                      const SiteLayout& layout);

// Total quanta <sum_x n_x + sum_i n_i> (conserved under rwa coupling).
double total_quanta(const MPSState& s, const ModelSpec& spec, const SiteLayout& layout);

// Per-k transmission/reflection from input and output momentum densities;
// bins with input weight below threshold_frac * N are left undefined.
// Throws NumericError when no bin is defined.
struct TransmissionReflection {
    std::vector<double> k;     // positive bins
    std::vector<bool> defined;
    std::vector<double> transmission;
    std::vector<double> reflection;
    double r_max = 0.0;        // max reflection over defined bins
};
TransmissionReflection transmission_reflection(const std::vector<double>& k_grid,
                                               const std::vector<double>& nk_in,
                                               const std::vector<double>& nk_out,
                                               double n_photons,
                                               double threshold_frac = 1e-4);

// Elastic amplitudes of a one-photon run: t_k = <GS|a_k|Psi_out> / phi_k with
// the injection prefactor restored, so the free case gives exactly the
// propagation phase. Projecting on the interacting ground state removes the
// static photon cloud at strong coupling.
struct ElasticSpectra {
    std::vector<double> k;     // positive bins
    std::vector<bool> defined;
    std::vector<cx> t;
    std::vector<cx> r;
};
ElasticSpectra elastic_amplitudes(const MPSState& gs, const MPSState& out,
                                  const SiteLayout& layout, const std::vector<cx>& profile,
                                  double injection_norm, double threshold_frac = 1e-4);

// Inelastic channel weight 0.5 * (1 - |t|^2 - |r|^2) per defined bin;
// values below -2e-2 mark an inconsistent run. Undefined bins yield 0.
std::vector<double> inelastic_weight(const ElasticSpectra& spectra);

// <GS| a_{x_1} ... a_{x_N} |Psi> / sqrt(N!) at arbitrary positions
// (repeats allowed; positions are chain coordinates).
cx nphoton_projector(const MPSState& gs, const MPSState& state, const SiteLayout& layout,
                     std::vector<long> positions);

// Full two-photon map phi_{x1,x2} over all cavity pairs, via one
// cached-environment sweep; symmetric in (x1, x2).
DenseTensor two_photon_map(const MPSState& gs, const MPSState& state,
                           const SiteLayout& layout);

struct ScatteringRun {
    ModelSpec model;
    Wavepacket packet;
    double t_out = 0.0; // <= 0: auto, carrier reaches 0.75 L
    double dt = 0.05;
    SvdTruncation trunc{64, 1e-8};
    std::size_t snapshot_stride = 20; // steps between snapshots
    bool want_two_photon_map = false; // assemble the map at t_out (N = 2)
    ImagTimeConfig ground;
};

struct Snapshot {
    double t = 0.0;
    std::vector<double> n_x;        // raw photon density
    std::vector<double> delta_pop;  // populations minus ground-state baseline
    std::vector<cx> correlators;    // row-major n_sc x n_sc
    double quanta = 0.0;
    double energy = 0.0;            // <H> at this time
};

struct ScatteringResult {
    SiteLayout layout;
    GroundState ground;
    std::vector<cx> profile;
    double injection_norm = 1.0;
    double t_out = 0.0;             // actual (rounded to a step multiple)
    std::vector<double> k_grid;     // full DFT grid
    std::vector<double> nk_initial;
    std::vector<double> nk_final;
    std::vector<Snapshot> snapshots; // includes t = 0 and t = t_out
    TransmissionReflection tr;
    ElasticSpectra elastic;          // N = 1 only (empty otherwise)
    std::vector<double> t2;          // inelastic weight per defined bin
    std::vector<double> inelastic_raw; // 1 - |t|^2 - |r|^2, unhalved
    std::vector<double> two_photon_abs2; // row-major n_cav^2 (empty unless requested)
    EvolveDiagnostics diagnostics;
};

// Evolution horizon a run will actually use: t_out <= 0 selects the time at
// which the carrier reaches 0.75 L, and the result is rounded up to a whole
// number of steps. Exposed so exact-solver exports can attach the same
// propagation phase as a finished run.
double resolved_t_out(const ModelSpec& model, const Wavepacket& packet, double t_out,
                      double dt);

// Full pipeline: ground state, injection, evolution with snapshots, spectra.
ScatteringResult run_scattering(const ScatteringRun& run);

} // namespace waveqed
