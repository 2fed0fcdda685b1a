#pragma once

#include <cstddef>
#include <vector>

#include "waveqed/tensor.hpp"
#include "waveqed/trotter.hpp"

namespace waveqed {

enum class ScattererKind { qubit_group, oscillator };

// One scatterer attached to a cavity site. A qubit_group with count m is a
// stack of m identical qubits at the same site, handled in the symmetric
// ladder; an oscillator is a truncated harmonic mode.
struct ScattererSpec {
    long position = 0;   // chain coordinate x in [-L, L]
    double delta = 1.0;  // transition frequency
    double g = 0.0;      // bare coupling per constituent
    ScattererKind kind = ScattererKind::qubit_group;
    std::size_t count = 1;  // m, qubit groups only
    std::size_t n_osc = 1;  // excitation truncation, oscillators only
};

enum class CouplingMode { rwa, full };

struct ModelSpec {
    double epsilon = 1.0;
    double hopping = 1.0;      // J
    std::size_t n_cav = 0;     // odd, 2L+1 sites at coordinates -L..L
    std::size_t n_max = 1;     // photon truncation per cavity
    std::size_t dicke_cap = 0; // qubit-group excitation cap (0 = full ladder, i.e. m)
    std::vector<ScattererSpec> scatterers;
    CouplingMode coupling_mode = CouplingMode::rwa;
    std::size_t local_dim_ceiling = 64;
};

// Chain geometry after fusing each scatterer into its cavity's local space
// (basis index p*s + l for photon occupation p and scatterer level l), which
// keeps every Hamiltonian term strictly nearest-neighbour.
struct SiteLayout {
    std::size_t n_sites = 0;
    std::size_t half_length = 0; // L
    std::size_t photon_dim = 0;  // n_max + 1, equal on every site
    std::vector<std::size_t> scatterer_dim; // s_n; 1 on bare sites
    std::vector<int> scatterer_index;       // index into spec.scatterers; -1 when bare
    std::vector<std::size_t> local_dims;    // photon_dim * scatterer_dim

    std::size_t site_index(long x) const;   // coordinate -> chain index
    long coordinate(std::size_t n) const { return static_cast<long>(n) - static_cast<long>(half_length); }
};

// Cosine band of the discretized waveguide.
double dispersion(double k, const ModelSpec& spec);

struct LadderOps {
    DenseTensor raising;
    DenseTensor lowering;
    DenseTensor number; // excitation count, diag(0..cap)
};

// Truncated bosonic ladder on occupation 0..n_top.
LadderOps boson_ladder(std::size_t n_top);

// Symmetric-sector ladder of m identical qubits, truncated at `cap`
// excitations: raising|n> = sqrt((n+1)(1 - n/m)) |n+1>.
LadderOps dicke_ladder(std::size_t m, std::size_t cap);

// Validate the spec and lay out the chain. Throws ConfigError on invalid
// geometry or a local dimension above spec.local_dim_ceiling.
SiteLayout make_layout(const ModelSpec& spec);

// Hamiltonian terms on the layout: hopping on every bond, on-site energies,
// and the scatterer coupling (within its composite site). Qubit groups
// couple with strength g*sqrt(m).
ChainHamiltonian build_terms(const ModelSpec& spec);

// Per-site operators embedded in the composite local space.
DenseTensor photon_lowering_op(const SiteLayout& layout, std::size_t site);
DenseTensor photon_raising_op(const SiteLayout& layout, std::size_t site);
DenseTensor photon_number_op(const SiteLayout& layout, std::size_t site);
// Scatterer excitation count embedded at `site` (bare sites get the zero matrix).
DenseTensor scatterer_number_op(const SiteLayout& layout, const ModelSpec& spec, std::size_t site);
// Collective scatterer ladder operators embedded the same way (for a qubit
// group these are the symmetric-sector B ops, equal to sigma^-/sigma^+ at m=1).
DenseTensor scatterer_lowering_op(const SiteLayout& layout, const ModelSpec& spec, std::size_t site);
DenseTensor scatterer_raising_op(const SiteLayout& layout, const ModelSpec& spec, std::size_t site);

} // namespace waveqed
