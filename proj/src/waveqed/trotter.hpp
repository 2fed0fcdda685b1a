#pragma once

#include <cstddef>
#include <vector>

#include "waveqed/mps.hpp"
#include "waveqed/tensor.hpp"

namespace waveqed {

// Nearest-neighbour chain Hamiltonian: one on-site matrix per site and one
// (d_n*d_{n+1})^2 matrix per bond.
struct ChainHamiltonian {
    std::vector<std::size_t> local_dims;
    std::vector<DenseTensor> site_terms;
    std::vector<DenseTensor> bond_terms;

    std::size_t n_sites() const { return local_dims.size(); }
};

enum class EvolveMode { real_time, imaginary_time };

// Second-order symmetric split: per step the even bonds advance dt/2, the
// odd bonds dt, the even bonds dt/2 again. On-site terms are absorbed into
// adjacent bond gates with half weight each (full weight at the chain ends).
struct TrotterPlan {
    double dt = 0.0;
    int order = 2;
    EvolveMode mode = EvolveMode::real_time;
    std::vector<std::size_t> local_dims;
    std::vector<DenseTensor> even_gates; // parallel to even_bonds
    std::vector<DenseTensor> odd_gates;  // parallel to odd_bonds
    std::vector<std::size_t> even_bonds;
    std::vector<std::size_t> odd_bonds;
    // True where the bond gate leaves the two-site vacuum |0,0> exactly fixed.
    std::vector<bool> vacuum_invariant; // one flag per bond
};

TrotterPlan make_trotter_plan(const ChainHamiltonian& chain, double dt, EvolveMode mode);

struct EvolveOptions {
    bool renormalize = false;     // renormalize after each step (imaginary time)
    double abort_discard = 5e-2;  // single-truncation discard that aborts the run
    bool skip_vacuum = true;      // skip gates acting on exact vacuum pairs
};

struct EvolveDiagnostics {
    double max_discard = 0.0;        // largest single truncation weight
    double discard_sum = 0.0;        // sum over all truncations
    std::size_t max_bond = 1;        // largest bond dimension reached
    std::vector<double> step_max_discard;
    std::vector<double> step_log_norm; // log norm folded out per step (renormalize)
};

// Run `steps` full second-order steps in place. Gates are applied along
// alternating sweeps (even ascending, odd descending, even ascending) with
// the orthogonality center moved alongside.
EvolveDiagnostics evolve(MPSState& s, const TrotterPlan& plan, std::size_t steps,
                         const SvdTruncation& trunc, const EvolveOptions& opts = {});

// <s|H|s> / <s|s> for the chain Hamiltonian, one cached-environment pass.
double chain_energy(const MPSState& s, const ChainHamiltonian& chain);

} // namespace waveqed
