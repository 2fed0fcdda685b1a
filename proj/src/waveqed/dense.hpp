#pragma once

#include <cstddef>
#include <vector>

#include "waveqed/mps.hpp"
#include "waveqed/tensor.hpp"
#include "waveqed/trotter.hpp"

namespace waveqed {

// Brute-force statevector on the chain's product basis, site 0 slowest.
// Small systems only; the reference the compressed engine is tested against.
struct DenseState {
    std::vector<std::size_t> dims;
    std::vector<cx> amp;

    std::size_t dim() const { return amp.size(); }
};

DenseState dense_vacuum(const std::vector<std::size_t>& dims);
DenseState dense_from_mps(const MPSState& s);

cx dense_overlap(const DenseState& a, const DenseState& b);

// out += H * in, applied term by term without materializing H.
void dense_apply_chain(const ChainHamiltonian& chain, const std::vector<cx>& in,
                       std::vector<cx>& out);

double dense_energy(const DenseState& st, const ChainHamiltonian& chain);

enum class DenseEvolveMode {
    trotter_gates, // same gates and sweep order as the MPS engine
    eigen_exact    // full eigendecomposition (dimension <= 2^14)
};

// Evolve in place to time t. In trotter_gates mode t must be an integer
// number of dt steps; eigen_exact ignores dt.
void dense_evolve(DenseState& st, const ChainHamiltonian& chain, double t, double dt,
                  DenseEvolveMode mode);

// Ground-state energy by a Lanczos iteration with full reorthogonalization,
// started deterministically from the vacuum vector.
double dense_ground_energy(const ChainHamiltonian& chain, std::size_t max_iter = 128,
                           double tol = 1e-13);

} // namespace waveqed
