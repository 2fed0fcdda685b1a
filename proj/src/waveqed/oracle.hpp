#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "waveqed/model.hpp"
#include "waveqed/tensor.hpp"

namespace waveqed {

// Exact diagonalization of a quadratic (oscillator-scatterer) model:
// H = sum_l lambda_l alpha_l^dag alpha_l + ground_energy, with
// alpha_l = sum_m chi[l][m] A_m + eta[l][m] A_m^dag over the bare modes
// A = (a_{-L}, ..., a_{L}, c_1, ..., c_S).
struct LinearSolution {
    std::size_t n_cav = 0;
    std::size_t n_sc = 0;
    std::vector<double> lambda; // ascending, all positive
    DenseTensor chi;            // (n_modes, n_modes), real-valued
    DenseTensor eta;            // zero for number-conserving couplings
    double ground_energy = 0.0;

    // model data the scattering solves are built from
    double epsilon = 0.0;
    double hopping = 0.0;
    bool full_coupling = false;
    std::vector<long> sc_position;  // chain coordinates
    std::vector<double> sc_delta;
    std::vector<double> sc_g;       // effective couplings

    std::size_t n_modes() const { return n_cav + n_sc; }
};

// Bogoliubov-Valatin diagonalization. Requires every scatterer to be an
// oscillator; throws ModelError when the quadratic form is unstable.
LinearSolution bogoliubov_diagonalize(const ModelSpec& spec);

// Ground-state photon density per cavity site, (eta^T eta)_xx.
std::vector<double> ground_photon_density(const LinearSolution& sol);

// <GS| a_x e^{-iHt} a^dag_phi |GS> for a cavity-site profile phi: the
// single-excitation packet carried through the diagonal frame, including the
// ground-state energy phase, so the result is directly comparable with
// amplitudes measured on an evolved chain state.
std::vector<cx> linear_output_packet(const LinearSolution& sol, const std::vector<cx>& phi,
                                     double t);

// <GS| a_k e^{-iHt} a^dag_phi |GS> with a_k on the shared DFT grid; equals
// the DFT of linear_output_packet.
struct ElasticAmplitudes {
    std::vector<double> k;
    std::vector<cx> t;
    std::vector<cx> r;
};

// Stationary single-photon amplitudes on the infinite lattice, computed by
// mode matching with the anomalous channel contained in a window around the
// scatterers (it is evanescent inside the band). t_out only attaches the
// free propagation phase e^{-i w_k t_out}. Momenta must lie inside (0, pi)
// away from the band edges.
ElasticAmplitudes single_photon_smatrix(const LinearSolution& sol, double t_out,
                                        const std::vector<double>& k_grid);

// Exact single-excitation amplitudes for number-conserving models (qubit
// groups or oscillators) via the analytic lattice Green's function and the
// scatterer T-matrix in its inverse-coupling form (regular on resonance).
ElasticAmplitudes single_excitation_solve(const ModelSpec& spec,
                                          const std::vector<double>& k_grid);

// N-photon elastic S-matrix element as the permanent of single-photon
// elements (Ryser inclusion-exclusion); momenta must sit on amps.k. N <= 6.
cx nphoton_smatrix_linear(const ElasticAmplitudes& amps, const std::vector<double>& k_in,
                          const std::vector<double>& k_out);

// Coherent input alpha maps onto coherent outputs (t*alpha, r*alpha).
std::pair<cx, cx> coherent_output(cx alpha, cx t_k, cx r_k);

} // namespace waveqed
