#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "waveqed/tensor.hpp"

namespace waveqed {

// Matrix product state with open boundaries. Site tensor n has shape
// (D_n, d_n, D_{n+1}); the first and last bond dimensions are 1. The
// represented state is the tensor network times exp(log_norm).
struct MPSState {
    std::vector<DenseTensor> tensors;
    std::vector<std::size_t> local_dims;
    std::optional<std::size_t> center; // orthogonality center, if canonical
    double log_norm = 0.0;

    std::size_t n_sites() const { return tensors.size(); }
    std::size_t bond_dim(std::size_t bond) const; // bond 0..N
    std::size_t max_bond_dim() const;
};

// Product state from unit-norm local vectors (one per site).
MPSState product_state(const std::vector<std::size_t>& local_dims,
                       const std::vector<std::vector<cx>>& local_vectors);

// All-vacuum product state (basis index 0 on every site).
MPSState vacuum_state(const std::vector<std::size_t>& local_dims);

// Bring the state into mixed-canonical form with the given center site.
void canonicalize(MPSState& s, std::size_t center);
// Cheap center relocation for a state that is already canonical.
void move_center(MPSState& s, std::size_t target);

// Norm of the tensor network (excludes the log_norm factor).
double network_norm(const MPSState& s);
// Scale the network to unit norm, folding the factor into log_norm.
void normalize(MPSState& s);

// Apply a two-site gate ((d1*d2) x (d1*d2) matrix) to sites (bond, bond+1),
// re-compressing the bond with the given truncation. The orthogonality
// center ends on the bond's right site. Returns the discarded weight.
double apply_two_site_gate(MPSState& s, std::size_t bond, const DenseTensor& gate,
                           const SvdTruncation& trunc);

// Variant that chooses which side of the bond keeps the orthogonality
// center (center_right=false leaves it on the left site, which descending
// sweeps want).
double apply_two_site_gate(MPSState& s, std::size_t bond, const DenseTensor& gate,
                           const SvdTruncation& trunc, bool center_right);

struct LocalOp {
    std::size_t site;
    DenseTensor matrix; // d x d
};

// <bra| prod_ops |ket> including both log_norm factors. Sites not listed
// carry the identity; at most one operator per site.
cx expectation_product(const MPSState& bra, const MPSState& ket,
                       const std::vector<LocalOp>& ops);

cx overlap(const MPSState& bra, const MPSState& ket);

// <bra| op_n |ket> for every site, one cached-environment sweep (O(N D^3)).
std::vector<cx> local_expectations(const MPSState& bra, const MPSState& ket,
                                   const std::vector<DenseTensor>& ops);

// Single two-point correlator <s| op_a(x1) op_b(x2) |s>, x1 < x2.
cx expectation_two_point(const MPSState& s, const LocalOp& a, const LocalOp& b);

// All-pairs correlation matrix with cached environments, O(N^2 D^3) total:
// C(i,j) = <bra| op_a[i] op_b[j] |ket> for i < j, C(i,i) = <bra| op_diag[i] |ket>,
// and C(j,i) left as zero (callers exploit symmetry where they have it).
DenseTensor two_point_matrix(const MPSState& bra, const MPSState& ket,
                             const std::vector<DenseTensor>& op_a,
                             const std::vector<DenseTensor>& op_b,
                             const std::vector<DenseTensor>& op_diag);

// Apply sum_n coeff[n] * op[n] (one local operator per site, empty matrix =
// site excluded) as a bond-2 operator, then compress. Returns discarded weight.
double apply_local_operator_sum(MPSState& s, const std::vector<DenseTensor>& ops,
                                const std::vector<cx>& coeffs, const SvdTruncation& trunc);

// Optimal left-to-right recompression at the given truncation.
double compress(MPSState& s, const SvdTruncation& trunc);

// Contract the network into a dense state vector (small chains only; basis
// index runs row-major over sites, site 0 slowest). Includes exp(log_norm).
std::vector<cx> mps_to_dense(const MPSState& s);

// Versioned binary checkpoint (little-endian complex doubles).
void save_checkpoint(const MPSState& s, const std::string& path);
MPSState load_checkpoint(const std::string& path);

} // namespace waveqed
