#include "waveqed/trotter.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Dense>

#include "waveqed/errors.hpp"

namespace waveqed {

namespace {

using Mat = Eigen::Matrix<cx, Eigen::Dynamic, Eigen::Dynamic>;
using MapRMConst =
    Eigen::Map<const Eigen::Matrix<cx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using MapRM = Eigen::Map<Eigen::Matrix<cx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

Eigen::Index ei(std::size_t x) { return static_cast<Eigen::Index>(x); }

// Combined bond Hamiltonian: the bond term plus the adjacent on-site terms,
// half weight each so interior sites are shared between their two bonds
// (full weight at the chain ends).
Mat bond_hamiltonian(const ChainHamiltonian& chain, std::size_t b) {
    const std::size_t d1 = chain.local_dims[b], d2 = chain.local_dims[b + 1];
    const std::size_t D = d1 * d2;
    const DenseTensor& bt = chain.bond_terms[b];
    Mat h;
    if (bt.size() == 0) {
        h = Mat::Zero(ei(D), ei(D));
    } else {
        if (bt.rank() != 2 || bt.shape()[0] != D || bt.shape()[1] != D)
            throw DimensionError("bond term " + std::to_string(b) + ": wrong shape");
        h = MapRMConst(bt.data(), ei(D), ei(D));
    }

    const std::size_t N = chain.n_sites();
    auto add_site = [&](std::size_t site, bool left) {
        const DenseTensor& st = chain.site_terms[site];
        if (st.size() == 0) return; // no on-site term
        const std::size_t d = chain.local_dims[site];
        if (st.rank() != 2 || st.shape()[0] != d || st.shape()[1] != d)
            throw DimensionError("site term " + std::to_string(site) + ": wrong shape");
        const bool edge = left ? (site == 0) : (site + 1 == N);
        const double w = edge ? 1.0 : 0.5;
        MapRMConst S(st.data(), ei(d), ei(d));
        if (left) {
            for (std::size_t i = 0; i < d1; ++i)
                for (std::size_t j = 0; j < d1; ++j) {
                    const cx v = w * S(ei(i), ei(j));
                    if (v == cx(0, 0)) continue;
                    for (std::size_t k = 0; k < d2; ++k)
                        h(ei(i * d2 + k), ei(j * d2 + k)) += v;
                }
        } else {
            for (std::size_t i = 0; i < d2; ++i)
                for (std::size_t j = 0; j < d2; ++j) {
                    const cx v = w * S(ei(i), ei(j));
                    if (v == cx(0, 0)) continue;
                    for (std::size_t k = 0; k < d1; ++k)
                        h(ei(k * d2 + i), ei(k * d2 + j)) += v;
                }
        }
    };
    add_site(b, true);
    add_site(b + 1, false);
    return h;
}

DenseTensor gate_exponential(const Mat& h, double tau, EvolveMode mode) {
    const std::size_t D = static_cast<std::size_t>(h.rows());
    const double scale = h.cwiseAbs().maxCoeff();
    if ((h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * std::max(scale, 1.0))
        throw ModelError("bond Hamiltonian is not hermitian");
    Mat hs = 0.5 * (h + Mat(h.adjoint()));
    Eigen::SelfAdjointEigenSolver<Mat> es(hs);
    if (es.info() != Eigen::Success) throw NumericError("gate eigensolver failed");
    Eigen::VectorXcd ph(ei(D));
    for (std::size_t k = 0; k < D; ++k) {
        const double lam = es.eigenvalues()(ei(k));
        ph(ei(k)) = (mode == EvolveMode::real_time) ? std::exp(cx(0, -tau * lam))
                                                    : std::exp(cx(-tau * lam, 0));
    }
    Mat g = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
    DenseTensor out({D, D});
    MapRM(out.data(), ei(D), ei(D)) = g;
    return out;
}

bool annihilates_vacuum(const Mat& h) {
    // The two-site vacuum is basis index 0; the gate leaves it exactly fixed
    // iff column 0 of the bond Hamiltonian vanishes.
    const double scale = std::max(h.cwiseAbs().maxCoeff(), 1.0);
    return h.col(0).cwiseAbs().maxCoeff() <= 1e-14 * scale;
}

// A site tensor is treated as exact vacuum when it is a 1x d x 1 tensor with
// all weight on basis index 0.
bool tensor_is_vacuum(const DenseTensor& t) {
    if (t.shape()[0] != 1 || t.shape()[2] != 1) return false;
    const std::size_t d = t.shape()[1];
    double tail = 0, head = std::norm(t.data()[0]);
    for (std::size_t i = 1; i < d; ++i) tail += std::norm(t.data()[i]);
    if (head <= 0) return false;
    return tail <= 1e-24 * head;
}

// Zero the (at most 1e-24 relative) tail so later skips stay bit-exact.
void reset_vacuum_tail(DenseTensor& t) {
    const std::size_t d = t.shape()[1];
    for (std::size_t i = 1; i < d; ++i) t.data()[i] = cx(0, 0);
}

} // namespace

TrotterPlan make_trotter_plan(const ChainHamiltonian& chain, double dt, EvolveMode mode) {
    const std::size_t N = chain.n_sites();
    if (N < 2) throw ArgumentError("make_trotter_plan: need at least 2 sites");
    if (chain.site_terms.size() != N || chain.bond_terms.size() != N - 1)
        throw DimensionError("make_trotter_plan: term count mismatch");
    if (!(dt > 0)) throw ArgumentError("make_trotter_plan: dt must be positive");

    TrotterPlan plan;
    plan.dt = dt;
    plan.mode = mode;
    plan.local_dims = chain.local_dims;
    plan.vacuum_invariant.assign(N - 1, false);
    for (std::size_t b = 0; b + 1 < N; ++b) {
        Mat h = bond_hamiltonian(chain, b);
        plan.vacuum_invariant[b] = annihilates_vacuum(h);
        if (b % 2 == 0) {
            plan.even_bonds.push_back(b);
            plan.even_gates.push_back(gate_exponential(h, dt / 2, mode));
        } else {
            plan.odd_bonds.push_back(b);
            plan.odd_gates.push_back(gate_exponential(h, dt, mode));
        }
    }
    return plan;
}

EvolveDiagnostics evolve(MPSState& s, const TrotterPlan& plan, std::size_t steps,
                         const SvdTruncation& trunc, const EvolveOptions& opts) {
    if (s.local_dims != plan.local_dims)
        throw DimensionError("evolve: state and plan disagree on local dimensions");
    const std::size_t N = s.n_sites();
    if (trunc.max_rank == 0) throw ArgumentError("evolve: max_rank must be >= 1");

    std::vector<char> vac(N, 0);
    if (opts.skip_vacuum)
        for (std::size_t n = 0; n < N; ++n) vac[n] = tensor_is_vacuum(s.tensors[n]) ? 1 : 0;

    EvolveDiagnostics diag;
    diag.max_bond = s.max_bond_dim();

    auto recheck = [&](std::size_t site) {
        if (!opts.skip_vacuum) return;
        if (tensor_is_vacuum(s.tensors[site])) {
            reset_vacuum_tail(s.tensors[site]);
            vac[site] = 1;
        } else {
            vac[site] = 0;
        }
    };

    double step_max = 0;
    auto do_bond = [&](std::size_t b, const DenseTensor& g, bool center_right) {
        if (opts.skip_vacuum && plan.vacuum_invariant[b] && vac[b] && vac[b + 1]) return;
        const double w = apply_two_site_gate(s, b, g, trunc, center_right);
        if (w > opts.abort_discard)
            throw ResourceError("evolution aborted: discarded weight " + std::to_string(w) +
                                " at bond " + std::to_string(b) + " exceeds " +
                                std::to_string(opts.abort_discard));
        step_max = std::max(step_max, w);
        diag.max_discard = std::max(diag.max_discard, w);
        diag.discard_sum += w;
        diag.max_bond = std::max(diag.max_bond, s.tensors[b].shape()[2]);
        recheck(b);
        recheck(b + 1);
    };

    for (std::size_t step = 0; step < steps; ++step) {
        step_max = 0;
        for (std::size_t i = 0; i < plan.even_bonds.size(); ++i)
            do_bond(plan.even_bonds[i], plan.even_gates[i], true);
        for (std::size_t i = plan.odd_bonds.size(); i-- > 0;)
            do_bond(plan.odd_bonds[i], plan.odd_gates[i], false);
        for (std::size_t i = 0; i < plan.even_bonds.size(); ++i)
            do_bond(plan.even_bonds[i], plan.even_gates[i], true);

        double folded = 0;
        if (opts.renormalize) {
            const double before = s.log_norm;
            normalize(s);
            folded = s.log_norm - before;
        }
        diag.step_max_discard.push_back(step_max);
        diag.step_log_norm.push_back(folded);
    }
    return diag;
}

double chain_energy(const MPSState& s, const ChainHamiltonian& chain) {
    if (s.local_dims != chain.local_dims)
        throw DimensionError("chain_energy: state and chain disagree on local dimensions");
    const std::size_t N = s.n_sites();

    // identity environments
    std::vector<Mat> L(N + 1), R(N + 1);
    L[0] = Mat::Ones(1, 1);
    R[N] = Mat::Ones(1, 1);
    auto fold_left = [&](const Mat& env, std::size_t n) {
        const DenseTensor& A = s.tensors[n];
        const std::size_t Dl = A.shape()[0], d = A.shape()[1], Dr = A.shape()[2];
        MapRMConst Am(A.data(), ei(Dl), ei(d * Dr));
        Mat T = env * Am; // (Dl_bra, d*Dr)
        Mat Tr(ei(Dl * d), ei(Dr));
        for (std::size_t a = 0; a < Dl; ++a)
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t r = 0; r < Dr; ++r)
                    Tr(ei(a * d + i), ei(r)) = T(ei(a), ei(i * Dr + r));
        MapRMConst A2(A.data(), ei(Dl * d), ei(Dr));
        return Mat(A2.adjoint() * Tr);
    };
    auto fold_right = [&](const Mat& env, std::size_t n) {
        const DenseTensor& A = s.tensors[n];
        const std::size_t Dl = A.shape()[0], d = A.shape()[1], Dr = A.shape()[2];
        MapRMConst Am(A.data(), ei(Dl * d), ei(Dr));
        Mat T = Am * env.transpose(); // ((Dl d), Dr_bra)
        Mat Tr(ei(Dl), ei(d * Dr));
        for (std::size_t a = 0; a < Dl; ++a)
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t r = 0; r < Dr; ++r)
                    Tr(ei(a), ei(i * Dr + r)) = T(ei(a * d + i), ei(r));
        MapRMConst A2(A.data(), ei(Dl), ei(d * Dr));
        return Mat(A2.conjugate() * Tr.transpose());
    };
    for (std::size_t n = 0; n < N; ++n) L[n + 1] = fold_left(L[n], n);
    for (std::size_t n = N; n-- > 0;) R[n] = fold_right(R[n + 1], n);

    const double nrm2 = std::abs(L[N](0, 0));
    if (nrm2 <= 0) throw NumericError("chain_energy: zero-norm state");

    cx total(0, 0);
    // on-site terms
    for (std::size_t n = 0; n < N; ++n) {
        const DenseTensor& st = chain.site_terms[n];
        if (st.size() == 0) continue;
        const DenseTensor& A = s.tensors[n];
        const std::size_t Dl = A.shape()[0], d = A.shape()[1], Dr = A.shape()[2];
        MapRMConst S(st.data(), ei(d), ei(d));
        MapRMConst Am(A.data(), ei(Dl), ei(d * Dr));
        Mat T = L[n] * Am; // (Dl, d*Dr)
        Mat T2(ei(Dl * d), ei(Dr));
        for (std::size_t a = 0; a < Dl; ++a) {
            Mat blk = Mat::Zero(ei(d), ei(Dr));
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t r = 0; r < Dr; ++r) blk(ei(i), ei(r)) = T(ei(a), ei(i * Dr + r));
            Mat ob = S * blk;
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t r = 0; r < Dr; ++r) T2(ei(a * d + i), ei(r)) = ob(ei(i), ei(r));
        }
        MapRMConst A2(A.data(), ei(Dl * d), ei(Dr));
        Mat M = A2.adjoint() * T2; // (Dr_bra, Dr_ket)
        total += (M.array() * R[n + 1].array()).sum();
    }
    // bond terms
    for (std::size_t b = 0; b + 1 < N; ++b) {
        const DenseTensor& bt = chain.bond_terms[b];
        if (bt.size() == 0) continue;
        const DenseTensor& A = s.tensors[b];
        const DenseTensor& B = s.tensors[b + 1];
        const std::size_t Dl = A.shape()[0], d1 = A.shape()[1];
        const std::size_t d2 = B.shape()[1], Dr = B.shape()[2];
        DenseTensor theta = contract(A, B, {{2, 0}}); // (Dl, d1, d2, Dr)
        DenseTensor g4 = bt.reshaped({d1, d2, d1, d2});
        DenseTensor tk = contract(theta, g4, {{1, 2}, {2, 3}}).permuted({0, 2, 3, 1});
        // X = L * theta_ket, then Z = theta_bra^dag X, E = sum Z .* R
        MapRMConst Tk(tk.data(), ei(Dl), ei(d1 * d2 * Dr));
        Mat X = L[b] * Tk; // (Dl_bra, d1 d2 Dr)
        const std::size_t rest = d1 * d2;
        Mat Xr(ei(Dl * rest), ei(Dr));
        for (std::size_t a = 0; a < Dl; ++a)
            for (std::size_t ij = 0; ij < rest; ++ij)
                for (std::size_t r = 0; r < Dr; ++r)
                    Xr(ei(a * rest + ij), ei(r)) = X(ei(a), ei(ij * Dr + r));
        MapRMConst Tb(theta.data(), ei(Dl * rest), ei(Dr));
        Mat Z = Tb.adjoint() * Xr; // (Dr_bra, Dr_ket)
        total += (Z.array() * R[b + 2].array()).sum();
    }

    const cx e = total / nrm2;
    if (std::abs(e.imag()) > 1e-6 * (std::abs(e.real()) + 1.0))
        throw NumericError("chain_energy: non-real expectation value");
    return e.real();
}

} // namespace waveqed
