#include "waveqed/mps.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include <Eigen/Dense>

#include "waveqed/errors.hpp"

namespace waveqed {

namespace {

using Mat = Eigen::Matrix<cx, Eigen::Dynamic, Eigen::Dynamic>;
using MapRM = Eigen::Map<Eigen::Matrix<cx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using MapRMConst =
    Eigen::Map<const Eigen::Matrix<cx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

Eigen::Index ei(std::size_t x) { return static_cast<Eigen::Index>(x); }

void check_state(const MPSState& s) {
    if (s.tensors.empty()) throw ArgumentError("MPSState: empty state");
    if (s.tensors.size() != s.local_dims.size())
        throw DimensionError("MPSState: tensors/local_dims length mismatch");
}

// Left environment step: L' = sum_i A_i^dag L B_i (optionally with a local
// operator inserted on the ket leg). L rows index the bra bond, columns the
// ket bond.
Mat step_left(const Mat& L, const DenseTensor& A, const DenseTensor& B, const DenseTensor* op) {
    const std::size_t DaL = A.shape()[0], d = A.shape()[1], DaR = A.shape()[2];
    const std::size_t DbL = B.shape()[0], DbR = B.shape()[2];
    if (B.shape()[1] != d) throw DimensionError("step_left: physical dimension mismatch");
    MapRMConst Bm(B.data(), ei(DbL), ei(d * DbR));
    Mat T1 = L * Bm; // (DaL, d*DbR); column index runs as (i, b) with b fastest
    if (op) {
        if (op->shape()[0] != d || op->shape()[1] != d)
            throw DimensionError("step_left: operator dimension mismatch");
        MapRMConst O(op->data(), ei(d), ei(d));
        Mat T2 = Mat::Zero(ei(DaL), ei(d * DbR));
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) {
                const cx o = O(ei(i), ei(j));
                if (o != cx(0, 0))
                    T2.middleCols(ei(i * DbR), ei(DbR)) +=
                        o * T1.middleCols(ei(j * DbR), ei(DbR));
            }
        T1 = std::move(T2);
    }
    // reshape T1 rows: (DaL, d, DbR) -> ((DaL*d), DbR); T1 is column-major so
    // assemble through an explicit row-major copy.
    Mat T1r(ei(DaL * d), ei(DbR));
    for (std::size_t a = 0; a < DaL; ++a)
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t b = 0; b < DbR; ++b) T1r(ei(a * d + i), ei(b)) = T1(ei(a), ei(i * DbR + b));
    MapRMConst Am(A.data(), ei(DaL * d), ei(DaR));
    return Am.adjoint() * T1r; // (DaR, DbR)
}

// Right environment step: R'_{a,b} = sum_{i,a',b'} conj(A[a,i,a']) op_{i j}
// B[b,j,b'] R[a',b'].
Mat step_right(const Mat& R, const DenseTensor& A, const DenseTensor& B, const DenseTensor* op) {
    const std::size_t DaL = A.shape()[0], d = A.shape()[1], DaR = A.shape()[2];
    const std::size_t DbL = B.shape()[0], DbR = B.shape()[2];
    if (B.shape()[1] != d) throw DimensionError("step_right: physical dimension mismatch");
    MapRMConst Bm(B.data(), ei(DbL * d), ei(DbR));
    Mat T1 = Bm * R.transpose(); // ((DbL*d), DaR)
    if (op) {
        MapRMConst O(op->data(), ei(d), ei(d));
        Mat T2(ei(DbL * d), ei(DaR));
        for (std::size_t b = 0; b < DbL; ++b)
            T2.middleRows(ei(b * d), ei(d)) = O * T1.middleRows(ei(b * d), ei(d));
        T1 = std::move(T2);
    }
    // R'(a,b) = sum_{i,a'} conj(A[(a i), a']) T1[(b i), a']
    MapRMConst Am(A.data(), ei(DaL), ei(d * DaR));
    Mat T1r(ei(DbL), ei(d * DaR));
    for (std::size_t b = 0; b < DbL; ++b)
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t a2 = 0; a2 < DaR; ++a2)
                T1r(ei(b), ei(i * DaR + a2)) = T1(ei(b * d + i), ei(a2));
    return Am.conjugate() * T1r.transpose(); // (DaL, DbL)
}

cx close_envs(const Mat& L, const Mat& R) { return (L.array() * R.array()).sum(); }

Mat ones_env() {
    Mat m(1, 1);
    m(0, 0) = cx(1, 0);
    return m;
}

cx overlap_network(const MPSState& bra, const MPSState& ket) {
    check_state(bra);
    check_state(ket);
    if (bra.local_dims != ket.local_dims)
        throw DimensionError("overlap: local dimension mismatch");
    Mat L = ones_env();
    for (std::size_t n = 0; n < bra.n_sites(); ++n)
        L = step_left(L, bra.tensors[n], ket.tensors[n], nullptr);
    return L(0, 0);
}

void left_normalize_step(MPSState& s, std::size_t n) {
    DenseTensor& A = s.tensors[n];
    const std::size_t Dl = A.shape()[0], d = A.shape()[1], Dr = A.shape()[2];
    MapRMConst M(A.data(), ei(Dl * d), ei(Dr));
    Eigen::HouseholderQR<Mat> qr(M);
    const std::size_t k = std::min(Dl * d, Dr);
    Mat Q = qr.householderQ() * Mat::Identity(ei(Dl * d), ei(k));
    Mat R = Mat(qr.matrixQR().topRows(ei(k)).triangularView<Eigen::Upper>());
    DenseTensor newA({Dl, d, k});
    MapRM(newA.data(), ei(Dl * d), ei(k)) = Q;
    s.tensors[n] = std::move(newA);

    DenseTensor& B = s.tensors[n + 1];
    const std::size_t d2 = B.shape()[1], Dr2 = B.shape()[2];
    if (B.shape()[0] != Dr) throw DimensionError("bond dimension chain broken");
    DenseTensor newB({k, d2, Dr2});
    MapRM(newB.data(), ei(k), ei(d2 * Dr2)) = R * MapRMConst(B.data(), ei(Dr), ei(d2 * Dr2));
    s.tensors[n + 1] = std::move(newB);
}

void right_normalize_step(MPSState& s, std::size_t n) {
    DenseTensor& A = s.tensors[n];
    const std::size_t Dl = A.shape()[0], d = A.shape()[1], Dr = A.shape()[2];
    MapRMConst M(A.data(), ei(Dl), ei(d * Dr));
    Eigen::HouseholderQR<Mat> qr(M.adjoint());
    const std::size_t k = std::min(Dl, d * Dr);
    Mat Q = qr.householderQ() * Mat::Identity(ei(d * Dr), ei(k));
    Mat R = Mat(qr.matrixQR().topRows(ei(k)).triangularView<Eigen::Upper>());
    DenseTensor newA({k, d, Dr});
    MapRM(newA.data(), ei(k), ei(d * Dr)) = Q.adjoint();
    s.tensors[n] = std::move(newA);

    DenseTensor& C = s.tensors[n - 1];
    const std::size_t Dl0 = C.shape()[0], d0 = C.shape()[1];
    if (C.shape()[2] != Dl) throw DimensionError("bond dimension chain broken");
    DenseTensor newC({Dl0, d0, k});
    MapRM(newC.data(), ei(Dl0 * d0), ei(k)) =
        MapRMConst(C.data(), ei(Dl0 * d0), ei(Dl)) * R.adjoint();
    s.tensors[n - 1] = std::move(newC);
}

double gate_apply_directional(MPSState& s, std::size_t bond, const DenseTensor& gate,
                              const SvdTruncation& trunc, bool center_right) {
    check_state(s);
    if (bond + 1 >= s.n_sites()) throw ArgumentError("apply_two_site_gate: bond out of range");
    if (!s.center)
        canonicalize(s, bond);
    else if (*s.center < bond)
        move_center(s, bond);
    else if (*s.center > bond + 1)
        move_center(s, bond + 1);

    const DenseTensor& A = s.tensors[bond];
    const DenseTensor& B = s.tensors[bond + 1];
    const std::size_t Dl = A.shape()[0], d1 = A.shape()[1];
    const std::size_t d2 = B.shape()[1], Dr = B.shape()[2];
    if (gate.rank() != 2 || gate.shape()[0] != d1 * d2 || gate.shape()[1] != d1 * d2)
        throw DimensionError("apply_two_site_gate: gate dimension mismatch");

    DenseTensor theta = contract(A, B, {{2, 0}}); // (Dl, d1, d2, Dr)
    DenseTensor g4 = gate.reshaped({d1, d2, d1, d2});
    DenseTensor tp = contract(theta, g4, {{1, 2}, {2, 3}}); // (Dl, Dr, d1', d2')
    DenseTensor perm = tp.permuted({0, 2, 3, 1});           // (Dl, d1', d2', Dr)
    DenseTensor mat = perm.reshaped({Dl * d1, d2 * Dr});

    TruncatedSvd svd = truncated_svd(mat, trunc);
    const std::size_t r = svd.s.size();

    if (center_right) {
        s.tensors[bond] = svd.u.reshaped({Dl, d1, r});
        DenseTensor sv = svd.v;
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < d2 * Dr; ++j) sv.at({i, j}) *= svd.s[i];
        s.tensors[bond + 1] = sv.reshaped({r, d2, Dr});
        s.center = bond + 1;
    } else {
        DenseTensor us = svd.u;
        for (std::size_t i = 0; i < Dl * d1; ++i)
            for (std::size_t j = 0; j < r; ++j) us.at({i, j}) *= svd.s[j];
        s.tensors[bond] = us.reshaped({Dl, d1, r});
        s.tensors[bond + 1] = svd.v.reshaped({r, d2, Dr});
        s.center = bond;
    }
    return svd.discarded_weight;
}

} // namespace

std::size_t MPSState::bond_dim(std::size_t bond) const {
    if (bond < tensors.size()) return tensors[bond].shape()[0];
    if (bond == tensors.size() && !tensors.empty()) return tensors.back().shape()[2];
    throw ArgumentError("bond_dim: bond out of range");
}

std::size_t MPSState::max_bond_dim() const {
    std::size_t m = 1;
    for (const auto& t : tensors) m = std::max(m, t.shape()[2]);
    return m;
}

MPSState product_state(const std::vector<std::size_t>& local_dims,
                       const std::vector<std::vector<cx>>& local_vectors) {
    if (local_dims.empty()) throw ArgumentError("product_state: empty chain");
    if (local_dims.size() != local_vectors.size())
        throw DimensionError("product_state: dims/vectors length mismatch");
    MPSState s;
    s.local_dims = local_dims;
    for (std::size_t n = 0; n < local_dims.size(); ++n) {
        const auto& v = local_vectors[n];
        if (v.size() != local_dims[n])
            throw DimensionError("product_state: local vector length mismatch at site " +
                                 std::to_string(n));
        double nrm = 0;
        for (const auto& z : v) nrm += std::norm(z);
        if (std::abs(std::sqrt(nrm) - 1.0) > 1e-10)
            throw ArgumentError("product_state: local vector at site " + std::to_string(n) +
                                " is not unit norm");
        DenseTensor t({1, local_dims[n], 1});
        for (std::size_t i = 0; i < v.size(); ++i) t.at({0, i, 0}) = v[i];
        s.tensors.push_back(std::move(t));
    }
    s.center = 0;
    return s;
}

MPSState vacuum_state(const std::vector<std::size_t>& local_dims) {
    std::vector<std::vector<cx>> vecs;
    for (auto d : local_dims) {
        std::vector<cx> v(d, cx(0, 0));
        v[0] = cx(1, 0);
        vecs.push_back(std::move(v));
    }
    return product_state(local_dims, vecs);
}

void canonicalize(MPSState& s, std::size_t center) {
    check_state(s);
    if (center >= s.n_sites()) throw ArgumentError("canonicalize: center out of range");
    for (std::size_t n = 0; n < center; ++n) left_normalize_step(s, n);
    for (std::size_t n = s.n_sites() - 1; n > center; --n) right_normalize_step(s, n);
    s.center = center;
}

void move_center(MPSState& s, std::size_t target) {
    check_state(s);
    if (target >= s.n_sites()) throw ArgumentError("move_center: target out of range");
    if (!s.center) {
        canonicalize(s, target);
        return;
    }
    while (*s.center < target) {
        left_normalize_step(s, *s.center);
        s.center = *s.center + 1;
    }
    while (*s.center > target) {
        right_normalize_step(s, *s.center);
        s.center = *s.center - 1;
    }
}

double network_norm(const MPSState& s) {
    check_state(s);
    if (s.center) return s.tensors[*s.center].norm();
    return std::sqrt(std::abs(overlap_network(s, s)));
}

void normalize(MPSState& s) {
    double nrm = network_norm(s);
    if (nrm <= 0) throw NumericError("normalize: zero-norm state");
    if (s.center) {
        s.tensors[*s.center].scale(cx(1.0 / nrm, 0));
    } else {
        canonicalize(s, 0);
        nrm = network_norm(s);
        s.tensors[0].scale(cx(1.0 / nrm, 0));
    }
    s.log_norm += std::log(nrm);
}

double apply_two_site_gate(MPSState& s, std::size_t bond, const DenseTensor& gate,
                           const SvdTruncation& trunc) {
    return gate_apply_directional(s, bond, gate, trunc, true);
}

double apply_two_site_gate(MPSState& s, std::size_t bond, const DenseTensor& gate,
                           const SvdTruncation& trunc, bool center_right) {
    return gate_apply_directional(s, bond, gate, trunc, center_right);
}

cx expectation_product(const MPSState& bra, const MPSState& ket,
                       const std::vector<LocalOp>& ops) {
    check_state(bra);
    check_state(ket);
    if (bra.local_dims != ket.local_dims)
        throw DimensionError("expectation_product: dimension mismatch");
    std::vector<const DenseTensor*> per_site(bra.n_sites(), nullptr);
    for (const auto& op : ops) {
        if (op.site >= bra.n_sites()) throw ArgumentError("expectation_product: site out of range");
        if (per_site[op.site]) throw ArgumentError("expectation_product: duplicate site");
        per_site[op.site] = &op.matrix;
    }
    Mat L = ones_env();
    for (std::size_t n = 0; n < bra.n_sites(); ++n)
        L = step_left(L, bra.tensors[n], ket.tensors[n], per_site[n]);
    return L(0, 0) * std::exp(bra.log_norm + ket.log_norm);
}

cx overlap(const MPSState& bra, const MPSState& ket) {
    return overlap_network(bra, ket) * std::exp(bra.log_norm + ket.log_norm);
}

std::vector<cx> local_expectations(const MPSState& bra, const MPSState& ket,
                                   const std::vector<DenseTensor>& ops) {
    check_state(bra);
    check_state(ket);
    const std::size_t N = bra.n_sites();
    if (ops.size() != N) throw DimensionError("local_expectations: one operator per site required");
    std::vector<Mat> L(N + 1), R(N + 1);
    L[0] = ones_env();
    for (std::size_t n = 0; n < N; ++n)
        L[n + 1] = step_left(L[n], bra.tensors[n], ket.tensors[n], nullptr);
    R[N] = ones_env();
    for (std::size_t n = N; n-- > 0;)
        R[n] = step_right(R[n + 1], bra.tensors[n], ket.tensors[n], nullptr);
    const cx scale = std::exp(bra.log_norm + ket.log_norm);
    std::vector<cx> out(N);
    for (std::size_t n = 0; n < N; ++n) {
        Mat M = step_left(L[n], bra.tensors[n], ket.tensors[n], &ops[n]);
        out[n] = close_envs(M, R[n + 1]) * scale;
    }
    return out;
}

cx expectation_two_point(const MPSState& s, const LocalOp& a, const LocalOp& b) {
    if (a.site >= b.site) throw ArgumentError("expectation_two_point: need x1 < x2");
    return expectation_product(s, s, {a, b});
}

DenseTensor two_point_matrix(const MPSState& bra, const MPSState& ket,
                             const std::vector<DenseTensor>& op_a,
                             const std::vector<DenseTensor>& op_b,
                             const std::vector<DenseTensor>& op_diag) {
    check_state(bra);
    check_state(ket);
    const std::size_t N = bra.n_sites();
    if (op_a.size() != N || op_b.size() != N || op_diag.size() != N)
        throw DimensionError("two_point_matrix: one operator per site required");
    std::vector<Mat> L(N + 1), R(N + 1);
    L[0] = ones_env();
    for (std::size_t n = 0; n < N; ++n)
        L[n + 1] = step_left(L[n], bra.tensors[n], ket.tensors[n], nullptr);
    R[N] = ones_env();
    for (std::size_t n = N; n-- > 0;)
        R[n] = step_right(R[n + 1], bra.tensors[n], ket.tensors[n], nullptr);

    const cx scale = std::exp(bra.log_norm + ket.log_norm);
    DenseTensor C({N, N});
    for (std::size_t i = 0; i < N; ++i) {
        Mat Md = step_left(L[i], bra.tensors[i], ket.tensors[i], &op_diag[i]);
        C.at({i, i}) = close_envs(Md, R[i + 1]) * scale;
        Mat M = step_left(L[i], bra.tensors[i], ket.tensors[i], &op_a[i]);
        for (std::size_t j = i + 1; j < N; ++j) {
            Mat Mb = step_left(M, bra.tensors[j], ket.tensors[j], &op_b[j]);
            C.at({i, j}) = close_envs(Mb, R[j + 1]) * scale;
            if (j + 1 < N) M = step_left(M, bra.tensors[j], ket.tensors[j], nullptr);
        }
    }
    return C;
}

double compress(MPSState& s, const SvdTruncation& trunc) {
    check_state(s);
    canonicalize(s, 0);
    double discarded = 0;
    const std::size_t N = s.n_sites();
    for (std::size_t n = 0; n + 1 < N; ++n) {
        DenseTensor& A = s.tensors[n];
        const std::size_t Dl = A.shape()[0], d = A.shape()[1], Dr = A.shape()[2];
        TruncatedSvd svd = truncated_svd(A.reshaped({Dl * d, Dr}), trunc);
        const std::size_t r = svd.s.size();
        discarded += svd.discarded_weight;
        s.tensors[n] = svd.u.reshaped({Dl, d, r});
        DenseTensor sv = svd.v;
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < Dr; ++j) sv.at({i, j}) *= svd.s[i];
        // absorb into the next tensor
        DenseTensor& B = s.tensors[n + 1];
        const std::size_t d2 = B.shape()[1], Dr2 = B.shape()[2];
        DenseTensor newB({r, d2, Dr2});
        MapRM(newB.data(), ei(r), ei(d2 * Dr2)) =
            MapRMConst(sv.data(), ei(r), ei(Dr)) *
            MapRMConst(B.data(), ei(Dr), ei(d2 * Dr2));
        s.tensors[n + 1] = std::move(newB);
    }
    s.center = N - 1;
    return discarded;
}

double apply_local_operator_sum(MPSState& s, const std::vector<DenseTensor>& ops,
                                const std::vector<cx>& coeffs, const SvdTruncation& trunc) {
    check_state(s);
    const std::size_t N = s.n_sites();
    if (ops.size() != N || coeffs.size() != N)
        throw DimensionError("apply_local_operator_sum: one entry per site required");
    if (N == 1) throw ArgumentError("apply_local_operator_sum: need at least 2 sites");

    for (std::size_t n = 0; n < N; ++n) {
        const DenseTensor& A = s.tensors[n];
        const std::size_t Dl = A.shape()[0], d = A.shape()[1], Dr = A.shape()[2];
        const bool has_op = ops[n].size() != 0;
        if (has_op && (ops[n].rank() != 2 || ops[n].shape()[0] != d || ops[n].shape()[1] != d))
            throw DimensionError("apply_local_operator_sum: operator shape mismatch at site " +
                                 std::to_string(n));

        // cOA[l,i,r] = coeff * sum_j op[i][j] A[l,j,r]
        DenseTensor cOA({Dl, d, Dr});
        if (has_op) {
            cOA = contract(ops[n], A, {{1, 1}});   // (d, Dl, Dr)
            cOA = cOA.permuted({1, 0, 2});
            cOA.scale(coeffs[n]);
        }

        const std::size_t wl = (n == 0) ? 1 : 2;
        const std::size_t wr = (n + 1 == N) ? 1 : 2;
        DenseTensor newA({wl * Dl, d, wr * Dr});
        auto put = [&](std::size_t w, std::size_t wp, const DenseTensor& src) {
            for (std::size_t l = 0; l < Dl; ++l)
                for (std::size_t i = 0; i < d; ++i)
                    for (std::size_t r = 0; r < Dr; ++r)
                        newA.at({w * Dl + l, i, wp * Dr + r}) = src.at({l, i, r});
        };
        // MPO states: 0 = operator not yet placed, 1 = placed.
        if (n == 0) {
            if (wr == 1) throw ArgumentError("apply_local_operator_sum: need at least 2 sites");
            put(0, 0, A);
            if (has_op) put(0, 1, cOA);
        } else if (n + 1 == N) {
            if (has_op) put(0, 0, cOA);
            put(1, 0, A);
        } else {
            put(0, 0, A);
            if (has_op) put(0, 1, cOA);
            put(1, 1, A);
        }
        s.tensors[n] = std::move(newA);
    }
    s.center = std::nullopt;
    return compress(s, trunc);
}

std::vector<cx> mps_to_dense(const MPSState& s) {
    check_state(s);
    Mat v(1, 1);
    v(0, 0) = cx(1, 0);
    for (const auto& A : s.tensors) {
        const std::size_t Dl = A.shape()[0], d = A.shape()[1], Dr = A.shape()[2];
        const std::size_t M = static_cast<std::size_t>(v.rows());
        Mat next =
            v * MapRMConst(A.data(), ei(Dl), ei(d * Dr)); // (M, d*Dr), row-major blocks per d
        Mat folded(ei(M * d), ei(Dr));
        for (std::size_t m = 0; m < M; ++m)
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t r = 0; r < Dr; ++r)
                    folded(ei(m * d + i), ei(r)) = next(ei(m), ei(i * Dr + r));
        v = std::move(folded);
    }
    const cx factor = std::exp(cx(s.log_norm, 0));
    std::vector<cx> out(static_cast<std::size_t>(v.rows()));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = v(ei(i), 0) * factor;
    return out;
}

namespace {

template <typename T>
void write_pod(std::ofstream& f, const T& v) {
    f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& f) {
    T v{};
    f.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!f) throw ConfigError("checkpoint: truncated file");
    return v;
}

constexpr char kMagic[8] = {'W', 'Q', 'M', 'P', 'S', '0', '0', '1'};

} // namespace

void save_checkpoint(const MPSState& s, const std::string& path) {
    check_state(s);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("checkpoint: cannot open " + path + " for writing");
    f.write(kMagic, 8);
    write_pod<std::uint32_t>(f, 1u); // version
    write_pod<std::uint32_t>(f, static_cast<std::uint32_t>(s.n_sites()));
    write_pod<double>(f, s.log_norm);
    write_pod<std::int64_t>(f, s.center ? static_cast<std::int64_t>(*s.center) : -1);
    for (auto d : s.local_dims) write_pod<std::uint32_t>(f, static_cast<std::uint32_t>(d));
    for (const auto& t : s.tensors) {
        for (std::size_t k = 0; k < 3; ++k)
            write_pod<std::uint32_t>(f, static_cast<std::uint32_t>(t.shape()[k]));
        f.write(reinterpret_cast<const char*>(t.data()),
                static_cast<std::streamsize>(t.size() * sizeof(cx)));
    }
    if (!f) throw ConfigError("checkpoint: write failed for " + path);
}

MPSState load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("checkpoint: cannot open " + path);
    char magic[8];
    f.read(magic, 8);
    if (!f || std::memcmp(magic, kMagic, 8) != 0)
        throw ConfigError("checkpoint: bad magic in " + path);
    const auto version = read_pod<std::uint32_t>(f);
    if (version != 1u)
        throw ConfigError("checkpoint: unsupported version " + std::to_string(version));
    const auto n = read_pod<std::uint32_t>(f);
    if (n == 0) throw ConfigError("checkpoint: empty state");
    MPSState s;
    s.log_norm = read_pod<double>(f);
    const auto c = read_pod<std::int64_t>(f);
    s.local_dims.resize(n);
    for (auto& d : s.local_dims) d = read_pod<std::uint32_t>(f);
    std::size_t prev_bond = 1;
    for (std::size_t i = 0; i < n; ++i) {
        const auto Dl = read_pod<std::uint32_t>(f);
        const auto d = read_pod<std::uint32_t>(f);
        const auto Dr = read_pod<std::uint32_t>(f);
        if (Dl != prev_bond || d != s.local_dims[i])
            throw ConfigError("checkpoint: inconsistent shapes at site " + std::to_string(i));
        if (i == 0 && Dl != 1) throw ConfigError("checkpoint: first bond must be 1");
        DenseTensor t({Dl, d, Dr});
        f.read(reinterpret_cast<char*>(t.data()),
               static_cast<std::streamsize>(t.size() * sizeof(cx)));
        if (!f) throw ConfigError("checkpoint: truncated tensor data");
        s.tensors.push_back(std::move(t));
        prev_bond = Dr;
    }
    if (prev_bond != 1) throw ConfigError("checkpoint: last bond must be 1");
    if (c >= 0) {
        if (static_cast<std::size_t>(c) >= n)
            throw ConfigError("checkpoint: center out of range");
        s.center = static_cast<std::size_t>(c);
    }
    return s;
}

} // namespace waveqed
