#pragma once

// Shared helpers for the unit tests: seeded RNG, random tensors/unitaries,
// and small conversion utilities. Everything here is deterministic.

#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "waveqed/tensor.hpp"

namespace testutil {

using waveqed::cx;
using waveqed::DenseTensor;
using Mat = Eigen::Matrix<cx, Eigen::Dynamic, Eigen::Dynamic>;
using Vec = Eigen::Matrix<cx, Eigen::Dynamic, 1>;

inline std::mt19937 rng(unsigned seed) { return std::mt19937(seed); }

inline cx random_cx(std::mt19937& g) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    double re = d(g);
    double im = d(g);
    return cx(re, im);
}

inline DenseTensor random_tensor(const std::vector<std::size_t>& shape, std::mt19937& g) {
    DenseTensor t(shape);
    for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = random_cx(g);
    return t;
}

inline Mat random_matrix(int rows, int cols, std::mt19937& g) {
    Mat m(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) m(i, j) = random_cx(g);
    return m;
}

// Haar-ish unitary from QR of a random matrix with fixed phase convention.
inline Mat random_unitary(int n, std::mt19937& g) {
    Mat m = random_matrix(n, n, g);
    Eigen::HouseholderQR<Mat> qr(m);
    Mat q = qr.householderQ() * Mat::Identity(n, n);
    Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < n; ++i) {
        cx d = r(i, i);
        if (std::abs(d) > 0) q.col(i) *= d / std::abs(d);
    }
    return q;
}

inline Mat tensor_as_matrix(const DenseTensor& t) {
    if (t.rank() != 2) throw std::logic_error("tensor_as_matrix wants rank 2");
    Mat m(t.shape()[0], t.shape()[1]);
    for (std::size_t i = 0; i < t.shape()[0]; ++i)
        for (std::size_t j = 0; j < t.shape()[1]; ++j) m(i, j) = t.at({i, j});
    return m;
}

inline DenseTensor matrix_as_tensor(const Mat& m) {
    DenseTensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            t.at({static_cast<std::size_t>(i), static_cast<std::size_t>(j)}) = m(i, j);
    return t;
}

// Reference contraction: plain loops over all free and summed indices.
// Deliberately slow and index-explicit; this is the oracle the fast
// implementation is checked against.
inline DenseTensor naive_contract(const DenseTensor& a, const DenseTensor& b,
                                  const std::vector<std::pair<std::size_t, std::size_t>>& axes) {
    std::vector<bool> a_summed(a.rank(), false), b_summed(b.rank(), false);
    for (auto [ia, ib] : axes) {
        a_summed[ia] = true;
        b_summed[ib] = true;
    }
    std::vector<std::size_t> free_a, free_b, out_shape;
    for (std::size_t i = 0; i < a.rank(); ++i)
        if (!a_summed[i]) {
            free_a.push_back(i);
            out_shape.push_back(a.shape()[i]);
        }
    for (std::size_t i = 0; i < b.rank(); ++i)
        if (!b_summed[i]) {
            free_b.push_back(i);
            out_shape.push_back(b.shape()[i]);
        }
    if (out_shape.empty()) out_shape.push_back(1);
    DenseTensor out(out_shape);

    std::vector<std::size_t> sum_extent;
    for (auto [ia, ib] : axes) {
        (void)ib;
        sum_extent.push_back(a.shape()[ia]);
    }
    std::size_t n_sum = 1;
    for (auto e : sum_extent) n_sum *= e;

    std::vector<std::size_t> ia_idx(a.rank(), 0), ib_idx(b.rank(), 0);
    std::size_t n_out = out.size();
    for (std::size_t lin = 0; lin < n_out; ++lin) {
        // decode output linear index into free indices of a then b
        std::size_t rem = lin;
        std::vector<std::size_t> out_idx(out_shape.size());
        for (std::size_t d = out_shape.size(); d-- > 0;) {
            out_idx[d] = rem % out_shape[d];
            rem /= out_shape[d];
        }
        std::size_t pos = 0;
        for (std::size_t f = 0; f < free_a.size(); ++f) ia_idx[free_a[f]] = out_idx[pos++];
        for (std::size_t f = 0; f < free_b.size(); ++f) ib_idx[free_b[f]] = out_idx[pos++];

        cx acc(0, 0);
        for (std::size_t s = 0; s < n_sum; ++s) {
            std::size_t srem = s;
            for (std::size_t d = sum_extent.size(); d-- > 0;) {
                std::size_t v = srem % sum_extent[d];
                srem /= sum_extent[d];
                ia_idx[axes[d].first] = v;
                ib_idx[axes[d].second] = v;
            }
            acc += a.at(ia_idx) * b.at(ib_idx);
        }
        out.data()[lin] = acc;
    }
    return out;
}

// Singular values via eigenvalues of the Gram matrix, independent of any
// SVD routine.
inline std::vector<double> gram_singular_values(const Mat& m) {
    Mat gram = m.adjoint() * m;
    Eigen::SelfAdjointEigenSolver<Mat> es(gram);
    std::vector<double> sv;
    for (Eigen::Index i = es.eigenvalues().size(); i-- > 0;)
        sv.push_back(std::sqrt(std::max(0.0, es.eigenvalues()(i))));
    return sv; // descending
}

} // namespace testutil
