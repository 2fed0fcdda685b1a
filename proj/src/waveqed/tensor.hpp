#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <utility>
#include <vector>

namespace waveqed {

using cx = std::complex<double>;

// Dense complex tensor, row-major (last axis fastest), rank >= 1.
class DenseTensor {
public:
    DenseTensor() = default;
    explicit DenseTensor(std::vector<std::size_t> shape);
    DenseTensor(std::vector<std::size_t> shape, std::vector<cx> data);

    const std::vector<std::size_t>& shape() const { return m_shape; }
    std::size_t rank() const { return m_shape.size(); }
    std::size_t size() const { return m_data.size(); }
    std::size_t extent(std::size_t axis) const { return m_shape.at(axis); }

    cx* data() { return m_data.data(); }
    const cx* data() const { return m_data.data(); }

    cx& at(const std::vector<std::size_t>& idx) { return m_data[offset_of(idx)]; }
    const cx& at(const std::vector<std::size_t>& idx) const { return m_data[offset_of(idx)]; }
    cx& at(std::initializer_list<std::size_t> idx);
    const cx& at(std::initializer_list<std::size_t> idx) const;

    // Same data, new shape; total size must match (row-major order is kept).
    DenseTensor reshaped(std::vector<std::size_t> new_shape) const;
    // Axis permutation: result axis d is input axis order[d].
    DenseTensor permuted(const std::vector<std::size_t>& order) const;
    DenseTensor conjugated() const;

    double norm() const; // Frobenius
    void scale(cx factor);

private:
    std::size_t offset_of(const std::vector<std::size_t>& idx) const;

    std::vector<std::size_t> m_shape;
    std::vector<cx> m_data;
};

// Contract a with b over the given (a_axis, b_axis) pairs. The result's axes
// are the uncontracted axes of a (in order) followed by those of b. A full
// contraction returns a tensor of shape {1}.
DenseTensor contract(const DenseTensor& a, const DenseTensor& b,
                     const std::vector<std::pair<std::size_t, std::size_t>>& axes);

struct SvdTruncation {
    std::size_t max_rank = std::numeric_limits<std::size_t>::max();
    double discard_tolerance = 0.0;
};

struct TruncatedSvd {
    DenseTensor u;          // (rows, r)
    std::vector<double> s;  // r singular values, descending
    DenseTensor v;          // (r, cols); u * diag(s) * v reconstructs the input
    double discarded_weight = 0.0; // relative squared Frobenius error
};

// Deterministic truncated SVD of a rank-2 tensor. Kept rank is
// min(max_rank, smallest rank whose discarded weight meets the tolerance),
// never below 1.
TruncatedSvd truncated_svd(const DenseTensor& m, const SvdTruncation& trunc);

} // namespace waveqed
