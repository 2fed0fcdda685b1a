#include "waveqed/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "waveqed/errors.hpp"

namespace waveqed {

namespace {

using EigenMapRM =
    Eigen::Map<Eigen::Matrix<cx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using EigenMapRMConst =
    Eigen::Map<const Eigen::Matrix<cx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

std::size_t shape_size(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (auto e : shape) n *= e;
    return n;
}

std::string shape_str(const std::vector<std::size_t>& shape) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
    os << ")";
    return os.str();
}

} // namespace

DenseTensor::DenseTensor(std::vector<std::size_t> shape)
    : m_shape(std::move(shape)), m_data(shape_size(m_shape), cx(0, 0)) {
    if (m_shape.empty()) throw DimensionError("DenseTensor: rank must be >= 1");
    for (auto e : m_shape)
        if (e == 0) throw DimensionError("DenseTensor: zero extent in shape " + shape_str(m_shape));
}

DenseTensor::DenseTensor(std::vector<std::size_t> shape, std::vector<cx> data)
    : m_shape(std::move(shape)), m_data(std::move(data)) {
    if (m_shape.empty()) throw DimensionError("DenseTensor: rank must be >= 1");
    if (m_data.size() != shape_size(m_shape))
        throw DimensionError("DenseTensor: data size does not match shape " + shape_str(m_shape));
}

std::size_t DenseTensor::offset_of(const std::vector<std::size_t>& idx) const {
    if (idx.size() != m_shape.size())
        throw DimensionError("DenseTensor::at: index rank mismatch");
    std::size_t off = 0;
    for (std::size_t d = 0; d < idx.size(); ++d) {
        if (idx[d] >= m_shape[d]) throw DimensionError("DenseTensor::at: index out of range");
        off = off * m_shape[d] + idx[d];
    }
    return off;
}

cx& DenseTensor::at(std::initializer_list<std::size_t> idx) {
    return m_data[offset_of(std::vector<std::size_t>(idx))];
}

const cx& DenseTensor::at(std::initializer_list<std::size_t> idx) const {
    return m_data[offset_of(std::vector<std::size_t>(idx))];
}

DenseTensor DenseTensor::reshaped(std::vector<std::size_t> new_shape) const {
    if (shape_size(new_shape) != size())
        throw DimensionError("reshape: size mismatch " + shape_str(m_shape) + " -> " +
                             shape_str(new_shape));
    return DenseTensor(std::move(new_shape), m_data);
}

DenseTensor DenseTensor::permuted(const std::vector<std::size_t>& order) const {
    const std::size_t r = rank();
    if (order.size() != r) throw ArgumentError("permute: order length mismatch");
    std::vector<bool> seen(r, false);
    bool identity = true;
    for (std::size_t d = 0; d < r; ++d) {
        if (order[d] >= r || seen[order[d]]) throw ArgumentError("permute: invalid axis order");
        seen[order[d]] = true;
        if (order[d] != d) identity = false;
    }
    if (identity) return *this;

    std::vector<std::size_t> out_shape(r);
    for (std::size_t d = 0; d < r; ++d) out_shape[d] = m_shape[order[d]];

    std::vector<std::size_t> in_stride(r);
    in_stride[r - 1] = 1;
    for (std::size_t d = r - 1; d-- > 0;) in_stride[d] = in_stride[d + 1] * m_shape[d + 1];
    std::vector<std::size_t> step(r);
    for (std::size_t d = 0; d < r; ++d) step[d] = in_stride[order[d]];

    DenseTensor out(out_shape);
    std::vector<std::size_t> idx(r, 0);
    std::size_t off = 0;
    const std::size_t n = size();
    for (std::size_t lin = 0; lin < n; ++lin) {
        out.m_data[lin] = m_data[off];
        for (std::size_t d = r; d-- > 0;) {
            ++idx[d];
            off += step[d];
            if (idx[d] < out_shape[d]) break;
            off -= out_shape[d] * step[d];
            idx[d] = 0;
        }
    }
    return out;
}

DenseTensor DenseTensor::conjugated() const {
    DenseTensor out = *this;
    for (auto& z : out.m_data) z = std::conj(z);
    return out;
}

double DenseTensor::norm() const {
    double acc = 0;
    for (const auto& z : m_data) acc += std::norm(z);
    return std::sqrt(acc);
}

void DenseTensor::scale(cx factor) {
    for (auto& z : m_data) z *= factor;
}

DenseTensor contract(const DenseTensor& a, const DenseTensor& b,
                     const std::vector<std::pair<std::size_t, std::size_t>>& axes) {
    std::vector<bool> a_used(a.rank(), false), b_used(b.rank(), false);
    for (auto [ia, ib] : axes) {
        if (ia >= a.rank() || ib >= b.rank())
            throw ArgumentError("contract: axis index out of range");
        if (a_used[ia] || b_used[ib]) throw ArgumentError("contract: repeated contraction axis");
        a_used[ia] = true;
        b_used[ib] = true;
        if (a.shape()[ia] != b.shape()[ib]) {
            std::ostringstream os;
            os << "contract: extent mismatch, a axis " << ia << " (extent " << a.shape()[ia]
               << ") vs b axis " << ib << " (extent " << b.shape()[ib] << ")";
            throw DimensionError(os.str());
        }
    }

    std::vector<std::size_t> perm_a, perm_b, out_shape;
    std::size_t fa = 1, fb = 1, k = 1;
    for (std::size_t d = 0; d < a.rank(); ++d)
        if (!a_used[d]) {
            perm_a.push_back(d);
            out_shape.push_back(a.shape()[d]);
            fa *= a.shape()[d];
        }
    for (auto [ia, ib] : axes) {
        (void)ib;
        perm_a.push_back(ia);
        k *= a.shape()[ia];
    }
    for (auto [ia, ib] : axes) {
        (void)ia;
        perm_b.push_back(ib);
    }
    for (std::size_t d = 0; d < b.rank(); ++d)
        if (!b_used[d]) {
            perm_b.push_back(d);
            out_shape.push_back(b.shape()[d]);
            fb *= b.shape()[d];
        }
    if (out_shape.empty()) out_shape.push_back(1);

    DenseTensor pa = a.permuted(perm_a);
    DenseTensor pb = b.permuted(perm_b);
    DenseTensor out(out_shape);

    EigenMapRMConst ma(pa.data(), static_cast<Eigen::Index>(fa), static_cast<Eigen::Index>(k));
    EigenMapRMConst mb(pb.data(), static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(fb));
    EigenMapRM mo(out.data(), static_cast<Eigen::Index>(fa), static_cast<Eigen::Index>(fb));
    mo.noalias() = ma * mb;
    return out;
}

TruncatedSvd truncated_svd(const DenseTensor& m, const SvdTruncation& trunc) {
    if (m.rank() != 2) throw DimensionError("truncated_svd: rank-2 tensor required");
    const auto rows = static_cast<Eigen::Index>(m.shape()[0]);
    const auto cols = static_cast<Eigen::Index>(m.shape()[1]);
    EigenMapRMConst mm(m.data(), rows, cols);

    Eigen::Matrix<cx, Eigen::Dynamic, Eigen::Dynamic> uu, vv;
    Eigen::VectorXd sv;
    bool done = false;
    if (std::min(rows, cols) > 16) {
        // BDC can fail on heavily rank-deficient spectra; fall through to Jacobi
        Eigen::BDCSVD<Eigen::Matrix<cx, Eigen::Dynamic, Eigen::Dynamic>> svd(
            mm, Eigen::ComputeThinU | Eigen::ComputeThinV);
        if (svd.info() == Eigen::Success) {
            uu = svd.matrixU();
            vv = svd.matrixV();
            sv = svd.singularValues();
            done = true;
        }
    }
    if (!done) {
        Eigen::JacobiSVD<Eigen::Matrix<cx, Eigen::Dynamic, Eigen::Dynamic>> svd(
            mm, Eigen::ComputeThinU | Eigen::ComputeThinV);
        if (svd.info() != Eigen::Success)
            throw NumericError("truncated_svd: backend failed on shape " + std::to_string(rows) +
                               "x" + std::to_string(cols));
        uu = svd.matrixU();
        vv = svd.matrixV();
        sv = svd.singularValues();
    }

    const std::size_t full = static_cast<std::size_t>(sv.size());
    double total = 0;
    for (std::size_t i = 0; i < full; ++i) total += sv(static_cast<Eigen::Index>(i)) * sv(static_cast<Eigen::Index>(i));

    // values at numerical-noise level carry no weight and never count as rank,
    // so a zero tolerance still keeps the rank tight
    std::size_t full_eff = full;
    if (full > 0) {
        const double floor = sv(0) * double(std::max(rows, cols)) *
                             std::numeric_limits<double>::epsilon();
        while (full_eff > 1 && sv(static_cast<Eigen::Index>(full_eff - 1)) <= floor) --full_eff;
    }

    // smallest rank meeting the tolerance (relative tail weight)
    std::size_t r_tol = full_eff;
    if (total > 0) {
        double tail = 0;
        r_tol = full_eff;
        for (std::size_t r = full_eff; r-- > 0;) {
            tail += sv(static_cast<Eigen::Index>(r)) * sv(static_cast<Eigen::Index>(r));
            if (tail / total > trunc.discard_tolerance) {
                r_tol = r + 1;
                break;
            }
            r_tol = r;
        }
    } else {
        r_tol = 1;
    }
    std::size_t kept = std::max<std::size_t>(1, std::min(trunc.max_rank, std::max<std::size_t>(r_tol, 1)));
    kept = std::min(kept, full_eff > 0 ? full_eff : full);

    double tail = 0;
    for (std::size_t i = kept; i < full; ++i)
        tail += sv(static_cast<Eigen::Index>(i)) * sv(static_cast<Eigen::Index>(i));

    TruncatedSvd out;
    out.discarded_weight = total > 0 ? tail / total : 0.0;
    out.s.resize(kept);
    for (std::size_t i = 0; i < kept; ++i) out.s[i] = sv(static_cast<Eigen::Index>(i));

    out.u = DenseTensor({static_cast<std::size_t>(rows), kept});
    EigenMapRM(out.u.data(), rows, static_cast<Eigen::Index>(kept)) =
        uu.leftCols(static_cast<Eigen::Index>(kept));
    out.v = DenseTensor({kept, static_cast<std::size_t>(cols)});
    EigenMapRM(out.v.data(), static_cast<Eigen::Index>(kept), cols) =
        vv.leftCols(static_cast<Eigen::Index>(kept)).adjoint();
    return out;
}

} // namespace waveqed
