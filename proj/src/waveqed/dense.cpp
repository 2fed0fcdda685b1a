#include "waveqed/dense.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "waveqed/errors.hpp"

namespace waveqed {

namespace {

using Mat = Eigen::Matrix<cx, Eigen::Dynamic, Eigen::Dynamic>;
using Vec = Eigen::Matrix<cx, Eigen::Dynamic, 1>;

constexpr std::size_t kMaxDim = std::size_t(1) << 24;
constexpr std::size_t kMaxEigDim = std::size_t(1) << 14;

std::size_t checked_total_dim(const std::vector<std::size_t>& dims) {
    std::size_t n = 1;
    for (auto d : dims) {
        if (d == 0) throw DimensionError("dense state: zero local dimension");
        if (n > kMaxDim / d)
            throw ResourceError("dense state dimension exceeds 2^24");
        n *= d;
    }
    return n;
}

// Apply a (d1*d2)x(d1*d2) matrix to sites (n, n+1) of amp, in place.
void apply_two_site(std::vector<cx>& amp, const std::vector<std::size_t>& dims, std::size_t n,
                    const DenseTensor& op, std::vector<cx>& scratch) {
    const std::size_t d1 = dims[n], d2 = dims[n + 1], dd = d1 * d2;
    std::size_t left = 1, right = 1;
    for (std::size_t k = 0; k < n; ++k) left *= dims[k];
    for (std::size_t k = n + 2; k < dims.size(); ++k) right *= dims[k];
    scratch.resize(dd);
    for (std::size_t l = 0; l < left; ++l) {
        const std::size_t base = l * dd * right;
        for (std::size_t r = 0; r < right; ++r) {
            for (std::size_t i = 0; i < dd; ++i) {
                cx acc(0, 0);
                const cx* row = op.data() + i * dd;
                for (std::size_t j = 0; j < dd; ++j) {
                    const cx v = amp[base + j * right + r];
                    if (v != cx(0, 0)) acc += row[j] * v;
                }
                scratch[i] = acc;
            }
            for (std::size_t i = 0; i < dd; ++i) amp[base + i * right + r] = scratch[i];
        }
    }
}

void accumulate_local(const std::vector<cx>& in, std::vector<cx>& out,
                      const std::vector<std::size_t>& dims, std::size_t n,
                      const DenseTensor& op) {
    const std::size_t d = dims[n];
    std::size_t left = 1, right = 1;
    for (std::size_t k = 0; k < n; ++k) left *= dims[k];
    for (std::size_t k = n + 1; k < dims.size(); ++k) right *= dims[k];
    for (std::size_t l = 0; l < left; ++l) {
        const std::size_t base = l * d * right;
        for (std::size_t r = 0; r < right; ++r)
            for (std::size_t i = 0; i < d; ++i) {
                const cx* row = op.data() + i * d;
                cx acc(0, 0);
                for (std::size_t j = 0; j < d; ++j) {
                    const cx v = in[base + j * right + r];
                    if (v != cx(0, 0)) acc += row[j] * v;
                }
                out[base + i * right + r] += acc;
            }
    }
}

void accumulate_two_site(const std::vector<cx>& in, std::vector<cx>& out,
                         const std::vector<std::size_t>& dims, std::size_t n,
                         const DenseTensor& op) {
    const std::size_t d1 = dims[n], d2 = dims[n + 1], dd = d1 * d2;
    std::size_t left = 1, right = 1;
    for (std::size_t k = 0; k < n; ++k) left *= dims[k];
    for (std::size_t k = n + 2; k < dims.size(); ++k) right *= dims[k];
    for (std::size_t l = 0; l < left; ++l) {
        const std::size_t base = l * dd * right;
        for (std::size_t r = 0; r < right; ++r)
            for (std::size_t i = 0; i < dd; ++i) {
                const cx* row = op.data() + i * dd;
                cx acc(0, 0);
                for (std::size_t j = 0; j < dd; ++j) {
                    const cx v = in[base + j * right + r];
                    if (v != cx(0, 0)) acc += row[j] * v;
                }
                out[base + i * right + r] += acc;
            }
    }
}

Mat dense_hamiltonian_matrix(const ChainHamiltonian& chain, std::size_t dim) {
    Mat H = Mat::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    std::vector<cx> col(dim), out(dim);
    for (std::size_t c = 0; c < dim; ++c) {
        std::fill(col.begin(), col.end(), cx(0, 0));
        std::fill(out.begin(), out.end(), cx(0, 0));
        col[c] = cx(1, 0);
        dense_apply_chain(chain, col, out);
        for (std::size_t i = 0; i < dim; ++i) H(static_cast<Eigen::Index>(i),
                                               static_cast<Eigen::Index>(c)) = out[i];
    }
    return H;
}

} // namespace

DenseState dense_vacuum(const std::vector<std::size_t>& dims) {
    DenseState st;
    st.dims = dims;
    st.amp.assign(checked_total_dim(dims), cx(0, 0));
    st.amp[0] = cx(1, 0);
    return st;
}

DenseState dense_from_mps(const MPSState& s) {
    DenseState st;
    st.dims = s.local_dims;
    checked_total_dim(st.dims);
    st.amp = mps_to_dense(s);
    return st;
}

cx dense_overlap(const DenseState& a, const DenseState& b) {
    if (a.dims != b.dims) throw DimensionError("dense_overlap: dimension mismatch");
    cx acc(0, 0);
    for (std::size_t i = 0; i < a.amp.size(); ++i) acc += std::conj(a.amp[i]) * b.amp[i];
    return acc;
}

void dense_apply_chain(const ChainHamiltonian& chain, const std::vector<cx>& in,
                       std::vector<cx>& out) {
    const std::size_t dim = checked_total_dim(chain.local_dims);
    if (in.size() != dim || out.size() != dim)
        throw DimensionError("dense_apply_chain: vector length mismatch");
    for (std::size_t n = 0; n < chain.n_sites(); ++n)
        if (chain.site_terms[n].size() != 0)
            accumulate_local(in, out, chain.local_dims, n, chain.site_terms[n]);
    for (std::size_t b = 0; b + 1 < chain.n_sites(); ++b)
        if (chain.bond_terms[b].size() != 0)
            accumulate_two_site(in, out, chain.local_dims, b, chain.bond_terms[b]);
}

double dense_energy(const DenseState& st, const ChainHamiltonian& chain) {
    if (st.dims != chain.local_dims) throw DimensionError("dense_energy: dimension mismatch");
    std::vector<cx> h(st.amp.size(), cx(0, 0));
    dense_apply_chain(chain, st.amp, h);
    cx num(0, 0), den(0, 0);
    for (std::size_t i = 0; i < st.amp.size(); ++i) {
        num += std::conj(st.amp[i]) * h[i];
        den += std::conj(st.amp[i]) * st.amp[i];
    }
    if (std::abs(den) <= 0) throw NumericError("dense_energy: zero-norm state");
    return (num / den).real();
}

void dense_evolve(DenseState& st, const ChainHamiltonian& chain, double t, double dt,
                  DenseEvolveMode mode) {
    if (st.dims != chain.local_dims) throw DimensionError("dense_evolve: dimension mismatch");
    const std::size_t dim = checked_total_dim(st.dims);

    if (mode == DenseEvolveMode::eigen_exact) {
        if (dim > kMaxEigDim)
            throw ResourceError("eigen_exact mode limited to dimension 2^14, got " +
                                std::to_string(dim));
        Mat H = dense_hamiltonian_matrix(chain, dim);
        Eigen::SelfAdjointEigenSolver<Mat> es(H);
        if (es.info() != Eigen::Success) throw NumericError("dense_evolve: eigensolver failed");
        Vec v(static_cast<Eigen::Index>(dim));
        for (std::size_t i = 0; i < dim; ++i) v(static_cast<Eigen::Index>(i)) = st.amp[i];
        Vec w = es.eigenvectors().adjoint() * v;
        for (Eigen::Index l = 0; l < w.size(); ++l)
            w(l) *= std::exp(cx(0, -t * es.eigenvalues()(l)));
        v = es.eigenvectors() * w;
        for (std::size_t i = 0; i < dim; ++i) st.amp[i] = v(static_cast<Eigen::Index>(i));
        return;
    }

    if (!(dt > 0)) throw ArgumentError("dense_evolve: dt must be positive");
    const double raw = t / dt;
    const long long steps = std::llround(raw);
    if (steps < 0 || std::abs(raw - static_cast<double>(steps)) > 1e-9)
        throw ArgumentError("dense_evolve: t must be an integer number of dt steps");

    TrotterPlan plan = make_trotter_plan(chain, dt, EvolveMode::real_time);
    std::vector<cx> scratch;
    for (long long step = 0; step < steps; ++step) {
        for (std::size_t i = 0; i < plan.even_bonds.size(); ++i)
            apply_two_site(st.amp, st.dims, plan.even_bonds[i], plan.even_gates[i], scratch);
        for (std::size_t i = plan.odd_bonds.size(); i-- > 0;)
            apply_two_site(st.amp, st.dims, plan.odd_bonds[i], plan.odd_gates[i], scratch);
        for (std::size_t i = 0; i < plan.even_bonds.size(); ++i)
            apply_two_site(st.amp, st.dims, plan.even_bonds[i], plan.even_gates[i], scratch);
    }
}

double dense_ground_energy(const ChainHamiltonian& chain, std::size_t max_iter, double tol) {
    const std::size_t dim = checked_total_dim(chain.local_dims);
    if (max_iter < 1) throw ArgumentError("dense_ground_energy: max_iter must be >= 1");

    std::vector<Vec> basis;
    Vec v = Vec::Zero(static_cast<Eigen::Index>(dim));
    v(0) = cx(1, 0); // deterministic vacuum start
    std::vector<double> alpha, beta;
    std::vector<cx> win(dim), wout(dim);

    for (std::size_t it = 0; it < max_iter; ++it) {
        basis.push_back(v);
        for (std::size_t i = 0; i < dim; ++i) win[i] = v(static_cast<Eigen::Index>(i));
        std::fill(wout.begin(), wout.end(), cx(0, 0));
        dense_apply_chain(chain, win, wout);
        Vec w(static_cast<Eigen::Index>(dim));
        for (std::size_t i = 0; i < dim; ++i) w(static_cast<Eigen::Index>(i)) = wout[i];

        const double a = (v.adjoint() * w)(0, 0).real();
        alpha.push_back(a);
        w -= a * v;
        if (it > 0) w -= beta.back() * basis[it - 1];
        // full reorthogonalization keeps the basis clean
        for (const auto& b : basis) w -= (b.adjoint() * w)(0, 0) * b;
        const double nb = w.norm();
        if (nb < tol * (std::abs(a) + 1.0)) break;
        beta.push_back(nb);
        v = w / nb;
    }

    const std::size_t m = alpha.size();
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m),
                                              static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
        T(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = alpha[i];
        if (i + 1 < m) {
            T(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i + 1)) = beta[i];
            T(static_cast<Eigen::Index>(i + 1), static_cast<Eigen::Index>(i)) = beta[i];
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    if (es.info() != Eigen::Success)
        throw NumericError("dense_ground_energy: tridiagonal eigensolver failed");
    return es.eigenvalues()(0);
}

} // namespace waveqed
