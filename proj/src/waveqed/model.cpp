#include "waveqed/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "waveqed/errors.hpp"

namespace waveqed {

namespace {

DenseTensor identity_matrix(std::size_t d) {
    DenseTensor m({d, d});
    for (std::size_t i = 0; i < d; ++i) m.at({i, i}) = cx(1, 0);
    return m;
}

DenseTensor kron(const DenseTensor& a, const DenseTensor& b) {
    const std::size_t ra = a.shape()[0], ca = a.shape()[1];
    const std::size_t rb = b.shape()[0], cb = b.shape()[1];
    DenseTensor out({ra * rb, ca * cb});
    for (std::size_t i = 0; i < ra; ++i)
        for (std::size_t j = 0; j < ca; ++j) {
            const cx v = a.at({i, j});
            if (v == cx(0, 0)) continue;
            for (std::size_t k = 0; k < rb; ++k)
                for (std::size_t l = 0; l < cb; ++l)
                    out.at({i * rb + k, j * cb + l}) = v * b.at({k, l});
        }
    return out;
}

void add_into(DenseTensor& dst, const DenseTensor& src, double w) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst.data()[i] += w * src.data()[i];
}

DenseTensor adjoint(const DenseTensor& a) {
    const std::size_t r = a.shape()[0], c = a.shape()[1];
    DenseTensor out({c, r});
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) out.at({j, i}) = std::conj(a.at({i, j}));
    return out;
}

std::size_t scatterer_levels(const ScattererSpec& sc, std::size_t dicke_cap) {
    if (sc.kind == ScattererKind::qubit_group) {
        std::size_t cap = sc.count;
        if (dicke_cap != 0) cap = std::min(cap, dicke_cap);
        return cap + 1;
    }
    return sc.n_osc + 1;
}

void validate_scatterer(const ScattererSpec& sc, long L) {
    const std::string at = " for scatterer at position " + std::to_string(sc.position);
    if (!(sc.delta > 0)) throw ConfigError("delta must be positive" + at);
    if (sc.g < 0) throw ConfigError("g must be non-negative" + at);
    if (sc.kind == ScattererKind::qubit_group && sc.count < 1)
        throw ConfigError("qubit group count must be >= 1" + at);
    if (sc.kind == ScattererKind::oscillator && sc.n_osc < 1)
        throw ConfigError("oscillator truncation must be >= 1" + at);
    if (sc.position < -L || sc.position > L)
        throw ConfigError("position outside the chain" + at);
    if (sc.position == -L || sc.position == L)
        throw ConfigError("scatterer sits on a chain edge" + at);
}

} // namespace

std::size_t SiteLayout::site_index(long x) const {
    const long L = static_cast<long>(half_length);
    if (x < -L || x > L) throw ArgumentError("site_index: coordinate outside the chain");
    return static_cast<std::size_t>(x + L);
}

double dispersion(double k, const ModelSpec& spec) {
    return spec.epsilon - 2.0 * spec.hopping * std::cos(k);
}

LadderOps boson_ladder(std::size_t n_top) {
    const std::size_t d = n_top + 1;
    LadderOps ops{DenseTensor({d, d}), DenseTensor({d, d}), DenseTensor({d, d})};
    for (std::size_t n = 0; n + 1 < d; ++n) {
        const double amp = std::sqrt(static_cast<double>(n + 1));
        ops.raising.at({n + 1, n}) = cx(amp, 0);
        ops.lowering.at({n, n + 1}) = cx(amp, 0);
    }
    for (std::size_t n = 0; n < d; ++n) ops.number.at({n, n}) = cx(static_cast<double>(n), 0);
    return ops;
}

LadderOps dicke_ladder(std::size_t m, std::size_t cap) {
    if (m < 1) throw ArgumentError("dicke_ladder: m must be >= 1");
    if (cap < 1 || cap > m) throw ArgumentError("dicke_ladder: need 1 <= cap <= m");
    const std::size_t d = cap + 1;
    LadderOps ops{DenseTensor({d, d}), DenseTensor({d, d}), DenseTensor({d, d})};
    for (std::size_t n = 0; n + 1 < d; ++n) {
        const double amp = std::sqrt(static_cast<double>(n + 1) *
                                     (1.0 - static_cast<double>(n) / static_cast<double>(m)));
        ops.raising.at({n + 1, n}) = cx(amp, 0);
        ops.lowering.at({n, n + 1}) = cx(amp, 0);
    }
    // diag counts qubit excitations, not ladder quanta of b
    for (std::size_t n = 0; n < d; ++n) ops.number.at({n, n}) = cx(static_cast<double>(n), 0);
    return ops;
}

SiteLayout make_layout(const ModelSpec& spec) {
    if (spec.n_cav < 3 || spec.n_cav % 2 == 0)
        throw ConfigError("n_cav must be odd and >= 3, got " + std::to_string(spec.n_cav));
    if (spec.n_max < 1) throw ConfigError("n_max must be >= 1");
    if (!(spec.hopping > 0)) throw ConfigError("hopping must be positive");
    const long L = static_cast<long>(spec.n_cav / 2);

    SiteLayout layout;
    layout.n_sites = spec.n_cav;
    layout.half_length = static_cast<std::size_t>(L);
    layout.photon_dim = spec.n_max + 1;
    layout.scatterer_dim.assign(spec.n_cav, 1);
    layout.scatterer_index.assign(spec.n_cav, -1);

    std::set<long> seen;
    for (std::size_t i = 0; i < spec.scatterers.size(); ++i) {
        const auto& sc = spec.scatterers[i];
        validate_scatterer(sc, L);
        if (!seen.insert(sc.position).second)
            throw ConfigError("two scatterers share position " + std::to_string(sc.position) +
                              " (use a qubit group count instead)");
        const std::size_t n = layout.site_index(sc.position);
        layout.scatterer_dim[n] = scatterer_levels(sc, spec.dicke_cap);
        layout.scatterer_index[n] = static_cast<int>(i);
    }

    layout.local_dims.resize(spec.n_cav);
    for (std::size_t n = 0; n < spec.n_cav; ++n) {
        layout.local_dims[n] = layout.photon_dim * layout.scatterer_dim[n];
        if (layout.local_dims[n] > spec.local_dim_ceiling)
            throw ConfigError("local dimension " + std::to_string(layout.local_dims[n]) +
                              " at site " + std::to_string(layout.coordinate(n)) +
                              " exceeds the ceiling " + std::to_string(spec.local_dim_ceiling));
    }
    return layout;
}

namespace {

DenseTensor embedded_photon_op(const SiteLayout& layout, std::size_t site,
                               const DenseTensor& photon_op) {
    if (site >= layout.n_sites) throw ArgumentError("site out of range");
    const std::size_t s = layout.scatterer_dim[site];
    if (s == 1) return photon_op;
    return kron(photon_op, identity_matrix(s));
}

} // namespace

DenseTensor photon_lowering_op(const SiteLayout& layout, std::size_t site) {
    return embedded_photon_op(layout, site, boson_ladder(layout.photon_dim - 1).lowering);
}

DenseTensor photon_raising_op(const SiteLayout& layout, std::size_t site) {
    return embedded_photon_op(layout, site, boson_ladder(layout.photon_dim - 1).raising);
}

DenseTensor photon_number_op(const SiteLayout& layout, std::size_t site) {
    return embedded_photon_op(layout, site, boson_ladder(layout.photon_dim - 1).number);
}

DenseTensor scatterer_number_op(const SiteLayout& layout, const ModelSpec& spec,
                                std::size_t site) {
    if (site >= layout.n_sites) throw ArgumentError("site out of range");
    const std::size_t d = layout.local_dims[site];
    if (layout.scatterer_index[site] < 0) return DenseTensor({d, d});
    const auto& sc = spec.scatterers[static_cast<std::size_t>(layout.scatterer_index[site])];
    const std::size_t levels = layout.scatterer_dim[site];
    LadderOps lad = (sc.kind == ScattererKind::qubit_group)
                        ? dicke_ladder(sc.count, levels - 1)
                        : boson_ladder(levels - 1);
    return kron(identity_matrix(layout.photon_dim), lad.number);
}

DenseTensor scatterer_lowering_op(const SiteLayout& layout, const ModelSpec& spec,
                                  std::size_t site) {
    if (site >= layout.n_sites) throw ArgumentError("site out of range");
    const std::size_t d = layout.local_dims[site];
    if (layout.scatterer_index[site] < 0) return DenseTensor({d, d});
    const auto& sc = spec.scatterers[static_cast<std::size_t>(layout.scatterer_index[site])];
    const std::size_t levels = layout.scatterer_dim[site];
    LadderOps lad = (sc.kind == ScattererKind::qubit_group)
                        ? dicke_ladder(sc.count, levels - 1)
                        : boson_ladder(levels - 1);
    return kron(identity_matrix(layout.photon_dim), lad.lowering);
}

DenseTensor scatterer_raising_op(const SiteLayout& layout, const ModelSpec& spec,
                                 std::size_t site) {
    if (site >= layout.n_sites) throw ArgumentError("site out of range");
    const std::size_t d = layout.local_dims[site];
    if (layout.scatterer_index[site] < 0) return DenseTensor({d, d});
    const auto& sc = spec.scatterers[static_cast<std::size_t>(layout.scatterer_index[site])];
    const std::size_t levels = layout.scatterer_dim[site];
    LadderOps lad = (sc.kind == ScattererKind::qubit_group)
                        ? dicke_ladder(sc.count, levels - 1)
                        : boson_ladder(levels - 1);
    return kron(identity_matrix(layout.photon_dim), lad.raising);
}

ChainHamiltonian build_terms(const ModelSpec& spec) {
    const SiteLayout layout = make_layout(spec);
    const std::size_t N = layout.n_sites;
    const std::size_t p = layout.photon_dim;

    LadderOps ph = boson_ladder(p - 1);
    DenseTensor ph_x = ph.raising; // a + a^dag
    add_into(ph_x, ph.lowering, 1.0);

    ChainHamiltonian chain;
    chain.local_dims = layout.local_dims;

    for (std::size_t n = 0; n < N; ++n) {
        const std::size_t d = layout.local_dims[n];
        DenseTensor h({d, d});
        if (layout.scatterer_index[n] < 0) {
            add_into(h, ph.number, spec.epsilon);
        } else {
            const auto& sc = spec.scatterers[static_cast<std::size_t>(layout.scatterer_index[n])];
            const std::size_t levels = layout.scatterer_dim[n];
            LadderOps lad = (sc.kind == ScattererKind::qubit_group)
                                ? dicke_ladder(sc.count, levels - 1)
                                : boson_ladder(levels - 1);
            const double g_eff =
                (sc.kind == ScattererKind::qubit_group)
                    ? sc.g * std::sqrt(static_cast<double>(sc.count))
                    : sc.g;
            const DenseTensor id_s = identity_matrix(levels);

            add_into(h, kron(ph.number, id_s), spec.epsilon);
            add_into(h, kron(identity_matrix(p), lad.number), sc.delta);
            if (spec.coupling_mode == CouplingMode::full) {
                DenseTensor sc_x = lad.raising;
                add_into(sc_x, lad.lowering, 1.0);
                add_into(h, kron(ph_x, sc_x), g_eff);
            } else {
                add_into(h, kron(ph.lowering, lad.raising), g_eff);
                add_into(h, kron(ph.raising, lad.lowering), g_eff);
            }
        }
        chain.site_terms.push_back(std::move(h));
    }

    for (std::size_t b = 0; b + 1 < N; ++b) {
        DenseTensor al = photon_lowering_op(layout, b);
        DenseTensor ar = photon_lowering_op(layout, b + 1);
        DenseTensor hop = kron(adjoint(al), ar);
        add_into(hop, kron(al, adjoint(ar)), 1.0);
        hop.scale(cx(-spec.hopping, 0));
        chain.bond_terms.push_back(std::move(hop));
    }
    return chain;
}

} // namespace waveqed
