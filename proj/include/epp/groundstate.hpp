#pragma once

#include <Eigen/Dense>
#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "basis.hpp"
#include "geometry.hpp"
#include "linalg.hpp"

namespace epp {

struct XYParams {
    int n_sites;
    double gamma;
    double h;
};

// H = -sum_i [(1-gamma) sx_i sx_{i+1} + (1+gamma) sy_i sy_{i+1}] - 2h sum_i sz_i
// on the periodic ring; in raising/lowering form the bond term is
// -2(s+ s- + s- s+) + 2 gamma (s+ s+ + s- s-).  N=2 keeps both bond terms of
// the literal periodic sum (the single bond counted twice).
inline Mat build_hamiltonian(const XYParams& p) {
    if (p.n_sites < 2) throw std::invalid_argument("build_hamiltonian: need N >= 2");
    if (p.n_sites > 14) throw std::invalid_argument("build_hamiltonian: N > 14 guard");
    const int n = p.n_sites;
    const std::size_t dim = std::size_t{1} << n;
    RMat ham = RMat::Zero(dim, dim);
    for (std::size_t c = 0; c < dim; ++c) {
        const int ups = std::popcount(c);
        ham(c, c) += -2.0 * p.h * (2 * ups - n);
        for (int i = 1; i <= n; ++i) {
            const int j = (i % n) + 1;
            const std::size_t mask = (std::size_t{1} << (i - 1)) | (std::size_t{1} << (j - 1));
            const std::size_t flipped = c ^ mask;
            if (site_bit(c, i) != site_bit(c, j))
                ham(flipped, c) += -2.0;          // hopping
            else
                ham(flipped, c) += 2.0 * p.gamma; // pair creation / annihilation
        }
    }
    return ham.cast<cd>();
}

inline double config_parity(std::size_t config) {
    return (std::popcount(config) & 1) ? -1.0 : 1.0;
}

// <P_z> with the flip-count convention: sum |amp|^2 (-1)^(number of up spins)
inline double parity_expectation(const PureState& state) {
    if (state.basis.type != BasisType::full)
        throw std::invalid_argument("parity_expectation: full-basis state required");
    double s = 0.0;
    for (Eigen::Index c = 0; c < state.amplitudes.size(); ++c)
        s += std::norm(state.amplitudes[c]) * config_parity(static_cast<std::size_t>(c));
    return s;
}

struct GroundStateReport {
    double energy;
    PureState state;  // first vector of the canonicalized ground cluster
    int degeneracy;
    double parity_expectation;
    Mat cluster;      // all ground-cluster vectors, deterministic basis
};

inline GroundStateReport ground_state(const Mat& ham) {
    EigResult e = hermitian_eig(ham);
    int n = 0;
    while ((std::size_t{1} << n) < static_cast<std::size_t>(ham.rows())) ++n;
    if ((std::size_t{1} << n) != static_cast<std::size_t>(ham.rows()))
        throw std::invalid_argument("ground_state: dimension is not 2^N");
    Eigen::Index d = 1;
    while (d < e.values.size() && e.values[d] - e.values[0] < kClusterTol) ++d;
    Mat cluster = canonical_cluster_basis(e.vectors.leftCols(d));
    PureState st(BasisKind::full(n), cluster.col(0));
    double par = parity_expectation(st);
    return {e.values[0], std::move(st), static_cast<int>(d), par, std::move(cluster)};
}

struct ParityState {
    double parity;  // +1 or -1
    PureState state;
};

// Split a (possibly degenerate) ground cluster into P_z eigenstates: project the
// cluster vectors onto each parity sector and Gram-Schmidt in natural order.
// Deterministic given a deterministic cluster basis; +1 block first.
inline std::vector<ParityState> parity_resolve(const Mat& cluster, int n_sites) {
    const std::size_t dim = std::size_t{1} << n_sites;
    if (static_cast<std::size_t>(cluster.rows()) != dim)
        throw std::invalid_argument("parity_resolve: dimension mismatch");
    std::vector<ParityState> out;
    for (double target : {1.0, -1.0}) {
        Mat kept(cluster.rows(), cluster.cols());
        Eigen::Index got = 0;
        for (Eigen::Index c = 0; c < cluster.cols(); ++c) {
            Vec w = cluster.col(c);
            for (std::size_t r = 0; r < dim; ++r)
                if (config_parity(r) != target) w[r] = cd{0.0, 0.0};
            for (Eigen::Index k = 0; k < got; ++k) w -= kept.col(k) * (kept.col(k).dot(w));
            double nw = w.norm();
            if (nw > 1e-6) kept.col(got++) = w / nw;
        }
        for (Eigen::Index k = 0; k < got; ++k) {
            Vec v = kept.col(k);
            fix_phase(v);
            out.push_back({target, PureState(BasisKind::full(n_sites), std::move(v))});
        }
    }
    if (static_cast<Eigen::Index>(out.size()) != cluster.cols())
        throw std::runtime_error("parity_resolve: cluster is not parity-invariant");
    return out;
}

// ---- magnon sectors of the isotropic (gamma = 0) model with field ----

struct MomentumPair {
    double p1, p2;

    MomentumPair(double a, double b) : p1(a), p2(b) {
        if (a == b) throw std::invalid_argument("MomentumPair: coincident momenta");
        if (std::abs(a) >= std::numbers::pi || std::abs(b) >= std::numbers::pi)
            throw std::invalid_argument("MomentumPair: momenta must lie in (-pi, pi)");
    }
};

// Determinant ansatz on ordered pairs x_j < x_k (1-based sites):
//   amp(x_j, x_k) = det [ e^{i p1 x_j}  e^{i p2 x_j} ; e^{i p1 x_k}  e^{i p2 x_k} ]
// normalized by a real scale only, so state(p1,p2) = -state(p2,p1) entrywise.
inline PureState two_flip_wavefunction(const RingGeometry& g, const MomentumPair& mp) {
    const int n = g.n_sites;
    Vec amps(static_cast<Eigen::Index>(n) * (n - 1) / 2);
    for (int j = 1; j <= n; ++j)
        for (int k = j + 1; k <= n; ++k) {
            cd e1j = std::exp(cd{0.0, mp.p1 * j}), e2j = std::exp(cd{0.0, mp.p2 * j});
            cd e1k = std::exp(cd{0.0, mp.p1 * k}), e2k = std::exp(cd{0.0, mp.p2 * k});
            amps[two_flip_index(g, j, k)] = e1j * e2k - e2j * e1k;
        }
    double norm = amps.norm();
    if (norm < 1e-9)
        throw std::invalid_argument("two_flip_wavefunction: determinant state vanishes");
    return PureState(BasisKind::two_flip(n), amps / norm);
}

// kinetic part of the m=2 sector: hard-core hopping -2 per allowed move
inline RMat two_flip_sector_xx(const RingGeometry& g) {
    const int n = g.n_sites;
    const Eigen::Index dim = static_cast<Eigen::Index>(n) * (n - 1) / 2;
    RMat ham = RMat::Zero(dim, dim);
    for (int j = 1; j <= n; ++j)
        for (int k = j + 1; k <= n; ++k) {
            const int idx = two_flip_index(g, j, k);
            for (int from : {j, k}) {
                const int other = (from == j) ? k : j;
                for (int step : {1, -1}) {
                    const int to = g.neighbor(from, step);
                    if (to == other) continue;  // hard-core exclusion
                    const int a = std::min(to, other), b = std::max(to, other);
                    ham(two_flip_index(g, a, b), idx) += -2.0;
                }
            }
        }
    return ham;
}

struct SectorGround {
    double energy;   // includes the field term -2h(2m - N)
    Vec amplitudes;  // over the sector basis: dim 1 (m=0), N (m=1), N(N-1)/2 (m=2)
};

inline SectorGround magnon_sector_ground(const RingGeometry& g, double h, int m) {
    const int n = g.n_sites;
    const double field = -2.0 * h * (2 * m - n);
    if (m == 0) return {field, Vec::Ones(1)};
    RMat kin;
    if (m == 1) {
        kin = RMat::Zero(n, n);
        for (int s = 1; s <= n; ++s)
            for (int step : {1, -1}) kin(g.neighbor(s, step) - 1, s - 1) += -2.0;
    } else if (m == 2) {
        kin = two_flip_sector_xx(g);
    } else {
        throw std::invalid_argument("magnon_sector_ground: m must be 0, 1 or 2");
    }
    EigResult e = hermitian_eig(kin.cast<cd>());
    Eigen::Index d = 1;
    while (d < e.values.size() && e.values[d] - e.values[0] < kClusterTol) ++d;
    Mat cluster = canonical_cluster_basis(e.vectors.leftCols(d));
    return {e.values[0] + field, cluster.col(0)};
}

inline PureState two_flip_ground_state(const RingGeometry& g) {
    return PureState(BasisKind::two_flip(g.n_sites), magnon_sector_ground(g, 0.0, 2).amplitudes);
}

struct FieldWindow {
    double lo, hi;

    bool contains(double h) const { return h > lo && h < hi; }
    double midpoint() const { return 0.5 * (lo + hi); }
};

// h range where the two-flip sector holds the global ground state.  The binding
// competitors are the adjacent sectors: m=1 fixes the lower endpoint, m=3 the
// upper one (sector kinetic minima: -4, -8cos(pi/N), -4-8cos(2pi/N)).
inline FieldWindow m2_window(const RingGeometry& g) {
    const int n = g.n_sites;
    const double pi = std::numbers::pi;
    const double ekin1 = -4.0;
    const double ekin2 = -8.0 * std::cos(pi / n);
    const double ekin3 = -4.0 - 8.0 * std::cos(2.0 * pi / n);
    return {(ekin2 - ekin1) / 4.0, (ekin3 - ekin2) / 4.0};
}

}  // namespace epp
