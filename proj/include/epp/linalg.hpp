#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "basis.hpp"
#include "geometry.hpp"

namespace epp {

// tolerance ladder shared across the library
constexpr double kHermTol = 1e-12;       // hermiticity check
constexpr double kBranchCut = 1e-10;     // rho_AB branch weight cutoff
constexpr double kClusterTol = 1e-9;     // eigenvalue degeneracy resolution
constexpr double kAnnihilate = 1e-8;     // projected-branch annihilation norm
constexpr double kPurityTol = 1e-9;      // pure iff Tr(rho^2) > 1 - kPurityTol
constexpr double kEntropyEig = 1e-12;    // eigenvalues below this add no entropy

struct EigResult {
    RVec values;   // ascending
    Mat vectors;   // orthonormal columns
};

inline bool is_hermitian(const Mat& m, double tol = kHermTol) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

inline EigResult hermitian_eig(const Mat& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("hermitian_eig: not square");
    if (!is_hermitian(m)) throw std::invalid_argument("hermitian_eig: matrix is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Mat> es(m);
    if (es.info() != Eigen::Success) throw std::runtime_error("hermitian_eig: solver failed");
    return {es.eigenvalues(), es.eigenvectors()};
}

// phase convention: multiply v so its largest-magnitude component (first such
// index) becomes real positive
inline void fix_phase(Eigen::Ref<Vec> v) {
    Eigen::Index imax = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        double a = std::abs(v[i]);
        if (a > best) { best = a; imax = i; }
    }
    if (best <= 0.0) return;
    v *= std::abs(v[imax]) / v[imax];
}

// Deterministic orthonormal basis of a degenerate eigenspace, independent of the
// solver's arbitrary choice: modified Gram-Schmidt over the columns of the
// cluster projector V V^dag in natural order.  Recovers sparse structured bases
// when they exist (e.g. the antisymmetric-pair basis of a supersinglet rho_AB).
inline Mat canonical_cluster_basis(const Mat& v) {
    const Eigen::Index r = v.cols();
    if (r == 1) {
        Mat out = v;
        fix_phase(out.col(0));
        return out;
    }
    Mat proj = v * v.adjoint();
    Mat out(v.rows(), r);
    Eigen::Index got = 0;
    for (Eigen::Index c = 0; c < proj.cols() && got < r; ++c) {
        Vec w = proj.col(c);
        for (Eigen::Index k = 0; k < got; ++k) w -= out.col(k) * (out.col(k).dot(w));
        double n = w.norm();
        if (n > 1e-6) out.col(got++) = w / n;
    }
    // fallback: top up from the original basis (still deterministic)
    for (Eigen::Index c = 0; c < r && got < r; ++c) {
        Vec w = v.col(c);
        for (Eigen::Index k = 0; k < got; ++k) w -= out.col(k) * (out.col(k).dot(w));
        double n = w.norm();
        if (n > 1e-6) out.col(got++) = w / n;
    }
    if (got < r) throw std::runtime_error("canonical_cluster_basis: rank lost");
    for (Eigen::Index k = 0; k < r; ++k) fix_phase(out.col(k));
    return out;
}

// group consecutive near-equal values (resolution kClusterTol) and canonicalize
// each cluster's vectors in place
inline void canonicalize_clusters(RVec& values, Mat& vectors) {
    Eigen::Index i = 0;
    while (i < values.size()) {
        Eigen::Index j = i;
        while (j + 1 < values.size() && std::abs(values[j + 1] - values[i]) < kClusterTol) ++j;
        vectors.middleCols(i, j - i + 1) =
            canonical_cluster_basis(vectors.middleCols(i, j - i + 1));
        i = j + 1;
    }
}

// eigendecomposition of a density-like Hermitian matrix: eigenvalues descending,
// entries below `cut` (or below rel_floor * largest eigenvalue, whichever is
// bigger) dropped, degenerate clusters canonicalized.  The relative floor keeps
// solver roundoff on exactly low-rank inputs out of the spectrum.
inline EigResult spectral_desc(const Mat& rho, double cut, double rel_floor = 0.0) {
    EigResult e = hermitian_eig(rho);
    Eigen::Index dim = e.values.size();
    double lmax = dim > 0 ? std::max(0.0, e.values[dim - 1]) : 0.0;
    double eff = std::max(cut, rel_floor * lmax);
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = dim - 1; i >= 0; --i)
        if (e.values[i] >= eff) keep.push_back(i);
    RVec vals(keep.size());
    Mat vecs(rho.rows(), keep.size());
    for (std::size_t k = 0; k < keep.size(); ++k) {
        vals[k] = e.values[keep[k]];
        vecs.col(k) = e.vectors.col(keep[k]);
    }
    canonicalize_clusters(vals, vecs);
    return {vals, vecs};
}

// ---- bipartition maps: global basis index -> (local index in L, local index in R) ----
//
// Local index of a region lists the region's sites in their given order with
// site q (0-based position in the list) at digit place local_dim^q.
// For the two-flip sector, local spaces are restricted to <= 2 flips and
// enumerated [vacuum][single flips, site order][pairs (q1<q2), lexicographic].

inline std::size_t restricted_local_dim(int n_sites) {
    return 1 + static_cast<std::size_t>(n_sites) +
           static_cast<std::size_t>(n_sites) * (n_sites - 1) / 2;
}

// restricted local index of a set of flipped positions (0-based positions
// within the region's site list, at most two of them)
inline std::size_t restricted_local_index(int n, int p1, int p2) {
    // p1 = p2 = -1: vacuum;  p2 = -1: single flip at p1;  else pair p1 < p2
    if (p1 < 0) return 0;
    if (p2 < 0) return 1 + p1;
    return 1 + n + static_cast<std::size_t>(p1) * n - p1 * (p1 + 1) / 2 + (p2 - p1 - 1);
}

struct BipartitionMap {
    std::size_t dim_l = 0, dim_r = 0;
    // for each global index: (local L, local R); the map is injective, and for
    // full/qudit bases it is a bijection onto the product space
    std::function<std::pair<std::size_t, std::size_t>(std::size_t)> split;
};

inline BipartitionMap bipartition(const BasisKind& basis, const Region& left,
                                  const Region& right) {
    left.check_against(basis.n_sites);
    right.check_against(basis.n_sites);
    if (!disjoint(left, right)) throw std::invalid_argument("bipartition: regions overlap");
    if (left.size() + right.size() != basis.n_sites)
        throw std::invalid_argument("bipartition: regions must cover all sites");
    if (left.sites.empty() || right.sites.empty())
        throw std::invalid_argument("bipartition: empty region");

    BipartitionMap map;
    if (basis.type == BasisType::full || basis.type == BasisType::qudit) {
        const int d = basis.local_dim;
        const int n = basis.n_sites;
        std::size_t dl = 1, dr = 1;
        for (int i = 0; i < left.size(); ++i) dl *= d;
        for (int i = 0; i < right.size(); ++i) dr *= d;
        map.dim_l = dl;
        map.dim_r = dr;
        const std::vector<int> ls = left.sites, rs = right.sites;
        const BasisType type = basis.type;
        map.split = [ls, rs, n, d, type](std::size_t g) {
            std::size_t a = 0, b = 0, place = 1;
            for (int s : ls) {
                int dig = (type == BasisType::full) ? site_bit(g, s) : qudit_digit(g, s, n, d);
                a += place * dig;
                place *= d;
            }
            place = 1;
            for (int s : rs) {
                int dig = (type == BasisType::full) ? site_bit(g, s) : qudit_digit(g, s, n, d);
                b += place * dig;
                place *= d;
            }
            return std::pair<std::size_t, std::size_t>{a, b};
        };
        return map;
    }

    // two-flip sector: restricted local bases
    const int n = basis.n_sites;
    RingGeometry g(n);
    map.dim_l = restricted_local_dim(left.size());
    map.dim_r = restricted_local_dim(right.size());
    // site -> (side, position): side 0 = left, 1 = right
    std::vector<std::pair<int, int>> where(n + 1, {-1, -1});
    for (int q = 0; q < left.size(); ++q) where[left.sites[q]] = {0, q};
    for (int q = 0; q < right.size(); ++q) where[right.sites[q]] = {1, q};
    const int nl = left.size(), nr = right.size();
    map.split = [g, where, nl, nr](std::size_t idx) {
        auto [j, k] = two_flip_pair(g, static_cast<int>(idx));
        auto [sj, pj] = where[j];
        auto [sk, pk] = where[k];
        int lp1 = -1, lp2 = -1, rp1 = -1, rp2 = -1;
        auto put = [](int& a, int& b, int p) {
            if (a < 0) a = p;
            else if (p < a) { b = a; a = p; }
            else b = p;
        };
        if (sj == 0) put(lp1, lp2, pj); else put(rp1, rp2, pj);
        if (sk == 0) put(lp1, lp2, pk); else put(rp1, rp2, pk);
        return std::pair<std::size_t, std::size_t>{restricted_local_index(nl, lp1, lp2),
                                                   restricted_local_index(nr, rp1, rp2)};
    };
    return map;
}

inline Region complement_region(const BasisKind& basis, const Region& keep) {
    std::vector<int> rest;
    for (int s = 1; s <= basis.n_sites; ++s)
        if (!keep.contains(s)) rest.push_back(s);
    return Region(rest);
}

// state amplitudes arranged as a dim_l x dim_r matrix, M(a,b) = amplitude of
// (local a, local b)
inline Mat partition_matrix(const PureState& state, const Region& left, const Region& right) {
    BipartitionMap map = bipartition(state.basis, left, right);
    Mat m = Mat::Zero(map.dim_l, map.dim_r);
    for (Eigen::Index gidx = 0; gidx < state.amplitudes.size(); ++gidx) {
        cd a = state.amplitudes[gidx];
        if (a == cd{0.0, 0.0}) continue;
        auto [l, r] = map.split(static_cast<std::size_t>(gidx));
        m(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(r)) += a;
    }
    return m;
}

// ---- reduced density matrix ----

struct DensityMatrix {
    Mat rho;  // trace 1, positive semidefinite

    void validate() const {
        if (!is_hermitian(rho)) throw std::invalid_argument("DensityMatrix: not Hermitian");
        if (std::abs(rho.trace().real() - 1.0) > 1e-10 || std::abs(rho.trace().imag()) > 1e-10)
            throw std::invalid_argument("DensityMatrix: trace != 1");
        EigResult e = hermitian_eig(rho);
        if (e.values.minCoeff() < -1e-10)
            throw std::invalid_argument("DensityMatrix: negative eigenvalue");
    }
};

// partial trace onto `keep` (all remaining sites traced out).  Local ordering:
// keep.sites in the given order (see bipartition above).
inline DensityMatrix reduced_density(const PureState& state, const Region& keep) {
    if (keep.sites.empty()) throw std::invalid_argument("reduced_density: empty keep region");
    Region rest = complement_region(state.basis, keep);
    if (rest.sites.empty()) {
        // keeping everything: rho = |psi><psi|
        return {state.amplitudes * state.amplitudes.adjoint()};
    }
    Mat m = partition_matrix(state, keep, rest);
    return {m * m.adjoint()};
}

// ---- von Neumann entropy (bits) ----

inline double entropy_of_weights(const RVec& w) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        double p = w[i];
        if (p < -1e-10) throw std::domain_error("entropy: eigenvalue below -1e-10");
        if (p < kEntropyEig) continue;
        s -= p * std::log2(p);
    }
    return s;
}

inline double von_neumann_entropy(const DensityMatrix& dm) {
    EigResult e = hermitian_eig(dm.rho);
    return entropy_of_weights(e.values);
}

inline double purity(const Mat& rho) { return (rho * rho).trace().real(); }

// ---- Schmidt decomposition ----

struct SchmidtDecomposition {
    RVec coefficients;  // nonnegative, descending
    Mat left;           // orthonormal columns, one per coefficient
    Mat right;

    int rank(double cut = kEntropyEig) const {
        int r = 0;
        for (Eigen::Index i = 0; i < coefficients.size(); ++i)
            if (coefficients[i] * coefficients[i] > cut) ++r;
        return r;
    }
};

// phase that fix_phase would multiply v by (unit modulus)
inline cd phase_fix_factor(const Vec& v) {
    Eigen::Index imax = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        double a = std::abs(v[i]);
        if (a > best) { best = a; imax = i; }
    }
    if (best <= 0.0) return cd{1.0, 0.0};
    return std::abs(v[imax]) / v[imax];
}

// core routine on an amplitude matrix M(a,b): psi = sum_ab M(a,b) |a>|b>.
// Eigendecomposition of the smaller reduced density; degenerate clusters
// canonicalized; phases fixed so the largest component of each left vector is
// real positive (right vectors absorb the conjugate phase, preserving the sum).
inline SchmidtDecomposition schmidt_of_matrix(const Mat& m, double coeff_cut = 1e-12) {
    const bool left_small = m.rows() <= m.cols();
    Mat rho = left_small ? Mat(m * m.adjoint()) : Mat(m.adjoint() * m);
    EigResult e = spectral_desc(rho, coeff_cut * coeff_cut, 1e-13);
    const Eigen::Index r = e.values.size();
    SchmidtDecomposition out;
    out.coefficients = RVec(r);
    out.left = Mat(m.rows(), r);
    out.right = Mat(m.cols(), r);
    for (Eigen::Index i = 0; i < r; ++i) {
        double w = std::sqrt(std::max(0.0, e.values[i]));
        out.coefficients[i] = w;
        if (left_small) {
            out.left.col(i) = e.vectors.col(i);
            out.right.col(i) = (m.transpose() * e.vectors.col(i).conjugate()) / w;
        } else {
            // psi = sum omega l r (componentwise, no conjugation), so the right
            // vectors are the conjugated eigenvectors of M^dag M
            out.right.col(i) = e.vectors.col(i).conjugate();
            out.left.col(i) = (m * e.vectors.col(i)) / w;
        }
        cd ph = phase_fix_factor(out.left.col(i));
        out.left.col(i) *= ph;
        out.right.col(i) *= std::conj(ph);
    }
    return out;
}

inline SchmidtDecomposition schmidt(const PureState& state, const Region& left,
                                    const Region& right) {
    return schmidt_of_matrix(partition_matrix(state, left, right));
}

}  // namespace epp
