#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "basis.hpp"
#include "geometry.hpp"
#include "linalg.hpp"

namespace epp {

// Local projector stored by an orthonormal spanning set.  kept_configs is set
// for projectors diagonal in the configuration basis (block / parity families):
// the sorted list of selected local configuration indices.
struct Projector {
    Region region;
    int site_dim;  // local dimension per site
    Mat span;      // orthonormal columns over the region's local space
    std::optional<std::vector<std::size_t>> kept_configs;

    int rank() const { return static_cast<int>(span.cols()); }

    void validate(double tol = 1e-10) const {
        if (span.cols() < 1) throw std::invalid_argument("Projector: rank must be >= 1");
        Mat g = span.adjoint() * span;
        if ((g - Mat::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff() > tol)
            throw std::invalid_argument("Projector: spanning set not orthonormal");
    }
};

inline std::size_t int_pow(int base, int exp) {
    std::size_t out = 1;
    for (int i = 0; i < exp; ++i) out *= static_cast<std::size_t>(base);
    return out;
}

inline Projector config_projector(const Region& region, int site_dim,
                                  std::vector<std::size_t> kept) {
    if (region.sites.empty()) throw std::invalid_argument("config_projector: empty region");
    if (kept.empty()) throw std::invalid_argument("config_projector: empty configuration set");
    std::sort(kept.begin(), kept.end());
    kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
    const std::size_t dim = int_pow(site_dim, region.size());
    Mat span = Mat::Zero(dim, kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i) {
        if (kept[i] >= dim) throw std::invalid_argument("config_projector: config out of range");
        span(kept[i], i) = cd{1.0, 0.0};
    }
    return {region, site_dim, std::move(span), std::move(kept)};
}

// "exactly one flip somewhere in the region": rank = |region|
inline Projector block_flip_projector(const Region& region, int n_sites) {
    region.check_against(n_sites);
    std::vector<std::size_t> kept;
    for (int q = 0; q < region.size(); ++q) kept.push_back(std::size_t{1} << q);
    return config_projector(region, 2, std::move(kept));
}

enum class Parity { even, odd };

inline Projector parity_projector(const Region& region, Parity parity) {
    const std::size_t dim = std::size_t{1} << region.size();
    const int want = (parity == Parity::odd) ? 1 : 0;
    std::vector<std::size_t> kept;
    for (std::size_t c = 0; c < dim; ++c)
        if ((std::popcount(c) & 1) == want) kept.push_back(c);
    return config_projector(region, 2, std::move(kept));
}

struct ExtractionOutcome {
    double probability = 0.0;
    bool impossible = false;  // probability at/below 1e-12: branch never occurs
    bool is_pure = false;
    double purity = 0.0;      // Tr(rho_AB^2) of the normalized projected state
    std::optional<double> entropy;           // bits, present when pure
    double epp = 0.0;                        // entropy * probability when pure
    std::optional<PureState> post_state_AB;  // present when pure and representable
};

namespace detail {

// entropy of the A-side reduced density of a joint vector in a + dim_a*b layout
inline double joint_entropy(const Vec& phi, Eigen::Index dim_a, Eigen::Index dim_b) {
    Eigen::Map<const Mat> m(phi.data(), dim_a, dim_b);
    Mat rho = dim_a <= dim_b ? Mat(m * m.adjoint()) : Mat(m.adjoint() * m);
    return entropy_of_weights(hermitian_eig(rho).values);
}

// joint (a + dim_a*b) layout -> PureState over the declared AB local basis
inline PureState make_ab_state(const Vec& joint, int n_a, int n_b, int d, BasisType type) {
    const int n = n_a + n_b;
    if (type == BasisType::full) return PureState(BasisKind::full(n), joint);
    const std::size_t dim_a = int_pow(d, n_a);
    Vec out = Vec::Zero(joint.size());
    for (Eigen::Index j = 0; j < joint.size(); ++j) {
        std::size_t a = static_cast<std::size_t>(j) % dim_a;
        std::size_t b = static_cast<std::size_t>(j) / dim_a;
        std::size_t big = 0;  // qudit order: first listed site most significant
        for (int pos = 0; pos < n; ++pos) {
            std::size_t dig = (pos < n_a) ? (a / int_pow(d, pos)) % d
                                          : (b / int_pow(d, pos - n_a)) % d;
            big = big * d + dig;
        }
        out[big] = joint[j];
    }
    return PureState(BasisKind::qudit(n, d), std::move(out));
}

// dominant eigenvector and purity of rho = M M^dag, worked on the smaller side
inline std::pair<double, Vec> purity_and_top(const Mat& m) {
    const bool left_small = m.rows() <= m.cols();
    Mat rho = left_small ? Mat(m * m.adjoint()) : Mat(m.adjoint() * m);
    double pur = rho.cwiseAbs2().sum();  // Tr(rho^2), rho Hermitian
    EigResult e = spectral_desc(rho, kBranchCut);
    Vec top;
    if (left_small) {
        top = e.vectors.col(0);
    } else {
        top = m * e.vectors.col(0);
        top /= top.norm();
        fix_phase(top);
    }
    return {pur, std::move(top)};
}

// inverse of restricted_local_index for positions: returns (p1, p2), -1 = unused
inline std::pair<int, int> restricted_local_pair(int n, std::size_t e) {
    if (e == 0) return {-1, -1};
    if (e <= static_cast<std::size_t>(n)) return {static_cast<int>(e) - 1, -1};
    auto [j, k] = two_flip_pair(RingGeometry(n), static_cast<int>(e - 1 - n));
    return {j - 1, k - 1};
}

inline ExtractionOutcome apply_two_flip(const PureState& state, const Projector& pa,
                                        const Projector& pb) {
    const int n = state.basis.n_sites;
    const RingGeometry g(n);
    const auto& kept_a = *pa.kept_configs;
    const auto& kept_b = *pb.kept_configs;
    const int na = pa.region.size(), nb = pb.region.size();

    Vec proj = state.amplitudes;
    double prob = 0.0;
    for (Eigen::Index idx = 0; idx < proj.size(); ++idx) {
        auto [j, k] = two_flip_pair(g, static_cast<int>(idx));
        std::size_t ca = 0, cb = 0;
        for (int q = 0; q < na; ++q)
            if (pa.region.sites[q] == j || pa.region.sites[q] == k) ca |= std::size_t{1} << q;
        for (int q = 0; q < nb; ++q)
            if (pb.region.sites[q] == j || pb.region.sites[q] == k) cb |= std::size_t{1} << q;
        if (std::binary_search(kept_a.begin(), kept_a.end(), ca) &&
            std::binary_search(kept_b.begin(), kept_b.end(), cb))
            prob += std::norm(proj[idx]);
        else
            proj[idx] = cd{0.0, 0.0};
    }

    ExtractionOutcome out;
    out.probability = prob;
    if (prob <= 1e-12) {
        out.impossible = true;
        return out;
    }
    proj /= std::sqrt(prob);

    const Region ab = concat_regions(pa.region, pb.region);
    const Region rest = complement_region(state.basis, ab);
    const int nab = na + nb;
    const std::size_t dim_ab = restricted_local_dim(nab);

    Vec phi;  // over the restricted A-then-B local space
    if (rest.sites.empty()) {
        // A and B cover the ring: re-index pairs to list positions
        std::vector<int> pos(n + 1, -1);
        for (int q = 0; q < nab; ++q) pos[ab.sites[q]] = q;
        phi = Vec::Zero(dim_ab);
        for (Eigen::Index idx = 0; idx < proj.size(); ++idx) {
            if (proj[idx] == cd{0.0, 0.0}) continue;
            auto [j, k] = two_flip_pair(g, static_cast<int>(idx));
            int p1 = std::min(pos[j], pos[k]), p2 = std::max(pos[j], pos[k]);
            phi[restricted_local_index(nab, p1, p2)] = proj[idx];
        }
        out.purity = 1.0;
        fix_phase(phi);
    } else {
        PureState post_global(BasisKind::two_flip(n), proj);
        Mat m = partition_matrix(post_global, ab, rest);
        auto [pur, top] = purity_and_top(m);
        out.purity = pur;
        phi = std::move(top);
    }

    out.is_pure = out.purity > 1.0 - kPurityTol;
    if (!out.is_pure) return out;

    // split the AB vector along A|B for the entropy
    const std::size_t da = restricted_local_dim(na), db = restricted_local_dim(nb);
    Vec joint = Vec::Zero(static_cast<Eigen::Index>(da * db));
    for (std::size_t e = 0; e < dim_ab; ++e) {
        if (phi[e] == cd{0.0, 0.0}) continue;
        auto [p1, p2] = restricted_local_pair(nab, e);
        int a1 = -1, a2 = -1, b1 = -1, b2 = -1;
        for (int p : {p1, p2}) {
            if (p < 0) continue;
            if (p < na) (a1 < 0 ? a1 : a2) = p;
            else (b1 < 0 ? b1 : b2) = p - na;
        }
        std::size_t a = restricted_local_index(na, a1, a2);
        std::size_t b = restricted_local_index(nb, b1, b2);
        joint[a + da * b] = phi[e];
    }
    out.entropy = joint_entropy(joint, da, db);
    out.epp = *out.entropy * out.probability;

    // representation of the post state: two-flip over the AB sites when all
    // weight sits on two-flip configurations, else full basis if small enough
    double low_mass = phi.head(1 + nab).squaredNorm();
    if (low_mass < 1e-12) {
        Vec pair_part = phi.tail(static_cast<Eigen::Index>(nab) * (nab - 1) / 2);
        pair_part /= pair_part.norm();
        out.post_state_AB = PureState(BasisKind::two_flip(nab), std::move(pair_part));
    } else if (nab <= 14) {
        Vec full = Vec::Zero(std::size_t{1} << nab);
        for (std::size_t e = 0; e < dim_ab; ++e) {
            auto [p1, p2] = restricted_local_pair(nab, e);
            std::size_t c = 0;
            if (p1 >= 0) c |= std::size_t{1} << p1;
            if (p2 >= 0) c |= std::size_t{1} << p2;
            full[c] = phi[e];
        }
        out.post_state_AB = PureState(BasisKind::full(nab), std::move(full));
    }
    return out;
}

}  // namespace detail

inline ExtractionOutcome apply_projection(const PureState& state, const Projector& pa,
                                          const Projector& pb) {
    if (!disjoint(pa.region, pb.region))
        throw std::invalid_argument("apply_projection: regions overlap");
    const BasisKind& basis = state.basis;
    pa.region.check_against(basis.n_sites);
    pb.region.check_against(basis.n_sites);

    if (basis.type == BasisType::two_flip) {
        if (pa.kept_configs && pb.kept_configs) return detail::apply_two_flip(state, pa, pb);
        return apply_projection(embed_two_flip(state), pa, pb);  // general projectors
    }

    const int d = basis.local_dim;
    if (pa.site_dim != d || pb.site_dim != d)
        throw std::invalid_argument("apply_projection: projector local dimension mismatch");
    const int na = pa.region.size(), nb = pb.region.size();
    const std::size_t da = int_pow(d, na), db = int_pow(d, nb);
    if (static_cast<std::size_t>(pa.span.rows()) != da ||
        static_cast<std::size_t>(pb.span.rows()) != db)
        throw std::invalid_argument("apply_projection: projector dimension mismatch");

    const Region rest = complement_region(basis, concat_regions(pa.region, pb.region));
    std::size_t dr = 1;
    for (int i = 0; i < rest.size(); ++i) dr *= d;

    // gather amplitudes into the (a, b, r) tensor, little-endian per region list
    Vec tensor = Vec::Zero(static_cast<Eigen::Index>(da * db * dr));
    const int n = basis.n_sites;
    auto local_index = [&](std::size_t g, const std::vector<int>& sites) {
        std::size_t loc = 0, place = 1;
        for (int s : sites) {
            int dig = (basis.type == BasisType::full) ? site_bit(g, s) : qudit_digit(g, s, n, d);
            loc += place * dig;
            place *= d;
        }
        return loc;
    };
    for (Eigen::Index g = 0; g < state.amplitudes.size(); ++g) {
        if (state.amplitudes[g] == cd{0.0, 0.0}) continue;
        std::size_t a = local_index(g, pa.region.sites);
        std::size_t b = local_index(g, pb.region.sites);
        std::size_t r = local_index(g, rest.sites);
        tensor[a + da * (b + db * r)] = state.amplitudes[g];
    }

    Mat pam = pa.span * pa.span.adjoint();
    Mat pbm_t = (pb.span * pb.span.adjoint()).transpose();
    for (std::size_t r = 0; r < dr; ++r) {
        Eigen::Map<Mat> block(tensor.data() + da * db * r, da, db);
        block = (pam * block * pbm_t).eval();
    }

    ExtractionOutcome out;
    out.probability = tensor.squaredNorm();
    if (out.probability <= 1e-12) {
        out.impossible = true;
        return out;
    }
    tensor /= std::sqrt(out.probability);

    Vec phi;
    if (dr == 1) {
        out.purity = 1.0;
        phi = tensor;
        fix_phase(phi);
    } else {
        Eigen::Map<const Mat> m(tensor.data(), da * db, dr);
        auto [pur, top] = detail::purity_and_top(m);
        out.purity = pur;
        phi = std::move(top);
    }
    out.is_pure = out.purity > 1.0 - kPurityTol;
    if (!out.is_pure) return out;

    out.entropy = detail::joint_entropy(phi, da, db);
    out.epp = *out.entropy * out.probability;
    out.post_state_AB = detail::make_ab_state(phi, na, nb, d, basis.type);
    return out;
}

// Success probability of the one-flip-in-each-block measurement on a two-flip
// state: the crossing-pair weight (the all-pairs normalization over the whole
// ring is 1 for a normalized state).
inline double quench_probability(const PureState& state, const Region& a, const Region& b) {
    if (state.basis.type != BasisType::two_flip)
        throw std::invalid_argument("quench_probability: two-flip state required");
    if (!disjoint(a, b)) throw std::invalid_argument("quench_probability: regions overlap");
    const RingGeometry g(state.basis.n_sites);
    double prob = 0.0;
    for (Eigen::Index idx = 0; idx < state.amplitudes.size(); ++idx) {
        auto [j, k] = two_flip_pair(g, static_cast<int>(idx));
        bool cross = (a.contains(j) && b.contains(k)) || (a.contains(k) && b.contains(j));
        if (cross) prob += std::norm(state.amplitudes[idx]);
    }
    return prob;
}

}  // namespace epp
