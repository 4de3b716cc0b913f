#pragma once

#include <Eigen/Dense>
#include <bit>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "basis.hpp"
#include "extraction.hpp"
#include "geometry.hpp"
#include "linalg.hpp"

namespace epp {

struct CandidateProjectorPair {
    int j;                 // rho_AB branch index
    std::uint32_t mu, nu;  // subset bitmasks into branch j's second-level Schmidt basis
    Projector pa, pb;
};

struct PureCandidate {
    CandidateProjectorPair candidate;
    double probability;
    double entropy;
    double epp;
    Vec extracted;  // normalized, joint a + dim_a*b layout over A x B
};

struct CaseBDetection {
    int j;
    std::uint32_t mu, nu;
    std::vector<int> branches;  // >= 2 surviving branches with mutually parallel images
};

struct SearchResult {
    double best_epp = 0.0;
    std::optional<PureCandidate> best;
    std::optional<PureState> extracted_state;  // best candidate's state over AB
    std::vector<PureCandidate> all_pure_candidates;
    std::vector<CaseBDetection> case_b_detections;
    RVec lambdas;
    bool lambda_degenerate = false;  // near-equal rho_AB weights present
    bool omega_degenerate = false;   // near-equal second-level coefficients present
    Eigen::Index dim_a = 0, dim_b = 0;
};

struct RhoABDecomposition {
    RVec lambdas;   // descending, cut at kBranchCut
    Mat branches;   // orthonormal columns, joint a + dim_a*b layout
    Eigen::Index dim_a = 0, dim_b = 0;
};

// spectral decomposition of rho_AB = Tr_rest |psi><psi| in the A-then-B local
// index layout; two-flip inputs are embedded into the full basis first
inline RhoABDecomposition rho_AB_schmidt(const PureState& global, const Region& a,
                                         const Region& b) {
    if (!disjoint(a, b)) throw std::invalid_argument("rho_AB_schmidt: regions overlap");
    const PureState* state = &global;
    std::optional<PureState> embedded;
    if (global.basis.type == BasisType::two_flip) {
        embedded.emplace(embed_two_flip(global));
        state = &*embedded;
    }
    const BasisKind& basis = state->basis;
    a.check_against(basis.n_sites);
    b.check_against(basis.n_sites);
    const int d = basis.local_dim;
    const Region ab = concat_regions(a, b);
    const Region rest = complement_region(basis, ab);

    RhoABDecomposition out;
    out.dim_a = static_cast<Eigen::Index>(int_pow(d, a.size()));
    out.dim_b = static_cast<Eigen::Index>(int_pow(d, b.size()));
    if (rest.sites.empty()) {
        // pure rho_AB: single branch, amplitudes permuted into the joint layout
        Vec joint = Vec::Zero(out.dim_a * out.dim_b);
        for (Eigen::Index g = 0; g < state->amplitudes.size(); ++g) {
            if (state->amplitudes[g] == cd{0.0, 0.0}) continue;
            std::size_t loc = 0, place = 1;
            for (int s : ab.sites) {
                int dig = (basis.type == BasisType::full)
                              ? site_bit(g, s)
                              : qudit_digit(g, s, basis.n_sites, d);
                loc += place * dig;
                place *= d;
            }
            joint[loc] = state->amplitudes[g];
        }
        out.lambdas = RVec::Ones(1);
        out.branches = joint;
        return out;
    }
    Mat m = partition_matrix(*state, ab, rest);
    EigResult e = spectral_desc(m * m.adjoint(), kBranchCut);
    out.lambdas = e.values;
    out.branches = e.vectors;
    return out;
}

// second-level Schmidt data of one branch vector (coefficients cut at kAnnihilate)
inline SchmidtDecomposition branch_schmidt(const Vec& psi, Eigen::Index dim_a,
                                           Eigen::Index dim_b) {
    Eigen::Map<const Mat> m(psi.data(), dim_a, dim_b);
    return schmidt_of_matrix(Mat(m), kAnnihilate);
}

// all (I_mu, I_nu) with |I| >= 2 over r basis vectors: (2^r - r - 1)^2 pairs
inline std::vector<std::uint32_t> candidate_subsets(int r) {
    if (r > 12) throw std::invalid_argument("candidate_subsets: rank exceeds guard (12)");
    std::vector<std::uint32_t> out;
    for (std::uint32_t m = 3; m < (std::uint32_t{1} << r); ++m)
        if (std::popcount(m) >= 2) out.push_back(m);
    return out;
}

namespace detail {

struct SearchSpace {
    Region region_a, region_b;
    int site_dim;
    BasisType type;
};

inline SearchResult search_branches(const RVec& lambdas, const Mat& branches,
                                    Eigen::Index dim_a, Eigen::Index dim_b,
                                    const SearchSpace& space) {
    const int nb = static_cast<int>(lambdas.size());
    SearchResult res;
    res.lambdas = lambdas;
    res.dim_a = dim_a;
    res.dim_b = dim_b;
    for (int k = 0; k + 1 < nb; ++k)
        if (std::abs(lambdas[k] - lambdas[k + 1]) < kClusterTol) res.lambda_degenerate = true;

    std::vector<SchmidtDecomposition> sd(nb);
    for (int k = 0; k < nb; ++k) {
        sd[k] = branch_schmidt(branches.col(k), dim_a, dim_b);
        for (Eigen::Index i = 0; i + 1 < sd[k].coefficients.size(); ++i)
            if (std::abs(sd[k].coefficients[i] - sd[k].coefficients[i + 1]) < kClusterTol)
                res.omega_degenerate = true;
    }

    const double ann2 = kAnnihilate * kAnnihilate;
    double best_prob = -1.0;
    for (int j = 0; j < nb; ++j) {
        if (lambdas[j] < kBranchCut) continue;  // weightless branch, nothing to extract
        const int r = static_cast<int>(sd[j].coefficients.size());
        if (r < 2) continue;
        const std::vector<std::uint32_t> subsets = candidate_subsets(r);

        // branch images in the r x r coordinates of branch j's Schmidt bases:
        // X_k = alpha^dag M_k conj(beta); ||(P_A P_B) Psi^k||^2 restricted to
        // subsets (mu, nu) is the corresponding submatrix weight of |X_k|^2
        std::vector<Mat> x(nb);
        std::vector<RMat> s(nb);
        for (int k = 0; k < nb; ++k) {
            Eigen::Map<const Mat> mk(branches.col(k).data(), dim_a, dim_b);
            x[k] = sd[j].left.adjoint() * mk * sd[j].right.conjugate();
            s[k] = x[k].cwiseAbs2();
        }

        for (std::uint32_t mu : subsets) {
            std::vector<RVec> rowsum(nb, RVec::Zero(r));
            for (int k = 0; k < nb; ++k)
                for (int p = 0; p < r; ++p)
                    if (mu & (std::uint32_t{1} << p)) rowsum[k] += s[k].row(p).transpose();

            for (std::uint32_t nu : subsets) {
                double surv = 0.0;
                for (int q = 0; q < r; ++q)
                    if (nu & (std::uint32_t{1} << q)) surv += rowsum[j][q];
                if (surv <= ann2) continue;  // nothing extracted from branch j
                bool annihilated = true;
                std::vector<int> survivors;
                for (int k = 0; k < nb; ++k) {
                    if (k == j || lambdas[k] < kBranchCut) continue;
                    double leak = 0.0;
                    for (int q = 0; q < r; ++q)
                        if (nu & (std::uint32_t{1} << q)) leak += rowsum[k][q];
                    if (leak >= ann2) {
                        annihilated = false;
                        survivors.push_back(k);
                    }
                }

                auto submatrix = [&](int k) {
                    Mat sub(std::popcount(mu), std::popcount(nu));
                    int pi = 0;
                    for (int p = 0; p < r; ++p) {
                        if (!(mu & (std::uint32_t{1} << p))) continue;
                        int qi = 0;
                        for (int q = 0; q < r; ++q)
                            if (nu & (std::uint32_t{1} << q)) sub(pi, qi++) = x[k](p, q);
                        ++pi;
                    }
                    return sub;
                };

                if (!annihilated) {
                    // case b probe: several branches projected onto one ray
                    if (survivors.size() + 1 >= 2) {
                        std::vector<int> live = survivors;
                        live.insert(live.begin(), j);
                        std::vector<Mat> imgs;
                        for (int k : live) imgs.push_back(submatrix(k));
                        bool parallel = true;
                        for (std::size_t u = 0; u < imgs.size() && parallel; ++u)
                            for (std::size_t v = u + 1; v < imgs.size() && parallel; ++v) {
                                double nu_ = imgs[u].norm(), nv = imgs[v].norm();
                                if (nu_ < kAnnihilate || nv < kAnnihilate) continue;
                                cd ip = (imgs[u].adjoint() * imgs[v]).trace();
                                if (std::abs(ip) < (1.0 - 1e-8) * nu_ * nv) parallel = false;
                            }
                        if (parallel) res.case_b_detections.push_back({j, mu, nu, live});
                    }
                    continue;
                }

                // purity double-check on the actually projected rho_AB
                double num = 0.0, den = 0.0;
                {
                    std::vector<Mat> imgs(nb);
                    for (int k = 0; k < nb; ++k) imgs[k] = submatrix(k);
                    for (int k = 0; k < nb; ++k) {
                        den += lambdas[k] * imgs[k].squaredNorm();
                        for (int l = 0; l < nb; ++l) {
                            cd ip = (imgs[k].adjoint() * imgs[l]).trace();
                            num += lambdas[k] * lambdas[l] * std::norm(ip);
                        }
                    }
                }
                double pur = num / (den * den);
                if (pur <= 1.0 - kPurityTol) continue;

                // extracted state and its measure
                std::vector<int> common;
                double wsum = 0.0;
                for (int i = 0; i < r; ++i)
                    if ((mu & (std::uint32_t{1} << i)) && (nu & (std::uint32_t{1} << i))) {
                        common.push_back(i);
                        wsum += sd[j].coefficients[i] * sd[j].coefficients[i];
                    }
                RVec w(common.size());
                Mat phi_m = Mat::Zero(dim_a, dim_b);
                for (std::size_t i = 0; i < common.size(); ++i) {
                    double om = sd[j].coefficients[common[i]];
                    w[i] = om * om / wsum;
                    phi_m += (om / std::sqrt(wsum)) * sd[j].left.col(common[i]) *
                             sd[j].right.col(common[i]).transpose();
                }
                Vec extracted = Eigen::Map<Vec>(phi_m.data(), dim_a * dim_b);
                double prob = lambdas[j] * surv;
                if (prob <= 1e-12) continue;
                double ent = entropy_of_weights(w);
                double epp = prob * ent;

                Mat span_a(dim_a, std::popcount(mu)), span_b(dim_b, std::popcount(nu));
                {
                    int c = 0;
                    for (int p = 0; p < r; ++p)
                        if (mu & (std::uint32_t{1} << p)) span_a.col(c++) = sd[j].left.col(p);
                    c = 0;
                    for (int q = 0; q < r; ++q)
                        if (nu & (std::uint32_t{1} << q)) span_b.col(c++) = sd[j].right.col(q);
                }
                PureCandidate pc{{j, mu, nu,
                                  Projector{space.region_a, space.site_dim, span_a, std::nullopt},
                                  Projector{space.region_b, space.site_dim, span_b, std::nullopt}},
                                 prob,
                                 ent,
                                 epp,
                                 std::move(extracted)};
                bool better = !res.best || epp > res.best_epp ||
                              (epp == res.best_epp && prob > best_prob);
                res.all_pure_candidates.push_back(std::move(pc));
                if (better) {
                    res.best = res.all_pure_candidates.back();
                    res.best_epp = epp;
                    best_prob = prob;
                }
            }
        }
    }

    if (res.best) {
        res.extracted_state = detail::make_ab_state(res.best->extracted, space.region_a.size(),
                                                    space.region_b.size(), space.site_dim,
                                                    space.type);
    }
    return res;
}

}  // namespace detail

inline SearchResult optimize_epp(const PureState& global, const Region& a, const Region& b) {
    RhoABDecomposition dec = rho_AB_schmidt(global, a, b);
    BasisType type =
        global.basis.type == BasisType::qudit ? BasisType::qudit : BasisType::full;
    int d = global.basis.type == BasisType::qudit ? global.basis.local_dim : 2;
    return detail::search_branches(dec.lambdas, dec.branches, dec.dim_a, dec.dim_b,
                                   {a, b, d, type});
}

// test entry: run the engine on an explicit branch decomposition
inline SearchResult optimize_epp_from_branches(const RVec& lambdas, const Mat& branches,
                                               Eigen::Index dim_a, Eigen::Index dim_b) {
    return detail::search_branches(lambdas, branches, dim_a, dim_b,
                                   {Region({1}), Region({2}), static_cast<int>(dim_a),
                                    BasisType::qudit});
}

}  // namespace epp
