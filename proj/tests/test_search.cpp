#include <catch2/catch_amalgamated.hpp>

#include <epp/groundstate.hpp>
#include <epp/search.hpp>
#include <epp/states.hpp>

#include <random>

using namespace epp;

namespace {

PureState random_two_flip(int n, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> gauss;
    Vec v(n * (n - 1) / 2);
    for (int i = 0; i < v.size(); ++i) v[i] = cd{gauss(rng), gauss(rng)};
    v.normalize();
    return PureState(BasisKind::two_flip(n), v);
}

PureState random_full(int n, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> gauss;
    Vec v(std::int64_t(1) << n);
    for (int i = 0; i < v.size(); ++i) v[i] = cd{gauss(rng), gauss(rng)};
    v.normalize();
    return PureState(BasisKind::full(n), v);
}

Mat random_rank2_span(Eigen::Index dim, std::mt19937& rng) {
    std::normal_distribution<double> gauss;
    Mat m(dim, 2);
    for (Eigen::Index i = 0; i < dim; ++i)
        for (int c = 0; c < 2; ++c) m(i, c) = cd{gauss(rng), gauss(rng)};
    Eigen::HouseholderQR<Mat> qr(m);
    return Mat(qr.householderQ()).leftCols(2);
}

}  // namespace

TEST_CASE("candidate subset enumeration") {
    REQUIRE(candidate_subsets(2) == std::vector<std::uint32_t>({3}));
    REQUIRE(candidate_subsets(3) == std::vector<std::uint32_t>({3, 5, 6, 7}));
    REQUIRE(candidate_subsets(4).size() == 11);
    // pair counts quoted for the search space
    auto pairs = [](int r) {
        std::size_t s = candidate_subsets(r).size();
        return s * s;
    };
    REQUIRE(pairs(2) == 1);
    REQUIRE(pairs(3) == 16);
    REQUIRE(pairs(4) == 121);
    REQUIRE_THROWS_AS(candidate_subsets(13), std::invalid_argument);
}

TEST_CASE("branch decomposition reconstructs the reduced density matrix") {
    GroundStateReport gs = ground_state(build_hamiltonian({6, 0.0, 0.0}));
    Region a({1, 2}), b({4, 5});
    RhoABDecomposition dec = rho_AB_schmidt(gs.state, a, b);

    REQUIRE(dec.dim_a == 4);
    REQUIRE(dec.dim_b == 4);
    REQUIRE(dec.lambdas.sum() == Catch::Approx(1.0).margin(1e-10));
    for (int i = 1; i < dec.lambdas.size(); ++i) REQUIRE(dec.lambdas[i] <= dec.lambdas[i - 1]);

    // independent eigendecomposition of the same partial trace
    DensityMatrix rho = reduced_density(gs.state, Region({1, 2, 4, 5}));
    Mat rebuilt = Mat::Zero(16, 16);
    for (int j = 0; j < dec.lambdas.size(); ++j)
        rebuilt += dec.lambdas[j] * dec.branches.col(j) * dec.branches.col(j).adjoint();
    REQUIRE((rebuilt - rho.rho).cwiseAbs().maxCoeff() < 1e-10);

    int rank = 0;
    for (double v : hermitian_eig(rho.rho).values)
        if (v >= 1e-10) ++rank;
    REQUIRE(rank == static_cast<int>(dec.lambdas.size()));
}

TEST_CASE("a product across the cut gives a single unit branch") {
    GroundStateReport gs = ground_state(build_hamiltonian({6, 0.0, 10.0}));
    RhoABDecomposition dec = rho_AB_schmidt(gs.state, Region({1, 2}), Region({4, 5}));
    REQUIRE(dec.lambdas.size() == 1);
    REQUIRE(dec.lambdas[0] == Catch::Approx(1.0).margin(1e-10));

    // and the full search on it finds nothing to extract
    SearchResult res = optimize_epp(gs.state, Region({1, 2}), Region({4, 5}));
    REQUIRE(res.best_epp == 0.0);
    REQUIRE(!res.best.has_value());
    REQUIRE(res.all_pure_candidates.empty());
}

TEST_CASE("bell pair: the one-candidate search") {
    Vec b = Vec::Zero(4);
    b[1] = 1.0 / std::sqrt(2.0);
    b[2] = 1.0 / std::sqrt(2.0);
    PureState bell(BasisKind::full(2), b);
    SearchResult res = optimize_epp(bell, Region({1}), Region({2}));
    REQUIRE(res.all_pure_candidates.size() == 1);
    REQUIRE(res.best_epp == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(res.best->probability == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(res.best->entropy == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(res.best->candidate.mu == 3);
    REQUIRE(res.best->candidate.nu == 3);
    REQUIRE(res.extracted_state.has_value());
}

TEST_CASE("three-party singlet search") {
    PureState ss = supersinglet({3, 3});
    SearchResult res = optimize_epp(ss, Region({1}), Region({2}));

    REQUIRE(res.lambdas.size() == 3);
    for (int i = 0; i < 3; ++i) REQUIRE(res.lambdas[i] == Catch::Approx(1.0 / 3).margin(1e-12));
    REQUIRE(res.lambda_degenerate);

    REQUIRE(res.all_pure_candidates.size() == 3);
    for (const PureCandidate& pc : res.all_pure_candidates) {
        REQUIRE(pc.probability == Catch::Approx(1.0 / 3).margin(1e-10));
        REQUIRE(pc.entropy == Catch::Approx(1.0).margin(1e-10));
        REQUIRE(pc.epp == Catch::Approx(1.0 / 3).margin(1e-10));
    }
    REQUIRE(res.best_epp == Catch::Approx(1.0 / 3).margin(1e-10));
    // deterministic tie-break: first branch, full subsets
    REQUIRE(res.best->candidate.j == 0);
    REQUIRE(res.best->candidate.mu == 3);
    REQUIRE(res.best->candidate.nu == 3);

    // the winner extracts the first pair singlet
    REQUIRE(res.extracted_state.has_value());
    Vec target = Vec::Zero(9);
    target[1] = 1.0 / std::sqrt(2.0);   // |01>
    target[3] = -1.0 / std::sqrt(2.0);  // |10>
    double fid = std::abs(target.dot(res.extracted_state->amplitudes));
    REQUIRE(fid > 1.0 - 1e-10);
}

TEST_CASE("half-filled ring ground state: parity projectors win") {
    GroundStateReport gs = ground_state(build_hamiltonian({6, 0.0, 0.0}));
    Region a({1, 2}), b({4, 5});
    SearchResult res = optimize_epp(gs.state, a, b);

    REQUIRE(res.best_epp == Catch::Approx(1.0 / 18).margin(1e-9));
    REQUIRE(res.best->probability == Catch::Approx(1.0 / 18).margin(1e-9));
    REQUIRE(res.best->entropy == Catch::Approx(1.0).margin(1e-9));

    // the winning projectors act as the even-parity selections on both blocks
    Mat pa = res.best->candidate.pa.span * res.best->candidate.pa.span.adjoint();
    Mat pb = res.best->candidate.pb.span * res.best->candidate.pb.span.adjoint();
    Mat even = Mat::Zero(4, 4);
    even(0, 0) = even(3, 3) = 1.0;
    REQUIRE((pa - even).cwiseAbs().maxCoeff() < 1e-9);
    REQUIRE((pb - even).cwiseAbs().maxCoeff() < 1e-9);

    // extracted state: the equal mix of (both up | both down) across the blocks
    Vec target = Vec::Zero(16);
    target[3] = 1.0 / std::sqrt(2.0);   // A up-up, B down-down
    target[12] = 1.0 / std::sqrt(2.0);  // A down-down, B up-up
    double fid = std::abs(target.dot(res.extracted_state->amplitudes));
    REQUIRE(fid > 1.0 - 1e-9);
}

TEST_CASE("accepted candidates agree with the direct projection engine") {
    Region a({1, 2, 3}), b({4, 5, 6});
    for (unsigned seed : {11u, 12u, 13u, 14u, 15u, 16u, 17u, 18u, 19u, 20u}) {
        PureState psi = random_two_flip(6, seed);
        SearchResult res = optimize_epp(psi, a, b);
        REQUIRE(!res.all_pure_candidates.empty());
        for (std::size_t i = 0; i < res.all_pure_candidates.size(); i += 7) {
            const PureCandidate& pc = res.all_pure_candidates[i];
            ExtractionOutcome out = apply_projection(psi, pc.candidate.pa, pc.candidate.pb);
            REQUIRE(std::abs(pc.probability - out.probability) < 1e-9);
            REQUIRE(out.is_pure);
            REQUIRE(out.purity > 1.0 - 1e-9);
            REQUIRE(std::abs(pc.entropy - *out.entropy) < 1e-9);
        }
    }
}

TEST_CASE("rejected candidates really are mixed") {
    // a state with random amplitudes over the whole basis carries no conserved
    // quantum number, so no projector subset annihilates every other branch
    PureState psi = random_full(6, 77);
    Region a({1, 2}), b({4, 5});
    SearchResult res = optimize_epp(psi, a, b);
    REQUIRE(res.all_pure_candidates.empty());
    REQUIRE(res.best_epp == 0.0);

    // build the first rejected candidate by hand and measure its purity directly
    RhoABDecomposition dec = rho_AB_schmidt(psi, a, b);
    REQUIRE(dec.lambdas.size() >= 2);
    SchmidtDecomposition sd = branch_schmidt(dec.branches.col(0), dec.dim_a, dec.dim_b);
    REQUIRE(sd.coefficients.size() >= 2);
    Projector pa{a, 2, sd.left.leftCols(2), std::nullopt};
    Projector pb{b, 2, sd.right.leftCols(2), std::nullopt};
    ExtractionOutcome out = apply_projection(psi, pa, pb);
    REQUIRE(!out.impossible);
    REQUIRE(!out.is_pure);
    REQUIRE(out.purity < 1.0 - 1e-9);
}

TEST_CASE("flip-number structure keeps random two-flip candidates pure") {
    // two-flip states are never generic in the above sense: picking the
    // one-flip-per-block directions of the two-flips-inside-AB branch kills
    // every branch with a different flip split exactly, whatever the
    // amplitudes, so the filter must accept candidates here
    PureState psi = random_two_flip(8, 77);
    Region a({1, 2}), b({5, 6});
    SearchResult res = optimize_epp(psi, a, b);
    REQUIRE(!res.all_pure_candidates.empty());
    REQUIRE(res.best_epp > 0.0);
    for (const PureCandidate& pc : res.all_pure_candidates) {
        ExtractionOutcome out = apply_projection(psi, pc.candidate.pa, pc.candidate.pb);
        REQUIRE(out.is_pure);
        REQUIRE(out.purity > 1.0 - 1e-9);
        REQUIRE(std::abs(pc.probability - out.probability) < 1e-9);
        REQUIRE(std::abs(pc.entropy - *out.entropy) < 1e-9);
    }
}

TEST_CASE("parallel branch images are reported, not extracted") {
    // two orthogonal rank-3 vectors whose projections onto the first two
    // schmidt directions coincide up to scale
    Mat branches(9, 2);
    branches.setZero();
    double r3 = 1.0 / std::sqrt(3.0), r6 = 1.0 / std::sqrt(6.0);
    branches(0, 0) = r3;  // |00>
    branches(4, 0) = r3;  // |11>
    branches(8, 0) = r3;  // |22>
    branches(0, 1) = r6;
    branches(4, 1) = r6;
    branches(8, 1) = -2.0 * r6;
    RVec lambdas(2);
    lambdas << 0.6, 0.4;

    SearchResult res = optimize_epp_from_branches(lambdas, branches, 3, 3);
    REQUIRE(res.all_pure_candidates.empty());
    REQUIRE(res.best_epp == 0.0);
    REQUIRE(!res.case_b_detections.empty());
    bool found = false;
    for (const CaseBDetection& det : res.case_b_detections)
        if (det.j == 0 && det.mu == 3 && det.nu == 3 &&
            det.branches == std::vector<int>({0, 1}))
            found = true;
    REQUIRE(found);
}

TEST_CASE("zero-weight branches never change the outcome") {
    PureState ss = supersinglet({3, 3});
    RhoABDecomposition dec = rho_AB_schmidt(ss, Region({1}), Region({2}));
    SearchResult base = optimize_epp_from_branches(dec.lambdas, dec.branches, 3, 3);

    RVec lam2(dec.lambdas.size() + 1);
    lam2 << dec.lambdas, 0.0;
    Mat br2(dec.branches.rows(), dec.branches.cols() + 1);
    std::mt19937 rng(4242);
    std::normal_distribution<double> gauss;
    Vec junk(9);
    for (int i = 0; i < 9; ++i) junk[i] = cd{gauss(rng), gauss(rng)};
    br2 << dec.branches, junk.normalized();

    SearchResult padded = optimize_epp_from_branches(lam2, br2, 3, 3);
    REQUIRE(padded.best_epp == base.best_epp);
    REQUIRE(padded.best->candidate.j == base.best->candidate.j);
    REQUIRE(padded.best->candidate.mu == base.best->candidate.mu);
    REQUIRE(padded.best->candidate.nu == base.best->candidate.nu);
    REQUIRE(padded.best->probability == base.best->probability);
    REQUIRE(padded.all_pure_candidates.size() == base.all_pure_candidates.size());
}

TEST_CASE("random rank-2 projectors do not beat the family maximum") {
    GroundStateReport gs = ground_state(build_hamiltonian({6, 0.0, 0.0}));
    Region a({1, 2}), b({4, 5});
    SearchResult res = optimize_epp(gs.state, a, b);

    std::mt19937 rng(20240817);
    int beats = 0;
    double best_seen = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        Projector pa{a, 2, random_rank2_span(4, rng), std::nullopt};
        Projector pb{b, 2, random_rank2_span(4, rng), std::nullopt};
        ExtractionOutcome out = apply_projection(gs.state, pa, pb);
        if (out.impossible || !out.is_pure) continue;
        best_seen = std::max(best_seen, out.epp);
        if (out.epp > res.best_epp + 1e-9) ++beats;
    }
    // empirical probe of the optimality claim: report, never fail
    if (beats > 0)
        WARN("sampled rank-2 projectors beat the subset family: " << beats
             << " of 200 trials, best " << best_seen << " vs " << res.best_epp);
    SUCCEED();
}
