#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "basis.hpp"
#include "bessel.hpp"
#include "geometry.hpp"
#include "linalg.hpp"

namespace epp {

// Two spin flips released on the XX ring at sites r1 < r2 (canonicalized:
// swapping the labels is the same physical configuration), evolved to time t.
struct QuenchSetup {
    RingGeometry geom;
    int r1, r2;
    double t;

    QuenchSetup(RingGeometry g, int a, int b, double time)
        : geom(g), r1(std::min(a, b)), r2(std::max(a, b)), t(time) {
        if (a == b) throw std::invalid_argument("QuenchSetup: r1 == r2");
        if (a < 1 || a > g.n_sites || b < 1 || b > g.n_sites)
            throw std::invalid_argument("QuenchSetup: flip site outside ring");
    }
};

inline cd ipow(long long m) {  // i^m for any integer m
    switch (((m % 4) + 4) % 4) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, -1.0};
    }
}

// Single-magnon amplitude f^N_{sr}(t): lattice image sum of Bessel functions,
//   f = e^{-i4t} i^d sum_k J_{d-kN}(4t) i^{-kN} e^{i pi k},   d = s - r,
// truncated at |k| <= ceil((4t + 40)/N) + 1 (orders beyond argument + 40 are
// < 1e-16).  The half-integer flux phase e^{i pi k} = (-1)^k makes this the
// antiperiodic ring propagator times the global phase e^{-i4t}.
inline cd single_flip_amplitude(const RingGeometry& g, int s, int r, double t) {
    if (s < 1 || s > g.n_sites || r < 1 || r > g.n_sites)
        throw std::invalid_argument("single_flip_amplitude: site outside ring");
    const int n = g.n_sites;
    const double beta = 4.0 * t;
    const int d = s - r;
    const int kmax = static_cast<int>(std::ceil((std::abs(beta) + 40.0) / n)) + 1;
    cd sum{0.0, 0.0};
    for (int k = -kmax; k <= kmax; ++k) {
        double j = bessel_j(d - k * n, beta);
        cd term = j * ipow(-static_cast<long long>(k) * n);
        if (k & 1) term = -term;
        sum += term;
    }
    return std::exp(cd{0.0, -beta}) * ipow(d) * sum;
}

// Hopping generator of the one-magnon dynamics in the two-flip sector:
// -2 on bulk bonds, +2 on the boundary bond (antiperiodic closure, as required
// by the even fermion-parity sector the pair state lives in).
inline RMat single_flip_generator(const RingGeometry& g) {
    const int n = g.n_sites;
    RMat h = RMat::Zero(n, n);
    for (int s = 0; s + 1 < n; ++s) {
        h(s, s + 1) -= 2.0;
        h(s + 1, s) -= 2.0;
    }
    h(n - 1, 0) += 2.0;
    h(0, n - 1) += 2.0;
    return h;
}

// U(t) = exp(-i H1 t) by diagonalization; unitary, works for any sign of t
inline Mat exact_single_flip_propagator(const RingGeometry& g, double t) {
    Eigen::SelfAdjointEigenSolver<RMat> es(single_flip_generator(g));
    Vec phases(g.n_sites);
    for (int i = 0; i < g.n_sites; ++i)
        phases[i] = std::exp(cd{0.0, -es.eigenvalues()[i] * t});
    return es.eigenvectors().cast<cd>() * phases.asDiagonal() *
           es.eigenvectors().transpose().cast<cd>();
}

// N x N antisymmetric table A_{s1 s2}(t) with sum_{j<k} 2|A_jk|^2 = 1; the
// physical amplitude on the ordered pair (j < k) is sqrt(2) A_jk.
struct PairAmplitudeTable {
    Mat a;  // (s1-1, s2-1) entries, 0-based storage of 1-based sites

    cd at(int s1, int s2) const { return a(s1 - 1, s2 - 1); }
};

inline PairAmplitudeTable pair_table_from_propagator(const QuenchSetup& q, const Mat& f) {
    const int n = q.geom.n_sites;
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    Vec c1 = f.col(q.r1 - 1), c2 = f.col(q.r2 - 1);
    Mat a(n, n);
    for (int s1 = 0; s1 < n; ++s1)
        for (int s2 = 0; s2 < n; ++s2)
            a(s1, s2) = (c1[s1] * c2[s2] - c1[s2] * c2[s1]) * inv_sqrt2;
    return {std::move(a)};
}

// default evolution engine: the diagonalization propagator
inline PairAmplitudeTable pair_amplitude_table(const QuenchSetup& q) {
    return pair_table_from_propagator(q, exact_single_flip_propagator(q.geom, q.t));
}

// independent engine: the Bessel image sum (must agree with the above in every
// measurable quantity; the two differ by one global phase e^{-i8t})
inline PairAmplitudeTable pair_amplitude_table_bessel(const QuenchSetup& q) {
    const int n = q.geom.n_sites;
    Mat f(n, n);
    for (int s = 1; s <= n; ++s)
        for (int r = 1; r <= n; ++r) f(s - 1, r - 1) = single_flip_amplitude(q.geom, s, r, q.t);
    return pair_table_from_propagator(q, f);
}

inline PureState evolved_state_from_table(const QuenchSetup& q, const PairAmplitudeTable& tab) {
    const int n = q.geom.n_sites;
    const double sqrt2 = std::sqrt(2.0);
    Vec amps(static_cast<Eigen::Index>(n) * (n - 1) / 2);
    for (int j = 1; j <= n; ++j)
        for (int k = j + 1; k <= n; ++k)
            amps[two_flip_index(q.geom, j, k)] = sqrt2 * tab.at(j, k);
    return PureState(BasisKind::two_flip(n), std::move(amps));
}

inline PureState evolved_state(const QuenchSetup& q) {
    return evolved_state_from_table(q, pair_amplitude_table(q));
}

}  // namespace epp
