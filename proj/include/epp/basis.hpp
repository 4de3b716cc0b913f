#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

#include "geometry.hpp"

namespace epp {

using cd = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

enum class BasisType { full, two_flip, qudit };

// Basis conventions:
//   full:    dimension 2^N, site i <-> bit (i-1), bit value 1 = spin up = "flip",
//            vacuum (index 0) = all spins down.
//   twoflip: ordered pairs (j,k), 1 <= j < k <= N, lexicographic, dim N(N-1)/2.
//   qudit:   dimension d^N, big-endian digits (site 1 = most significant),
//            local levels stored as digits 0..d-1.
struct BasisKind {
    BasisType type;
    int n_sites;
    int local_dim;  // 2 except for qudit

    static BasisKind full(int n) {
        if (n < 1 || n > 30) throw std::invalid_argument("BasisKind::full: bad N");
        return {BasisType::full, n, 2};
    }
    static BasisKind two_flip(int n) {
        if (n < 2) throw std::invalid_argument("BasisKind::two_flip: bad N");
        return {BasisType::two_flip, n, 2};
    }
    static BasisKind qudit(int n, int d) {
        if (n < 1 || d < 2) throw std::invalid_argument("BasisKind::qudit: bad N or d");
        double dim = std::pow(static_cast<double>(d), n);
        if (dim > static_cast<double>(1 << 24))
            throw std::invalid_argument("BasisKind::qudit: d^N exceeds 2^24 guard");
        return {BasisType::qudit, n, d};
    }

    std::size_t dimension() const {
        switch (type) {
            case BasisType::full: return std::size_t{1} << n_sites;
            case BasisType::two_flip:
                return static_cast<std::size_t>(n_sites) * (n_sites - 1) / 2;
            case BasisType::qudit: {
                std::size_t dim = 1;
                for (int i = 0; i < n_sites; ++i) dim *= local_dim;
                return dim;
            }
        }
        throw std::logic_error("unreachable");
    }

    bool operator==(const BasisKind& o) const {
        return type == o.type && n_sites == o.n_sites && local_dim == o.local_dim;
    }
};

// Normalized amplitude vector over a declared basis.
struct PureState {
    BasisKind basis;
    Vec amplitudes;

    PureState(BasisKind b, Vec a) : basis(b), amplitudes(std::move(a)) {
        if (static_cast<std::size_t>(amplitudes.size()) != basis.dimension())
            throw std::invalid_argument("PureState: amplitude count != basis dimension");
        double n2 = amplitudes.squaredNorm();
        if (std::abs(n2 - 1.0) > 1e-8)
            throw std::invalid_argument("PureState: not normalized (|norm^2 - 1| = " +
                                        std::to_string(std::abs(n2 - 1.0)) + ")");
    }
};

// ---- two-flip pair <-> index maps (lexicographic over 1 <= j < k <= N) ----

inline int two_flip_index(const RingGeometry& g, int j, int k) {
    int n = g.n_sites;
    if (j < 1 || k > n || j >= k)
        throw std::invalid_argument("two_flip_index: need 1 <= j < k <= N");
    return (j - 1) * n - j * (j - 1) / 2 + (k - j - 1);
}

inline std::pair<int, int> two_flip_pair(const RingGeometry& g, int index) {
    int n = g.n_sites;
    if (index < 0 || index >= n * (n - 1) / 2)
        throw std::invalid_argument("two_flip_pair: index out of range");
    int j = 1;
    while (index >= n - j) {
        index -= n - j;
        ++j;
    }
    return {j, j + 1 + index};
}

// full-basis bit for a 1-based site
inline int site_bit(std::size_t config, int site) {
    return static_cast<int>((config >> (site - 1)) & 1u);
}

inline std::size_t full_index_of_pair(int j, int k) {
    return (std::size_t{1} << (j - 1)) | (std::size_t{1} << (k - 1));
}

// big-endian qudit digit for a 1-based site
inline int qudit_digit(std::size_t config, int site, int n_sites, int d) {
    std::size_t place = 1;
    for (int i = 0; i < n_sites - site; ++i) place *= d;
    return static_cast<int>((config / place) % d);
}

// isometric embedding of the two-flip sector into the full 2^N space
inline PureState embed_two_flip(const PureState& state) {
    if (state.basis.type != BasisType::two_flip)
        throw std::invalid_argument("embed_two_flip: input must be a two-flip state");
    int n = state.basis.n_sites;
    if (n > 14) throw std::invalid_argument("embed_two_flip: N > 14 guard");
    RingGeometry g(n);
    Vec full = Vec::Zero(std::size_t{1} << n);
    for (int j = 1; j <= n; ++j)
        for (int k = j + 1; k <= n; ++k)
            full[full_index_of_pair(j, k)] = state.amplitudes[two_flip_index(g, j, k)];
    return PureState(BasisKind::full(n), std::move(full));
}

// ---- state vector text format ----
// header: "basis full N" | "basis twoflip N" | "basis qudit N d"
// then one line per nonzero amplitude: "<index> <real> <imag>"

struct StateFormatError : std::runtime_error {
    int line;
    StateFormatError(int ln, const std::string& msg)
        : std::runtime_error("line " + std::to_string(ln) + ": " + msg), line(ln) {}
};

inline void write_state_file(std::ostream& os, const PureState& state) {
    const BasisKind& b = state.basis;
    switch (b.type) {
        case BasisType::full: os << "basis full " << b.n_sites << "\n"; break;
        case BasisType::two_flip: os << "basis twoflip " << b.n_sites << "\n"; break;
        case BasisType::qudit:
            os << "basis qudit " << b.n_sites << " " << b.local_dim << "\n";
            break;
    }
    char buf[80];
    for (Eigen::Index i = 0; i < state.amplitudes.size(); ++i) {
        cd a = state.amplitudes[i];
        if (a == cd{0.0, 0.0}) continue;
        std::snprintf(buf, sizeof buf, "%lld %.17g %.17g",
                      static_cast<long long>(i), a.real(), a.imag());
        os << buf << "\n";
    }
}

inline PureState read_state_file(std::istream& is) {
    std::string line;
    int ln = 0;
    if (!std::getline(is, line)) throw StateFormatError(1, "empty file");
    ++ln;
    std::istringstream hs(line);
    std::string word, kind;
    int n = 0, d = 0;
    hs >> word >> kind >> n;
    if (word != "basis" || n <= 0)
        throw StateFormatError(ln, "expected header 'basis <full|twoflip|qudit> N [d]'");
    BasisKind basis = BasisKind::full(1);
    if (kind == "full") basis = BasisKind::full(n);
    else if (kind == "twoflip") basis = BasisKind::two_flip(n);
    else if (kind == "qudit") {
        if (!(hs >> d)) throw StateFormatError(ln, "qudit header needs local dimension d");
        basis = BasisKind::qudit(n, d);
    } else throw StateFormatError(ln, "unknown basis kind '" + kind + "'");

    Vec amps = Vec::Zero(basis.dimension());
    std::vector<bool> seen(basis.dimension(), false);
    while (std::getline(is, line)) {
        ++ln;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        long long idx;
        double re, im;
        if (!(ls >> idx >> re >> im))
            throw StateFormatError(ln, "expected '<index> <real> <imag>'");
        if (idx < 0 || static_cast<std::size_t>(idx) >= basis.dimension())
            throw StateFormatError(ln, "index out of range");
        if (seen[idx]) throw StateFormatError(ln, "duplicate index");
        seen[idx] = true;
        amps[idx] = cd{re, im};
    }
    double n2 = amps.squaredNorm();
    if (std::abs(n2 - 1.0) > 1e-6)
        throw StateFormatError(ln, "state not normalized (norm^2 = " + std::to_string(n2) + ")");
    amps /= std::sqrt(n2);
    return PureState(basis, std::move(amps));
}

}  // namespace epp
