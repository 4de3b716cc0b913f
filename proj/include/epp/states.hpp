#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "basis.hpp"

namespace epp {

struct SupersingletParams {
    int n_parties;
    int local_dim;
};

// totally antisymmetric N-qudit state, d = N: amplitude epsilon_{s1..sN}/sqrt(N!)
inline PureState supersinglet(const SupersingletParams& params) {
    if (params.n_parties < 2) throw std::invalid_argument("supersinglet: need N >= 2");
    if (params.local_dim != params.n_parties)
        throw std::invalid_argument("supersinglet: d = N required (normalization)");
    const int n = params.n_parties;
    BasisKind basis = BasisKind::qudit(n, n);
    Vec amps = Vec::Zero(basis.dimension());
    double fact = 1.0;
    for (int i = 2; i <= n; ++i) fact *= i;
    const double scale = 1.0 / std::sqrt(fact);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    do {
        int inv = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (perm[i] > perm[j]) ++inv;
        std::size_t idx = 0;  // big-endian: site 1 most significant
        for (int pos = 0; pos < n; ++pos) idx = idx * n + perm[pos];
        amps[idx] = cd{(inv & 1) ? -scale : scale, 0.0};
    } while (std::next_permutation(perm.begin(), perm.end()));
    return PureState(basis, std::move(amps));
}

}  // namespace epp
