#pragma once

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace epp {

// Periodic ring of spin sites, 1-indexed externally (site N+1 == site 1).
struct RingGeometry {
    int n_sites;

    explicit RingGeometry(int n) : n_sites(n) {
        if (n < 2) throw std::invalid_argument("RingGeometry: need n_sites >= 2");
    }

    // wraps any integer offset back into 1..N
    int wrap(int site) const {
        int m = (site - 1) % n_sites;
        if (m < 0) m += n_sites;
        return m + 1;
    }
    int neighbor(int site, int step = 1) const { return wrap(site + step); }
};

// Ordered list of distinct sites (contiguous block in all the studied setups,
// but any distinct list is accepted).
struct Region {
    std::vector<int> sites;

    Region() = default;
    explicit Region(std::vector<int> s) : sites(std::move(s)) {
        std::set<int> uniq(sites.begin(), sites.end());
        if (uniq.size() != sites.size())
            throw std::invalid_argument("Region: repeated site");
    }

    int size() const { return static_cast<int>(sites.size()); }
    bool contains(int site) const {
        return std::find(sites.begin(), sites.end(), site) != sites.end();
    }

    void check_against(int n_sites) const {
        for (int s : sites)
            if (s < 1 || s > n_sites)
                throw std::invalid_argument("Region: site " + std::to_string(s) +
                                            " outside 1.." + std::to_string(n_sites));
    }
};

inline bool disjoint(const Region& a, const Region& b) {
    for (int s : a.sites)
        if (b.contains(s)) return false;
    return true;
}

// contiguous block of `width` sites centered on `pole` (ring wraparound, 1-based):
// [pole - floor((width-1)/2), pole + ceil((width-1)/2)]
inline Region block_at_pole(const RingGeometry& g, int pole, int width) {
    if (width < 1 || width > g.n_sites)
        throw std::invalid_argument("block_at_pole: bad width");
    std::vector<int> sites;
    int lo = pole - (width - 1) / 2;
    for (int i = 0; i < width; ++i) sites.push_back(g.wrap(lo + i));
    return Region(sites);
}

inline Region concat_regions(const Region& a, const Region& b) {
    std::vector<int> s = a.sites;
    s.insert(s.end(), b.sites.begin(), b.sites.end());
    return Region(s);
}

}  // namespace epp
