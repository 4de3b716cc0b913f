#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "basis.hpp"
#include "csv.hpp"
#include "extraction.hpp"
#include "geometry.hpp"
#include "groundstate.hpp"
#include "linalg.hpp"
#include "quench.hpp"
#include "search.hpp"
#include "states.hpp"

namespace epp {

// measurement blocks centered on diametrically opposite ring poles
inline std::pair<Region, Region> polar_blocks(const RingGeometry& g, int width_a, int width_b) {
    return {block_at_pole(g, g.n_sites / 4, width_a),
            block_at_pole(g, 3 * g.n_sites / 4, width_b)};
}

inline std::string subset_string(std::uint32_t mask) {  // "1+3" style, 1-based members
    std::string out;
    for (int p = 0; p < 32; ++p)
        if (mask & (std::uint32_t{1} << p)) {
            if (!out.empty()) out += '+';
            out += std::to_string(p + 1);
        }
    return out;
}

// ---- supersinglet table ----

inline CsvTable cmd_supersinglet(int n) {
    if (n < 2 || n > 5)
        throw std::invalid_argument("supersinglet: --n must lie in [2, 5]");
    PureState psi = supersinglet({n, n});
    SearchResult sr = optimize_epp(psi, Region({1}), Region({2}));
    CsvTable t{{"N", "best_epp", "probability", "entropy"}, {}};
    t.add_row({fmt_int(n), fmt_g12(sr.best_epp), fmt_g12(sr.best ? sr.best->probability : 0.0),
               fmt_g12(sr.best ? sr.best->entropy : 0.0)});
    return t;
}

// ---- quench figure ----

struct QuenchOptions {
    int n = 24;
    int r1 = 10, r2 = 14;
    double t_max = 6.0, dt = 0.05;
    std::vector<int> blocks = {2, 4, 6, 8, 10, 12};
    std::optional<std::pair<Region, Region>> placement;  // explicit regions override blocks
};

inline CsvTable cmd_quench(const QuenchOptions& opt) {
    if (opt.dt <= 0.0 || opt.t_max < 0.0)
        throw std::invalid_argument("quench: need dt > 0 and t-max >= 0");
    RingGeometry g(opt.n);
    std::vector<std::pair<Region, Region>> configs;
    if (opt.placement) {
        configs.push_back(*opt.placement);
    } else {
        std::vector<int> blocks = opt.blocks;
        std::sort(blocks.begin(), blocks.end());
        for (int w : blocks) configs.push_back(polar_blocks(g, w, w));
    }
    std::vector<Projector> pas, pbs;
    for (auto& [ra, rb] : configs) {
        if (!disjoint(ra, rb)) throw std::invalid_argument("quench: regions overlap");
        pas.push_back(block_flip_projector(ra, opt.n));
        pbs.push_back(block_flip_projector(rb, opt.n));
    }

    const int steps = static_cast<int>(std::llround(opt.t_max / opt.dt));
    std::vector<std::vector<std::vector<std::string>>> rows(configs.size());
    for (int i = 0; i <= steps; ++i) {
        double tval = i * opt.dt;
        PureState st = evolved_state(QuenchSetup(g, opt.r1, opt.r2, tval));
        for (std::size_t c = 0; c < configs.size(); ++c) {
            ExtractionOutcome oc = apply_projection(st, pas[c], pbs[c]);
            rows[c].push_back({fmt_g12(tval), fmt_int(configs[c].first.size()),
                               fmt_int(configs[c].second.size()),
                               fmt_g12(oc.entropy.value_or(0.0)), fmt_g12(oc.probability),
                               fmt_g12(oc.epp)});
        }
    }
    CsvTable t{{"t", "delta_A", "delta_B", "entropy", "probability", "epp"}, {}};
    for (auto& block_rows : rows)
        for (auto& r : block_rows) t.add_row(std::move(r));
    return t;
}

// ---- ground-state figure ----

struct GroundstateOptions {
    int n = 24;
    std::optional<double> h;  // default: midpoint of the m=2 window
    int delta_max = 0;        // default: n/2
};

inline CsvTable cmd_groundstate(const GroundstateOptions& opt, std::ostream* warn = nullptr) {
    RingGeometry g(opt.n);
    FieldWindow win = m2_window(g);
    const double h = opt.h ? *opt.h : win.midpoint();
    if (!win.contains(h) && warn)
        *warn << "warning: field " << h << " lies outside the two-flip ground window ("
              << win.lo << ", " << win.hi << "); the m=2 sector state is used anyway\n";
    const int dmax = opt.delta_max > 0 ? opt.delta_max : opt.n / 2;
    if (dmax < 2 || 2 * dmax > opt.n)
        throw std::invalid_argument("groundstate: --delta-max must lie in [2, N/2]");
    PureState st = two_flip_ground_state(g);
    CsvTable t{{"delta_A", "entropy", "probability", "epp"}, {}};
    for (int w = 2; w <= dmax; ++w) {
        auto [ra, rb] = polar_blocks(g, w, w);
        ExtractionOutcome oc =
            apply_projection(st, block_flip_projector(ra, opt.n), block_flip_projector(rb, opt.n));
        t.add_row({fmt_int(w), fmt_g12(oc.entropy.value_or(0.0)), fmt_g12(oc.probability),
                   fmt_g12(oc.epp)});
    }
    return t;
}

// ---- XY parameter sweep ----

struct SweepOptions {
    double gamma_start = -1.0, gamma_stop = 1.0, gamma_step = 0.05;
    double h_start = -2.0, h_stop = 2.0, h_step = 0.05;
    int workers = 1;
};

inline std::vector<double> grid_values(double start, double stop, double step) {
    if (step <= 0.0) throw std::invalid_argument("sweep: grid step must be positive");
    if (stop < start) throw std::invalid_argument("sweep: empty grid range");
    std::vector<double> out;
    const int count = static_cast<int>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (int i = 0; i < count; ++i) {
        double v = start + i * step;
        if (std::abs(v) < 1e-9) v = 0.0;
        out.push_back(v);
    }
    return out;
}

struct SweepRow {
    double gamma = 0.0, h = 0.0, parity = 0.0;
    int degeneracy = 0;
    double max_entropy = 0.0, max_probability = 0.0, epp = 0.0;
};

// one grid point: resolve the (possibly degenerate) ground cluster into parity
// eigenstates, search each, report the best E_PP and that state's parity
inline SweepRow sweep_point(int n, double gamma, double h, const Region& a, const Region& b) {
    GroundStateReport gs = ground_state(build_hamiltonian({n, gamma, h}));
    SweepRow row;
    row.gamma = gamma;
    row.h = h;
    row.degeneracy = gs.degeneracy;
    bool first = true;
    for (const ParityState& ps : parity_resolve(gs.cluster, n)) {
        SearchResult sr = optimize_epp(ps.state, a, b);
        double me = 0.0, mp = 0.0;
        for (const PureCandidate& c : sr.all_pure_candidates) {
            me = std::max(me, c.entropy);
            mp = std::max(mp, c.probability);
        }
        if (first || sr.best_epp > row.epp) {
            row.parity = ps.parity;
            row.max_entropy = me;
            row.max_probability = mp;
            row.epp = sr.best_epp;
            first = false;
        }
    }
    return row;
}

inline CsvTable cmd_sweep(const SweepOptions& opt) {
    const int n = 6;  // 2-site regions separated by single sites: 2+1+2+1
    const Region a({1, 2}), b({4, 5});
    const std::vector<double> gammas =
        grid_values(opt.gamma_start, opt.gamma_stop, opt.gamma_step);
    const std::vector<double> hs = grid_values(opt.h_start, opt.h_stop, opt.h_step);

    std::vector<SweepRow> rows(gammas.size() * hs.size());
    auto compute = [&](std::size_t idx) {
        const double gamma = gammas[idx / hs.size()];
        const double h = hs[idx % hs.size()];
        rows[idx] = sweep_point(n, gamma, h, a, b);
    };
    if (opt.workers <= 1) {
        for (std::size_t idx = 0; idx < rows.size(); ++idx) compute(idx);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < opt.workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t idx = next.fetch_add(1); idx < rows.size();
                     idx = next.fetch_add(1))
                    compute(idx);
            });
        for (auto& th : pool) th.join();
    }

    CsvTable t{{"gamma", "h", "parity", "degeneracy", "max_entropy", "max_probability", "epp"},
               {}};
    for (const SweepRow& r : rows)
        t.add_row({fmt_g12(r.gamma), fmt_g12(r.h), fmt_g12(r.parity), fmt_int(r.degeneracy),
                   fmt_g12(r.max_entropy), fmt_g12(r.max_probability), fmt_g12(r.epp)});
    return t;
}

// ---- generic search over a state file ----

inline CsvTable cmd_search_state(const PureState& state, const Region& a, const Region& b) {
    SearchResult sr = optimize_epp(state, a, b);
    CsvTable t{{"row_kind", "j", "mu", "nu", "probability", "entropy", "epp"}, {}};
    for (const PureCandidate& c : sr.all_pure_candidates)
        t.add_row({"candidate", fmt_int(c.candidate.j + 1), subset_string(c.candidate.mu),
                   subset_string(c.candidate.nu), fmt_g12(c.probability), fmt_g12(c.entropy),
                   fmt_g12(c.epp)});
    for (const CaseBDetection& cb : sr.case_b_detections)
        t.add_row({"case_b", fmt_int(cb.j + 1), subset_string(cb.mu), subset_string(cb.nu), "0",
                   "0", "0"});
    if (sr.best)
        t.add_row({"best", fmt_int(sr.best->candidate.j + 1),
                   subset_string(sr.best->candidate.mu), subset_string(sr.best->candidate.nu),
                   fmt_g12(sr.best->probability), fmt_g12(sr.best->entropy),
                   fmt_g12(sr.best->epp)});
    else
        t.add_row({"best", "-", "-", "-", "0", "0", "0"});
    return t;
}

}  // namespace epp
