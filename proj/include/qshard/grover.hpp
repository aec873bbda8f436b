#pragma once

#include <cmath>
#include <functional>
#include <numbers>

#include "qshard/gates.hpp"

namespace qshard {

// Grover noise injection point t is "after iteration t" (0 = after the
// initial HALL), so a standard run exposes n_t + 1 checkpoints.

inline int grover_iteration_count(int nq) {
    return static_cast<int>(std::lround(std::numbers::pi / 4.0 *
                                        std::sqrt(static_cast<double>(std::uint64_t{1} << nq))));
}

struct GroverConfig {
    int nq;
    GlobalIndex marked;
    int n_t;

    static GroverConfig standard(int nq, GlobalIndex marked) {
        if (nq < 1 || nq > kMaxQubits) throw InputError("grover: qubit count out of range");
        if (marked >= (GlobalIndex{1} << nq)) throw IndexError("grover: marked index out of range");
        return {nq, marked, grover_iteration_count(nq)};
    }

    int injection_points() const { return n_t + 1; }
};

/// Flip the sign of the marked amplitude. Purely local to the owning rank.
inline void grover_oracle(GlobalIndex marked, Shard& s, const Topology& t) {
    if (marked >= t.dim()) throw IndexError("grover_oracle: marked index out of range");
    if (s.owns(marked)) s.amps[marked - s.base] = -s.amps[marked - s.base];
}

/// 2|0...0><0...0| - I: every amplitude changes sign except n = 0. Local.
inline void grover_inversion(Shard& s, const Topology&) {
    for (cxd& c : s.amps) c = -c;
    if (s.base == 0) s.amps[0] = -s.amps[0];
}

struct GroverResult {
    int n_t = 0;
    double success_probability = 0.0;
    std::vector<double> trace; // |C_marked|^2 after 0..n_t iterations
    Shard state;
};

/// Probability of the marked item, read on its owning rank and shared.
inline double marked_probability(GlobalIndex marked, const Shard& s, const Topology& t, Transport& tr) {
    const int owner = t.locate(marked).section;
    double p = 0.0;
    if (tr.rank() == owner) p = std::norm(s.amps[marked - s.base]);
    return tr.broadcast_double(owner, p);
}

/// Full search: HALL on |0...0>, then n_t rounds of
/// oracle, HALL, inversion, HALL.
inline GroverResult grover_run(const GroverConfig& cfg, const Topology& t, Transport& tr,
                               const NoiseHook& noise = {}, bool record_trace = false) {
    if (cfg.nq != t.nq) throw InputError("grover_run: config / topology qubit mismatch");
    GroverResult res;
    res.n_t = cfg.n_t;
    res.state = init_basis(cfg.nq, 0, t);
    hall(res.state, t, tr);
    if (noise) noise(0, res.state, t, tr);
    if (record_trace) res.trace.push_back(marked_probability(cfg.marked, res.state, t, tr));
    for (int it = 1; it <= cfg.n_t; ++it) {
        grover_oracle(cfg.marked, res.state, t);
        hall(res.state, t, tr);
        grover_inversion(res.state, t);
        hall(res.state, t, tr);
        if (noise) noise(it, res.state, t, tr);
        if (record_trace) res.trace.push_back(marked_probability(cfg.marked, res.state, t, tr));
    }
    res.success_probability = marked_probability(cfg.marked, res.state, t, tr);
    return res;
}

} // namespace qshard
