#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "qshard/dense_reference.hpp"
#include "qshard/inprocess.hpp"
#include "qshard/rng.hpp"
#include "qshard/statevector.hpp"

namespace testsupport {

using qshard::cxd;

/// Random normalized state vector of 2^nq amplitudes.
inline std::vector<cxd> random_state(int nq, qshard::Rng& rng) {
    std::vector<cxd> v(std::size_t{1} << nq);
    double norm = 0.0;
    for (cxd& c : v) {
        c = cxd(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
        norm += std::norm(c);
    }
    const double scale = 1.0 / std::sqrt(norm);
    for (cxd& c : v) c *= scale;
    return v;
}

/// Random unitary via Gram-Schmidt on random complex columns.
template <std::size_t N>
std::array<std::array<cxd, N>, N> random_unitary(qshard::Rng& rng) {
    std::array<std::array<cxd, N>, N> cols;
    for (std::size_t j = 0; j < N; ++j) {
        for (std::size_t i = 0; i < N; ++i)
            cols[j][i] = cxd(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
        for (std::size_t prev = 0; prev < j; ++prev) {
            cxd dot(0.0, 0.0);
            for (std::size_t i = 0; i < N; ++i) dot += std::conj(cols[prev][i]) * cols[j][i];
            for (std::size_t i = 0; i < N; ++i) cols[j][i] -= dot * cols[prev][i];
        }
        double norm = 0.0;
        for (std::size_t i = 0; i < N; ++i) norm += std::norm(cols[j][i]);
        const double scale = 1.0 / std::sqrt(norm);
        for (std::size_t i = 0; i < N; ++i) cols[j][i] *= scale;
    }
    // Transpose columns into row-major matrix form.
    std::array<std::array<cxd, N>, N> m;
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j) m[i][j] = cols[j][i];
    return m;
}

inline qshard::Gate2 random_gate2(qshard::Rng& rng) { return qshard::Gate2{random_unitary<2>(rng)}; }
inline qshard::Gate4 random_gate4(qshard::Rng& rng) { return qshard::Gate4{random_unitary<4>(rng)}; }

/// Scatter a full state vector into this rank's shard.
inline qshard::Shard shard_of(const std::vector<cxd>& full, const qshard::Topology& t) {
    qshard::Shard s = qshard::Shard::zeros(t);
    for (std::uint64_t o = 0; o < t.n_x; ++o) s.amps[o] = full[s.base + o];
    return s;
}

/// Run `body` on 2^p in-process ranks and return the root-gathered state it
/// leaves behind. The body receives (topology, transport, shard) with the
/// shard pre-loaded from `initial`.
inline std::vector<cxd> run_sharded(
    int nq, int p, const std::vector<cxd>& initial,
    const std::function<void(const qshard::Topology&, qshard::Transport&, qshard::Shard&)>& body,
    qshard::ExecMode mode = qshard::ExecMode::SingleThread) {
    std::vector<cxd> result;
    qshard::run_ranks(1 << p, mode, [&](qshard::Transport& tr) {
        const auto t = qshard::Topology::flat(nq, tr.size(), tr.rank());
        qshard::Shard s = shard_of(initial, t);
        body(t, tr, s);
        auto full = qshard::gather_state(s, t, tr);
        if (tr.rank() == 0) result = std::move(full);
    });
    return result;
}

inline double max_abs_diff(const std::vector<cxd>& a, const std::vector<cxd>& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

/// Smallest r >= 1 with x^r = 1 (mod m): the classical period oracle.
inline std::uint64_t brute_force_order(std::uint64_t x, std::uint64_t m) {
    std::uint64_t value = x % m;
    std::uint64_t r = 1;
    while (value != 1) {
        value = value * x % m;
        ++r;
    }
    return r;
}

} // namespace testsupport
