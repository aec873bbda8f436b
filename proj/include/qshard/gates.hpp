#pragma once

#include <array>
#include <bit>
#include <functional>
#include <cmath>
#include <numbers>

#include "qshard/statevector.hpp"

namespace qshard {

inline constexpr double kUnitarityTol = 1e-12;

/// Hook fired at an algorithm's declared noise injection points: eloc is the
/// checkpoint index, defined per algorithm.
using NoiseHook = std::function<void(int eloc, Shard&, const Topology&, Transport&)>;

/// 2x2 one-qubit operator; m[a][b] is the amplitude for |b> -> |a>.
struct Gate2 {
    std::array<std::array<cxd, 2>, 2> m{};

    /// Construct with a unitarity check (m^dagger m = I within 1e-12).
    static Gate2 unitary(const std::array<std::array<cxd, 2>, 2>& m) {
        Gate2 g{m};
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                cxd dot = 0.0;
                for (int k = 0; k < 2; ++k) dot += std::conj(m[k][i]) * m[k][j];
                if (std::abs(dot - (i == j ? 1.0 : 0.0)) > kUnitarityTol)
                    throw InputError("Gate2::unitary: matrix is not unitary");
            }
        return g;
    }
};

/// 4x4 two-qubit operator; row/column index is 2*q_s1 + q_s2.
struct Gate4 {
    std::array<std::array<cxd, 4>, 4> m{};

    static Gate4 unitary(const std::array<std::array<cxd, 4>, 4>& m) {
        Gate4 g{m};
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                cxd dot = 0.0;
                for (int k = 0; k < 4; ++k) dot += std::conj(m[k][i]) * m[k][j];
                if (std::abs(dot - (i == j ? 1.0 : 0.0)) > kUnitarityTol)
                    throw InputError("Gate4::unitary: matrix is not unitary");
            }
        return g;
    }
};

inline Gate2 identity2() { return {{{{1.0, 0.0}, {0.0, 1.0}}}}; }
inline Gate2 pauli_x() { return {{{{0.0, 1.0}, {1.0, 0.0}}}}; }
inline Gate2 pauli_y() { return {{{{0.0, cxd(0.0, -1.0)}, {cxd(0.0, 1.0), 0.0}}}}; }
inline Gate2 pauli_z() { return {{{{1.0, 0.0}, {0.0, -1.0}}}}; }
inline Gate2 not_gate() { return pauli_x(); }

inline Gate2 hadamard() {
    const double h = 1.0 / std::numbers::sqrt2;
    return {{{{h, h}, {h, -h}}}};
}

inline Gate4 identity4() {
    Gate4 g{};
    for (int i = 0; i < 4; ++i) g.m[i][i] = 1.0;
    return g;
}

/// Control = first index qubit: 00->00, 01->01, 10->11, 11->10.
inline Gate4 cnot_gate() {
    Gate4 g{};
    g.m[0][0] = g.m[1][1] = g.m[2][3] = g.m[3][2] = 1.0;
    return g;
}

/// 00->00, 01->01, 10->10, 11->-11.
inline Gate4 cphase_gate() {
    Gate4 g = identity4();
    g.m[3][3] = -1.0;
    return g;
}

/// Phase applied to |11>: exp(2 pi i / 2^k). k = 1 reduces to CPHASE.
inline cxd cphasek_phase(int k) {
    if (k < 1) throw InputError("cphasek: k must be >= 1");
    if (k == 1) return cxd(-1.0, 0.0);
    if (k == 2) return cxd(0.0, 1.0);
    return std::polar(1.0, 2.0 * std::numbers::pi / static_cast<double>(std::uint64_t{1} << k));
}

inline Gate4 cphasek_gate(int k) {
    Gate4 g = identity4();
    g.m[3][3] = cphasek_phase(k);
    return g;
}

inline Gate4 swap_gate() {
    Gate4 g{};
    g.m[0][0] = g.m[1][2] = g.m[2][1] = g.m[3][3] = 1.0;
    return g;
}

namespace detail {

struct Pair {
    cxd c0, c1;
};

/// Shared 2x2 kernel. Both the local and the cross-rank paths evaluate these
/// exact expressions, so gathered results are bit-identical for every rank
/// count.
inline Pair apply2(const Gate2& g, cxd c0, cxd c1) {
    return {g.m[0][0] * c0 + g.m[0][1] * c1, g.m[1][0] * c0 + g.m[1][1] * c1};
}

struct Quad {
    cxd c00, c01, c10, c11;
};

inline Quad apply4(const Gate4& g, cxd c00, cxd c01, cxd c10, cxd c11) {
    Quad out;
    out.c00 = g.m[0][0] * c00 + g.m[0][1] * c01 + g.m[0][2] * c10 + g.m[0][3] * c11;
    out.c01 = g.m[1][0] * c00 + g.m[1][1] * c01 + g.m[1][2] * c10 + g.m[1][3] * c11;
    out.c10 = g.m[2][0] * c00 + g.m[2][1] * c01 + g.m[2][2] * c10 + g.m[2][3] * c11;
    out.c11 = g.m[3][0] * c00 + g.m[3][1] * c01 + g.m[3][2] * c10 + g.m[3][3] * c11;
    return out;
}

/// Reorder a two-qubit operator for swapped qubit arguments: index 2a+b -> 2b+a.
inline Gate4 transpose_qubits(const Gate4& g) {
    static constexpr int perm[4] = {0, 2, 1, 3};
    Gate4 out;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) out.m[perm[i]][perm[j]] = g.m[i][j];
    return out;
}

inline void check_shard(const Shard& s, const Topology& t) {
    if (s.nq != t.nq || s.amps.size() != t.n_x || s.base != t.base())
        throw InputError("shard does not match topology layout");
}

} // namespace detail

/// Apply a one-qubit operator to qubit i_s of the sharded state. Collective:
/// every rank of the communicator must call with the same arguments. When the
/// qubit's stride leaves the slice, the whole slice is swapped with the one
/// peer rank holding the partner amplitudes (one message each way per gate).
inline void one_op(int i_s, const Gate2& g, Shard& s, const Topology& t, Transport& tr) {
    t.check_qubit(i_s);
    detail::check_shard(s, t);

    if (t.qubit_is_local(i_s)) {
        const std::uint64_t stride = t.stride(i_s);
        for (std::uint64_t block = 0; block < t.n_x; block += 2 * stride)
            for (std::uint64_t o = 0; o < stride; ++o) {
                cxd& c0 = s.amps[block + o];
                cxd& c1 = s.amps[block + o + stride];
                const detail::Pair out = detail::apply2(g, c0, c1);
                c0 = out.c0;
                c1 = out.c1;
            }
        return;
    }

    const int bit = (t.rank >> (t.p - i_s)) & 1; // which half of each pair this rank holds
    const int peer = t.rank ^ (1 << (t.p - i_s));
    std::vector<cxd> theirs(t.n_x);
    tr.exchange_block(peer, tag::gate_exchange, s.amps, theirs);
    if (bit == 0) {
        for (std::uint64_t o = 0; o < t.n_x; ++o)
            s.amps[o] = detail::apply2(g, s.amps[o], theirs[o]).c0;
    } else {
        for (std::uint64_t o = 0; o < t.n_x; ++o)
            s.amps[o] = detail::apply2(g, theirs[o], s.amps[o]).c1;
    }
}

/// Apply a two-qubit operator to qubits i_s1, i_s2. Cross-rank quartets are
/// resolved with at most two slice exchanges: one per struck qubit whose
/// stride leaves the slice.
inline void two_op(int i_s1, int i_s2, const Gate4& g, Shard& s, const Topology& t, Transport& tr) {
    t.check_qubit(i_s1);
    t.check_qubit(i_s2);
    if (i_s1 == i_s2) throw InputError("two_op: struck qubits must differ");
    if (i_s1 > i_s2) {
        two_op(i_s2, i_s1, detail::transpose_qubits(g), s, t, tr);
        return;
    }
    detail::check_shard(s, t);

    const bool local1 = t.qubit_is_local(i_s1);
    const bool local2 = t.qubit_is_local(i_s2); // i_s2 > i_s1, so local1 implies local2

    if (local1 && local2) {
        const std::uint64_t s1 = t.stride(i_s1);
        const std::uint64_t s2 = t.stride(i_s2);
        for (std::uint64_t hi = 0; hi < t.n_x; hi += 2 * s1)
            for (std::uint64_t mid = 0; mid < s1; mid += 2 * s2)
                for (std::uint64_t lo = 0; lo < s2; ++lo) {
                    const std::uint64_t q00 = hi + mid + lo;
                    const detail::Quad out = detail::apply4(g, s.amps[q00], s.amps[q00 + s2],
                                                            s.amps[q00 + s1], s.amps[q00 + s1 + s2]);
                    s.amps[q00] = out.c00;
                    s.amps[q00 + s2] = out.c01;
                    s.amps[q00 + s1] = out.c10;
                    s.amps[q00 + s1 + s2] = out.c11;
                }
        return;
    }

    if (!local1 && local2) {
        // Qubit i_s1 pairs across ranks, i_s2 stays inside the slice.
        const int bit1 = (t.rank >> (t.p - i_s1)) & 1;
        const int peer = t.rank ^ (1 << (t.p - i_s1));
        const std::uint64_t s2 = t.stride(i_s2);
        std::vector<cxd> theirs(t.n_x);
        tr.exchange_block(peer, tag::gate_exchange, s.amps, theirs);
        for (std::uint64_t block = 0; block < t.n_x; block += 2 * s2)
            for (std::uint64_t o = 0; o < s2; ++o) {
                const std::uint64_t l0 = block + o;
                const std::uint64_t l1 = l0 + s2;
                detail::Quad out;
                if (bit1 == 0) {
                    out = detail::apply4(g, s.amps[l0], s.amps[l1], theirs[l0], theirs[l1]);
                    s.amps[l0] = out.c00;
                    s.amps[l1] = out.c01;
                } else {
                    out = detail::apply4(g, theirs[l0], theirs[l1], s.amps[l0], s.amps[l1]);
                    s.amps[l0] = out.c10;
                    s.amps[l1] = out.c11;
                }
            }
        return;
    }

    // Both struck qubits pair across ranks: the quartet spans four ranks.
    // Round one swaps slices across i_s2, round two swaps the doubled buffer
    // across i_s1, after which every quartet member is on hand.
    const int bit1 = (t.rank >> (t.p - i_s1)) & 1;
    const int bit2 = (t.rank >> (t.p - i_s2)) & 1;
    const int peer2 = t.rank ^ (1 << (t.p - i_s2));
    const int peer1 = t.rank ^ (1 << (t.p - i_s1));

    std::vector<cxd> other2(t.n_x);
    tr.exchange_block(peer2, tag::gate_exchange, s.amps, other2);

    std::vector<cxd> mine2(2 * t.n_x);
    std::copy(s.amps.begin(), s.amps.end(), mine2.begin());
    std::copy(other2.begin(), other2.end(), mine2.begin() + static_cast<std::ptrdiff_t>(t.n_x));
    std::vector<cxd> across1(2 * t.n_x);
    tr.exchange_block(peer1, tag::gate_exchange, mine2, across1);

    // mine2 = [this rank, i_s2-partner], across1 = the same pair from the
    // i_s1-partner rank. Select the (q_s1, q_s2) member slices.
    const auto member = [&](int b1, int b2) -> const cxd* {
        const std::vector<cxd>& holder = (b1 == bit1) ? mine2 : across1;
        return holder.data() + ((b2 == bit2) ? 0 : t.n_x);
    };
    const cxd* c00 = member(0, 0);
    const cxd* c01 = member(0, 1);
    const cxd* c10 = member(1, 0);
    const cxd* c11 = member(1, 1);
    for (std::uint64_t o = 0; o < t.n_x; ++o) {
        const detail::Quad out = detail::apply4(g, c00[o], c01[o], c10[o], c11[o]);
        if (bit1 == 0)
            s.amps[o] = (bit2 == 0) ? out.c00 : out.c01;
        else
            s.amps[o] = (bit2 == 0) ? out.c10 : out.c11;
    }
}

inline void cnot(int control, int target, Shard& s, const Topology& t, Transport& tr) {
    two_op(control, target, cnot_gate(), s, t, tr);
}

/// Multiply the |11> amplitude of every struck pair by `phase`. Diagonal, so
/// it is applied locally on each rank — no messages regardless of which
/// qubits are struck.
inline void controlled_phase(int i_s1, int i_s2, cxd phase, Shard& s, const Topology& t) {
    t.check_qubit(i_s1);
    t.check_qubit(i_s2);
    if (i_s1 == i_s2) throw InputError("controlled_phase: struck qubits must differ");
    detail::check_shard(s, t);
    const GlobalIndex m1 = t.stride(i_s1);
    const GlobalIndex m2 = t.stride(i_s2);
    for (std::uint64_t o = 0; o < t.n_x; ++o) {
        const GlobalIndex n = s.base + o;
        if ((n & m1) && (n & m2)) s.amps[o] *= phase;
    }
}

inline void cphasek(int i_s1, int i_s2, int k, Shard& s, const Topology& t, Transport&) {
    controlled_phase(i_s1, i_s2, cphasek_phase(k), s, t);
}

inline void cphase(int control, int target, Shard& s, const Topology& t, Transport& tr) {
    cphasek(control, target, 1, s, t, tr);
}

inline void swap_qubits(int i, int j, Shard& s, const Topology& t, Transport& tr) {
    if (i == j) throw InputError("swap_qubits: qubits must differ");
    two_op(i, j, swap_gate(), s, t, tr);
}

/// Hadamard on every qubit in sequence: the uniform-superposition builder.
inline void hall(Shard& s, const Topology& t, Transport& tr) {
    const Gate2 h = hadamard();
    for (int i_s = 1; i_s <= t.nq; ++i_s) one_op(i_s, h, s, t, tr);
}

/// Sign of the all-qubit Hadamard matrix element between basis labels n and
/// np: (-1)^(number of bit positions where both are 1).
inline int sh_sign(int nq, GlobalIndex n, GlobalIndex np) {
    const GlobalIndex dim = GlobalIndex{1} << nq;
    if (n >= dim || np >= dim) throw IndexError("sh_sign: basis label out of range");
    return (std::popcount(n & np) & 1) ? -1 : 1;
}

/// All-qubit Hadamard as one dense mixing pass: every output amplitude sums
/// all inputs with +-1 signs, so the full vector is all-gathered first.
inline void hall2(Shard& s, const Topology& t, Transport& tr) {
    detail::check_shard(s, t);
    std::vector<cxd> full(t.dim());
    tr.all_gather(s.amps, full);
    const double scale = 1.0 / std::sqrt(static_cast<double>(t.dim()));
    for (std::uint64_t o = 0; o < t.n_x; ++o) {
        const GlobalIndex n = s.base + o;
        cxd acc(0.0, 0.0);
        for (GlobalIndex np = 0; np < t.dim(); ++np) {
            const cxd term = full[np];
            acc += (std::popcount(n & np) & 1) ? -term : term;
        }
        s.amps[o] = scale * acc;
    }
}

} // namespace qshard
