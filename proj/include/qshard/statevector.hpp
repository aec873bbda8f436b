#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <span>
#include <vector>

#include "qshard/topology.hpp"
#include "qshard/transport.hpp"

namespace qshard {

/// One rank's contiguous slice of the state vector, kept in standard order:
/// amps[s] is the amplitude of global basis index base + s.
struct Shard {
    int nq = 0;
    GlobalIndex base = 0;
    std::vector<cxd> amps;

    static Shard zeros(const Topology& t) {
        Shard s;
        s.nq = t.nq;
        s.base = t.base();
        s.amps.assign(t.n_x, cxd(0.0, 0.0));
        return s;
    }

    bool owns(GlobalIndex n) const { return n >= base && n < base + amps.size(); }
};

/// Binary digits of a basis label, most significant qubit first:
/// bits[0] is qubit 1. Value is sum of bits[i-1] * 2^(nq-i).
using BitString = std::vector<int>;

inline GlobalIndex bintodec(int nq, std::span<const int> bits) {
    if (static_cast<int>(bits.size()) != nq) throw InputError("bintodec: bit count != nq");
    GlobalIndex n = 0;
    for (int b : bits) {
        if (b != 0 && b != 1) throw InputError("bintodec: digit not 0/1");
        n = (n << 1) | static_cast<GlobalIndex>(b);
    }
    return n;
}

inline BitString dectobin(int nq, GlobalIndex n) {
    if (nq < 1 || nq > kMaxQubits) throw InputError("dectobin: qubit count out of range");
    if (n >= (GlobalIndex{1} << nq)) throw IndexError("dectobin: value needs more qubits");
    BitString bits(nq);
    for (int i = 0; i < nq; ++i) bits[i] = static_cast<int>((n >> (nq - 1 - i)) & 1);
    return bits;
}

/// The partner of n0 under qubit i_s: same label with bit i_s flipped to 1.
/// n0 must have bit i_s clear.
inline GlobalIndex partner(GlobalIndex n0, int i_s, int nq) {
    if (i_s < 1 || i_s > nq) throw InputError("partner: qubit index out of range");
    const GlobalIndex stride = GlobalIndex{1} << (nq - i_s);
    if ((n0 & stride) != 0) throw InputError("partner: struck bit of n0 already set");
    return n0 + stride;
}

struct QuartetIndices {
    GlobalIndex n01;
    GlobalIndex n10;
    GlobalIndex n11;
};

/// The three partners of n00 under qubits i_s1 < i_s2 (both bits clear in n00).
inline QuartetIndices quartet(GlobalIndex n00, int i_s1, int i_s2, int nq) {
    if (i_s1 == i_s2) throw InputError("quartet: struck qubits must differ");
    if (i_s1 < 1 || i_s2 < 1 || i_s1 > nq || i_s2 > nq) throw InputError("quartet: qubit index out of range");
    if (i_s1 > i_s2) throw InputError("quartet: expects i_s1 < i_s2");
    const GlobalIndex s1 = GlobalIndex{1} << (nq - i_s1);
    const GlobalIndex s2 = GlobalIndex{1} << (nq - i_s2);
    if ((n00 & s1) != 0 || (n00 & s2) != 0) throw InputError("quartet: struck bits of n00 not clear");
    return {n00 + s2, n00 + s1, n00 + s1 + s2};
}

/// Basis state |n>: amplitude 1 on the owning rank, 0 everywhere else.
inline Shard init_basis(int nq, GlobalIndex n, const Topology& t) {
    if (nq != t.nq) throw InputError("init_basis: qubit count disagrees with topology");
    if (n >= t.dim()) throw IndexError("init_basis: basis index out of range");
    Shard s = Shard::zeros(t);
    const SectionSeat loc = t.locate(n);
    if (loc.section == t.rank) s.amps[loc.seat] = cxd(1.0, 0.0);
    return s;
}

/// Full state vector at the root (rank 0 of the communicator), empty elsewhere.
inline std::vector<cxd> gather_state(const Shard& s, const Topology& t, Transport& tr) {
    std::vector<cxd> full;
    if (tr.rank() == 0) full.resize(t.dim());
    tr.gather(0, s.amps, full);
    return full;
}

/// Squared norm, accumulated in global index order at the root and shared
/// with every rank. Summation order is fixed so the value does not depend on
/// how many ranks the state is sharded over.
inline double norm_sq(const Shard& s, const Topology& t, Transport& tr) {
    std::vector<cxd> full = gather_state(s, t, tr);
    double total = 0.0;
    if (tr.rank() == 0)
        for (const cxd& c : full) total += std::norm(c);
    return tr.broadcast_double(0, total);
}

/// Text dump, one line per amplitude: "index re im" in standard order.
inline void dump_state(std::ostream& os, std::span<const cxd> full) {
    char line[96];
    for (std::size_t n = 0; n < full.size(); ++n) {
        std::snprintf(line, sizeof line, "%zu %.17g %.17g\n", n, full[n].real(), full[n].imag());
        os << line;
    }
}

} // namespace qshard
