#pragma once

#include <bit>
#include <cstdint>
#include <string>

#include "qshard/errors.hpp"

namespace qshard {

using GlobalIndex = std::uint64_t;

/// Hard ceiling on qubit count: global indices must fit comfortably in
/// 64-bit integers.
inline constexpr int kMaxQubits = 62;

inline bool is_power_of_two(std::uint64_t x) { return x != 0 && (x & (x - 1)) == 0; }

inline int exact_log2(std::uint64_t x) {
    if (!is_power_of_two(x)) throw ConfigError("exact_log2: " + std::to_string(x) + " is not a power of two");
    return std::bit_width(x) - 1;
}

struct SectionSeat {
    int section;       // rank owning the amplitude
    std::uint64_t seat; // offset within that rank's slice
};

/// Map a global amplitude index to (owning rank, local offset) under the
/// standard-order contiguous layout with n_x amplitudes per rank.
inline SectionSeat section_seat(GlobalIndex n, std::uint64_t n_x) {
    if (!is_power_of_two(n_x)) throw InputError("section_seat: slice length must be a power of two");
    return {static_cast<int>(n / n_x), n % n_x};
}

/// True iff both partner amplitudes of any pair struck on qubit i_s live on
/// one rank, i.e. the qubit's stride stays inside a slice. Holds exactly
/// when i_s > p for 2^p ranks.
inline bool same_section(int i_s, int p) {
    if (i_s < 1) throw InputError("same_section: qubit index must be >= 1");
    if (p < 0) throw InputError("same_section: negative log2 rank count");
    return i_s > p;
}

/// Rank layout of one communicator: nq qubits sharded in standard order over
/// 2^p ranks, n_x = 2^(nq-p) amplitudes each. The group_* fields record how
/// this communicator was carved out of its parent (group_count == 1 and
/// group_id == 0 for a flat, unsplit run; then group_rank == rank).
struct Topology {
    int nq = 0;
    int p = 0;
    int rank = 0;
    std::uint64_t n_x = 0;
    int group_count = 1;
    int group_id = 0;
    int group_rank = 0;

    static Topology flat(int nq, int nranks, int rank) {
        if (nq < 1 || nq > kMaxQubits) throw ConfigError("Topology: qubit count out of range");
        if (!is_power_of_two(static_cast<std::uint64_t>(nranks)))
            throw ConfigError("Topology: rank count must be a power of two");
        Topology t;
        t.nq = nq;
        t.p = exact_log2(static_cast<std::uint64_t>(nranks));
        if (t.p > nq) throw ConfigError("Topology: more ranks than amplitudes (p > nq)");
        if (rank < 0 || rank >= nranks) throw ConfigError("Topology: rank id out of range");
        t.rank = rank;
        t.n_x = std::uint64_t{1} << (nq - t.p);
        t.group_rank = rank;
        return t;
    }

    int nranks() const { return 1 << p; }
    GlobalIndex dim() const { return GlobalIndex{1} << nq; }
    GlobalIndex base() const { return static_cast<GlobalIndex>(rank) * n_x; }

    /// Stride of qubit i_s: the index distance between the two amplitudes it couples.
    std::uint64_t stride(int i_s) const {
        check_qubit(i_s);
        return std::uint64_t{1} << (nq - i_s);
    }

    SectionSeat locate(GlobalIndex n) const {
        if (n >= dim()) throw IndexError("locate: amplitude index out of range");
        return section_seat(n, n_x);
    }

    bool qubit_is_local(int i_s) const {
        check_qubit(i_s);
        return same_section(i_s, p);
    }

    void check_qubit(int i_s) const {
        if (i_s < 1 || i_s > nq)
            throw InputError("qubit index " + std::to_string(i_s) + " outside 1.." + std::to_string(nq));
    }

    /// Contiguous-block group split: 2^p ranks into `group_count` groups of
    /// 2^p / group_count ranks each. Returns the topology of this rank's
    /// group communicator.
    Topology split(int new_group_count) const {
        if (new_group_count < 1 || !is_power_of_two(static_cast<std::uint64_t>(new_group_count)))
            throw ConfigError("split: group count must be a power of two");
        if (new_group_count > nranks())
            throw ConfigError("split: group count " + std::to_string(new_group_count) +
                              " does not divide rank count " + std::to_string(nranks()));
        const int group_size = nranks() / new_group_count;
        Topology g;
        g.nq = nq;
        g.p = exact_log2(static_cast<std::uint64_t>(group_size));
        g.group_count = new_group_count;
        g.group_id = rank / group_size;
        g.group_rank = rank % group_size;
        g.rank = g.group_rank;
        g.n_x = std::uint64_t{1} << (nq - g.p);
        return g;
    }
};

} // namespace qshard
