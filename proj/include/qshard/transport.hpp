#pragma once

#include <algorithm>
#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "qshard/errors.hpp"

namespace qshard {

using cxd = std::complex<double>;

/// Fixed tags, one per communication context. Tags are redundant with
/// program order (all operations are collective) but catch protocol bugs as
/// hard errors instead of silent corruption.
namespace tag {
inline constexpr std::uint32_t gate_exchange = 1;
inline constexpr std::uint32_t gather = 2;
inline constexpr std::uint32_t broadcast = 3;
inline constexpr std::uint32_t scalars = 4;
inline constexpr std::uint32_t density = 5;
} // namespace tag

/// Message-passing contract between ranks. Point-to-point delivery between a
/// fixed ordered pair is FIFO; collectives are built on top of send/recv in
/// deterministic rank order so a given program sees the same message streams
/// on every backend.
class Transport {
public:
    virtual ~Transport() = default;

    virtual int rank() const = 0;
    virtual int size() const = 0;

    virtual void send(int peer, std::uint32_t tag, std::span<const cxd> data) = 0;
    virtual void recv(int peer, std::uint32_t tag, std::span<cxd> out) = 0;

    /// Pairwise block swap. Both ranks must call with each other as peer and
    /// equal lengths. Lower rank sends first, higher rank receives first, so
    /// the pairing can never deadlock; a self-exchange copies locally and
    /// sends nothing.
    void exchange_block(int peer, std::uint32_t tag, std::span<const cxd> send_buf, std::span<cxd> recv_buf) {
        if (peer < 0 || peer >= size()) throw TransportError("exchange_block: peer out of range");
        if (send_buf.size() != recv_buf.size()) throw TransportError("exchange_block: length mismatch");
        if (send_buf.empty()) return;
        if (peer == rank()) {
            std::copy(send_buf.begin(), send_buf.end(), recv_buf.begin());
            return;
        }
        if (rank() < peer) {
            send(peer, tag, send_buf);
            recv(peer, tag, recv_buf);
        } else {
            recv(peer, tag, recv_buf);
            send(peer, tag, send_buf);
        }
    }

    /// Root's buffer is sent to everyone; all ranks return with identical data.
    void broadcast(int root, std::span<cxd> data) {
        if (root < 0 || root >= size()) throw TransportError("broadcast: root out of range");
        if (data.empty()) return;
        if (rank() == root) {
            for (int r = 0; r < size(); ++r)
                if (r != root) send(r, tag::broadcast, data);
        } else {
            recv(root, tag::broadcast, data);
        }
    }

    /// Concatenate equal-length slices at the root in rank order. `full` is
    /// only written at the root and must hold size()*local.size() there.
    void gather(int root, std::span<const cxd> local, std::span<cxd> full) {
        if (root < 0 || root >= size()) throw TransportError("gather: root out of range");
        if (rank() == root) {
            if (full.size() != local.size() * static_cast<std::size_t>(size()))
                throw TransportError("gather: destination length mismatch");
            for (int r = 0; r < size(); ++r) {
                auto dst = full.subspan(static_cast<std::size_t>(r) * local.size(), local.size());
                if (r == root)
                    for (std::size_t i = 0; i < local.size(); ++i) dst[i] = local[i];
                else
                    recv(r, tag::gather, dst);
            }
        } else {
            send(root, tag::gather, local);
        }
    }

    /// Gather + broadcast: every rank ends with the concatenated vector.
    void all_gather(std::span<const cxd> local, std::span<cxd> full) {
        gather(0, local, full);
        broadcast(0, full);
    }

    /// Scalar helpers for control values (probabilities, measured outcomes).
    /// Doubles ride in the real parts of a complex block.
    void broadcast_doubles(int root, std::span<double> values) {
        std::vector<cxd> block(values.size());
        if (rank() == root)
            for (std::size_t i = 0; i < values.size(); ++i) block[i] = cxd(values[i], 0.0);
        broadcast(root, block);
        for (std::size_t i = 0; i < values.size(); ++i) values[i] = block[i].real();
    }

    double broadcast_double(int root, double value) {
        double v[1] = {value};
        broadcast_doubles(root, v);
        return v[0];
    }

    /// Communicator over a contiguous rank block: group g of `ngroups` holds
    /// global ranks [g*gsize, (g+1)*gsize). Membership is pure arithmetic, so
    /// splitting itself sends no messages. The parent must outlive the child.
    std::unique_ptr<Transport> split_contiguous(int ngroups);
};

namespace detail {

/// Rank-renumbering view of a contiguous block of a parent transport.
class BlockTransport final : public Transport {
public:
    BlockTransport(Transport& parent, int first, int count)
        : parent_(parent), first_(first), count_(count) {}

    int rank() const override { return parent_.rank() - first_; }
    int size() const override { return count_; }

    void send(int peer, std::uint32_t tag, std::span<const cxd> data) override {
        check_peer(peer);
        parent_.send(first_ + peer, tag, data);
    }

    void recv(int peer, std::uint32_t tag, std::span<cxd> out) override {
        check_peer(peer);
        parent_.recv(first_ + peer, tag, out);
    }

private:
    void check_peer(int peer) const {
        if (peer < 0 || peer >= count_) throw TransportError("group transport: peer out of range");
    }

    Transport& parent_;
    int first_;
    int count_;
};

} // namespace detail

inline std::unique_ptr<Transport> Transport::split_contiguous(int ngroups) {
    if (ngroups < 1 || size() % ngroups != 0)
        throw ConfigError("split_contiguous: group count must divide rank count");
    const int gsize = size() / ngroups;
    const int first = (rank() / gsize) * gsize;
    return std::make_unique<detail::BlockTransport>(*this, first, gsize);
}

} // namespace qshard
