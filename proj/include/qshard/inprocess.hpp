#pragma once

#include <boost/context/continuation.hpp>

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "qshard/transport.hpp"

namespace qshard {

/// How logical ranks advance in an in-process run. Both modes produce
/// bit-identical results: each rank's computation depends only on its
/// message stream, which is fully determined by the program.
enum class ExecMode {
    SingleThread, // cooperative fibers under a round-robin scheduler
    MultiThread,  // one OS thread per rank, blocking mailboxes
};

/// Shared mailbox state for one in-process run. Owns the per-ordered-pair
/// FIFO queues and the send counters tests use to assert message locality.
class InProcessHub {
public:
    explicit InProcessHub(int nranks) : n_(nranks), queues_(static_cast<std::size_t>(nranks) * nranks), send_counts_(queues_.size(), 0) {
        if (nranks < 1) throw ConfigError("InProcessHub: need at least one rank");
    }

    InProcessHub(const InProcessHub&) = delete;
    InProcessHub& operator=(const InProcessHub&) = delete;

    int nranks() const { return n_; }

    /// Execute `body` once per rank. Rethrows the first rank failure after
    /// all ranks have stopped.
    void run(ExecMode mode, const std::function<void(Transport&)>& body);

    /// Messages sent so far from src to dst (point-to-point; collectives are
    /// built on point-to-point so they are counted automatically).
    std::uint64_t send_count(int src, int dst) const { return send_counts_[index(src, dst)]; }

    std::uint64_t total_messages() const {
        std::uint64_t total = 0;
        for (auto c : send_counts_) total += c;
        return total;
    }

    /// Messages whose endpoints fall in different groups under a contiguous
    /// split into `ngroups` blocks.
    std::uint64_t cross_group_messages(int ngroups) const {
        const int gsize = n_ / ngroups;
        std::uint64_t total = 0;
        for (int s = 0; s < n_; ++s)
            for (int d = 0; d < n_; ++d)
                if (s / gsize != d / gsize) total += send_counts_[index(s, d)];
        return total;
    }

private:
    friend class InProcessTransport;
    friend class FiberScheduler;

    struct Message {
        std::uint32_t tag;
        std::vector<cxd> data;
    };

    std::size_t index(int src, int dst) const { return static_cast<std::size_t>(src) * n_ + dst; }

    void push(int src, int dst, std::uint32_t tag, std::span<const cxd> data) {
        std::lock_guard lock(mu_);
        queues_[index(src, dst)].push_back({tag, std::vector<cxd>(data.begin(), data.end())});
        ++send_counts_[index(src, dst)];
        ++version_;
        cv_.notify_all();
    }

    // Blocks (yields in fiber mode) until a message from src is pending for dst.
    Message pop(int src, int dst);

    void poison(const std::string& why) {
        std::lock_guard lock(mu_);
        if (!poisoned_) {
            poisoned_ = true;
            poison_reason_ = why;
        }
        ++version_;
        cv_.notify_all();
    }

    int n_;
    std::vector<std::deque<Message>> queues_;
    std::vector<std::uint64_t> send_counts_;
    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::uint64_t version_ = 0;
    bool poisoned_ = false;
    std::string poison_reason_;
    class FiberScheduler* scheduler_ = nullptr; // set while running in fiber mode
};

/// Round-robin cooperative scheduler: resumes ranks 0..n-1 cyclically on one
/// OS thread; a rank waiting for a message yields back here. A full cycle
/// with no mailbox activity means every live rank is blocked — deadlock.
class FiberScheduler {
public:
    explicit FiberScheduler(InProcessHub& hub) : hub_(hub) {}

    void run(int n, const std::function<void(int)>& rank_body) {
        fibers_.resize(n);
        sinks_.assign(n, nullptr);
        finished_.assign(n, 0);
        errors_.assign(n, nullptr);

        namespace ctx = boost::context;
        for (int r = 0; r < n; ++r) {
            active_rank_ = r;
            fibers_[r] = ctx::callcc(
                std::allocator_arg, ctx::fixedsize_stack(512 * 1024),
                [this, r, &rank_body](ctx::continuation&& sink) {
                    ctx::continuation main = std::move(sink);
                    sinks_[r] = &main;
                    try {
                        rank_body(r);
                    } catch (...) {
                        errors_[r] = std::current_exception();
                        hub_.poison("rank " + std::to_string(r) + " failed");
                    }
                    finished_[r] = 1;
                    return main;
                });
        }

        while (true) {
            bool all_done = true;
            // Every mailbox push, pop, and poison bumps the hub version, so a
            // full cycle that leaves it unchanged means every live rank
            // yielded without progress.
            const std::uint64_t version_before = hub_.version_;
            for (int r = 0; r < n; ++r) {
                if (finished_[r] || !fibers_[r]) continue;
                all_done = false;
                active_rank_ = r;
                fibers_[r] = fibers_[r].resume();
            }
            if (all_done) break;
            if (hub_.version_ == version_before) {
                hub_.poison("deadlock: every live rank is waiting to receive");
                // One more cycle lets blocked ranks observe the poison and unwind.
                for (int r = 0; r < n; ++r)
                    if (!finished_[r] && fibers_[r]) {
                        active_rank_ = r;
                        fibers_[r] = fibers_[r].resume();
                    }
                break;
            }
        }

        for (int r = 0; r < n; ++r)
            if (errors_[r]) std::rethrow_exception(errors_[r]);
    }

    void yield_current() {
        boost::context::continuation* main = sinks_[active_rank_];
        *main = main->resume();
    }

private:
    InProcessHub& hub_;
    std::vector<boost::context::continuation> fibers_;
    std::vector<boost::context::continuation*> sinks_;
    std::vector<char> finished_;
    std::vector<std::exception_ptr> errors_;
    int active_rank_ = -1;
};

inline InProcessHub::Message InProcessHub::pop(int src, int dst) {
    auto& q = queues_[index(src, dst)];
    if (scheduler_ != nullptr) {
        // Fiber mode: single-threaded, no locking needed; spin-yield until
        // the matching queue is populated.
        while (true) {
            if (poisoned_) throw TransportError("transport aborted: " + poison_reason_);
            if (!q.empty()) break;
            scheduler_->yield_current();
        }
        Message m = std::move(q.front());
        q.pop_front();
        ++version_;
        return m;
    }
    std::unique_lock lock(mu_);
    const bool ok = cv_.wait_for(lock, std::chrono::seconds(60),
                                 [&] { return poisoned_ || !q.empty(); });
    if (!ok) throw TransportError("transport timeout: no message from rank " + std::to_string(src));
    if (poisoned_ && q.empty()) throw TransportError("transport aborted: " + poison_reason_);
    Message m = std::move(q.front());
    q.pop_front();
    ++version_;
    return m;
}

/// Per-rank handle onto an InProcessHub.
class InProcessTransport final : public Transport {
public:
    InProcessTransport(InProcessHub& hub, int rank) : hub_(hub), rank_(rank) {}

    int rank() const override { return rank_; }
    int size() const override { return hub_.nranks(); }

    void send(int peer, std::uint32_t tag, std::span<const cxd> data) override {
        if (peer < 0 || peer >= size()) throw TransportError("send: peer out of range");
        hub_.push(rank_, peer, tag, data);
    }

    void recv(int peer, std::uint32_t tag, std::span<cxd> out) override {
        if (peer < 0 || peer >= size()) throw TransportError("recv: peer out of range");
        InProcessHub::Message m = hub_.pop(peer, rank_);
        if (m.tag != tag)
            throw TransportError("recv: tag mismatch (expected " + std::to_string(tag) + ", got " +
                                 std::to_string(m.tag) + ")");
        if (m.data.size() != out.size())
            throw TransportError("recv: length mismatch (expected " + std::to_string(out.size()) +
                                 ", got " + std::to_string(m.data.size()) + ")");
        std::copy(m.data.begin(), m.data.end(), out.begin());
    }

private:
    InProcessHub& hub_;
    int rank_;
};

inline void InProcessHub::run(ExecMode mode, const std::function<void(Transport&)>& body) {
    std::vector<InProcessTransport> transports;
    transports.reserve(n_);
    for (int r = 0; r < n_; ++r) transports.emplace_back(*this, r);

    if (mode == ExecMode::SingleThread) {
        FiberScheduler scheduler(*this);
        scheduler_ = &scheduler;
        try {
            scheduler.run(n_, [&](int r) { body(transports[r]); });
        } catch (...) {
            scheduler_ = nullptr;
            throw;
        }
        scheduler_ = nullptr;
        return;
    }

    std::vector<std::exception_ptr> errors(n_);
    std::vector<std::thread> threads;
    threads.reserve(n_);
    for (int r = 0; r < n_; ++r) {
        threads.emplace_back([&, r] {
            try {
                body(transports[r]);
            } catch (...) {
                errors[r] = std::current_exception();
                poison("rank " + std::to_string(r) + " failed");
            }
        });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

/// Convenience wrapper for the common case where counters are not inspected.
inline void run_ranks(int nranks, ExecMode mode, const std::function<void(Transport&)>& body) {
    InProcessHub hub(nranks);
    hub.run(mode, body);
}

} // namespace qshard
